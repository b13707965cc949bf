#pragma once

#include <wext/types.hpp>

#include <vector>

namespace wext {

// Convex hull of 2D points (rows of `pts`), counter-clockwise, collinear
// points dropped. Degenerate inputs (all collinear) return the two extreme
// points, or a single point.
Matrix convex_hull_2d(const Matrix& pts);

// Membership test against conv(pts) with absolute slack `tol` on the signed
// distance. Handles d=1 (interval) and d=2 (polygon half-planes).
bool in_convex_hull(const Eigen::RowVectorXd& p, const Matrix& pts, double tol = 1e-9);

// Checks z in t*y - (t-1)*conv(X) by mapping back w = (t*y - z)/(t-1).
bool in_extrapolation_region(const Eigen::RowVectorXd& z, const Eigen::RowVectorXd& y,
                             const Matrix& x, double t, double tol = 1e-9);

}  // namespace wext
