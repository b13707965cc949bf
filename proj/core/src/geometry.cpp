#include <wext/geometry.hpp>

#include <algorithm>
#include <vector>

namespace wext {

namespace {

double cross(const Eigen::RowVector2d& o, const Eigen::RowVector2d& a,
             const Eigen::RowVector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace

Matrix convex_hull_2d(const Matrix& pts) {
  if (pts.cols() != 2) throw Error(Errc::dimension_mismatch, "convex_hull_2d expects d=2");
  std::vector<Eigen::RowVector2d> p(pts.rows());
  for (Eigen::Index i = 0; i < pts.rows(); ++i) p[i] = pts.row(i);
  std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  p.erase(std::unique(p.begin(), p.end(),
                      [](const auto& a, const auto& b) { return a == b; }),
          p.end());
  const size_t n = p.size();
  if (n <= 2) {
    Matrix out(n, 2);
    for (size_t i = 0; i < n; ++i) out.row(i) = p[i];
    return out;
  }
  // monotone chain
  std::vector<Eigen::RowVector2d> hull(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  for (size_t i = n - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  Matrix out(k - 1, 2);
  for (size_t i = 0; i + 1 < k; ++i) out.row(i) = hull[i];
  return out;
}

bool in_convex_hull(const Eigen::RowVectorXd& p, const Matrix& pts, double tol) {
  if (p.size() != pts.cols()) throw Error(Errc::dimension_mismatch, "point/hull dims differ");
  if (pts.cols() == 1) {
    const double lo = pts.col(0).minCoeff();
    const double hi = pts.col(0).maxCoeff();
    return p(0) >= lo - tol && p(0) <= hi + tol;
  }
  if (pts.cols() != 2)
    throw Error(Errc::dimension_mismatch, "hull membership implemented for d<=2");

  const Matrix hull = convex_hull_2d(pts);
  const Eigen::Index h = hull.rows();
  if (h == 1) return (p - hull.row(0)).norm() <= tol;
  if (h == 2) {
    // distance to the segment
    const Eigen::RowVector2d a = hull.row(0), b = hull.row(1);
    const Eigen::RowVector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    double s = len2 > 0 ? (p - a).dot(ab) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    return (p - (a + s * ab)).norm() <= tol;
  }
  for (Eigen::Index i = 0; i < h; ++i) {
    const Eigen::RowVector2d a = hull.row(i);
    const Eigen::RowVector2d b = hull.row((i + 1) % h);
    const Eigen::RowVector2d edge = b - a;
    const double c = edge.x() * (p.y() - a.y()) - edge.y() * (p.x() - a.x());
    // CCW hull: inside iff left of (or on) every edge
    if (c < -tol * std::max(1.0, edge.norm())) return false;
  }
  return true;
}

bool in_extrapolation_region(const Eigen::RowVectorXd& z, const Eigen::RowVectorXd& y,
                             const Matrix& x, double t, double tol) {
  const Eigen::RowVectorXd w = (t * y - z) / (t - 1.0);
  return in_convex_hull(w, x, tol);
}

}  // namespace wext
