#pragma once

#include <wext/types.hpp>

namespace wext {

// Weighted point cloud representing a probability measure with finite second
// moment. Rows of `points` are atom locations. Immutable by convention after
// construction; nothing here mutates a measure in place.
struct AtomicMeasure {
  Matrix points;   // M x d
  Vector weights;  // M, strictly positive, sums to one

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
};

// Relative tolerance on |sum(weights) - 1|. Inputs failing it are rejected,
// not renormalized.
inline constexpr double kWeightSumTol = 1e-12;

// Tolerance used when checking plan marginals.
inline constexpr double kPlanMarginalTol = 1e-9;

Errc validate(const AtomicMeasure& m);

// Validating constructor; throws Error on any invariant violation.
AtomicMeasure make_measure(Matrix points, Vector weights);

// Uniform weights 1/M on the given points.
AtomicMeasure make_uniform(Matrix points);

Vector barycenter(const AtomicMeasure& m);
double second_moment(const AtomicMeasure& m);

// Discrete coupling with prescribed marginals.
struct TransportPlan {
  Matrix entries;       // M x N, nonnegative
  Vector row_marginal;  // a
  Vector col_marginal;  // b
};

Errc validate(const TransportPlan& plan, double marginal_tol = kPlanMarginalTol);

TransportPlan product_plan(const AtomicMeasure& a_meas, const AtomicMeasure& b_meas);

// Column barycenters sum_i x_i P_ij / b_j, one row per column of the plan.
Matrix column_barycenters(const Matrix& plan, const Matrix& x, const Vector& b);

AtomicMeasure translate(const AtomicMeasure& m, const Vector& shift);

}  // namespace wext
