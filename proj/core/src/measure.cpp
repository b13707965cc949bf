#include <wext/measure.hpp>

#include <cmath>

namespace wext {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::ok: return "ok";
    case Errc::non_positive_weight: return "NonPositiveWeight";
    case Errc::weight_sum_mismatch: return "WeightSumMismatch";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::non_finite_coordinate: return "NonFiniteCoordinate";
    case Errc::not_one_dimensional: return "NotOneDimensional";
    case Errc::instance_too_large: return "InstanceTooLarge";
    case Errc::non_finite_intermediate: return "NonFiniteIntermediate";
    case Errc::step_too_large: return "StepTooLarge";
    case Errc::no_convergence: return "NoConvergence";
    case Errc::empty_input: return "EmptyInput";
    case Errc::invalid_plan: return "InvalidPlan";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::bad_input: return "BadInput";
  }
  return "unknown";
}

Errc validate(const AtomicMeasure& m) {
  if (m.points.rows() == 0 || m.points.cols() == 0) return Errc::empty_input;
  if (m.weights.size() != m.points.rows()) return Errc::dimension_mismatch;
  if (!m.points.allFinite()) return Errc::non_finite_coordinate;
  if (!m.weights.allFinite()) return Errc::non_finite_coordinate;
  if ((m.weights.array() <= 0.0).any()) return Errc::non_positive_weight;
  if (std::abs(m.weights.sum() - 1.0) > kWeightSumTol) return Errc::weight_sum_mismatch;
  return Errc::ok;
}

AtomicMeasure make_measure(Matrix points, Vector weights) {
  AtomicMeasure m{std::move(points), std::move(weights)};
  if (Errc c = validate(m); c != Errc::ok) {
    throw Error(c, "invalid atomic measure");
  }
  return m;
}

AtomicMeasure make_uniform(Matrix points) {
  const Eigen::Index n = points.rows();
  return make_measure(std::move(points), Vector::Constant(n, 1.0 / double(n)));
}

Vector barycenter(const AtomicMeasure& m) {
  return m.points.transpose() * m.weights;
}

double second_moment(const AtomicMeasure& m) {
  return (m.points.rowwise().squaredNorm().array() * m.weights.array()).sum();
}

Errc validate(const TransportPlan& plan, double marginal_tol) {
  const auto& P = plan.entries;
  if (P.rows() != plan.row_marginal.size() || P.cols() != plan.col_marginal.size())
    return Errc::dimension_mismatch;
  if (!P.allFinite()) return Errc::non_finite_coordinate;
  if ((P.array() < 0.0).any()) return Errc::invalid_plan;
  const double row_res = (P.rowwise().sum() - plan.row_marginal).cwiseAbs().maxCoeff();
  const double col_res = (P.colwise().sum().transpose() - plan.col_marginal).cwiseAbs().maxCoeff();
  if (row_res > marginal_tol || col_res > marginal_tol) return Errc::invalid_plan;
  return Errc::ok;
}

TransportPlan product_plan(const AtomicMeasure& a_meas, const AtomicMeasure& b_meas) {
  if (Errc c = validate(a_meas); c != Errc::ok)
    throw Error(c, "product_plan: first measure invalid");
  if (Errc c = validate(b_meas); c != Errc::ok)
    throw Error(c, "product_plan: second measure invalid");
  TransportPlan plan;
  plan.entries = a_meas.weights * b_meas.weights.transpose();
  plan.row_marginal = a_meas.weights;
  plan.col_marginal = b_meas.weights;
  return plan;
}

Matrix column_barycenters(const Matrix& plan, const Matrix& x, const Vector& b) {
  // (N x d): row j is sum_i x_i P_ij / b_j
  Matrix bary = plan.transpose() * x;
  bary.array().colwise() /= b.array();
  return bary;
}

AtomicMeasure translate(const AtomicMeasure& m, const Vector& shift) {
  AtomicMeasure out = m;
  out.points.rowwise() += shift.transpose();
  return out;
}

}  // namespace wext
