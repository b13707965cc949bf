#pragma once

#include <wext/measure.hpp>

namespace wext {

// Right-constant step function on (0,1]: value on (breakpoints[k-1], breakpoints[k]]
// is values[k]. Produced by quantile() with nondecreasing values.
struct QuantileFunction {
  Vector breakpoints;  // strictly increasing, last == 1
  Vector values;
};

Errc validate(const QuantileFunction& q);

// Quantile function (pseudo-inverse of the CDF) of a 1D atomic measure.
// Ties in atom location are broken by original index; atoms are not merged.
QuantileFunction quantile(const AtomicMeasure& mu);

// Squared 2-Wasserstein distance in 1D via the monotone rearrangement:
// integral over (0,1] of the squared quantile difference on the common
// refinement of the two breakpoint grids.
double w2_sq_1d(const AtomicMeasure& mu, const AtomicMeasure& nu);

struct ExactOtResult {
  double value = 0.0;
  TransportPlan plan;
};

struct ExactOtOptions {
  // Maximum number of plan entries M*N accepted by the dense solver.
  Eigen::Index max_entries = 250000;
};

// Exact optimal transport for the quadratic cost. The returned plan is a
// vertex of G(a,b) (at most M+N-1 nonzero entries).
ExactOtResult w2_sq_exact(const AtomicMeasure& mu, const AtomicMeasure& nu,
                          const ExactOtOptions& opts = {});

// Exact min-cost transportation plan for an arbitrary dense cost matrix;
// this is the linear minimization oracle used by the Frank-Wolfe solver.
TransportPlan min_cost_plan(const Matrix& cost, const Vector& a, const Vector& b);

}  // namespace wext
