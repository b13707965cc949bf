#pragma once

#include <wext/measure.hpp>
#include <wext/sinkhorn.hpp>

namespace wext {

struct FwReport {
  TransportPlan plan;
  double value = 0.0;  // g(P)
  double gap = 0.0;    // Frank-Wolfe duality gap, g(P) - g* <= gap
  int iterations = 0;
};

struct FwOptions {
  int max_iter = 100000;
  double gap_tol = 1e-9;
  enum class Step {
    polished,  // pairwise FW, exact line search, periodic support polish (default)
    classic,   // gamma_k = 2/(k+2)
  } step = Step::polished;
};

// Ground-truth solver for the discrete barycentric QP via Frank-Wolfe; the
// linear minimization oracle is an exact transport solve. Gradient entries
// are validated against finite differences at startup.
FwReport fw_solve(const AtomicMeasure& nu0, const AtomicMeasure& nu1, double t,
                  const FwOptions& opts = {});

// mu <=_C nu (convex order) iff a martingale coupling exists; decided by
// minimizing the conditional-barycenter deviation over the coupling polytope
// and testing the minimum against tol (absolute, on the squared deviation).
bool check_convex_order(const AtomicMeasure& mu, const AtomicMeasure& nu,
                        double tol = 1e-8);

struct CertifyReport {
  double value_mismatch = 0.0;  // |primal_g - fw value|
  bool convex_order = false;    // bar(nu_0) <=_C nu_0
  double eqbp_residual = 0.0;   // value identity residual at the solution
  double fw_value = 0.0;
  double fw_gap = 0.0;
};

CertifyReport certify_solution(const ExtrapolationResult& result,
                               const AtomicMeasure& nu0, const AtomicMeasure& nu1,
                               double t);

// Conditional barycenters of the plan as a measure: sum_j b_j delta_bary_j.
AtomicMeasure barycenter_measure(const TransportPlan& plan, const AtomicMeasure& nu0);

}  // namespace wext
