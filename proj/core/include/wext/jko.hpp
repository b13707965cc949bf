#pragma once

#include <wext/measure.hpp>
#include <wext/sinkhorn.hpp>

#include <vector>

namespace wext {

inline SolverConfig default_flow_inner() {
  SolverConfig cfg;
  cfg.epsilon = 1e-3;
  return cfg;
}

struct FlowConfig {
  double h = 0.1;        // step size, in (0,1)
  double t_final = 4.0;  // > 1
  SolverConfig inner = default_flow_inner();  // template for the per-step solves
  bool use_1d_exact = false;
};

// One implicit step of the gradient flow of -W2^2(nu0, .)/(2t): the proximal
// problem is itself a metric extrapolation from nu0 through nu_curr at the
// reparameterized time s = t_next / (t_next - h).
AtomicMeasure jko_step(const AtomicMeasure& nu_curr, const AtomicMeasure& nu0,
                       double h, double t_next, const SolverConfig& inner,
                       bool use_1d_exact = false);

// Full trajectory on t^n = 1 + n h up to t_final, starting from nu1; the
// returned vector includes the initial measure.
std::vector<AtomicMeasure> run_flow(const AtomicMeasure& nu0, const AtomicMeasure& nu1,
                                    const FlowConfig& config);

}  // namespace wext
