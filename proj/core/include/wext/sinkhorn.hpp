#pragma once

#include <wext/measure.hpp>

#include <functional>
#include <optional>
#include <vector>

namespace wext {

// Dual triple for the entropic barycentric problem: potentials (phi, psi)
// and the N candidate support points Z of the extrapolated measure.
struct DualState {
  Vector phi;  // M, gauge phi[M-1] == 0
  Vector psi;  // N
  Matrix z;    // N x d
};

enum class TauPolicy {
  adaptive,  // backtracking from the boundedness cap t(t-1)/|b|_inf (default)
  lemma,     // tau = K * epsilon with K from step_size_K
  fixed,     // user-provided tau, clamped to the cap with a warning
};

struct AnnealSchedule {
  double factor = 0.5;  // in (0,1)
  double floor = 1e-3;  // terminal epsilon
};

struct SolverConfig {
  double t = 2.0;          // extrapolation time, > 1
  double epsilon = 1e-2;   // regularization (starting value when annealing)
  std::optional<double> tau;  // explicit step size; implies TauPolicy::fixed
  TauPolicy tau_policy = TauPolicy::adaptive;
  int max_iter = 50000;    // global budget across anneal phases
  double tol = 1e-7;       // stop: max(row residual, tau*|grad_Z f|) <= tol
  std::optional<AnnealSchedule> anneal;
  bool log_domain = true;  // naive exponentials kept for comparison only
};

struct TraceRecord {
  int iter;
  double f;                  // dual value after the psi update
  double marginal_residual;  // max |plan marginal - prescribed|
  double z_grad_norm;
  double epsilon;
};

struct ConvergenceTrace {
  std::vector<TraceRecord> records;
};

struct ExtrapolationResult {
  AtomicMeasure nu_t;   // points Z*, weights b
  TransportPlan plan;
  double dual_value = 0.0;  // f at the returned state
  double primal_g = 0.0;    // barycentric objective of the returned plan
  double p_value = 0.0;     // objective of the extrapolation problem at nu_t,
                            // evaluated with exact transport distances
  ConvergenceTrace trace;
  bool converged = false;
  int iterations = 0;
  double epsilon_final = 0.0;
  double tau_final = 0.0;
};

// Test hook, fired once per iteration after the z-step. The three dual
// values correspond to the states after each sub-step of the iteration.
struct IterationEvent {
  int iter;
  double epsilon;
  double tau;
  double f_after_phi;
  double f_after_psi;
  double f_after_z;
  const DualState& state;  // state after the z-step
  double marginal_residual;
  double z_grad_norm;
};
using IterationObserver = std::function<void(const IterationEvent&)>;

// C_ij = |z_j - x_i|^2 / (2t)
Matrix cost_matrix(const Matrix& z, const Matrix& x, double t);

// Exact minimization over phi given (psi, Z); gauge entry forced to zero.
Vector phi_update(const DualState& state, const Matrix& c, const Vector& b,
                  double epsilon, bool log_domain = true);

// Exact minimization over psi given (phi, Z); afterwards the plan's column
// sums equal b up to roundoff.
Vector psi_update(const DualState& state, const Matrix& c, const Vector& a,
                  double epsilon, bool log_domain = true);

// P_ij = a_i b_j exp((-C_ij + phi_i + psi_j)/epsilon)
Matrix plan_from_duals(const DualState& state, const Matrix& c, const Vector& a,
                       const Vector& b, double epsilon);

// grad_Z f: row j is b_j (z_j - y_j)/(t-1) - sum_i P_ij (z_j - x_i)/t
Matrix z_gradient(const DualState& state, const Matrix& plan, const Matrix& x,
                  const Matrix& y, const Vector& b, double t);

// z <- z - tau * gradient; requires tau <= t(t-1)/b_max (StepTooLarge otherwise)
Matrix z_step(const Matrix& z, const Matrix& gradient, double tau, double t,
              double b_max);

// Step-size constant K(t, |b|_inf, D): min of the boundedness cap and the
// root of Kbar*exp(Kbar) + Kbar/(t-1) = 1/((A+B)|b|_inf) with
// A = exp(2 D^2 |b|_inf)/t and B = exp(2 D^2 |b|_inf) D^2.
double step_size_K(double t, double b_max, double d_max);

// Dual objective f(phi, psi, Z); recomputes the cost matrix from (x, Z, t).
double dual_objective(const DualState& state, const Vector& a, const Vector& b,
                      const Matrix& x, const Matrix& y, double epsilon, double t);

// Same value with the cost matrix at Z already available.
double dual_objective_given_cost(const DualState& state, const Vector& a,
                                 const Vector& b, const Matrix& y, const Matrix& c,
                                 double epsilon, double t);

// Barycentric objective g(P) = sum_j b_j |t y_j - (t-1) bary_j(P)|^2 / (2t(t-1))
double primal_g(const Matrix& plan, const Matrix& x, const Matrix& y,
                const Vector& b, double t);

ExtrapolationResult solve(const AtomicMeasure& nu0, const AtomicMeasure& nu1,
                          const SolverConfig& config,
                          const IterationObserver& observer = {});

}  // namespace wext
