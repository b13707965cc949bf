#include <wext/jko.hpp>

#include <wext/isotonic.hpp>

#include <cmath>

namespace wext {

AtomicMeasure jko_step(const AtomicMeasure& nu_curr, const AtomicMeasure& nu0,
                       double h, double t_next, const SolverConfig& inner,
                       bool use_1d_exact) {
  if (!(h > 0.0) || !(t_next > h))
    throw Error(Errc::invalid_config, "jko_step requires t_next > h > 0");
  // min W2^2(nu_curr,.)/(2h) - W2^2(nu0,.)/(2 t_next) rescales to the
  // canonical pair (nu0, nu_curr) at time s: the coefficient ratio
  // (1/(2(s-1))) : (1/(2s)) = s/(s-1) matches (1/(2h)) : (1/(2 t_next))
  // exactly when s = t_next/(t_next - h).
  const double s = t_next / (t_next - h);
  if (use_1d_exact && nu0.dim() == 1) return extrapolate_1d(nu0, nu_curr, s);
  SolverConfig cfg = inner;
  cfg.t = s;
  return solve(nu0, nu_curr, cfg).nu_t;
}

std::vector<AtomicMeasure> run_flow(const AtomicMeasure& nu0, const AtomicMeasure& nu1,
                                    const FlowConfig& config) {
  if (!(config.h > 0.0 && config.h < 1.0))
    throw Error(Errc::invalid_config, "flow step h must lie in (0,1)");
  if (!(config.t_final > 1.0))
    throw Error(Errc::invalid_config, "flow horizon t_final must exceed 1");
  if (Errc c = validate(nu0); c != Errc::ok) throw Error(c, "run_flow: nu0 invalid");
  if (Errc c = validate(nu1); c != Errc::ok) throw Error(c, "run_flow: nu1 invalid");

  const long steps = std::lround((config.t_final - 1.0) / config.h);
  std::vector<AtomicMeasure> trajectory;
  trajectory.reserve(size_t(steps) + 1);
  trajectory.push_back(nu1);
  for (long n = 0; n < steps; ++n) {
    const double t_next = 1.0 + double(n + 1) * config.h;
    trajectory.push_back(jko_step(trajectory.back(), nu0, config.h, t_next,
                                  config.inner, config.use_1d_exact));
  }
  return trajectory;
}

}  // namespace wext
