#include <wext/sinkhorn.hpp>

#include <wext/exact_ot.hpp>
#include <wext/parallel.hpp>

#include <cmath>
#include <iostream>
#include <limits>

namespace wext {

namespace {

void check_finite(const Vector& v, const char* who) {
  if (!v.allFinite()) throw Error(Errc::non_finite_intermediate, who);
}

double max_pairwise_distance(const Matrix& x, const Matrix& y) {
  double d2 = 0.0;
  for (Eigen::Index j = 0; j < y.rows(); ++j)
    d2 = std::max(d2, (x.rowwise() - y.row(j)).rowwise().squaredNorm().maxCoeff());
  return std::sqrt(d2);
}

double logsumexp(const Eigen::ArrayXd& terms) {
  const double m = terms.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((terms - m).exp().sum());
}

}  // namespace

Matrix cost_matrix(const Matrix& z, const Matrix& x, double t) {
  if (z.cols() != x.cols()) throw Error(Errc::dimension_mismatch, "cost_matrix dims differ");
  const Eigen::Index n = z.rows();
  Matrix c(x.rows(), n);
  const double inv = 1.0 / (2.0 * t);
  parallel_chunks(n, [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
    for (std::ptrdiff_t j = begin; j < end; ++j)
      c.col(j) = (x.rowwise() - z.row(j)).rowwise().squaredNorm() * inv;
  });
  return c;
}

Vector phi_update(const DualState& state, const Matrix& c, const Vector& b,
                  double epsilon, bool log_domain) {
  const Eigen::Index m = c.rows();
  Vector phi = Vector::Zero(m);
  if (log_domain) {
    const Eigen::ArrayXd log_b = b.array().log();
    parallel_chunks(m - 1, [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
      for (std::ptrdiff_t i = begin; i < end; ++i) {
        const Eigen::ArrayXd terms =
            log_b + (state.psi.array() - c.row(i).transpose().array()) / epsilon;
        phi(i) = -epsilon * logsumexp(terms);
      }
    });
  } else {
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
      const double s =
          (b.array() * ((state.psi.array() - c.row(i).transpose().array()) / epsilon).exp())
              .sum();
      phi(i) = -epsilon * std::log(s);
    }
    check_finite(phi, "phi_update overflowed, use log_domain");
  }
  phi(m - 1) = 0.0;  // gauge
  return phi;
}

Vector psi_update(const DualState& state, const Matrix& c, const Vector& a,
                  double epsilon, bool log_domain) {
  const Eigen::Index n = c.cols();
  Vector psi(n);
  if (log_domain) {
    const Eigen::ArrayXd log_a = a.array().log();
    parallel_chunks(n, [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
      for (std::ptrdiff_t j = begin; j < end; ++j) {
        const Eigen::ArrayXd terms = log_a + (state.phi.array() - c.col(j).array()) / epsilon;
        psi(j) = -epsilon * logsumexp(terms);
      }
    });
  } else {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double s =
          (a.array() * ((state.phi.array() - c.col(j).array()) / epsilon).exp()).sum();
      psi(j) = -epsilon * std::log(s);
    }
    check_finite(psi, "psi_update overflowed, use log_domain");
  }
  return psi;
}

Matrix plan_from_duals(const DualState& state, const Matrix& c, const Vector& a,
                       const Vector& b, double epsilon) {
  const Eigen::Index n = c.cols();
  Matrix p(c.rows(), n);
  const Eigen::ArrayXd la = a.array().log();
  const Eigen::ArrayXd lb = b.array().log();
  parallel_chunks(n, [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
    for (std::ptrdiff_t j = begin; j < end; ++j) {
      p.col(j) =
          (la + lb(j) + (state.phi.array() + state.psi(j) - c.col(j).array()) / epsilon)
              .exp();
    }
  });
  return p;
}

Matrix z_gradient(const DualState& state, const Matrix& plan, const Matrix& x,
                  const Matrix& y, const Vector& b, double t) {
  const Vector col_mass = plan.colwise().sum();
  const Matrix first_moment = plan.transpose() * x;  // N x d, sum_i x_i P_ij
  Matrix g = state.z - y;
  g.array().colwise() *= b.array() / (t - 1.0);
  Matrix pulled = state.z;
  pulled.array().colwise() *= col_mass.array();
  g -= (pulled - first_moment) / t;
  return g;
}

Matrix z_step(const Matrix& z, const Matrix& gradient, double tau, double t,
              double b_max) {
  if (tau > t * (t - 1.0) / b_max * (1.0 + 1e-12))
    throw Error(Errc::step_too_large, "tau exceeds t(t-1)/|b|_inf");
  return z - tau * gradient;
}

double step_size_K(double t, double b_max, double d_max) {
  const double e = std::exp(2.0 * d_max * d_max * b_max);
  const double a = e / t;
  const double b = e * d_max * d_max;
  const double rhs = 1.0 / ((a + b) * b_max);
  double lo = 0.0, hi = rhs;
  const auto f = [&](double k) { return k * std::exp(k) + k / (t - 1.0) - rhs; };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? hi : lo) = mid;
  }
  const double kbar = 0.5 * (lo + hi);
  return std::min(t * (t - 1.0) / b_max, kbar);
}

double dual_objective_given_cost(const DualState& state, const Vector& a,
                                 const Vector& b, const Matrix& y, const Matrix& c,
                                 double epsilon, double t) {
  const Matrix p = plan_from_duals(state, c, a, b, epsilon);
  const double quad =
      ((state.z - y).rowwise().squaredNorm().array() * b.array()).sum() / (2.0 * (t - 1.0));
  return epsilon * p.sum() - a.dot(state.phi) - b.dot(state.psi) + quad;
}

double dual_objective(const DualState& state, const Vector& a, const Vector& b,
                      const Matrix& x, const Matrix& y, double epsilon, double t) {
  return dual_objective_given_cost(state, a, b, y, cost_matrix(state.z, x, t), epsilon, t);
}

double primal_g(const Matrix& plan, const Matrix& x, const Matrix& y,
                const Vector& b, double t) {
  const Matrix bary = column_barycenters(plan, x, b);
  const Matrix target = t * y - (t - 1.0) * bary;
  return (target.rowwise().squaredNorm().array() * b.array()).sum() /
         (2.0 * t * (t - 1.0));
}

ExtrapolationResult solve(const AtomicMeasure& nu0, const AtomicMeasure& nu1,
                          const SolverConfig& config, const IterationObserver& observer) {
  if (Errc c = validate(nu0); c != Errc::ok) throw Error(c, "solve: nu0 invalid");
  if (Errc c = validate(nu1); c != Errc::ok) throw Error(c, "solve: nu1 invalid");
  if (nu0.dim() != nu1.dim())
    throw Error(Errc::dimension_mismatch, "solve: measures have different dimensions");
  if (!(config.t > 1.0)) throw Error(Errc::invalid_config, "solve requires t > 1");
  if (!(config.epsilon > 0.0)) throw Error(Errc::invalid_config, "epsilon must be positive");
  if (config.max_iter <= 0) throw Error(Errc::invalid_config, "max_iter must be positive");
  if (!(config.tol > 0.0)) throw Error(Errc::invalid_config, "tol must be positive");
  if (config.anneal &&
      !(config.anneal->factor > 0.0 && config.anneal->factor < 1.0 && config.anneal->floor > 0.0))
    throw Error(Errc::invalid_config, "anneal factor must lie in (0,1) with positive floor");

  const Matrix& x = nu0.points;
  const Matrix& y = nu1.points;
  const Vector& a = nu0.weights;
  const Vector& b = nu1.weights;
  const double t = config.t;
  const Eigen::Index m = nu0.size(), n = nu1.size();

  const double d_max = max_pairwise_distance(x, y);
  const double b_max = b.maxCoeff();
  const double tau_cap = t * (t - 1.0) / b_max;

  // epsilon ladder (single phase unless annealing)
  std::vector<double> ladder;
  if (!config.anneal || config.epsilon <= config.anneal->floor) {
    ladder.push_back(config.epsilon);
  } else {
    double e = config.epsilon;
    while (e > config.anneal->floor * (1.0 + 1e-12)) {
      ladder.push_back(e);
      e *= config.anneal->factor;
    }
    ladder.push_back(config.anneal->floor);
  }

  TauPolicy policy = config.tau ? TauPolicy::fixed : config.tau_policy;
  double tau_fixed = 0.0;
  if (policy == TauPolicy::fixed) {
    tau_fixed = config.tau ? *config.tau : tau_cap;
    if (tau_fixed > tau_cap) {
      std::cerr << "wext: clamping tau from " << tau_fixed << " to the boundedness cap "
                << tau_cap << "\n";
      tau_fixed = tau_cap;
    }
    if (!(tau_fixed > 0.0)) throw Error(Errc::invalid_config, "tau must be positive");
  }
  const double lemma_k =
      (policy == TauPolicy::lemma) ? step_size_K(t, b_max, d_max) : 0.0;

  // z_j^0 = t y_j - (t-1) bary(nu0), inside the admissible region
  DualState s{Vector::Zero(m), Vector::Zero(n), Matrix(n, x.cols())};
  const Vector bary0 = barycenter(nu0);
  for (Eigen::Index j = 0; j < n; ++j)
    s.z.row(j) = t * y.row(j) - (t - 1.0) * bary0.transpose();

  ExtrapolationResult out;
  out.trace.records.reserve(size_t(std::min(config.max_iter, 1 << 20)));

  int iter = 0;
  bool converged = false;
  double tau = 0.0;
  double epsilon_final = ladder.back();

  for (size_t phase = 0; phase < ladder.size(); ++phase) {
    const double eps = ladder[phase];
    switch (policy) {
      case TauPolicy::adaptive:
        tau = (phase == 0) ? tau_cap
                           : std::min(tau_cap, tau * (eps / ladder[phase - 1]));
        break;
      case TauPolicy::lemma:
        tau = std::min(lemma_k * eps, tau_cap);
        break;
      case TauPolicy::fixed:
        tau = tau_fixed;
        break;
    }

    // intermediate phases only warm-start the next one; running them to the
    // final tolerance wastes the budget
    const bool final_phase = phase + 1 == ladder.size();
    const double phase_tol = final_phase ? config.tol : std::max(config.tol, 1e-2 * eps);

    double tau_hi = tau_cap;  // trust region: largest step worth probing
    bool phase_done = false;
    while (!phase_done && iter < config.max_iter) {
      const Matrix c = cost_matrix(s.z, x, t);
      s.phi = phi_update(s, c, b, eps, config.log_domain);

      double f_after_phi = std::numeric_limits<double>::quiet_NaN();
      if (observer) f_after_phi = dual_objective_given_cost(s, a, b, y, c, eps, t);

      s.psi = psi_update(s, c, a, eps, config.log_domain);
      const Matrix plan = plan_from_duals(s, c, a, b, eps);

      const double quad_n =
          ((s.z - y).rowwise().squaredNorm().array() * b.array()).sum() / (2.0 * (t - 1.0));
      const double f_after_psi =
          eps * plan.sum() - a.dot(s.phi) - b.dot(s.psi) + quad_n;

      const Matrix grad = z_gradient(s, plan, x, y, b, t);
      const double grad_norm = grad.norm();
      const double row_res = (plan.rowwise().sum() - a).cwiseAbs().maxCoeff();
      const double col_res =
          (plan.colwise().sum().transpose() - b).cwiseAbs().maxCoeff();
      const double marginal_res = std::max(row_res, col_res);

      const Matrix z_old = s.z;
      double f_after_z = std::numeric_limits<double>::quiet_NaN();
      if (policy == TauPolicy::adaptive) {
        // Armijo backtracking from the boundedness cap: demand a decrease
        // proportional to tau*|g|^2 so sustained uphill drift cannot hide
        // inside a fixed slack; the noise floor covers f-evaluation error
        const double noise = 1e-15 * (1.0 + std::abs(f_after_psi));
        const double gsq = grad.squaredNorm();
        bool accepted = false;
        bool rejected_once = false;
        for (int trial = 0; trial < 60; ++trial) {
          s.z = z_old - tau * grad;
          f_after_z = dual_objective(s, a, b, x, y, eps, t);
          if (f_after_z <= f_after_psi - 0.1 * tau * gsq + noise) {
            accepted = true;
            break;
          }
          rejected_once = true;
          tau *= 0.5;
        }
        if (!accepted) {  // gradient at the numerical floor, stay put
          s.z = z_old;
          f_after_z = f_after_psi;
        }
        tau_hi = rejected_once ? std::max(tau, 1e-12 * tau_cap)
                               : std::min(tau_hi * 1.02, tau_cap);
      } else {
        s.z = z_old - tau * grad;
        if (observer) f_after_z = dual_objective(s, a, b, x, y, eps, t);
      }

      out.trace.records.push_back({iter, f_after_psi, marginal_res, grad_norm, eps});
      if (observer)
        observer({iter, eps, tau, f_after_phi, f_after_psi, f_after_z, s, marginal_res,
                  grad_norm});
      ++iter;

      phase_done = std::max(row_res, grad_norm * tau) <= phase_tol;
      if (policy == TauPolicy::adaptive) tau = std::min({tau * 1.3, tau_hi, tau_cap});
    }
    converged = phase_done;
    epsilon_final = eps;
    if (!phase_done) break;  // iteration budget exhausted
  }

  // refresh the potentials at the final Z so the reported plan, duals and
  // measure are mutually consistent (column marginals exact)
  const double eps = epsilon_final;
  const Matrix c = cost_matrix(s.z, x, t);
  s.phi = phi_update(s, c, b, eps, config.log_domain);
  s.psi = psi_update(s, c, a, eps, config.log_domain);
  Matrix plan = plan_from_duals(s, c, a, b, eps);

  out.nu_t = AtomicMeasure{s.z, b};
  out.plan = TransportPlan{std::move(plan), a, b};
  out.dual_value = dual_objective_given_cost(s, a, b, y, c, eps, t);
  out.primal_g = primal_g(out.plan.entries, x, y, b, t);
  out.converged = converged;
  out.iterations = iter;
  out.epsilon_final = eps;
  out.tau_final = tau;

  // objective of the extrapolation problem at nu_t via exact distances
  ExactOtOptions ot_opts;
  if (n * std::max(m, n) <= ot_opts.max_entries) {
    const double w1 = w2_sq_exact(out.nu_t, nu1, ot_opts).value;
    const double w0 = w2_sq_exact(out.nu_t, nu0, ot_opts).value;
    out.p_value = w1 / (2.0 * (t - 1.0)) - w0 / (2.0 * t);
  } else {
    out.p_value = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace wext
