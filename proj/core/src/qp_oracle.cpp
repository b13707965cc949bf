#include <wext/qp_oracle.hpp>

#include <wext/exact_ot.hpp>

#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <vector>

namespace wext {

namespace {

// Quadratic objective q(P) = sum_j scale_j |target_j - bary_j(P)|^2 over
// G(a,b); both fw_solve and the convex-order check are instances of it.
struct BarycentricQp {
  Matrix source;   // points entering the column barycenters, one per row
  Matrix targets;  // one per column of the plan
  Vector scale;    // positive, one per column
  Vector a, b;

  Matrix residuals(const Matrix& plan) const {
    return targets - column_barycenters(plan, source, b);
  }

  double value(const Matrix& plan) const {
    return (residuals(plan).rowwise().squaredNorm().array() * scale.array()).sum();
  }

  Matrix gradient(const Matrix& plan) const {
    Matrix v = residuals(plan);  // N x d
    v.array().colwise() *= (-2.0 * scale.array() / b.array());
    return source * v.transpose();  // M x N
  }
};

struct QpResult {
  Matrix plan;
  double value = 0.0;
  double gap = 0.0;
  int iterations = 0;
};

void fd_check_gradient(const BarycentricQp& qp, const Matrix& plan) {
  const Matrix grad = qp.gradient(plan);
  const double h = 1e-6;
  const Eigen::Index m = plan.rows(), n = plan.cols();
  const Eigen::Index checks = std::min<Eigen::Index>(m * n, 5);
  for (Eigen::Index k = 0; k < checks; ++k) {
    const Eigen::Index i = (k * 7919) % m;
    const Eigen::Index j = (k * 104729) % n;
    Matrix pp = plan, pm = plan;
    pp(i, j) += h;
    pm(i, j) -= h;
    const double fd = (qp.value(pp) - qp.value(pm)) / (2.0 * h);
    const double ref = std::max({1.0, std::abs(fd), std::abs(grad(i, j))});
    if (std::abs(fd - grad(i, j)) > 1e-6 * ref)
      throw Error(Errc::invalid_config, "barycentric QP gradient failed the fd check");
  }
}

// Equality-constrained least squares restricted to a candidate support:
// minimizes q over plans supported on S with exact marginals, dropping cells
// that come out negative (bound active set). Returns false when the support
// cannot host a feasible stationary point.
bool polish_on_support(const BarycentricQp& qp, Matrix& plan) {
  const Eigen::Index m = plan.rows(), n = plan.cols();
  std::vector<std::pair<Eigen::Index, Eigen::Index>> cells;
  const double keep = 1e-10 * std::max(1.0, plan.maxCoeff());
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i)
      if (plan(i, j) > keep) cells.emplace_back(i, j);

  for (int round = 0; round < 64; ++round) {
    const Eigen::Index k = Eigen::Index(cells.size());
    if (k < m + n - 1) return false;
    const Eigen::Index rows = k + m + n - 1;
    Matrix kkt = Matrix::Zero(rows, rows);
    Vector rhs = Vector::Zero(rows);
    // block-diagonal Hessian per column, linear term from the targets
    for (Eigen::Index p = 0; p < k; ++p) {
      const auto [ip, jp] = cells[size_t(p)];
      rhs(p) = 2.0 * qp.scale(jp) * qp.targets.row(jp).dot(qp.source.row(ip)) / qp.b(jp);
      for (Eigen::Index q = 0; q < k; ++q) {
        const auto [iq, jq] = cells[size_t(q)];
        if (jq != jp) continue;
        kkt(p, q) = 2.0 * qp.scale(jp) * qp.source.row(ip).dot(qp.source.row(iq)) /
                    (qp.b(jp) * qp.b(jp));
      }
    }
    // marginal constraints; the last column sum is redundant and dropped
    for (Eigen::Index p = 0; p < k; ++p) {
      const auto [ip, jp] = cells[size_t(p)];
      kkt(k + ip, p) = 1.0;
      kkt(p, k + ip) = 1.0;
      if (jp + 1 < n) {
        kkt(k + m + jp, p) = 1.0;
        kkt(p, k + m + jp) = 1.0;
      }
    }
    rhs.segment(k, m) = qp.a;
    rhs.segment(k + m, n - 1) = qp.b.head(n - 1);

    const Vector sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    if (!sol.allFinite()) return false;

    bool negative = false;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> kept;
    kept.reserve(cells.size());
    for (Eigen::Index p = 0; p < k; ++p) {
      if (sol(p) < -1e-11) {
        negative = true;
      } else {
        kept.push_back(cells[size_t(p)]);
      }
    }
    if (!negative) {
      Matrix next = Matrix::Zero(m, n);
      for (Eigen::Index p = 0; p < k; ++p)
        next(cells[size_t(p)].first, cells[size_t(p)].second) = std::max(0.0, sol(p));
      const double row_res = (next.rowwise().sum() - qp.a).cwiseAbs().maxCoeff();
      const double col_res =
          (next.colwise().sum().transpose() - qp.b).cwiseAbs().maxCoeff();
      if (row_res > 1e-9 || col_res > 1e-9) return false;
      plan = std::move(next);
      return true;
    }
    if (kept.size() == cells.size()) return false;
    cells = std::move(kept);
  }
  return false;
}

// Frank-Wolfe over G(a,b): pairwise steps with exact line search, plus
// periodic support polishing. The duality gap is always recomputed with a
// fresh linear minimization, so the certificate is valid for the returned
// plan whichever path produced it. The classic 2/(k+2) schedule is kept as
// a reference mode.
QpResult fw_minimize(const BarycentricQp& qp, int max_iter, double gap_tol,
                     FwOptions::Step step) {
  QpResult out;
  Matrix p = min_cost_plan(Matrix::Zero(qp.a.size(), qp.b.size()), qp.a, qp.b).entries;
  fd_check_gradient(qp, p);

  struct ActiveVertex {
    Matrix vertex;
    double weight;
  };
  std::vector<ActiveVertex> active;
  active.push_back({p, 1.0});

  double gap = std::numeric_limits<double>::infinity();
  int it = 0;
  int next_polish = 40;
  for (; it < max_iter; ++it) {
    const Matrix grad = qp.gradient(p);
    const Matrix s = min_cost_plan(grad, qp.a, qp.b).entries;
    gap = (grad.array() * (p - s).array()).sum();
    if (gap <= gap_tol) break;

    if (step == FwOptions::Step::classic) {
      const double gamma = 2.0 / double(it + 2);
      p = (1.0 - gamma) * p + gamma * s;
      continue;
    }

    if (it == next_polish) {
      next_polish += 40;
      Matrix candidate = p;
      if (polish_on_support(qp, candidate) && qp.value(candidate) <= qp.value(p) + 1e-13) {
        const Matrix cgrad = qp.gradient(candidate);
        const Matrix cs = min_cost_plan(cgrad, qp.a, qp.b).entries;
        const double cgap = (cgrad.array() * (candidate - cs).array()).sum();
        if (cgap < gap) {
          p = candidate;
          gap = cgap;
          active.assign(1, {p, 1.0});
          if (gap <= gap_tol) break;
          continue;
        }
      }
    }

    // pairwise step: move weight from the worst active vertex toward s
    size_t away_idx = 0;
    double away_score = -std::numeric_limits<double>::infinity();
    for (size_t v = 0; v < active.size(); ++v) {
      const double sc = (grad.array() * active[v].vertex.array()).sum();
      if (sc > away_score) {
        away_score = sc;
        away_idx = v;
      }
    }
    const Matrix dir = s - active[away_idx].vertex;
    const double gamma_max = active[away_idx].weight;

    const Matrix delta = column_barycenters(dir, qp.source, qp.b);
    const Matrix res = qp.residuals(p);
    const Vector inner = (res.array() * delta.array()).rowwise().sum();
    const double slope = -2.0 * inner.dot(qp.scale);
    const double curv =
        2.0 * (delta.rowwise().squaredNorm().array() * qp.scale.array()).sum();
    double gamma;
    if (curv > 0.0)
      gamma = std::clamp(-slope / curv, 0.0, gamma_max);
    else
      gamma = slope < 0.0 ? gamma_max : 0.0;
    if (gamma <= 0.0) {
      // pairwise direction blocked; plain FW step keeps the descent going
      const Matrix fw_dir = s - p;
      const Matrix fw_delta = column_barycenters(fw_dir, qp.source, qp.b);
      const Vector fw_inner = (res.array() * fw_delta.array()).rowwise().sum();
      const double fw_slope = -2.0 * fw_inner.dot(qp.scale);
      const double fw_curv =
          2.0 * (fw_delta.rowwise().squaredNorm().array() * qp.scale.array()).sum();
      const double g2 = fw_curv > 0.0 ? std::clamp(-fw_slope / fw_curv, 0.0, 1.0)
                                      : (fw_slope < 0.0 ? 1.0 : 0.0);
      if (g2 <= 0.0) break;
      p += g2 * fw_dir;
      for (auto& v : active) v.weight *= (1.0 - g2);
      bool merged = false;
      for (auto& v : active)
        if ((v.vertex - s).cwiseAbs().maxCoeff() <= 1e-12) {
          v.weight += g2;
          merged = true;
          break;
        }
      if (!merged) active.push_back({s, g2});
    } else {
      p += gamma * dir;
      active[away_idx].weight -= gamma;
      bool merged = false;
      for (auto& v : active)
        if ((v.vertex - s).cwiseAbs().maxCoeff() <= 1e-12) {
          v.weight += gamma;
          merged = true;
          break;
        }
      if (!merged) active.push_back({s, gamma});
    }
    std::erase_if(active, [](const ActiveVertex& v) { return v.weight <= 1e-15; });
  }

  out.plan = p.cwiseMax(0.0);
  out.value = qp.value(out.plan);
  out.gap = gap;
  out.iterations = it;
  return out;
}

void require_within_cap(const AtomicMeasure& m0, const AtomicMeasure& m1) {
  if (m0.size() * m1.size() > ExactOtOptions{}.max_entries)
    throw Error(Errc::instance_too_large, "barycentric QP instance exceeds entry cap");
}

}  // namespace

FwReport fw_solve(const AtomicMeasure& nu0, const AtomicMeasure& nu1, double t,
                  const FwOptions& opts) {
  if (Errc c = validate(nu0); c != Errc::ok) throw Error(c, "fw_solve: nu0 invalid");
  if (Errc c = validate(nu1); c != Errc::ok) throw Error(c, "fw_solve: nu1 invalid");
  if (nu0.dim() != nu1.dim()) throw Error(Errc::dimension_mismatch, "fw_solve dims differ");
  if (!(t > 1.0)) throw Error(Errc::invalid_config, "fw_solve requires t > 1");
  require_within_cap(nu0, nu1);

  // g(P) = sum_j b_j |t y_j - (t-1) bary_j|^2 / (2t(t-1))
  //      = sum_j [b_j (t-1)/(2t)] | (t/(t-1)) y_j - bary_j |^2
  BarycentricQp qp{nu0.points, (t / (t - 1.0)) * nu1.points,
                   nu1.weights * ((t - 1.0) / (2.0 * t)), nu0.weights, nu1.weights};
  QpResult r = fw_minimize(qp, opts.max_iter, opts.gap_tol, opts.step);

  FwReport report;
  report.plan = TransportPlan{std::move(r.plan), nu0.weights, nu1.weights};
  report.value = r.value;
  report.gap = r.gap;
  report.iterations = r.iterations;
  return report;
}

bool check_convex_order(const AtomicMeasure& mu, const AtomicMeasure& nu, double tol) {
  if (mu.dim() != nu.dim())
    throw Error(Errc::dimension_mismatch, "check_convex_order dims differ");
  require_within_cap(mu, nu);

  // min over couplings of sum_x mu_x |bary_x - x|^2, posed column-wise on the
  // transposed polytope: rows = nu atoms, columns = mu atoms
  BarycentricQp qp{nu.points, mu.points, mu.weights, nu.weights, mu.weights};
  QpResult r = fw_minimize(qp, 200000, 0.5 * tol, FwOptions{}.step);
  return r.value <= tol;
}

AtomicMeasure barycenter_measure(const TransportPlan& plan, const AtomicMeasure& nu0) {
  Matrix bary = column_barycenters(plan.entries, nu0.points, plan.col_marginal);
  return AtomicMeasure{std::move(bary), plan.col_marginal};
}

CertifyReport certify_solution(const ExtrapolationResult& result,
                               const AtomicMeasure& nu0, const AtomicMeasure& nu1,
                               double t) {
  CertifyReport rep;
  FwOptions opts;
  opts.gap_tol = 1e-9;
  const FwReport fw = fw_solve(nu0, nu1, t, opts);
  rep.fw_value = fw.value;
  rep.fw_gap = fw.gap;
  rep.value_mismatch = std::abs(result.primal_g - fw.value);

  const AtomicMeasure nu0_bar = barycenter_measure(result.plan, nu0);
  rep.convex_order = check_convex_order(nu0_bar, nu0, 1e-8);

  const double w1 = w2_sq_exact(result.nu_t, nu1).value;
  const double w0 = w2_sq_exact(result.nu_t, nu0).value;
  const double p_lhs = w1 / (2.0 * (t - 1.0)) - w0 / (2.0 * t);
  const double p_rhs = -result.primal_g + second_moment(nu1) / (2.0 * (t - 1.0)) -
                       second_moment(nu0) / (2.0 * t);
  rep.eqbp_residual = std::abs(p_lhs - p_rhs);
  return rep;
}

}  // namespace wext
