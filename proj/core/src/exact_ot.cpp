#include <wext/exact_ot.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <vector>

namespace wext {

namespace {

constexpr double kMassEps = 1e-15;  // remaining supply/demand considered exhausted
constexpr double kFlowEps = 1e-14;  // minimum flow usable as a backward arc

void require_valid(const AtomicMeasure& m, const char* who) {
  if (Errc c = validate(m); c != Errc::ok) throw Error(c, who);
}

// Successive shortest augmenting paths with node potentials (Dijkstra over
// reduced costs) on the dense bipartite transportation graph. Maintains dual
// feasibility u_i + v_j <= c_ij and complementary slackness on the support,
// so the final plan is optimal. Each augmentation saturates a source or a
// sink unless limited by a backward arc, so the path count stays near M+N.
struct TransportSsp {
  const Matrix& cost;
  Eigen::Index m, n;
  Vector u, v;  // dual potentials
  Matrix flow;
  Vector rem_a, rem_b;

  TransportSsp(const Matrix& c, const Vector& a, const Vector& b)
      : cost(c), m(c.rows()), n(c.cols()), u(Vector::Zero(m)), v(n),
        flow(Matrix::Zero(m, n)), rem_a(a), rem_b(b) {
    for (Eigen::Index j = 0; j < n; ++j) v(j) = cost.col(j).minCoeff();
  }

  void run() {
    const double inf = std::numeric_limits<double>::infinity();
    const Eigen::Index nodes = m + n;  // rows first, then cols
    std::vector<double> dist(static_cast<size_t>(nodes));
    std::vector<char> done(static_cast<size_t>(nodes));
    std::vector<Eigen::Index> parent(static_cast<size_t>(nodes));
    const long max_augment = 64 * long(nodes) + 64;

    for (long round = 0; round < max_augment; ++round) {
      // input weight sums only match to ~1e-12, so stop once either side
      // is exhausted; the leftover is far below the plan marginal tolerance
      const bool demand_left = (rem_b.array() > kMassEps).any();
      const bool supply_left = (rem_a.array() > kMassEps).any();
      if (!demand_left || !supply_left) return;

      std::fill(dist.begin(), dist.end(), inf);
      std::fill(done.begin(), done.end(), 0);
      std::fill(parent.begin(), parent.end(), Eigen::Index(-1));
      using Item = std::pair<double, Eigen::Index>;
      std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
      for (Eigen::Index i = 0; i < m; ++i) {
        if (rem_a(i) > kMassEps) {
          dist[size_t(i)] = 0.0;
          pq.emplace(0.0, i);
        }
      }

      Eigen::Index sink = -1;
      double delta_dist = 0.0;
      while (!pq.empty()) {
        const auto [d0, node] = pq.top();
        pq.pop();
        if (done[size_t(node)] || d0 > dist[size_t(node)]) continue;
        done[size_t(node)] = 1;
        if (node >= m) {
          const Eigen::Index j = node - m;
          if (rem_b(j) > kMassEps) {
            sink = j;
            delta_dist = d0;
            break;
          }
          // backward arcs j -> i have zero reduced cost on the support
          for (Eigen::Index i = 0; i < m; ++i) {
            if (flow(i, j) > kFlowEps && !done[size_t(i)] && d0 < dist[size_t(i)]) {
              dist[size_t(i)] = d0;
              parent[size_t(i)] = j;
              pq.emplace(d0, i);
            }
          }
        } else {
          const Eigen::Index i = node;
          for (Eigen::Index j = 0; j < n; ++j) {
            if (done[size_t(m + j)]) continue;
            const double nd = d0 + (cost(i, j) - u(i) - v(j));
            if (nd < dist[size_t(m + j)]) {
              dist[size_t(m + j)] = nd;
              parent[size_t(m + j)] = i;
              pq.emplace(nd, m + j);
            }
          }
        }
      }
      if (sink < 0)
        throw Error(Errc::invalid_plan, "transportation instance infeasible");

      for (Eigen::Index i = 0; i < m; ++i)
        u(i) += std::max(0.0, delta_dist - dist[size_t(i)]);
      for (Eigen::Index j = 0; j < n; ++j)
        v(j) -= std::max(0.0, delta_dist - dist[size_t(m + j)]);

      // bottleneck along the augmenting path
      double push = rem_b(sink);
      for (Eigen::Index j = sink;;) {
        const Eigen::Index i = parent[size_t(m + j)];
        const Eigen::Index jprev = parent[size_t(i)];
        if (jprev < 0) {
          push = std::min(push, rem_a(i));
          break;
        }
        push = std::min(push, flow(i, jprev));
        j = jprev;
      }
      for (Eigen::Index j = sink;;) {
        const Eigen::Index i = parent[size_t(m + j)];
        flow(i, j) += push;
        const Eigen::Index jprev = parent[size_t(i)];
        if (jprev < 0) {
          rem_a(i) -= push;
          break;
        }
        flow(i, jprev) -= push;
        j = jprev;
      }
      rem_b(sink) -= push;
    }
    throw Error(Errc::no_convergence, "exact OT exceeded augmentation budget");
  }
};

// Recovers the support cycle closed by the non-tree edge (a, b) from DFS
// parent pointers: both tree paths up to the lowest common ancestor.
std::vector<std::pair<Eigen::Index, Eigen::Index>> cycle_from_edge(
    Eigen::Index a, Eigen::Index b, const std::vector<Eigen::Index>& parent,
    Eigen::Index m) {
  std::vector<Eigen::Index> anc_a, anc_b;
  for (Eigen::Index x = a; x >= 0; x = parent[size_t(x)]) anc_a.push_back(x);
  for (Eigen::Index x = b; x >= 0; x = parent[size_t(x)]) anc_b.push_back(x);
  std::reverse(anc_a.begin(), anc_a.end());
  std::reverse(anc_b.begin(), anc_b.end());
  size_t k = 0;
  while (k + 1 < anc_a.size() && k + 1 < anc_b.size() && anc_a[k + 1] == anc_b[k + 1]) ++k;
  std::vector<Eigen::Index> seq(anc_a.begin() + long(k), anc_a.end());
  for (size_t idx = anc_b.size(); idx-- > k + 1;) seq.push_back(anc_b[idx]);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> arcs;
  arcs.reserve(seq.size());
  for (size_t idx = 0; idx < seq.size(); ++idx) {
    Eigen::Index p = seq[idx], q = seq[(idx + 1) % seq.size()];
    if (p > q) std::swap(p, q);
    arcs.emplace_back(p, q - m);
  }
  return arcs;
}

// Cancels cycles in the support graph until the support is a forest, i.e.
// the plan is a vertex of the polytope (<= M+N-1 nonzero entries). All
// support arcs are tight for the final potentials, so pushing around a cycle
// leaves cost and marginals unchanged; the bottleneck arc zeroes exactly.
void purge_cycles(Matrix& flow) {
  const Eigen::Index m = flow.rows(), n = flow.cols();
  const Eigen::Index nodes = m + n;
  while (true) {
    std::vector<Eigen::Index> parent(static_cast<size_t>(nodes), -2);  // -2 = unvisited
    std::vector<std::pair<Eigen::Index, Eigen::Index>> cycle;
    std::vector<Eigen::Index> stack;

    for (Eigen::Index root = 0; root < nodes && cycle.empty(); ++root) {
      if (parent[size_t(root)] != -2) continue;
      parent[size_t(root)] = -1;
      stack.assign(1, root);
      while (!stack.empty() && cycle.empty()) {
        const Eigen::Index node = stack.back();
        stack.pop_back();
        const bool is_row = node < m;
        const Eigen::Index count = is_row ? n : m;
        for (Eigen::Index k = 0; k < count; ++k) {
          const double f = is_row ? flow(node, k) : flow(k, node - m);
          if (f <= 0.0) continue;
          const Eigen::Index other = is_row ? m + k : k;
          if (other == parent[size_t(node)]) continue;
          if (parent[size_t(other)] == -2) {
            parent[size_t(other)] = node;
            stack.push_back(other);
          } else {
            cycle = cycle_from_edge(node, other, parent, m);
            break;
          }
        }
      }
    }
    if (cycle.empty()) return;

    // alternate +/- around the (even) cycle; pick the class whose bottleneck
    // is the global minimum so that arc is removed
    double min_even = std::numeric_limits<double>::infinity();
    double min_odd = std::numeric_limits<double>::infinity();
    for (size_t idx = 0; idx < cycle.size(); ++idx) {
      const double f = flow(cycle[idx].first, cycle[idx].second);
      (idx % 2 == 0 ? min_even : min_odd) = std::min(idx % 2 == 0 ? min_even : min_odd, f);
    }
    const bool drop_even = min_even <= min_odd;
    const double delta = drop_even ? min_even : min_odd;
    for (size_t idx = 0; idx < cycle.size(); ++idx) {
      double& f = flow(cycle[idx].first, cycle[idx].second);
      if ((idx % 2 == 0) == drop_even)
        f = std::max(0.0, f - delta);  // bottleneck hits exactly zero
      else
        f += delta;
    }
  }
}

}  // namespace

Errc validate(const QuantileFunction& q) {
  if (q.breakpoints.size() != q.values.size() || q.breakpoints.size() == 0)
    return Errc::dimension_mismatch;
  for (Eigen::Index k = 1; k < q.breakpoints.size(); ++k) {
    if (!(q.breakpoints(k) > q.breakpoints(k - 1))) return Errc::invalid_plan;
    if (q.values(k) < q.values(k - 1)) return Errc::invalid_plan;
  }
  if (std::abs(q.breakpoints(q.breakpoints.size() - 1) - 1.0) > 1e-12)
    return Errc::invalid_plan;
  return Errc::ok;
}

QuantileFunction quantile(const AtomicMeasure& mu) {
  require_valid(mu, "quantile");
  if (mu.dim() != 1) throw Error(Errc::not_one_dimensional, "quantile requires d=1");
  const Eigen::Index n = mu.size();
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return mu.points(a, 0) < mu.points(b, 0);
  });
  QuantileFunction q;
  q.breakpoints.resize(n);
  q.values.resize(n);
  double cum = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cum += mu.weights(order[size_t(k)]);
    q.breakpoints(k) = cum;
    q.values(k) = mu.points(order[size_t(k)], 0);
  }
  q.breakpoints(n - 1) = 1.0;
  return q;
}

double w2_sq_1d(const AtomicMeasure& mu, const AtomicMeasure& nu) {
  const QuantileFunction qa = quantile(mu);
  const QuantileFunction qb = quantile(nu);
  double acc = 0.0;
  double prev = 0.0;
  Eigen::Index ka = 0, kb = 0;
  while (ka < qa.breakpoints.size() && kb < qb.breakpoints.size()) {
    const double next = std::min(qa.breakpoints(ka), qb.breakpoints(kb));
    const double diff = qa.values(ka) - qb.values(kb);
    acc += (next - prev) * diff * diff;
    if (qa.breakpoints(ka) <= next) ++ka;
    if (kb < qb.breakpoints.size() && qb.breakpoints(kb) <= next) ++kb;
    prev = next;
  }
  return acc;
}

TransportPlan min_cost_plan(const Matrix& cost, const Vector& a, const Vector& b) {
  if (cost.rows() != a.size() || cost.cols() != b.size())
    throw Error(Errc::dimension_mismatch, "cost/marginal shapes differ");
  if (!cost.allFinite())
    throw Error(Errc::non_finite_coordinate, "cost matrix has non-finite entries");
  TransportSsp ssp(cost, a, b);
  ssp.run();
  purge_cycles(ssp.flow);
  return TransportPlan{std::move(ssp.flow), a, b};
}

ExactOtResult w2_sq_exact(const AtomicMeasure& mu, const AtomicMeasure& nu,
                          const ExactOtOptions& opts) {
  require_valid(mu, "w2_sq_exact");
  require_valid(nu, "w2_sq_exact");
  if (mu.dim() != nu.dim()) throw Error(Errc::dimension_mismatch, "w2_sq_exact dims differ");
  if (mu.size() * nu.size() > opts.max_entries)
    throw Error(Errc::instance_too_large, "w2_sq_exact instance exceeds entry cap");

  Matrix cost(mu.size(), nu.size());
  for (Eigen::Index j = 0; j < nu.size(); ++j)
    cost.col(j) = (mu.points.rowwise() - nu.points.row(j)).rowwise().squaredNorm();

  ExactOtResult out;
  out.plan = min_cost_plan(cost, mu.weights, nu.weights);
  out.value = (cost.array() * out.plan.entries.array()).sum();
  return out;
}

}  // namespace wext
