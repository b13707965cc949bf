#pragma once

#include <wext/exact_ot.hpp>
#include <wext/measure.hpp>
#include <wext/sinkhorn.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

// Shared helpers and independent oracles for the test suites. Everything
// here is deliberately implemented without reusing the solver paths it is
// meant to check.
namespace support {

using wext::AtomicMeasure;
using wext::Matrix;
using wext::Vector;

inline std::mt19937_64 rng(uint64_t seed) { return std::mt19937_64(seed); }

inline AtomicMeasure random_measure(std::mt19937_64& g, int n, int d,
                                    double scale = 1.0, bool uniform = false) {
  std::uniform_real_distribution<double> coord(-scale, scale);
  Matrix pts(n, d);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) pts(i, k) = coord(g);
  Vector w(n);
  if (uniform) {
    w.setConstant(1.0 / n);
  } else {
    std::uniform_real_distribution<double> mass(0.5, 1.5);
    for (int i = 0; i < n; ++i) w(i) = mass(g);
    w /= w.sum();
  }
  return wext::make_measure(std::move(pts), std::move(w));
}

inline double w2(const AtomicMeasure& a, const AtomicMeasure& b) {
  return std::sqrt(std::max(0.0, wext::w2_sq_exact(a, b).value));
}

// Exhaustive transportation optimum over all basic solutions (spanning-tree
// supports solved by leaf elimination). Exponential; tiny instances only.
inline double brute_force_ot(const Matrix& cost, const Vector& a, const Vector& b) {
  const int m = int(cost.rows()), n = int(cost.cols());
  const int cells = m * n, basis = m + n - 1;
  double best = std::numeric_limits<double>::infinity();

  std::vector<int> comb(basis);
  for (int i = 0; i < basis; ++i) comb[i] = i;
  while (true) {
    // solve the tree system by repeatedly eliminating degree-one nodes
    std::vector<double> rem_a(a.data(), a.data() + m), rem_b(b.data(), b.data() + n);
    std::vector<int> deg_row(m, 0), deg_col(n, 0);
    std::vector<bool> used(comb.size(), false);
    for (int c : comb) {
      ++deg_row[c / n];
      ++deg_col[c % n];
    }
    double total = 0.0;
    bool feasible = true;
    for (size_t solved = 0; solved < comb.size();) {
      bool progressed = false;
      for (size_t e = 0; e < comb.size(); ++e) {
        if (used[e]) continue;
        const int i = comb[e] / n, j = comb[e] % n;
        double flow;
        if (deg_row[i] == 1) flow = rem_a[size_t(i)];
        else if (deg_col[j] == 1) flow = rem_b[size_t(j)];
        else continue;
        if (flow < -1e-12) {
          feasible = false;
          break;
        }
        total += flow * cost(i, j);
        rem_a[size_t(i)] -= flow;
        rem_b[size_t(j)] -= flow;
        --deg_row[i];
        --deg_col[j];
        used[e] = true;
        ++solved;
        progressed = true;
      }
      if (!feasible) break;
      if (!progressed) {  // leftover edges form a cycle, not a basis
        feasible = false;
        break;
      }
    }
    if (feasible) {
      bool balanced = true;
      for (double r : rem_a) balanced &= std::abs(r) < 1e-9;
      for (double r : rem_b) balanced &= std::abs(r) < 1e-9;
      if (balanced) best = std::min(best, total);
    }
    // next combination
    int pos = basis - 1;
    while (pos >= 0 && comb[size_t(pos)] == cells - basis + pos) --pos;
    if (pos < 0) break;
    ++comb[size_t(pos)];
    for (int q = pos + 1; q < basis; ++q) comb[size_t(q)] = comb[size_t(q - 1)] + 1;
  }
  return best;
}

// Isotonic projection by exhaustive search over consecutive block partitions.
inline std::vector<double> brute_force_isotonic(const std::vector<double>& values,
                                                const std::vector<double>& weights) {
  const size_t n = values.size();
  const size_t masks = size_t(1) << (n - 1);  // bit k set = cut between k and k+1
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_fit(n);
  for (size_t mask = 0; mask < masks; ++mask) {
    std::vector<double> fit(n);
    double err = 0.0;
    bool monotone = true;
    double prev_mean = -std::numeric_limits<double>::infinity();
    size_t start = 0;
    for (size_t k = 0; k < n; ++k) {
      const bool cut = k + 1 == n || (mask >> k) & 1;
      if (!cut) continue;
      double sw = 0.0, swv = 0.0;
      for (size_t q = start; q <= k; ++q) {
        sw += weights[q];
        swv += weights[q] * values[q];
      }
      const double mean = swv / sw;
      if (mean < prev_mean) {
        monotone = false;
        break;
      }
      prev_mean = mean;
      for (size_t q = start; q <= k; ++q) {
        fit[q] = mean;
        err += weights[q] * (values[q] - mean) * (values[q] - mean);
      }
      start = k + 1;
    }
    if (monotone && err < best) {
      best = err;
      best_fit = fit;
    }
  }
  return best_fit;
}

// Central finite differences of the dual objective in the Z block.
inline Matrix fd_z_gradient(wext::DualState state, const Vector& a, const Vector& b,
                            const Matrix& x, const Matrix& y, double eps, double t,
                            double h = 1e-5) {
  Matrix g(state.z.rows(), state.z.cols());
  for (Eigen::Index j = 0; j < g.rows(); ++j) {
    for (Eigen::Index k = 0; k < g.cols(); ++k) {
      const double keep = state.z(j, k);
      state.z(j, k) = keep + h;
      const double fp = wext::dual_objective(state, a, b, x, y, eps, t);
      state.z(j, k) = keep - h;
      const double fm = wext::dual_objective(state, a, b, x, y, eps, t);
      state.z(j, k) = keep;
      g(j, k) = (fp - fm) / (2.0 * h);
    }
  }
  return g;
}

// Independent 2D hull membership: p lies in conv(pts) iff some triangle (or
// segment) of points contains it. O(n^3), test use only.
inline bool hull_contains_2d(const Eigen::RowVector2d& p, const Matrix& pts,
                             double tol = 1e-9) {
  const Eigen::Index n = pts.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if ((pts.row(i) - p).norm() <= tol) return true;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      // segment
      const Eigen::RowVector2d a = pts.row(i), b = pts.row(j);
      const Eigen::RowVector2d ab = b - a;
      const double len2 = ab.squaredNorm();
      if (len2 > 0) {
        const double s = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
        if ((p - (a + s * ab)).norm() <= tol) return true;
      }
      for (Eigen::Index k = j + 1; k < n; ++k) {
        const Eigen::RowVector2d c = pts.row(k);
        const double det = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
        if (std::abs(det) < 1e-14) continue;
        const double l1 = ((p - a).x() * (c - a).y() - (p - a).y() * (c - a).x()) / det;
        const double l2 = ((b - a).x() * (p - a).y() - (b - a).y() * (p - a).x()) / det;
        const double slack = tol / std::max(1.0, std::sqrt(std::abs(det)));
        if (l1 >= -slack && l2 >= -slack && l1 + l2 <= 1.0 + slack) return true;
      }
    }
  }
  return false;
}

}  // namespace support
