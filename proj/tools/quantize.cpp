#include "quantize.hpp"

#include <cmath>
#include <limits>

namespace wext::tools {

Matrix sample_shape(const std::string& name, Eigen::Index count, uint64_t seed) {
  if (count <= 0) throw Error(Errc::empty_input, "sample count must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix out(count, 2);
  if (name == "square") {
    for (Eigen::Index i = 0; i < count; ++i) {
      out(i, 0) = unit(rng) - 0.5;
      out(i, 1) = unit(rng) - 0.5;
    }
  } else if (name == "disk" || name == "annulus") {
    const double r0 = name == "disk" ? 0.0 : 0.5;
    for (Eigen::Index i = 0; i < count; ++i) {
      const double r = std::sqrt(r0 * r0 + (1.0 - r0 * r0) * unit(rng));
      const double th = 2.0 * M_PI * unit(rng);
      out(i, 0) = r * std::cos(th);
      out(i, 1) = r * std::sin(th);
    }
  } else if (name == "triangle") {
    const Eigen::RowVector2d a(-1.0, -0.6), b(1.0, -0.6), c(0.0, 1.2);
    for (Eigen::Index i = 0; i < count; ++i) {
      double u = unit(rng), v = unit(rng);
      if (u + v > 1.0) {
        u = 1.0 - u;
        v = 1.0 - v;
      }
      out.row(i) = a + u * (b - a) + v * (c - a);
    }
  } else {
    throw Error(Errc::bad_input, "unknown shape '" + name + "'");
  }
  return out;
}

Matrix lloyd_centroids(const Matrix& samples, Eigen::Index k, uint64_t seed) {
  const Eigen::Index n = samples.rows();
  if (n == 0) throw Error(Errc::empty_input, "no samples to quantize");
  if (k <= 0) throw Error(Errc::bad_input, "atom count must be positive");
  if (k > n) throw Error(Errc::bad_input, "atom count exceeds sample count");
  if (k == n) return samples;

  std::mt19937_64 rng(seed);
  Matrix centroids(k, samples.cols());

  // k-means++ seeding
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centroids.row(0) = samples.row(pick(rng));
  Vector d2 = (samples.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (Eigen::Index c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (Eigen::Index i = 0; i < n; ++i) {
        r -= d2(i);
        if (r <= 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    centroids.row(c) = samples.row(chosen);
    d2 = d2.cwiseMin((samples.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }

  std::vector<Eigen::Index> assign(static_cast<size_t>(n));
  for (int round = 0; round < 100; ++round) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      (centroids.rowwise() - samples.row(i)).rowwise().squaredNorm().minCoeff(&best);
      assign[size_t(i)] = best;
    }
    Matrix next = Matrix::Zero(k, samples.cols());
    Vector counts = Vector::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      next.row(assign[size_t(i)]) += samples.row(i);
      counts(assign[size_t(i)]) += 1.0;
    }
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts(c) > 0.0) {
        next.row(c) /= counts(c);
      } else {
        // deterministic reseed at the sample farthest from its centroid
        Eigen::Index far = 0;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double d = (samples.row(i) - centroids.row(assign[size_t(i)])).squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        next.row(c) = samples.row(far);
      }
    }
    const double moved = (next - centroids).rowwise().norm().maxCoeff();
    centroids = next;
    if (moved < 1e-8) break;
  }
  return centroids;
}

AtomicMeasure quantize(const Matrix& samples, Eigen::Index k, uint64_t seed) {
  return make_uniform(lloyd_centroids(samples, k, seed));
}

}  // namespace wext::tools
