#include <wext/isotonic.hpp>

#include <wext/exact_ot.hpp>

#include <cmath>

namespace wext {

namespace {

constexpr double kMergeTol = 1e-12;  // absolute, collapses spurious micro-atoms

}  // namespace

std::vector<double> pav_isotonic(const std::vector<double>& values,
                                 const std::vector<double>& weights) {
  if (values.size() != weights.size())
    throw Error(Errc::dimension_mismatch, "pav_isotonic length mismatch");
  const size_t n = values.size();
  struct Block {
    double mean, weight;
    size_t count;
  };
  std::vector<Block> blocks;
  blocks.reserve(n);
  for (size_t k = 0; k < n; ++k) {
    if (!(weights[k] > 0.0))
      throw Error(Errc::non_positive_weight, "pav_isotonic weights must be positive");
    blocks.push_back({values[k], weights[k], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
      const Block top = blocks.back();
      blocks.pop_back();
      Block& prev = blocks.back();
      const double w = prev.weight + top.weight;
      prev.mean = (prev.mean * prev.weight + top.mean * top.weight) / w;
      prev.weight = w;
      prev.count += top.count;
    }
  }
  std::vector<double> out;
  out.reserve(n);
  for (const Block& blk : blocks) out.insert(out.end(), blk.count, blk.mean);
  return out;
}

AtomicMeasure extrapolate_1d(const AtomicMeasure& nu0, const AtomicMeasure& nu1,
                             double t) {
  if (nu0.dim() != 1 || nu1.dim() != 1)
    throw Error(Errc::not_one_dimensional, "extrapolate_1d requires d=1");
  if (!(t > 1.0)) throw Error(Errc::invalid_config, "extrapolate_1d requires t > 1");
  const QuantileFunction q0 = quantile(nu0);
  const QuantileFunction q1 = quantile(nu1);

  // common refinement of the two breakpoint grids
  std::vector<double> targets, lengths;
  targets.reserve(size_t(q0.breakpoints.size() + q1.breakpoints.size()));
  lengths.reserve(targets.capacity());
  double prev = 0.0;
  Eigen::Index k0 = 0, k1 = 0;
  while (k0 < q0.breakpoints.size() && k1 < q1.breakpoints.size()) {
    const double next = std::min(q0.breakpoints(k0), q1.breakpoints(k1));
    if (next > prev) {
      targets.push_back(t * q1.values(k1) - (t - 1.0) * q0.values(k0));
      lengths.push_back(next - prev);
    }
    if (q0.breakpoints(k0) <= next) ++k0;
    if (k1 < q1.breakpoints.size() && q1.breakpoints(k1) <= next) ++k1;
    prev = next;
  }

  const std::vector<double> projected = pav_isotonic(targets, lengths);

  // merge adjacent equal quantile values into atoms
  std::vector<double> atom_pos, atom_w;
  for (size_t k = 0; k < projected.size(); ++k) {
    if (!atom_pos.empty() && std::abs(projected[k] - atom_pos.back()) <= kMergeTol) {
      atom_w.back() += lengths[k];
    } else {
      atom_pos.push_back(projected[k]);
      atom_w.push_back(lengths[k]);
    }
  }

  Matrix points(Eigen::Index(atom_pos.size()), 1);
  Vector weights(Eigen::Index(atom_w.size()));
  for (size_t k = 0; k < atom_pos.size(); ++k) {
    points(Eigen::Index(k), 0) = atom_pos[k];
    weights(Eigen::Index(k)) = atom_w[k];
  }
  return make_measure(std::move(points), std::move(weights));
}

std::vector<AtomicMeasure> sticky_flow_1d(const AtomicMeasure& nu0,
                                          const AtomicMeasure& nu1,
                                          const std::vector<double>& times) {
  std::vector<AtomicMeasure> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(extrapolate_1d(nu0, nu1, t));
  return out;
}

}  // namespace wext
