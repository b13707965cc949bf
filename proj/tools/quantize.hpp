#pragma once

#include <wext/measure.hpp>

#include <random>
#include <string>
#include <vector>

namespace wext::tools {

// Uniform samples from a named synthetic shape, centered at the origin.
// square: side 1; disk: radius 1; annulus: radii 0.5..1; triangle: vertices
// (-1,-0.6), (1,-0.6), (0,1.2).
Matrix sample_shape(const std::string& name, Eigen::Index count, uint64_t seed);

// Lloyd iterations (k-means) on the samples: k-means++ seeding, fixed 100
// iterations or centroid movement below 1e-8. Deterministic given the seed.
Matrix lloyd_centroids(const Matrix& samples, Eigen::Index k, uint64_t seed);

// Quantized measure: centroid locations with uniform weights 1/k.
AtomicMeasure quantize(const Matrix& samples, Eigen::Index k, uint64_t seed);

}  // namespace wext::tools
