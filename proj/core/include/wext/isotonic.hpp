#pragma once

#include <wext/measure.hpp>

#include <vector>

namespace wext {

// Weighted L2 projection onto nondecreasing sequences (pool adjacent
// violators). Pooled blocks carry their weighted mean.
std::vector<double> pav_isotonic(const std::vector<double>& values,
                                 const std::vector<double>& weights);

// Exact metric extrapolation in dimension one: the quantile function of the
// result is the isotonic projection of t*q1 - (t-1)*q0 on the common
// refinement grid, with adjacent equal values merged into single atoms.
AtomicMeasure extrapolate_1d(const AtomicMeasure& nu0, const AtomicMeasure& nu1,
                             double t);

// Extrapolation evaluated at each time (each from the original pair); the
// trajectory realizes the sticky-particle dynamics.
std::vector<AtomicMeasure> sticky_flow_1d(const AtomicMeasure& nu0,
                                          const AtomicMeasure& nu1,
                                          const std::vector<double>& times);

}  // namespace wext
