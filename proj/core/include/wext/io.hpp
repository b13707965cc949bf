#pragma once

#include <wext/measure.hpp>
#include <wext/sinkhorn.hpp>

#include <filesystem>
#include <string>

namespace wext {

// Measure JSON: {"dim": d, "points": [[..],..], "weights": [..]};
// weights are optional and default to uniform.
AtomicMeasure load_measure(const std::filesystem::path& path);
void save_measure(const AtomicMeasure& m, const std::filesystem::path& path);

// Dense CSV, one plan row per line, full double precision.
void save_plan_csv(const Matrix& plan, const std::filesystem::path& path);
Matrix load_plan_csv(const std::filesystem::path& path);

// Columns: iter, f, marginal_residual, z_grad_norm, epsilon
void save_trace_csv(const ConvergenceTrace& trace, const std::filesystem::path& path);

}  // namespace wext
