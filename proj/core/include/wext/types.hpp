#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace wext {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Error taxonomy shared by all modules. Solver routines throw Error for
// precondition violations; data validation returns Errc so callers can
// inspect without unwinding.
enum class Errc {
  ok = 0,
  non_positive_weight,
  weight_sum_mismatch,
  dimension_mismatch,
  non_finite_coordinate,
  not_one_dimensional,
  instance_too_large,
  non_finite_intermediate,
  step_too_large,
  no_convergence,
  empty_input,
  invalid_plan,
  invalid_config,
  bad_input,  // unreadable or malformed files and arguments
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace wext
