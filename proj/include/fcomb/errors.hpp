#pragma once
// Error types shared by all modules. Validation failures carry the first
// offending index, domain failures carry the offending minimum value, and
// numeric failures carry the final residual of the iteration that gave up.

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace fcomb {

// Input violated a documented precondition (shape, monotonicity, range).
class invalid_input : public std::runtime_error {
 public:
  explicit invalid_input(const std::string& msg,
                         std::size_t index = npos)
      : std::runtime_error(msg), index_(index) {}

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  // Index of the first violating entry, or npos when not index-specific.
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

// A point left the admissible set of a geometric map (e.g. a tangent
// vector whose exponential is not a valid square-root slope function).
class domain_exit : public std::runtime_error {
 public:
  explicit domain_exit(const std::string& msg,
                       double min_value = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(msg), min_value_(min_value) {}

  // Minimum value encountered where positivity was required.
  double min_value() const { return min_value_; }

 private:
  double min_value_;
};

// An iterative or direct solver failed (non-convergence, singular system).
class numeric_failure : public std::runtime_error {
 public:
  explicit numeric_failure(const std::string& msg,
                           double residual = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(msg), residual_(residual) {}

  // Final residual or gap reported by the solver.
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace fcomb
