#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace hlv {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

enum class ErrorCode {
  InvalidArgument,
  Parse,
  Numeric,
  NotApplicable,
  Degenerate,
  Overflow,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::InvalidArgument, what);
}

// Exponent magnitude beyond which exp() is refused.
inline constexpr double kExpLimit = 700.0;

inline double guarded_exp(double x) {
  if (!(std::abs(x) <= kExpLimit)) {
    fail(ErrorCode::Overflow, "exponent " + std::to_string(x) + " outside [-700, 700]");
  }
  return std::exp(x);
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace hlv
