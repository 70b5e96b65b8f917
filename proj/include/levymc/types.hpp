#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace levymc {

// Spatial dimension stays small (benchmarks run d = 1 or 2). Fixed-capacity
// Eigen types keep the per-sample hot path allocation-free.
inline constexpr int kMaxDim = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                          kMaxDim, kMaxDim>;

inline Vec vec1(double x) {
  Vec v(1);
  v(0) = x;
  return v;
}

inline Mat mat1(double a) {
  Mat m(1, 1);
  m(0, 0) = a;
  return m;
}

inline std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

/// Base error type. The CLI maps ConfigError to exit code 2 and
/// NumericError to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace levymc
