#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace atb {

using VarId = std::size_t;
using Value = std::size_t;

/// Closed interval [lower, upper] on a probability.
struct Interval {
  double lower = 0.0;
  double upper = 1.0;

  double width() const { return upper - lower; }
  bool contains(double p, double tol = 0.0) const {
    return lower - tol <= p && p <= upper + tol;
  }
  /// True when this interval lies inside `outer` (up to `tol` on each side).
  bool within(const Interval& outer, double tol = 0.0) const {
    return outer.lower - tol <= lower && upper <= outer.upper + tol;
  }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed network or evidence document.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Structurally invalid model, assignment, or query.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Exact inference refused to run (resource caps, zero evidence probability).
class InferenceError : public Error {
 public:
  using Error::Error;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

inline double clamp01(double p) { return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p); }

}  // namespace atb
