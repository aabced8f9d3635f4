#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace scamr {

using Point = std::vector<double>;

/// A black-box model: maps an input point to a scalar output.
using Model = std::function<double(std::span<const double>)>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const noexcept { return hi - lo; }
  double mid() const noexcept { return 0.5 * (lo + hi); }
  friend bool operator==(const Interval&, const Interval&) = default;
};

using Bounds = std::vector<Interval>;

/// Base of every error thrown by the library.
class ScamrError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public ScamrError {
 public:
  using ScamrError::ScamrError;
};

class ConfigError : public ScamrError {
 public:
  ConfigError(std::string field, const std::string& what)
      : ScamrError(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

inline std::string format_point(std::span<const double> p) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) os << ", ";
    os << p[i];
  }
  os << ')';
  return os.str();
}

/// The model failed, or produced a non-finite value, at `point()`.
class EvaluationError : public ScamrError {
 public:
  EvaluationError(Point point, const std::string& what)
      : ScamrError(what + " at " + format_point(point)), point_(std::move(point)) {}
  const Point& point() const noexcept { return point_; }

 private:
  Point point_;
};

class InsufficientPointsError : public ScamrError {
 public:
  InsufficientPointsError(std::size_t points, std::size_t terms)
      : ScamrError("least squares needs more than " + std::to_string(terms) +
                   " points, got " + std::to_string(points)),
        points_(points),
        terms_(terms) {}
  std::size_t points() const noexcept { return points_; }
  std::size_t terms() const noexcept { return terms_; }

 private:
  std::size_t points_;
  std::size_t terms_;
};

/// The design matrix is rank deficient; `columns()` lists the basis columns
/// the pivoted factorization could not resolve.
class DegenerateDesignError : public ScamrError {
 public:
  explicit DegenerateDesignError(std::vector<std::size_t> columns)
      : ScamrError(describe(columns)), columns_(std::move(columns)) {}
  const std::vector<std::size_t>& columns() const noexcept { return columns_; }

 private:
  static std::string describe(const std::vector<std::size_t>& cols) {
    std::string s = "rank-deficient design, unresolved basis columns:";
    for (auto c : cols) s += " " + std::to_string(c);
    return s;
  }
  std::vector<std::size_t> columns_;
};

}  // namespace scamr
