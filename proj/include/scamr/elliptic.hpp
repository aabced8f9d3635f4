#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "scamr/types.hpp"

namespace scamr {

/// Uniform finite-difference grid on the unit square.
struct EllipticSolverSpec {
  /// Intervals per axis; even, so that (0.5, 0.5) is a grid node.
  int resolution = 64;
  double correlation_length = 0.5;

  void validate() const {
    if (resolution < 16 || resolution % 2 != 0) throw ConfigError("resolution", "must be even and at least 16");
    if (!(correlation_length > 0.0)) throw ConfigError("correlation_length", "must be positive");
  }
};

/// log(a(x) - 0.5) = 1 + Y_1 (sqrt(pi) L / 2)^(1/2) + sum_{i>=2} xi_i phi_i(x) Y_i
/// with L_p = max(1, 2 L_c) and L = L_c / L_p.
class EllipticCoefficient {
 public:
  EllipticCoefficient(std::span<const double> y, double correlation_length) : y_(y.begin(), y.end()) {
    const double lp = std::max(1.0, 2.0 * correlation_length);
    l_ = correlation_length / lp;
    lp_ = lp;
    const double root = std::sqrt(std::sqrt(std::numbers::pi) * l_);
    xi_.assign(y_.size(), 0.0);
    for (std::size_t i = 2; i <= y_.size(); ++i) {
      const double k = std::floor(static_cast<double>(i) / 2.0) * std::numbers::pi * l_;
      xi_[i - 1] = root * std::exp(-k * k / 8.0);
    }
    first_ = std::sqrt(std::sqrt(std::numbers::pi) * l_ / 2.0);
  }

  double log_excess(double x) const {
    double s = 1.0 + y_[0] * first_;
    for (std::size_t i = 2; i <= y_.size(); ++i) {
      const double arg = std::floor(static_cast<double>(i) / 2.0) * std::numbers::pi * x / lp_;
      const double phi = (i % 2 == 0) ? std::sin(arg) : std::cos(arg);
      s += xi_[i - 1] * phi * y_[i - 1];
    }
    return s;
  }

  double operator()(double x) const { return 0.5 + std::exp(log_excess(x)); }

 private:
  std::vector<double> y_;
  std::vector<double> xi_;
  double first_ = 0.0;
  double l_ = 0.0;
  double lp_ = 1.0;
};

/// Solves -div(a(x) grad u) = cos(x) sin(y) on [0,1]^2 with u = 0 on the
/// boundary; the coefficient varies along x only. Returns u(0.5, 0.5).
/// Five-point stencil with harmonic-mean face coefficients.
inline double solve_elliptic_with(const std::function<double(double)>& a, const EllipticSolverSpec& spec) {
  spec.validate();
  const int n = spec.resolution;
  const int m = n - 1;
  const double h = 1.0 / n;

  std::vector<double> node(n + 1);
  for (int i = 0; i <= n; ++i) {
    node[i] = a(i * h);
    if (!(node[i] > 0.0) || !std::isfinite(node[i]))
      throw InvalidArgument("elliptic coefficient must be positive and finite");
  }
  std::vector<double> face(n);  // face[i] sits between nodes i and i+1
  for (int i = 0; i < n; ++i) face[i] = 2.0 * node[i] * node[i + 1] / (node[i] + node[i + 1]);

  auto idx = [m](int i, int j) { return (j - 1) * m + (i - 1); };
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(5 * m * m));
  Eigen::VectorXd rhs(m * m);
  const double inv = 1.0 / (h * h);
  for (int j = 1; j <= m; ++j)
    for (int i = 1; i <= m; ++i) {
      const double ax_w = face[i - 1], ax_e = face[i], ay = node[i];
      const int k = idx(i, j);
      trip.emplace_back(k, k, (ax_w + ax_e + 2.0 * ay) * inv);
      if (i > 1) trip.emplace_back(k, idx(i - 1, j), -ax_w * inv);
      if (i < m) trip.emplace_back(k, idx(i + 1, j), -ax_e * inv);
      if (j > 1) trip.emplace_back(k, idx(i, j - 1), -ay * inv);
      if (j < m) trip.emplace_back(k, idx(i, j + 1), -ay * inv);
      rhs[k] = std::cos(i * h) * std::sin(j * h);
    }
  Eigen::SparseMatrix<double> A(m * m, m * m);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw ScamrError("elliptic solve: factorization failed");
  const Eigen::VectorXd u = solver.solve(rhs);
  return u[idx(n / 2, n / 2)];
}

inline double solve_elliptic(std::span<const double> y, const EllipticSolverSpec& spec = {}) {
  if (y.size() < 2) throw InvalidArgument("elliptic sample needs at least 2 components");
  const double bound = std::sqrt(3.0) * (1.0 + 1e-12);
  for (double v : y)
    if (!(std::abs(v) <= bound)) throw InvalidArgument("elliptic sample outside [-sqrt3, sqrt3]: " + format_point(y));
  const EllipticCoefficient a(y, spec.correlation_length);
  return solve_elliptic_with(
      [&](double x) {
        const double v = a(x);
        if (!(v > 0.5)) throw InvalidArgument("elliptic coefficient not above 0.5");
        return v;
      },
      spec);
}

}  // namespace scamr
