#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "scamr/json_io.hpp"
#include "scamr/legendre.hpp"
#include "scamr/multi_index.hpp"
#include "scamr/reference_map.hpp"
#include "scamr/types.hpp"

namespace scamr {

/// Relative pivot threshold below which a least-squares column counts as
/// numerically dependent.
inline constexpr double kRankTolerance = 1e-10;

/// A truncated Legendre expansion living on an axis-aligned box.
struct GpcSurrogate {
  MultiIndexSet basis;
  std::vector<double> coefficients;
  Bounds bounds;

  std::size_t dim() const noexcept { return basis.dim(); }
  unsigned order() const noexcept { return basis.order(); }
};

inline GpcSurrogate make_surrogate(MultiIndexSet basis, std::vector<double> coefficients,
                                   Bounds bounds) {
  if (coefficients.size() != basis.size())
    throw InvalidArgument("surrogate: coefficient count " + std::to_string(coefficients.size()) +
                          " does not match basis size " + std::to_string(basis.size()));
  if (bounds.size() != basis.dim()) throw InvalidArgument("surrogate: bounds dimension mismatch");
  for (const auto& iv : bounds)
    if (!(iv.lo < iv.hi)) throw InvalidArgument("surrogate: degenerate bounds");
  return {std::move(basis), std::move(coefficients), std::move(bounds)};
}

/// Discrete projection of `values` onto `basis`. `weights` are a quadrature
/// rule on [-1,1]^n with total mass 2^n; they are rescaled to the uniform
/// probability measure before projecting.
inline std::vector<double> fit_discrete_projection(const MultiIndexSet& basis,
                                                   const std::vector<Point>& nodes,
                                                   std::span<const double> weights,
                                                   std::span<const double> values) {
  if (nodes.empty() || nodes.size() != weights.size() || nodes.size() != values.size())
    throw InvalidArgument("fit_discrete_projection: nodes, weights and values must have equal non-zero length");
  const double mass = std::ldexp(1.0, static_cast<int>(basis.dim()));
  std::vector<double> coeffs(basis.size(), 0.0);
  std::vector<double> phi(basis.size());
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    if (!std::isfinite(values[j]))
      throw EvaluationError(nodes[j], "fit_discrete_projection: non-finite value");
    basis_eval(basis, nodes[j], phi);
    const double w = values[j] * weights[j] / mass;
    for (std::size_t i = 0; i < phi.size(); ++i) coeffs[i] += w * phi[i];
  }
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] /= basis_norm_squared(basis, i);
  return coeffs;
}

/// Least-squares coefficients from points in [-1,1]^n, solved with a
/// column-pivoted Householder QR.
inline std::vector<double> fit_least_squares(const MultiIndexSet& basis,
                                             const std::vector<Point>& points,
                                             std::span<const double> values) {
  const std::size_t m = points.size();
  const std::size_t terms = basis.size();
  if (values.size() != m) throw InvalidArgument("fit_least_squares: points/values length mismatch");
  if (m <= terms) throw InsufficientPointsError(m, terms);

  Eigen::MatrixXd design(m, terms);
  Eigen::VectorXd rhs(m);
  std::vector<double> phi(terms);
  for (std::size_t j = 0; j < m; ++j) {
    if (!std::isfinite(values[j])) throw EvaluationError(points[j], "fit_least_squares: non-finite value");
    basis_eval(basis, points[j], phi);
    for (std::size_t i = 0; i < terms; ++i) design(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = phi[i];
    rhs(static_cast<Eigen::Index>(j)) = values[j];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < static_cast<Eigen::Index>(terms)) {
    std::vector<std::size_t> bad;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < static_cast<Eigen::Index>(terms); ++k)
      bad.push_back(static_cast<std::size_t>(perm(k)));
    std::sort(bad.begin(), bad.end());
    throw DegenerateDesignError(std::move(bad));
  }
  Eigen::VectorXd sol = qr.solve(rhs);
  return {sol.data(), sol.data() + sol.size()};
}

/// Expansion value at a reference point.
inline double expansion_eval(const MultiIndexSet& basis, std::span<const double> coefficients,
                             std::span<const double> eta) {
  std::vector<double> phi = basis_eval(basis, eta);
  double s = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) s += coefficients[i] * phi[i];
  return s;
}

inline double surrogate_eval(const GpcSurrogate& s, std::span<const double> query) {
  return expansion_eval(s.basis, s.coefficients, to_reference(s.bounds, query));
}

/// Mean under the uniform density on the surrogate's box: the constant term.
inline double surrogate_mean(const GpcSurrogate& s) { return s.coefficients.at(0); }

/// Largest absolute residual of the expansion at reference points.
inline double max_residual(const MultiIndexSet& basis, std::span<const double> coefficients,
                           const std::vector<Point>& eta, std::span<const double> values) {
  double err = 0.0;
  for (std::size_t j = 0; j < eta.size(); ++j)
    err = std::max(err, std::abs(expansion_eval(basis, coefficients, eta[j]) - values[j]));
  return err;
}

inline Json bounds_to_json(const Bounds& b) {
  Json arr = Json::array();
  for (const auto& iv : b) arr.push_back(Json::array({iv.lo, iv.hi}));
  return arr;
}

inline Bounds bounds_from_json(const Json& j) {
  Bounds b;
  for (const auto& iv : j) b.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
  return b;
}

inline Json to_json(const GpcSurrogate& s) {
  Json j;
  j["dim"] = s.dim();
  j["order"] = s.order();
  j["bounds"] = bounds_to_json(s.bounds);
  j["coefficients"] = s.coefficients;
  return j;
}

inline GpcSurrogate surrogate_from_json(const Json& j) {
  const auto dim = j.at("dim").get<std::size_t>();
  const auto order = j.at("order").get<unsigned>();
  return make_surrogate(total_degree_indices(dim, order), j.at("coefficients").get<std::vector<double>>(),
                        bounds_from_json(j.at("bounds")));
}

}  // namespace scamr
