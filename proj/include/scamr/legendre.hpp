#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "scamr/multi_index.hpp"
#include "scamr/types.hpp"

namespace scamr {

inline constexpr double kReferenceTolerance = 1e-10;

namespace detail {

inline double clamp_reference(double x) {
  if (!(std::abs(x) <= 1.0 + kReferenceTolerance))
    throw InvalidArgument("Legendre argument outside [-1,1]: " + std::to_string(x));
  return x > 1.0 ? 1.0 : (x < -1.0 ? -1.0 : x);
}

}  // namespace detail

/// P_0..P_p at x by the three-term recurrence.
inline void legendre_table(unsigned p, double x, std::span<double> out) {
  x = detail::clamp_reference(x);
  out[0] = 1.0;
  if (p == 0) return;
  out[1] = x;
  for (unsigned k = 1; k < p; ++k)
    out[k + 1] = ((2.0 * k + 1.0) * x * out[k] - k * out[k - 1]) / (k + 1.0);
}

inline double legendre_eval(unsigned degree, double x) {
  std::vector<double> t(degree + 1);
  legendre_table(degree, x, t);
  return t[degree];
}

/// E[P_k^2] under the uniform probability density on [-1,1].
inline double legendre_norm_squared(unsigned k) { return 1.0 / (2.0 * k + 1.0); }

/// Values of every tensor-product basis function of `basis` at `point`.
inline void basis_eval(const MultiIndexSet& basis, std::span<const double> point,
                       std::span<double> out) {
  if (point.size() != basis.dim())
    throw InvalidArgument("basis_eval: point has dimension " + std::to_string(point.size()) +
                          ", basis expects " + std::to_string(basis.dim()));
  const unsigned p = basis.order();
  std::vector<double> table((p + 1) * point.size());
  for (std::size_t d = 0; d < point.size(); ++d)
    legendre_table(p, point[d], std::span<double>(table.data() + d * (p + 1), p + 1));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    double v = 1.0;
    for (auto e : basis.nonzeros(i)) v *= table[e.dim * (p + 1) + e.degree];
    out[i] = v;
  }
}

inline std::vector<double> basis_eval(const MultiIndexSet& basis, std::span<const double> point) {
  std::vector<double> out(basis.size());
  basis_eval(basis, point, out);
  return out;
}

/// E[Phi_i^2] = prod_d 1/(2 k_d + 1).
inline double basis_norm_squared(const MultiIndexSet& basis, std::size_t i) {
  double v = 1.0;
  for (auto e : basis.nonzeros(i)) v *= legendre_norm_squared(e.degree);
  return v;
}

}  // namespace scamr
