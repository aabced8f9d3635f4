#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "scamr/types.hpp"

namespace scamr {

/// Nodes and weights on [-1,1]^n; weights carry Lebesgue mass 2^n.
struct QuadratureRule {
  std::vector<Point> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

inline std::size_t chebyshev_count(unsigned level) { return level == 0 ? 1 : (std::size_t{1} << level) + 1; }

/// Chebyshev-Gauss-Lobatto abscissae of a nested level, ascending. The
/// midpoint is exactly 0 and the set is exactly symmetric.
inline std::vector<double> chebyshev_nodes_1d(unsigned level) {
  if (level == 0) return {0.0};
  const std::size_t m = chebyshev_count(level);
  const std::size_t intervals = m - 1;
  std::vector<double> x(m);
  for (std::size_t j = 0; j <= intervals / 2; ++j) {
    const double v = (2 * j == intervals) ? 0.0
                     : (j == 0)           ? -1.0
                                          : -std::cos(std::numbers::pi * static_cast<double>(j) /
                                                      static_cast<double>(intervals));
    x[j] = v;
    x[intervals - j] = -v;
  }
  return x;
}

/// Clenshaw-Curtis weights matching chebyshev_nodes_1d(level); sum to 2.
inline std::vector<double> clenshaw_curtis_weights_1d(unsigned level) {
  if (level == 0) return {2.0};
  const std::size_t m = chebyshev_count(level);
  const std::size_t nint = m - 1;
  std::vector<double> w(m);
  for (std::size_t j = 0; j <= nint; ++j) {
    double s = 1.0;
    for (std::size_t k = 1; k <= nint / 2; ++k) {
      const double b = (2 * k == nint) ? 1.0 : 2.0;
      s -= b / (4.0 * static_cast<double>(k * k) - 1.0) *
           std::cos(2.0 * std::numbers::pi * static_cast<double>(k * j) / static_cast<double>(nint));
    }
    const double c = (j == 0 || j == nint) ? 1.0 : 2.0;
    w[j] = c / static_cast<double>(nint) * s;
  }
  // Nodes are generated descending by the formula; reverse to ascending and
  // symmetrize.
  std::vector<double> out(w.rbegin(), w.rend());
  for (std::size_t j = 0; j < m / 2; ++j) out[j] = out[m - 1 - j] = 0.5 * (out[j] + out[m - 1 - j]);
  return out;
}

namespace detail {

// Nested 1-D rules up to level 2 and their difference rules
// Delta^l = U^l - U^{l-1}, indexed by the level-2 node index.
struct NestedRules {
  std::vector<double> nodes;                 // level-2 nodes, ascending
  std::vector<unsigned> first_level;         // lowest level containing each node
  std::vector<std::vector<double>> delta;    // delta[l][node]

  explicit NestedRules(unsigned max_level) {
    nodes = chebyshev_nodes_1d(max_level);
    first_level.assign(nodes.size(), max_level);
    delta.assign(max_level + 1, std::vector<double>(nodes.size(), 0.0));
    std::vector<double> prev(nodes.size(), 0.0);
    for (unsigned l = 0; l <= max_level; ++l) {
      const auto xl = chebyshev_nodes_1d(l);
      const auto wl = clenshaw_curtis_weights_1d(l);
      std::vector<double> cur(nodes.size(), 0.0);
      for (std::size_t a = 0; a < xl.size(); ++a)
        for (std::size_t k = 0; k < nodes.size(); ++k)
          if (xl[a] == nodes[k]) {
            cur[k] = wl[a];
            first_level[k] = std::min(first_level[k], l);
          }
      for (std::size_t k = 0; k < nodes.size(); ++k) delta[l][k] = cur[k] - prev[k];
      prev = cur;
    }
  }

  std::size_t center() const { return nodes.size() / 2; }
};

// Sum over level vectors l on `m` dimensions with |l| <= budget of
// prod Delta^{l_i}(0). Only budgets up to 2 are needed.
inline double center_factor(const NestedRules& r, std::size_t m, unsigned budget) {
  const std::size_t c = r.center();
  const double d0 = r.delta[0][c];
  const double md = static_cast<double>(m);
  auto pw = [&](std::ptrdiff_t e) { return e < 0 ? 0.0 : std::pow(d0, static_cast<double>(e)); };
  const auto mi = static_cast<std::ptrdiff_t>(m);
  double g = pw(mi);
  if (budget >= 1) g += md * r.delta[1][c] * pw(mi - 1);
  if (budget >= 2) {
    g += md * r.delta[2][c] * pw(mi - 1);
    g += 0.5 * md * (md - 1.0) * r.delta[1][c] * r.delta[1][c] * pw(mi - 2);
  }
  return g;
}

}  // namespace detail

/// Smolyak combination of nested Clenshaw-Curtis rules on [-1,1]^n.
///
/// Level 1 gives the center plus the two faces along each axis (2n+1 nodes);
/// level 2 adds the interior axis nodes +-sqrt(2)/2 and the four (+-1,+-1)
/// corners of every coordinate plane through the center (2n^2+2n+1 nodes).
/// Node order: center, axis nodes by dimension (ascending), then plane corners
/// by pair (i<j).
inline QuadratureRule sparse_grid(std::size_t n, unsigned level) {
  if (n == 0) throw InvalidArgument("sparse_grid: dimension must be >= 1");
  if (level != 1 && level != 2) throw InvalidArgument("sparse_grid: only levels 1 and 2 are supported");
  if (n > 1000) throw InvalidArgument("sparse_grid: weights overflow beyond 1000 dimensions");

  const detail::NestedRules r(2);
  const std::size_t c = r.center();
  QuadratureRule rule;

  // weight of a node whose non-center coordinates are the node indices `ks`
  auto weight = [&](const std::vector<std::size_t>& ks) {
    const std::size_t rest = n - ks.size();
    double w = 0.0;
    if (ks.empty()) return detail::center_factor(r, rest, level);
    if (ks.size() == 1) {
      for (unsigned l = r.first_level[ks[0]]; l <= level; ++l)
        w += r.delta[l][ks[0]] * detail::center_factor(r, rest, level - l);
      return w;
    }
    for (unsigned l0 = r.first_level[ks[0]]; l0 <= level; ++l0)
      for (unsigned l1 = r.first_level[ks[1]]; l0 + l1 <= level; ++l1)
        w += r.delta[l0][ks[0]] * r.delta[l1][ks[1]] * detail::center_factor(r, rest, level - l0 - l1);
    return w;
  };

  rule.nodes.emplace_back(n, 0.0);
  rule.weights.push_back(weight({}));

  for (std::size_t d = 0; d < n; ++d)
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
      if (k == c || r.first_level[k] > level) continue;
      Point p(n, 0.0);
      p[d] = r.nodes[k];
      rule.nodes.push_back(std::move(p));
      rule.weights.push_back(weight({k}));
    }

  if (level == 2) {
    const std::size_t lo = 0, hi = r.nodes.size() - 1;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        for (std::size_t a : {lo, hi})
          for (std::size_t b : {lo, hi}) {
            Point p(n, 0.0);
            p[i] = r.nodes[a];
            p[j] = r.nodes[b];
            rule.nodes.push_back(std::move(p));
            rule.weights.push_back(weight({a, b}));
          }
  }
  return rule;
}

inline std::size_t sparse_grid_size(std::size_t n, unsigned level) {
  return level == 1 ? 2 * n + 1 : 2 * n * n + 2 * n + 1;
}

}  // namespace scamr
