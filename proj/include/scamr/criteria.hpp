#pragma once

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <utility>
#include <vector>

#include "scamr/cut_model.hpp"
#include "scamr/element.hpp"
#include "scamr/gpc.hpp"
#include "scamr/grids.hpp"

namespace scamr {

/// Result of one adaptive check. `detail` holds the per-point (or per-dimension)
/// errors whose maximum is `error`.
struct CriterionOutcome {
  bool satisfied = false;
  double error = 0.0;
  std::vector<double> detail;
};

/// Critical dimensions, largest abrupt-variation error first.
struct CriticalRanking {
  std::vector<std::pair<std::size_t, double>> entries;
  /// Abrupt-variation error of every dimension, critical or not.
  std::vector<double> errors;

  bool empty() const noexcept { return entries.empty(); }
};

namespace detail {

inline std::vector<Point> reference_line(unsigned level) {
  std::vector<Point> eta;
  for (double z : chebyshev_nodes_1d(level)) eta.push_back({z});
  return eta;
}

}  // namespace detail

/// Quadratic least-squares fit to the five level-2 centerline values along
/// `dim`; the error is the fit's max residual at those points.
inline CriterionOutcome check_abrupt_variation(const Element& e, std::size_t dim, CutModel& model,
                                               double eps1) {
  const auto values = model.evaluate(centerline_points(e, dim, 2));
  const auto eta = detail::reference_line(2);
  const auto basis = total_degree_indices(1, 2);
  const auto coeffs = fit_least_squares(basis, eta, values);
  CriterionOutcome out;
  for (std::size_t j = 0; j < eta.size(); ++j)
    out.detail.push_back(std::abs(expansion_eval(basis, coeffs, eta[j]) - values[j]));
  out.error = *std::max_element(out.detail.begin(), out.detail.end());
  out.satisfied = out.error < eps1;
  return out;
}

/// Deviation of the centerline values along `dim` from the value at the
/// element center.
inline CriterionOutcome check_first_level_noninteraction(const Element& e, std::size_t dim,
                                                         CutModel& model, double eps1) {
  const auto values = model.evaluate(centerline_points(e, dim, 2));
  const double uc = model.evaluate(e.center());
  CriterionOutcome out;
  for (double v : values) out.detail.push_back(std::abs(v - uc));
  out.error = *std::max_element(out.detail.begin(), out.detail.end());
  out.satisfied = out.error < eps1;
  return out;
}

/// The four corners of the (i1, i2) plane through the domain center, others
/// at the center.
inline std::vector<Point> interaction_corners(const Bounds& domain, std::size_t i1, std::size_t i2) {
  std::vector<Point> corners;
  Point c(domain.size());
  for (std::size_t i = 0; i < domain.size(); ++i) c[i] = domain[i].mid();
  for (double a : {domain[i1].lo, domain[i1].hi})
    for (double b : {domain[i2].lo, domain[i2].hi}) {
      Point p = c;
      p[i1] = a;
      p[i2] = b;
      corners.push_back(std::move(p));
    }
  return corners;
}

/// Pairwise non-interaction test on the model's domain: at each plane corner,
/// compares the true value with g_i1 + g_i2 - g_0 built from the corner's
/// projections onto the two axes through the center.
inline CriterionOutcome check_pairwise_interaction(std::size_t i1, std::size_t i2, CutModel& model,
                                                   double eps2) {
  const Bounds& dom = model.domain();
  if (i1 >= dom.size() || i2 >= dom.size() || i1 == i2)
    throw InvalidArgument("check_pairwise_interaction: invalid dimension pair");
  Point c(dom.size());
  for (std::size_t i = 0; i < dom.size(); ++i) c[i] = dom[i].mid();

  const auto corners = interaction_corners(dom, i1, i2);
  std::vector<Point> request = corners;
  for (const auto& p : corners) {
    Point a1 = c, a2 = c;
    a1[i1] = p[i1];
    a2[i2] = p[i2];
    request.push_back(std::move(a1));
    request.push_back(std::move(a2));
  }
  request.push_back(c);
  const auto v = model.evaluate(request);
  const double g0 = v.back();

  CriterionOutcome out;
  for (std::size_t k = 0; k < corners.size(); ++k) {
    const double approx = v[4 + 2 * k] + v[5 + 2 * k] - g0;
    out.detail.push_back(std::abs(v[k] - approx));
  }
  out.error = *std::max_element(out.detail.begin(), out.detail.end());
  out.satisfied = out.error <= eps2;
  return out;
}

/// Order-p least-squares fit on the element's sparse grid (level 2 for p = 2,
/// level 1 for p = 1) together with every previously evaluated point strictly
/// inside the element. The error is the max residual over all fitted points.
inline std::pair<CriterionOutcome, GpcSurrogate> check_gpc_residual(const Element& e, unsigned order,
                                                                    CutModel& model, double eps1) {
  if (order != 1 && order != 2) throw InvalidArgument("check_gpc_residual: order must be 1 or 2");
  std::vector<Point> pts = element_grid(e, order);
  std::vector<double> vals = model.evaluate(pts);

  std::unordered_set<std::string> seen;
  auto key = [](const Point& p) {
    const auto k = EvaluationCache::key_of(p);
    return std::string(reinterpret_cast<const char*>(k.data()), k.size() * sizeof(k[0]));
  };
  for (const auto& p : pts) seen.insert(key(p));
  for (auto& s : model.known_in(e.bounds, /*strict=*/true))
    if (seen.insert(key(s.point)).second) {
      pts.push_back(std::move(s.point));
      vals.push_back(s.value);
    }

  std::vector<Point> eta;
  eta.reserve(pts.size());
  for (const auto& p : pts) eta.push_back(to_reference(e.bounds, p));
  auto basis = total_degree_indices(e.dim(), order);
  auto coeffs = fit_least_squares(basis, eta, vals);

  CriterionOutcome out;
  for (std::size_t j = 0; j < eta.size(); ++j)
    out.detail.push_back(std::abs(expansion_eval(basis, coeffs, eta[j]) - vals[j]));
  out.error = *std::max_element(out.detail.begin(), out.detail.end());
  out.satisfied = out.error < eps1;
  return {std::move(out), make_surrogate(std::move(basis), std::move(coeffs), e.bounds)};
}

/// Abrupt-variation check on every dimension; failing dimensions sorted by
/// error, descending, lower index first on ties.
inline CriticalRanking rank_critical_dimensions(const Element& e, CutModel& model, double eps1) {
  CriticalRanking r;
  for (std::size_t d = 0; d < e.dim(); ++d) {
    const auto o = check_abrupt_variation(e, d, model, eps1);
    r.errors.push_back(o.error);
    if (!o.satisfied) r.entries.emplace_back(d, o.error);
  }
  std::stable_sort(r.entries.begin(), r.entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return r;
}

}  // namespace scamr
