#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "scamr/criteria.hpp"
#include "scamr/json_io.hpp"
#include "scamr/types.hpp"

namespace scamr {

using DimSet = std::vector<std::size_t>;  // sorted, unique
using DimPair = std::pair<std::size_t, std::size_t>;

/// Dimensions as vertices, detected pairwise couplings as edges.
struct InteractionGraph {
  std::size_t n = 0;
  std::set<DimPair> edges;  // first < second
  std::set<std::size_t> flat_dims;

  bool connected(std::size_t a, std::size_t b) const {
    return edges.count(a < b ? DimPair{a, b} : DimPair{b, a}) > 0;
  }
};

/// Sub-dimensional representation
///   f(Y) = sum_i h_i(Y_{S_i}) - sum_j U_j p_j(Y_{T_j}) - V f0
/// with every h_i, p_j taken on cuts through `cut_center`.
struct Decomposition {
  std::vector<DimSet> S;
  std::vector<DimSet> T;
  std::vector<long> U;
  long V = 0;
  double f0 = 0.0;
  Point cut_center;

  friend bool operator==(const Decomposition&, const Decomposition&) = default;
};

inline InteractionGraph build_interaction_graph(const std::map<DimPair, CriterionOutcome>& outcomes,
                                                const std::set<std::size_t>& flat_dims, std::size_t n) {
  InteractionGraph g;
  g.n = n;
  g.flat_dims = flat_dims;
  for (auto f : flat_dims)
    if (f >= n) throw InvalidArgument("flat dimension out of range");
  for (std::size_t a = 0; a < n; ++a) {
    if (flat_dims.count(a)) continue;
    for (std::size_t b = a + 1; b < n; ++b) {
      if (flat_dims.count(b)) continue;
      auto it = outcomes.find({a, b});
      if (it == outcomes.end())
        throw InvalidArgument("missing pairwise outcome for (" + std::to_string(a) + ", " + std::to_string(b) + ")");
      if (!it->second.satisfied) g.edges.insert({a, b});
    }
  }
  return g;
}

/// Limits beyond which maximal-clique grouping gives way to connected
/// components.
struct GroupingBudget {
  std::size_t max_cliques = 64;
  std::size_t max_vertices = 32;
};

namespace detail {

inline void bron_kerbosch(const InteractionGraph& g, DimSet r, DimSet p, DimSet x,
                          std::vector<DimSet>& out, std::size_t cap) {
  if (out.size() > cap) return;
  if (p.empty() && x.empty()) {
    out.push_back(r);
    return;
  }
  // pivot with the most neighbours in p
  std::size_t pivot = p.empty() ? x.front() : p.front();
  std::size_t best = 0;
  for (const auto* s : {&p, &x})
    for (auto u : *s) {
      std::size_t cnt = 0;
      for (auto v : p) cnt += g.connected(u, v);
      if (cnt > best) best = cnt, pivot = u;
    }
  DimSet candidates;
  for (auto v : p)
    if (!g.connected(pivot, v)) candidates.push_back(v);
  for (auto v : candidates) {
    DimSet r2 = r, p2, x2;
    r2.push_back(v);
    std::sort(r2.begin(), r2.end());
    for (auto u : p)
      if (g.connected(u, v)) p2.push_back(u);
    for (auto u : x)
      if (g.connected(u, v)) x2.push_back(u);
    bron_kerbosch(g, std::move(r2), std::move(p2), std::move(x2), out, cap);
    p.erase(std::find(p.begin(), p.end(), v));
    x.insert(std::upper_bound(x.begin(), x.end(), v), v);
  }
}

inline std::vector<DimSet> components(const InteractionGraph& g, const DimSet& vertices) {
  std::map<std::size_t, std::size_t> parent;
  for (auto v : vertices) parent[v] = v;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t v) {
    return parent[v] == v ? v : parent[v] = find(parent[v]);
  };
  for (auto [a, b] : g.edges) parent[find(a)] = find(b);
  std::map<std::size_t, DimSet> groups;
  for (auto v : vertices) groups[find(v)].push_back(v);
  std::vector<DimSet> out;
  for (auto& [root, set] : groups) out.push_back(std::move(set));
  return out;
}

}  // namespace detail

/// Interaction groups: maximal cliques of the graph over the non-flat
/// dimensions (isolated dimensions become singletons), plus a singleton per
/// flat dimension. Falls back to connected components when the clique
/// enumeration exceeds `budget`.
inline std::vector<DimSet> derive_groups(const InteractionGraph& g, GroupingBudget budget = {}) {
  DimSet active, coupled;
  for (std::size_t v = 0; v < g.n; ++v)
    if (!g.flat_dims.count(v)) active.push_back(v);
  for (auto v : active) {
    bool any = false;
    for (auto u : active) any = any || g.connected(u, v);
    if (any) coupled.push_back(v);
  }

  std::vector<DimSet> groups;
  bool use_components = coupled.size() > budget.max_vertices;
  if (!use_components) {
    detail::bron_kerbosch(g, {}, active, {}, groups, budget.max_cliques);
    use_components = groups.size() > budget.max_cliques;
  }
  if (use_components) groups = detail::components(g, active);
  for (auto f : g.flat_dims) groups.push_back({f});
  std::sort(groups.begin(), groups.end());
  return groups;
}

namespace detail {

inline DimSet intersect(const DimSet& a, const DimSet& b) {
  DimSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline bool is_subset(const DimSet& small, const DimSet& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

}  // namespace detail

/// Builds S/T/U/V from interaction groups.
///
/// T collects every non-empty intersection of two or more members of S. The
/// multiplicity of a corrective set is the number of members of S containing
/// it, minus one, minus the multiplicities of the corrective sets strictly
/// containing it; this makes every cut component shared by several
/// subproblems count exactly once. Sets whose multiplicity comes out zero are
/// dropped. V = |S| - sum U - 1.
inline Decomposition assemble_decomposition(std::vector<DimSet> groups, double f0, Point cut_center) {
  const std::size_t n = cut_center.size();
  std::vector<bool> covered(n, false);
  for (auto& s : groups) {
    std::sort(s.begin(), s.end());
    if (s.empty() || std::adjacent_find(s.begin(), s.end()) != s.end())
      throw InvalidArgument("assemble_decomposition: groups must be non-empty sets");
    for (auto d : s) {
      if (d >= n) throw InvalidArgument("assemble_decomposition: dimension out of range");
      covered[d] = true;
    }
  }
  if (std::find(covered.begin(), covered.end(), false) != covered.end())
    throw InvalidArgument("assemble_decomposition: groups do not cover every dimension");

  std::set<DimSet> family;
  for (std::size_t i = 0; i < groups.size(); ++i)
    for (std::size_t l = i + 1; l < groups.size(); ++l)
      if (auto x = detail::intersect(groups[i], groups[l]); !x.empty()) family.insert(std::move(x));
  for (bool grew = true; grew;) {
    grew = false;
    std::vector<DimSet> add;
    for (const auto& x : family)
      for (const auto& s : groups)
        if (auto y = detail::intersect(x, s); !y.empty() && !family.count(y)) add.push_back(std::move(y));
    for (auto& y : add) grew |= family.insert(std::move(y)).second;
  }

  std::vector<DimSet> by_size(family.begin(), family.end());
  std::stable_sort(by_size.begin(), by_size.end(),
                   [](const DimSet& a, const DimSet& b) { return a.size() > b.size(); });
  std::map<DimSet, long> mult;
  for (const auto& x : by_size) {
    long u = -1;
    for (const auto& s : groups) u += detail::is_subset(x, s);
    for (const auto& [y, uy] : mult)
      if (y.size() > x.size() && detail::is_subset(x, y)) u -= uy;
    mult[x] = u;
  }

  Decomposition d;
  d.S = std::move(groups);
  std::sort(d.S.begin(), d.S.end());
  long total = 0;
  for (const auto& [x, u] : mult)
    if (u != 0) {
      d.T.push_back(x);
      d.U.push_back(u);
      total += u;
    }
  d.V = static_cast<long>(d.S.size()) - total - 1;
  d.f0 = f0;
  d.cut_center = std::move(cut_center);
  return d;
}

/// Evaluates a sub-model; receives the full-dimensional point with every
/// input outside the sub-model's set already held at the cut center.
using SubEvaluator = std::function<double(std::span<const double>)>;

inline double combined_eval(const Decomposition& d, const std::map<DimSet, SubEvaluator>& subs,
                            std::span<const double> query) {
  auto term = [&](const DimSet& set) {
    auto it = subs.find(set);
    if (it == subs.end()) {
      std::string s;
      for (auto v : set) s += " " + std::to_string(v);
      throw InvalidArgument("combined_eval: no sub-model for set {" + s + " }");
    }
    Point q = d.cut_center;
    for (auto v : set) q[v] = query[v];
    return it->second(q);
  };
  double sum = 0.0;
  for (const auto& s : d.S) sum += term(s);
  for (std::size_t j = 0; j < d.T.size(); ++j) sum -= static_cast<double>(d.U[j]) * term(d.T[j]);
  return sum - static_cast<double>(d.V) * d.f0;
}

inline Json to_json(const Decomposition& d) {
  Json j;
  j["S"] = d.S;
  j["T"] = d.T;
  j["U"] = d.U;
  j["V"] = d.V;
  j["cut_center"] = d.cut_center;
  j["f0"] = d.f0;
  return j;
}

inline Decomposition decomposition_from_json(const Json& j) {
  Decomposition d;
  d.S = j.at("S").get<std::vector<DimSet>>();
  d.T = j.at("T").get<std::vector<DimSet>>();
  d.U = j.at("U").get<std::vector<long>>();
  d.V = j.at("V").get<long>();
  d.cut_center = j.at("cut_center").get<Point>();
  d.f0 = j.at("f0").get<double>();
  return d;
}

}  // namespace scamr
