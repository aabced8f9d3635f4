#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scamr/cache.hpp"
#include "scamr/criteria.hpp"
#include "scamr/cut_model.hpp"
#include "scamr/decomposition.hpp"
#include "scamr/element.hpp"
#include "scamr/gpc.hpp"
#include "scamr/grids.hpp"
#include "scamr/json_io.hpp"

namespace scamr {

struct ScamrConfig {
  double epsilon1 = 1e-3;
  double epsilon2 = 1e-3;
  unsigned max_iterations = 10;
  double min_volume_fraction = 1e-3;
  /// Seeds validation sampling only; the algorithm itself is deterministic.
  std::uint64_t rng_seed = 0;
  /// Worker threads for batched model evaluation. Output does not depend on it.
  unsigned threads = 1;

  void validate() const {
    if (!(epsilon1 > 0.0) || !std::isfinite(epsilon1)) throw ConfigError("epsilon1", "must be positive");
    if (!(epsilon2 > 0.0) || !std::isfinite(epsilon2)) throw ConfigError("epsilon2", "must be positive");
    if (max_iterations < 1) throw ConfigError("max_iterations", "must be at least 1");
    if (!(min_volume_fraction > 0.0 && min_volume_fraction < 1.0))
      throw ConfigError("min_volume_fraction", "must lie in (0, 1)");
  }
};

enum class NodeStatus { split, converged_p2, converged_p1, converged_p1_fallback };

inline const char* to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::split: return "split";
    case NodeStatus::converged_p2: return "converged-p2";
    case NodeStatus::converged_p1: return "converged-p1";
    case NodeStatus::converged_p1_fallback: return "converged-p1-fallback";
  }
  return "?";
}

inline NodeStatus status_from_string(const std::string& s) {
  if (s == "split") return NodeStatus::split;
  if (s == "converged-p2") return NodeStatus::converged_p2;
  if (s == "converged-p1") return NodeStatus::converged_p1;
  if (s == "converged-p1-fallback") return NodeStatus::converged_p1_fallback;
  throw InvalidArgument("unknown element status '" + s + "'");
}

struct TreeNode {
  Element element;
  NodeStatus status = NodeStatus::split;
  std::optional<GpcSurrogate> surrogate;
  std::vector<std::size_t> children;

  bool is_leaf() const noexcept { return children.empty(); }
};

/// Refinement tree of one subproblem, in the subproblem's local coordinates.
/// nodes[0] is the root.
struct ElementTree {
  DimSet dims;
  std::vector<TreeNode> nodes;

  const Element& root() const { return nodes.front().element; }

  std::size_t locate(std::span<const double> local) const {
    const Bounds& rb = root().bounds;
    if (!in_closed_box(rb, local)) throw InvalidArgument("query outside subproblem domain " + format_point(local));
    // snap faces of the root so boundary round-off resolves inside
    Point x(local.begin(), local.end());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], rb[i].lo, rb[i].hi);
    std::size_t at = 0;
    while (!nodes[at].is_leaf()) {
      std::size_t next = at;
      for (auto c : nodes[at].children)
        if (owns(nodes[c].element, rb, x)) {
          next = c;
          break;
        }
      if (next == at) throw ScamrError("point location failed at " + format_point(x));
      at = next;
    }
    return at;
  }

  double eval(std::span<const double> local) const {
    const auto& leaf = nodes[locate(local)];
    Point x(local.begin(), local.end());
    const Bounds& b = leaf.element.bounds;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], b[i].lo, b[i].hi);
    return surrogate_eval(*leaf.surrogate, x);
  }

  /// Hypervolume-weighted average of the leaves' constant terms.
  double mean() const {
    double m = 0.0;
    for (const auto& nd : nodes)
      if (nd.is_leaf()) m += hypervolume_fraction(nd.element, root()) * surrogate_mean(*nd.surrogate);
    return m;
  }

  std::vector<const TreeNode*> leaves() const {
    std::vector<const TreeNode*> out;
    for (const auto& nd : nodes)
      if (nd.is_leaf()) out.push_back(&nd);
    return out;
  }
};

/// The composed surrogate: a decomposition plus one tree per member of S
/// (first) and T (after), in the decomposition's order.
struct ScamrSurrogate {
  Bounds domain;
  ScamrConfig config;
  Decomposition decomposition;
  std::vector<ElementTree> trees;
  std::size_t total_evaluations = 0;
  /// 1: accepted the global first-order fit; 3: accepted the global
  /// second-order fit; 4: adaptive refinement per subproblem.
  int phase = 0;

  std::size_t dim() const noexcept { return domain.size(); }
};

struct LogRecord {
  std::string phase;
  DimSet subproblem;
  std::optional<ElementId> element;
  std::string criterion;
  double error = 0.0;
  std::string decision;
  std::size_t evaluations = 0;
};

inline Json to_json(const LogRecord& r) {
  Json j;
  j["phase"] = r.phase;
  j["subproblem"] = r.subproblem;
  j["element"] = r.element ? Json(*r.element) : Json(nullptr);
  j["criterion"] = r.criterion;
  j["error"] = r.error;
  j["decision"] = r.decision;
  j["evaluations"] = r.evaluations;
  return j;
}

/// Collects run-log records; optionally forwards each one as it happens.
class RunLog {
 public:
  RunLog() = default;
  explicit RunLog(std::function<void(const LogRecord&)> sink) : sink_(std::move(sink)) {}

  void add(LogRecord r) {
    if (sink_) sink_(r);
    records_.push_back(std::move(r));
  }
  const std::vector<LogRecord>& records() const noexcept { return records_; }

 private:
  std::function<void(const LogRecord&)> sink_;
  std::vector<LogRecord> records_;
};

/// Called after every refinement sweep with the tree so far and the elements
/// still open.
using SweepObserver = std::function<void(const ElementTree&, const std::vector<std::size_t>& open)>;

namespace detail {

inline void log(RunLog* log, const char* phase, const DimSet& sub, std::optional<ElementId> id,
                const char* criterion, double error, const std::string& decision, std::size_t evals) {
  if (log) log->add({phase, sub, id, criterion, error, decision, evals});
}

inline std::vector<std::size_t> top_dims(const std::vector<double>& errors, std::size_t count) {
  std::vector<std::size_t> order(errors.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return errors[a] > errors[b]; });
  order.resize(std::min(count, order.size()));
  return order;
}

/// First-order fit on the points already known in the closed element; the
/// element's level-1 grid is added when those are too few or degenerate.
inline GpcSurrogate fallback_fit(const Element& e, CutModel& cut) {
  auto basis = total_degree_indices(e.dim(), 1);
  auto fit_known = [&]() -> std::optional<std::vector<double>> {
    auto known = cut.known_in(e.bounds, /*strict=*/false);
    if (known.size() < e.dim() + 2) return std::nullopt;
    std::vector<Point> eta;
    std::vector<double> vals;
    for (auto& s : known) {
      eta.push_back(to_reference(e.bounds, s.point));
      vals.push_back(s.value);
    }
    try {
      return fit_least_squares(basis, eta, vals);
    } catch (const DegenerateDesignError&) {
      return std::nullopt;
    }
  };
  auto coeffs = fit_known();
  if (!coeffs) {
    cut.evaluate(element_grid(e, 1));
    coeffs = fit_known();
    if (!coeffs) throw ScamrError("first-order fallback fit failed for element " + std::to_string(e.id));
  }
  return make_surrogate(std::move(basis), std::move(*coeffs), e.bounds);
}

}  // namespace detail

/// Breadth-first adaptive refinement of one subproblem.
///
/// Each sweep ranks the critical dimensions of every open element; elements
/// with critical dimensions are bisected along the top one or two. The rest
/// are tested with a second-order least-squares fit and either converge or
/// are bisected along their two largest abrupt-variation errors. After
/// `max_iterations` sweeps, or once the open elements' total volume fraction
/// drops below `min_volume_fraction`, the open elements are closed with
/// first-order fits.
inline ElementTree refine_subproblem(CutModel& cut, const ScamrConfig& config, ElementIds& ids,
                                     RunLog* log = nullptr, const SweepObserver& observer = {}) {
  ElementTree tree;
  tree.dims = cut.dims();
  tree.nodes.push_back({make_root(cut.domain(), ids), NodeStatus::split, std::nullopt, {}});
  const double eps1 = config.epsilon1;
  const auto evals = [&] { return cut.cache().evaluations(); };

  std::vector<std::size_t> open{0};
  for (unsigned iter = 0; !open.empty();) {
    {
      std::vector<Point> prefetch;
      for (auto k : open)
        for (std::size_t d = 0; d < tree.nodes[k].element.dim(); ++d)
          for (auto& p : centerline_points(tree.nodes[k].element, d, 2)) prefetch.push_back(std::move(p));
      cut.evaluate(prefetch);
    }
    std::vector<CriticalRanking> ranks;
    for (auto k : open) ranks.push_back(rank_critical_dimensions(tree.nodes[k].element, cut, eps1));
    {
      std::vector<Point> prefetch;
      for (std::size_t a = 0; a < open.size(); ++a)
        if (ranks[a].empty())
          for (auto& p : element_grid(tree.nodes[open[a]].element, 2)) prefetch.push_back(std::move(p));
      cut.evaluate(prefetch);
    }

    std::vector<std::size_t> next;
    auto split = [&](std::size_t k, const std::vector<std::size_t>& dims) {
      auto children = subdivide(tree.nodes[k].element, dims, ids);
      for (auto& c : children) {
        tree.nodes[k].children.push_back(tree.nodes.size());
        next.push_back(tree.nodes.size());
        tree.nodes.push_back({std::move(c), NodeStatus::split, std::nullopt, {}});
      }
    };

    for (std::size_t a = 0; a < open.size(); ++a) {
      const std::size_t k = open[a];
      const ElementId id = tree.nodes[k].element.id;
      const auto& rank = ranks[a];
      if (!rank.empty()) {
        std::vector<std::size_t> dims{rank.entries[0].first};
        if (rank.entries.size() > 1) dims.push_back(rank.entries[1].first);
        std::sort(dims.begin(), dims.end());
        detail::log(log, "refine", tree.dims, id, "abrupt-variation", rank.entries[0].second,
                    "split " + std::to_string(dims.size()) + "d", evals());
        split(k, dims);
        continue;
      }
      auto [outcome, surrogate] = check_gpc_residual(tree.nodes[k].element, 2, cut, eps1);
      if (outcome.satisfied) {
        tree.nodes[k].status = NodeStatus::converged_p2;
        tree.nodes[k].surrogate = std::move(surrogate);
        detail::log(log, "refine", tree.dims, id, "gpc-residual", outcome.error, "converged-p2", evals());
      } else {
        auto dims = detail::top_dims(rank.errors, 2);
        std::sort(dims.begin(), dims.end());
        detail::log(log, "refine", tree.dims, id, "gpc-residual", outcome.error,
                    "split " + std::to_string(dims.size()) + "d", evals());
        split(k, dims);
      }
    }

    ++iter;
    if (observer) observer(tree, next);
    if (next.empty()) break;
    double open_fraction = 0.0;
    for (auto k : next) open_fraction += hypervolume_fraction(tree.nodes[k].element, tree.root());
    if (iter >= config.max_iterations || open_fraction < config.min_volume_fraction) {
      for (auto k : next) {
        tree.nodes[k].surrogate = detail::fallback_fit(tree.nodes[k].element, cut);
        tree.nodes[k].status = NodeStatus::converged_p1_fallback;
        detail::log(log, "refine", tree.dims, tree.nodes[k].element.id, "stopping-rule", open_fraction,
                    "converged-p1-fallback", evals());
      }
      break;
    }
    open = std::move(next);
  }
  return tree;
}

/// Same, building the cut through the domain midpoint for `dims`.
inline ElementTree refine_subproblem(const DimSet& dims, const Model& model, EvaluationCache& cache,
                                     const Bounds& domain, const ScamrConfig& config, ElementIds& ids,
                                     RunLog* log = nullptr, const SweepObserver& observer = {}) {
  if (dims.empty()) throw InvalidArgument("refine_subproblem: empty dimension set");
  Point c(domain.size());
  for (std::size_t i = 0; i < domain.size(); ++i) c[i] = domain[i].mid();
  CutModel cut(model, cache, dims, std::move(c), domain, config.threads);
  cut.harvest_from_cache();
  return refine_subproblem(cut, config, ids, log, observer);
}

namespace detail {

inline ElementTree single_leaf(const Element& root, GpcSurrogate s, NodeStatus status) {
  ElementTree t;
  for (std::size_t i = 0; i < root.dim(); ++i) t.dims.push_back(i);
  t.nodes.push_back({root, status, std::move(s), {}});
  return t;
}

inline Decomposition whole_domain(const Bounds& domain, double f0) {
  DimSet all(domain.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  Point c(domain.size());
  for (std::size_t i = 0; i < domain.size(); ++i) c[i] = domain[i].mid();
  return assemble_decomposition({all}, f0, std::move(c));
}

}  // namespace detail

struct RunOptions {
  RunLog* log = nullptr;
  SweepObserver observer;
  /// Use this cache instead of a private one (lets callers read the
  /// evaluation count after a failure).
  EvaluationCache* cache = nullptr;
};

/// Builds the composed surrogate of `model` on the hyperbox `domain`.
inline ScamrSurrogate run_scamr(const Model& model, const Bounds& domain, const ScamrConfig& config,
                                const RunOptions& options = {}) {
  config.validate();
  EvaluationCache own_cache;
  EvaluationCache& cache = options.cache ? *options.cache : own_cache;
  RunLog* log = options.log;
  ElementIds ids;
  const Element root = make_root(domain, ids);
  const std::size_t n = domain.size();
  const double eps1 = config.epsilon1;
  const DimSet all = [&] {
    DimSet a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = i;
    return a;
  }();

  ScamrSurrogate out;
  out.domain = domain;
  out.config = config;
  CutModel full = CutModel::full(model, cache, domain, config.threads);

  auto global_projection = [&](unsigned level, unsigned order) {
    const QuadratureRule rule = sparse_grid(n, level);
    std::vector<Point> pts;
    for (const auto& eta : rule.nodes) pts.push_back(from_reference(root, eta));
    const auto values = full.evaluate(pts);
    auto basis = total_degree_indices(n, order);
    auto coeffs = fit_discrete_projection(basis, rule.nodes, rule.weights, values);
    const double err = max_residual(basis, coeffs, rule.nodes, values);
    return std::make_pair(err, make_surrogate(std::move(basis), std::move(coeffs), domain));
  };

  // (1) global first-order fit on the level-1 grid
  {
    auto [err, s] = global_projection(1, 1);
    const bool ok = err < eps1;
    detail::log(log, "global-p1", all, root.id, "gpc-residual", err, ok ? "accept" : "continue",
                cache.evaluations());
    if (ok) {
      out.decomposition = detail::whole_domain(domain, full.evaluate(root.center()));
      out.trees.push_back(detail::single_leaf(root, std::move(s), NodeStatus::converged_p1));
      out.total_evaluations = cache.evaluations();
      out.phase = 1;
      return out;
    }
  }

  // (2) per-dimension checks, pairwise interactions, decomposition
  {
    std::vector<Point> prefetch;
    for (std::size_t d = 0; d < n; ++d)
      for (auto& p : centerline_points(root, d, 2)) prefetch.push_back(std::move(p));
    full.evaluate(prefetch);
  }
  const double f0 = full.evaluate(root.center());
  bool any_critical = false;
  std::set<std::size_t> flat;
  for (std::size_t d = 0; d < n; ++d) {
    const auto abrupt = check_abrupt_variation(root, d, full, eps1);
    const auto level = check_first_level_noninteraction(root, d, full, eps1);
    any_critical |= !abrupt.satisfied;
    if (level.satisfied) flat.insert(d);
    detail::log(log, "global-checks", {d}, root.id, "abrupt-variation", abrupt.error,
                abrupt.satisfied ? "smooth" : "critical", cache.evaluations());
    detail::log(log, "global-checks", {d}, root.id, "first-level-noninteraction", level.error,
                level.satisfied ? "flat" : "active", cache.evaluations());
  }
  std::vector<std::size_t> active;
  for (std::size_t d = 0; d < n; ++d)
    if (!flat.count(d)) active.push_back(d);
  {
    std::vector<Point> prefetch;
    for (std::size_t a = 0; a < active.size(); ++a)
      for (std::size_t b = a + 1; b < active.size(); ++b)
        for (auto& p : interaction_corners(domain, active[a], active[b])) prefetch.push_back(std::move(p));
    full.evaluate(prefetch);
  }
  std::map<DimPair, CriterionOutcome> pairs;
  for (std::size_t a = 0; a < active.size(); ++a)
    for (std::size_t b = a + 1; b < active.size(); ++b) {
      auto o = check_pairwise_interaction(active[a], active[b], full, config.epsilon2);
      detail::log(log, "global-checks", {active[a], active[b]}, root.id, "pairwise-interaction", o.error,
                  o.satisfied ? "independent" : "interacting", cache.evaluations());
      pairs.emplace(DimPair{active[a], active[b]}, std::move(o));
    }
  const auto graph = build_interaction_graph(pairs, flat, n);
  Point center = root.center();
  Decomposition decomposition = assemble_decomposition(derive_groups(graph), f0, center);

  // (3) global second-order fit when no dimension is critical
  if (!any_critical) {
    auto [err, s] = global_projection(2, 2);
    const bool ok = err < eps1;
    detail::log(log, "global-p2", all, root.id, "gpc-residual", err, ok ? "accept" : "continue",
                cache.evaluations());
    if (ok) {
      out.decomposition = detail::whole_domain(domain, f0);
      out.trees.push_back(detail::single_leaf(root, std::move(s), NodeStatus::converged_p2));
      out.total_evaluations = cache.evaluations();
      out.phase = 3;
      return out;
    }
  }

  // (4) adaptive refinement of every subproblem
  std::vector<DimSet> subs = decomposition.S;
  subs.insert(subs.end(), decomposition.T.begin(), decomposition.T.end());
  for (const auto& sub : subs)
    out.trees.push_back(refine_subproblem(sub, model, cache, domain, config, ids, log, options.observer));
  out.decomposition = std::move(decomposition);
  out.total_evaluations = cache.evaluations();
  out.phase = 4;
  return out;
}

inline std::size_t evaluation_count(const ScamrSurrogate& s) noexcept { return s.total_evaluations; }

/// Sub-model evaluators for combined_eval, one per member of S and T.
inline std::map<DimSet, SubEvaluator> sub_evaluators(const ScamrSurrogate& s) {
  std::map<DimSet, SubEvaluator> subs;
  for (const auto& t : s.trees)
    subs.emplace(t.dims, [&t](std::span<const double> full) {
      Point local(t.dims.size());
      for (std::size_t k = 0; k < t.dims.size(); ++k) local[k] = full[t.dims[k]];
      return t.eval(local);
    });
  return subs;
}

inline double extract_value(const ScamrSurrogate& s, std::span<const double> query) {
  if (query.size() != s.dim()) throw InvalidArgument("extract_value: dimension mismatch");
  if (!in_closed_box(s.domain, query)) throw InvalidArgument("extract_value: query outside domain " + format_point(query));
  const auto& d = s.decomposition;
  auto term = [&](std::size_t tree) {
    const auto& t = s.trees[tree];
    Point local(t.dims.size());
    for (std::size_t k = 0; k < t.dims.size(); ++k) local[k] = query[t.dims[k]];
    return t.eval(local);
  };
  double v = 0.0;
  for (std::size_t i = 0; i < d.S.size(); ++i) v += term(i);
  for (std::size_t j = 0; j < d.T.size(); ++j) v -= static_cast<double>(d.U[j]) * term(d.S.size() + j);
  return v - static_cast<double>(d.V) * d.f0;
}

inline double estimate_mean(const ScamrSurrogate& s) {
  const auto& d = s.decomposition;
  double m = 0.0;
  for (std::size_t i = 0; i < d.S.size(); ++i) m += s.trees[i].mean();
  for (std::size_t j = 0; j < d.T.size(); ++j) m -= static_cast<double>(d.U[j]) * s.trees[d.S.size() + j].mean();
  return m - static_cast<double>(d.V) * d.f0;
}

// --- serialization -------------------------------------------------------

inline Json to_json(const ScamrConfig& c) {
  Json j;
  j["epsilon1"] = c.epsilon1;
  j["epsilon2"] = c.epsilon2;
  j["max_iterations"] = c.max_iterations;
  j["min_volume_fraction"] = c.min_volume_fraction;
  j["rng_seed"] = c.rng_seed;
  return j;
}

inline ScamrConfig config_from_json(const Json& j, ScamrConfig c = {}) {
  auto read = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const std::exception&) {
      throw ConfigError(key, "has the wrong type");
    }
  };
  read("epsilon1", c.epsilon1);
  read("epsilon2", c.epsilon2);
  read("max_iterations", c.max_iterations);
  read("min_volume_fraction", c.min_volume_fraction);
  read("rng_seed", c.rng_seed);
  read("threads", c.threads);
  return c;
}

/// JSON array of {id, parent, bounds, status, surrogate?}.
inline Json to_json(const ElementTree& t) {
  Json arr = Json::array();
  for (const auto& nd : t.nodes) {
    Json e;
    e["id"] = nd.element.id;
    e["parent"] = nd.element.parent ? Json(*nd.element.parent) : Json(nullptr);
    e["bounds"] = bounds_to_json(nd.element.bounds);
    e["status"] = to_string(nd.status);
    if (nd.surrogate) e["surrogate"] = to_json(*nd.surrogate);
    arr.push_back(std::move(e));
  }
  return arr;
}

inline ElementTree tree_from_json(const DimSet& dims, const Json& arr) {
  ElementTree t;
  t.dims = dims;
  std::map<ElementId, std::size_t> at;
  for (const auto& e : arr) {
    TreeNode nd;
    nd.element.id = e.at("id").get<ElementId>();
    if (!e.at("parent").is_null()) nd.element.parent = e.at("parent").get<ElementId>();
    nd.element.bounds = bounds_from_json(e.at("bounds"));
    nd.status = status_from_string(e.at("status").get<std::string>());
    if (e.contains("surrogate")) nd.surrogate = surrogate_from_json(e.at("surrogate"));
    if (nd.element.parent) {
      auto p = at.find(*nd.element.parent);
      if (p == at.end()) throw InvalidArgument("element tree: parent listed after child");
      nd.element.depth = t.nodes[p->second].element.depth + 1;
      t.nodes[p->second].children.push_back(t.nodes.size());
    } else if (!t.nodes.empty()) {
      throw InvalidArgument("element tree: more than one root");
    }
    at[nd.element.id] = t.nodes.size();
    t.nodes.push_back(std::move(nd));
  }
  if (t.nodes.empty()) throw InvalidArgument("element tree: empty");
  for (const auto& nd : t.nodes)
    if (nd.is_leaf() && !nd.surrogate) throw InvalidArgument("element tree: leaf without surrogate");
  return t;
}

inline Json to_json(const ScamrSurrogate& s) {
  Json j;
  j["format"] = "scamr-bundle/1";
  j["domain"] = bounds_to_json(s.domain);
  j["config"] = to_json(s.config);
  j["phase"] = s.phase;
  j["evaluations"] = s.total_evaluations;
  j["decomposition"] = to_json(s.decomposition);
  Json subs = Json::array();
  for (const auto& t : s.trees) {
    Json sj;
    sj["dims"] = t.dims;
    sj["elements"] = to_json(t);
    subs.push_back(std::move(sj));
  }
  j["subproblems"] = std::move(subs);
  return j;
}

inline ScamrSurrogate surrogate_bundle_from_json(const Json& j) {
  if (j.value("format", "") != "scamr-bundle/1") throw InvalidArgument("not a surrogate bundle");
  ScamrSurrogate s;
  s.domain = bounds_from_json(j.at("domain"));
  s.config = config_from_json(j.at("config"));
  s.phase = j.at("phase").get<int>();
  s.total_evaluations = j.at("evaluations").get<std::size_t>();
  s.decomposition = decomposition_from_json(j.at("decomposition"));
  for (const auto& sj : j.at("subproblems"))
    s.trees.push_back(tree_from_json(sj.at("dims").get<DimSet>(), sj.at("elements")));
  if (s.trees.size() != s.decomposition.S.size() + s.decomposition.T.size())
    throw InvalidArgument("bundle: subproblem count does not match decomposition");
  return s;
}

}  // namespace scamr
