#include <gtest/gtest.h>

#include <cmath>
#include <mutex>
#include <random>
#include <set>

#include "scamr/bench.hpp"
#include "scamr/driver.hpp"
#include "test_util.hpp"

using namespace scamr;

namespace {

ScamrConfig config(double eps1, double eps2 = 1e-3, unsigned iters = 10, double vmin = 1e-3) {
  ScamrConfig c;
  c.epsilon1 = eps1;
  c.epsilon2 = eps2;
  c.max_iterations = iters;
  c.min_volume_fraction = vmin;
  return c;
}

/// Wraps a model and records every call it receives.
struct Recorder {
  std::mutex m;
  std::vector<Point> calls;
  Model wrap(Model inner) {
    return [this, inner](std::span<const double> x) {
      {
        std::lock_guard lock(m);
        calls.emplace_back(x.begin(), x.end());
      }
      return inner(x);
    };
  }
};

std::size_t leaf_count_with(const ElementTree& t, NodeStatus s) {
  std::size_t k = 0;
  for (const auto* nd : t.leaves()) k += nd->status == s;
  return k;
}

}  // namespace

TEST(ConfigTest, Validation) {
  EXPECT_NO_THROW(ScamrConfig{}.validate());
  EXPECT_THROW(config(0.0).validate(), ConfigError);
  EXPECT_THROW(config(1e-3, -1.0).validate(), ConfigError);
  EXPECT_THROW(config(1e-3, 1e-3, 0).validate(), ConfigError);
  EXPECT_THROW(config(1e-3, 1e-3, 10, 1.0).validate(), ConfigError);
  EXPECT_THROW(config(1e-3, 1e-3, 10, 0.0).validate(), ConfigError);
  EXPECT_THROW(run_scamr(bench::f1, unit_box(2), config(std::nan(""))), ConfigError);
}

TEST(ConfigTest, JsonRoundTripAndTypeErrors) {
  auto c = config(2e-3, 3e-2, 7, 0.25);
  c.rng_seed = 99;
  EXPECT_EQ(to_json(config_from_json(to_json(c))), to_json(c));
  EXPECT_THROW(config_from_json(Json::parse(R"({"epsilon1": "tight"})")), ConfigError);
}

// --- exactness classes -------------------------------------------------------

TEST(Exactness, LinearFinishesInPhaseOne) {
  std::mt19937_64 gen(31);
  for (std::size_t n : {2u, 3u, 10u, 50u}) {
    const auto a = test_util::uniform_point(n + 1, -1, 1, gen);
    Model f = [a](std::span<const double> x) {
      double s = a.back();
      for (std::size_t i = 0; i < x.size(); ++i) s += a[i] * x[i];
      return s;
    };
    const Bounds dom(n, Interval{-0.5, 1.5});
    const auto s = run_scamr(f, dom, config(1e-8));
    EXPECT_EQ(s.phase, 1);
    EXPECT_EQ(evaluation_count(s), 2 * n + 1);
    const auto x = test_util::uniform_point(n, -0.5, 1.5, gen);
    EXPECT_NEAR(extract_value(s, x), f(x), 1e-10);
  }
}

TEST(Exactness, QuadraticFinishesInPhaseThree) {
  std::mt19937_64 gen(32);
  for (std::size_t n : {2u, 5u}) {
    Model f = [](std::span<const double> x) {
      double s = 0.5;
      for (std::size_t i = 0; i < x.size(); ++i) s += (1.0 + 0.1 * i) * x[i] * x[i] - x[i];
      return s + 0.7 * x[0] * x[1];
    };
    const auto s = run_scamr(f, unit_box(n), config(1e-8));
    EXPECT_EQ(s.phase, 3);
    EXPECT_EQ(evaluation_count(s), 2 * n * n + 2 * n + 1);
    for (int k = 0; k < 20; ++k) {
      const auto x = test_util::uniform_point(n, 0, 1, gen);
      EXPECT_NEAR(extract_value(s, x), f(x), 1e-10);
    }
  }
}

TEST(Exactness, F1IsThirteenEvaluations) {
  const auto s = run_scamr(bench::f1, unit_box(2), config(1e-6));
  EXPECT_EQ(s.phase, 3);
  EXPECT_EQ(evaluation_count(s), 13u);
  ASSERT_EQ(s.trees.size(), 1u);
  const auto& leaf = *s.trees[0].nodes[0].surrogate;
  std::mt19937_64 gen(1);
  for (int k = 0; k < 100; ++k) {
    const auto x = test_util::uniform_point(2, 0, 1, gen);
    EXPECT_NEAR(extract_value(s, x), bench::f1(x), 1e-10);
    EXPECT_EQ(extract_value(s, x), surrogate_eval(leaf, x));
  }
  EXPECT_NEAR(estimate_mean(s), 2.0 / 3.0, 1e-12);
}

TEST(Exactness, ConstantAndSquareMeans) {
  const auto c = run_scamr([](std::span<const double>) { return 2.5; }, unit_box(3), config(1e-6));
  EXPECT_EQ(c.phase, 1);
  EXPECT_NEAR(estimate_mean(c), 2.5, 1e-14);
  EXPECT_EQ(evaluation_count(c), 7u);

  const auto sq = run_scamr([](std::span<const double> x) { return x[0] * x[0]; }, Bounds{{-1, 1}}, config(1e-6));
  EXPECT_EQ(sq.phase, 3);
  EXPECT_NEAR(estimate_mean(sq), 1.0 / 3.0, 1e-10);
}

// --- determinism and cost accounting ----------------------------------------

TEST(Determinism, BundleIsBitIdenticalAcrossRunsAndThreads) {
  auto c = config(1e-3, 1e-3, 8, 1e-3);
  const auto a = to_json(run_scamr(bench::f11, unit_box(4), c)).dump();
  const auto b = to_json(run_scamr(bench::f11, unit_box(4), c)).dump();
  c.threads = 4;
  const auto t = to_json(run_scamr(bench::f11, unit_box(4), c)).dump();
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, t);
}

TEST(CostAccounting, NoDuplicateModelCalls) {
  for (const char* id : {"f7", "f11", "f13"}) {
    const auto bc = make_case(id);
    Recorder rec;
    auto c = config(1e-2, 1e-3, 6, 1e-3);
    c.threads = 3;
    const auto s = run_scamr(rec.wrap(bc.model), bc.domain, c);
    std::set<Point> distinct(rec.calls.begin(), rec.calls.end());
    EXPECT_EQ(distinct.size(), rec.calls.size()) << id;
    EXPECT_EQ(rec.calls.size(), evaluation_count(s)) << id;

    std::mt19937_64 gen(3);
    for (int k = 0; k < 50; ++k) {
      Point x;
      for (const auto& iv : bc.domain) x.push_back(test_util::uniform_point(1, iv.lo, iv.hi, gen)[0]);
      extract_value(s, x);
    }
    estimate_mean(s);
    EXPECT_EQ(rec.calls.size(), evaluation_count(s));
  }
}

TEST(CostAccounting, MonotoneInTolerance) {
  std::size_t prev = 0;
  for (double eps : {0.1, 0.05, 0.025}) {
    const auto s = run_scamr(bench::f7, unit_box(2), config(eps));
    EXPECT_GE(evaluation_count(s), prev) << eps;
    prev = evaluation_count(s);
  }
}

TEST(CostAccounting, SharedCacheReportsCountAfterFailure) {
  EvaluationCache cache;
  RunOptions opt;
  opt.cache = &cache;
  Model f = [](std::span<const double> x) { return x[0] > 0.9 && x[1] > 0.9 ? std::nan("") : x[0] * x[0] * x[1]; };
  EXPECT_THROW(run_scamr(f, unit_box(2), config(1e-6), opt), EvaluationError);
  EXPECT_GT(cache.evaluations(), 0u);
}

// --- refinement structure ----------------------------------------------------

TEST(Refinement, LeavesTileAtEverySweep) {
  for (const char* id : {"f7", "f10", "f12"}) {
    const auto bc = make_case(id);
    std::size_t sweeps = 0;
    RunOptions opt;
    opt.observer = [&](const ElementTree& t, const std::vector<std::size_t>&) {
      ++sweeps;
      double total = 0.0;
      for (const auto& nd : t.nodes)
        if (nd.is_leaf()) total += hypervolume_fraction(nd.element, t.root());
      EXPECT_NEAR(total, 1.0, 1e-12);
    };
    const auto s = run_scamr(bc.model, bc.domain, config(1e-3), opt);
    EXPECT_EQ(s.phase, 4);
    EXPECT_GT(sweeps, 0u);

    std::mt19937_64 gen(5);
    for (const auto& t : s.trees) {
      double total = 0.0;
      for (const auto* leaf : t.leaves()) {
        total += hypervolume_fraction(leaf->element, t.root());
        EXPECT_TRUE(leaf->surrogate.has_value());
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
      for (int k = 0; k < 300; ++k) {
        const auto x = test_util::uniform_point(t.dims.size(), 0, 1, gen);
        int owners = 0;
        for (const auto* leaf : t.leaves()) owners += owns(leaf->element, t.root().bounds, x);
        EXPECT_EQ(owners, 1);
        EXPECT_TRUE(owns(t.nodes[t.locate(x)].element, t.root().bounds, x));
      }
    }
  }
}

TEST(Refinement, F10LeavesConvergedOrDepthLimited) {
  const auto c = config(1e-3, 1e-3, 12, 1e-4);
  std::size_t sweeps = 0;
  RunOptions opt;
  opt.observer = [&](const ElementTree&, const std::vector<std::size_t>&) { ++sweeps; };
  const auto s = run_scamr(bench::f10, unit_box(2), c, opt);
  ASSERT_EQ(s.trees.size(), 1u);
  const auto& t = s.trees[0];
  for (const auto* leaf : t.leaves()) {
    EXPECT_TRUE(leaf->status == NodeStatus::converged_p2 || leaf->status == NodeStatus::converged_p1_fallback);
    if (leaf->status == NodeStatus::converged_p1_fallback) EXPECT_EQ(leaf->element.depth, sweeps);
  }
  EXPECT_GT(leaf_count_with(t, NodeStatus::converged_p2), 0u);
  // converged leaves honour the residual tolerance at their own grid nodes
  for (const auto* leaf : t.leaves()) {
    if (leaf->status != NodeStatus::converged_p2) continue;
    for (const auto& p : element_grid(leaf->element, 2)) EXPECT_LT(std::abs(surrogate_eval(*leaf->surrogate, p) - bench::f10(p)), 1e-3);
  }
}

TEST(Refinement, SmoothQuadraticSubproblemIsOneLeaf) {
  Model f = [](std::span<const double> x) { return x[0] * x[0] - 3 * x[1] + x[0] * x[1]; };
  EvaluationCache cache;
  ElementIds ids;
  const auto t = refine_subproblem({0, 1}, f, cache, unit_box(2), config(1e-6), ids);
  ASSERT_EQ(t.nodes.size(), 1u);
  EXPECT_EQ(t.nodes[0].status, NodeStatus::converged_p2);
  EXPECT_THROW(refine_subproblem({}, f, cache, unit_box(2), config(1e-6), ids), InvalidArgument);
}

TEST(Refinement, SingleCriticalDimensionBisectsOnce) {
  Model f = [](std::span<const double> x) { return std::abs(x[0] - 0.3) + x[1]; };
  EvaluationCache cache;
  ElementIds ids;
  const auto t = refine_subproblem({0, 1}, f, cache, unit_box(2), config(1e-6, 1e-3, 1), ids);
  EXPECT_EQ(t.nodes[0].children.size(), 2u);
  EXPECT_EQ(t.nodes[1].element.bounds[1], (Interval{0, 1}));
}

TEST(Refinement, IterationLimitClosesWithFallbacks) {
  Model rough = [](std::span<const double> x) { return std::abs(std::sin(40 * x[0])) + std::abs(std::sin(37 * x[1])); };
  EvaluationCache cache;
  ElementIds ids;
  std::size_t sweeps = 0;
  const auto t = refine_subproblem({0, 1}, rough, cache, unit_box(2), config(1e-6, 1e-3, 1, 0.5), ids, nullptr,
                                   [&](const ElementTree&, const std::vector<std::size_t>&) { ++sweeps; });
  EXPECT_EQ(sweeps, 1u);
  EXPECT_EQ(t.leaves().size(), 4u);
  EXPECT_EQ(leaf_count_with(t, NodeStatus::converged_p1_fallback), 4u);
}

// A single kink: each sweep leaves the two halves of the kinked element open,
// so the open fraction after sweep k is 2^(1-k).
TEST(Refinement, VolumeFractionStoppingRule) {
  Model f = [](std::span<const double> x) { return std::abs(x[0] - 0.3); };
  EvaluationCache cache;
  ElementIds ids;
  std::vector<double> fractions;
  const auto t = refine_subproblem({0}, f, cache, unit_box(1), config(1e-9, 1e-3, 50, 0.2), ids, nullptr,
                                   [&](const ElementTree& tr, const std::vector<std::size_t>& open) {
                                     double v = 0.0;
                                     for (auto k : open) v += hypervolume_fraction(tr.nodes[k].element, tr.root());
                                     fractions.push_back(v);
                                   });
  EXPECT_EQ(fractions, (std::vector<double>{1.0, 0.5, 0.25, 0.125}));
  EXPECT_EQ(leaf_count_with(t, NodeStatus::converged_p1_fallback), 2u);
  EXPECT_EQ(leaf_count_with(t, NodeStatus::converged_p2), 3u);
}

TEST(Refinement, F7LeavesConcentrateOnTheRing) {
  const auto s = run_scamr(bench::f7, unit_box(2), config(0.01));
  ASSERT_EQ(s.trees.size(), 1u);
  const double r = std::sqrt(0.3);
  const double band_area = std::numbers::pi * 0.1 * r;  // quarter annulus of half-width 0.1
  std::size_t near = 0, far = 0;
  for (const auto* leaf : s.trees[0].leaves()) {
    const auto c = leaf->element.center();
    (std::abs(std::hypot(c[0], c[1]) - r) <= 0.1 ? near : far)++;
  }
  const double ratio = (near / band_area) / (far / (1.0 - band_area));
  EXPECT_GE(ratio, 4.0) << near << " near, " << far << " far";
}

// --- queries ------------------------------------------------------------------

TEST(Queries, CenterRecoversF0OnSeparableModel) {
  Model f = [](std::span<const double> x) { return std::abs(x[0] - 0.3) + x[1] * x[1] + std::sin(3 * x[2]); };
  const auto c = config(1e-4, 1e-4, 20, 1e-6);
  const auto s = run_scamr(f, unit_box(3), c);
  EXPECT_EQ(s.phase, 4);
  EXPECT_EQ(s.decomposition.S, (std::vector<DimSet>{{0}, {1}, {2}}));
  const Point center{0.5, 0.5, 0.5};
  EXPECT_NEAR(extract_value(s, center), f(center), 3 * c.epsilon1);
  std::mt19937_64 gen(6);
  for (int k = 0; k < 200; ++k) {
    const auto x = test_util::uniform_point(3, 0, 1, gen);
    EXPECT_NEAR(extract_value(s, x), f(x), 1e-2);
  }
}

TEST(Queries, OutsideDomainThrows) {
  const auto s = run_scamr(bench::f1, unit_box(2), config(1e-6));
  EXPECT_THROW(extract_value(s, Point{1.5, 0.5}), InvalidArgument);
  EXPECT_THROW(extract_value(s, Point{0.5}), InvalidArgument);
  EXPECT_NO_THROW(extract_value(s, Point{1.0, 0.0}));
}

TEST(Queries, MeanComposesThroughDecomposition) {
  // additive in two groups: exact means add up. The kink sits off the cut
  // center; at 0.5 the x0-x1 coupling is invisible along the cut lines.
  Model f = [](std::span<const double> x) { return std::abs(x[0] - 0.3) * x[1] + std::exp(x[2]); };
  const auto s = run_scamr(f, unit_box(3), config(1e-6, 1e-6, 30, 1e-8));
  EXPECT_EQ(s.decomposition.S, (std::vector<DimSet>{{0, 1}, {2}}));
  EXPECT_NEAR(estimate_mean(s), 0.29 * 0.5 + (std::exp(1.0) - 1.0), 1e-4);
}

TEST(Bundle, RoundTripPreservesEverything) {
  const auto s = run_scamr(bench::f11, unit_box(4), config(1e-3));
  const auto j = to_json(s);
  const auto back = surrogate_bundle_from_json(Json::parse(j.dump()));
  EXPECT_EQ(to_json(back).dump(), j.dump());
  EXPECT_EQ(evaluation_count(back), evaluation_count(s));
  EXPECT_EQ(estimate_mean(back), estimate_mean(s));
  std::mt19937_64 gen(8);
  for (int k = 0; k < 200; ++k) {
    const auto x = test_util::uniform_point(4, 0, 1, gen);
    EXPECT_EQ(extract_value(back, x), extract_value(s, x));
  }
  auto broken = j;
  broken["subproblems"].erase(0);
  EXPECT_THROW(surrogate_bundle_from_json(broken), InvalidArgument);
  EXPECT_THROW(surrogate_bundle_from_json(Json::parse("{}")), InvalidArgument);
}

TEST(RunLogTest, RecordsEveryPhase) {
  std::vector<std::string> streamed;
  RunLog log([&](const LogRecord& r) { streamed.push_back(r.phase); });
  RunOptions opt;
  opt.log = &log;
  run_scamr(bench::f10, unit_box(2), config(1e-2), opt);
  ASSERT_FALSE(log.records().empty());
  EXPECT_EQ(streamed.size(), log.records().size());
  EXPECT_EQ(log.records().front().phase, "global-p1");
  std::set<std::string> phases;
  for (const auto& r : log.records()) phases.insert(r.phase);
  EXPECT_TRUE(phases.count("global-checks"));
  EXPECT_TRUE(phases.count("refine"));
  std::size_t prev = 0;
  for (const auto& r : log.records()) {
    EXPECT_GE(r.evaluations, prev);
    prev = r.evaluations;
  }
  const auto j = to_json(log.records().back());
  EXPECT_TRUE(j.contains("decision"));
}
