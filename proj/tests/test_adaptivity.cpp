#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include "scamr/bench.hpp"
#include "scamr/criteria.hpp"
#include "test_util.hpp"

using namespace scamr;

namespace {

using Fn = std::function<double(std::span<const double>)>;

struct Fixture {
  Model model;
  EvaluationCache cache;
  Bounds domain;
  CutModel cut;
  ElementIds ids;
  Element root;

  Fixture(Fn f, Bounds dom)
      : model(std::move(f)),
        domain(dom),
        cut(CutModel::full(model, cache, dom)),
        root(make_root(dom, ids)) {}
};

// Max residual of a monomial-basis least-squares fit of total degree `deg`
// through (points, values), solved with normal equations.
double monomial_fit_residual(const std::vector<Point>& pts, const std::vector<double>& vals, int deg) {
  const std::size_t n = pts.front().size();
  std::vector<std::vector<int>> exps;
  std::function<void(std::vector<int>&, std::size_t, int)> gen = [&](std::vector<int>& e, std::size_t pos, int left) {
    if (pos == n) {
      exps.push_back(e);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      e[pos] = k;
      gen(e, pos + 1, left - k);
    }
    e[pos] = 0;
  };
  std::vector<int> e(n, 0);
  gen(e, 0, deg);
  Eigen::MatrixXd A(pts.size(), exps.size());
  Eigen::VectorXd b(pts.size());
  for (std::size_t r = 0; r < pts.size(); ++r) {
    for (std::size_t c = 0; c < exps.size(); ++c) {
      double v = 1.0;
      for (std::size_t i = 0; i < n; ++i) v *= std::pow(pts[r][i], exps[c][i]);
      A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
    b(static_cast<Eigen::Index>(r)) = vals[r];
  }
  const Eigen::VectorXd coef = (A.transpose() * A).ldlt().solve(A.transpose() * b);
  return (A * coef - b).cwiseAbs().maxCoeff();
}

std::vector<std::pair<double, double>> as_pairs(const Bounds& b) {
  std::vector<std::pair<double, double>> out;
  for (const auto& iv : b) out.emplace_back(iv.lo, iv.hi);
  return out;
}

}  // namespace

// --- abrupt variation -------------------------------------------------------

TEST(AbruptVariation, QuadraticAlongCenterlineIsExact) {
  Fixture fx([](std::span<const double> x) { return 3 * x[0] * x[0] + x[0] - 1 + 0.5 * x[1]; },
             Bounds{{-2, 3}, {0, 1}});
  for (std::size_t d : {0u, 1u}) {
    const auto o = check_abrupt_variation(fx.root, d, fx.cut, 1e-3);
    EXPECT_TRUE(o.satisfied);
    EXPECT_LT(o.error, 1e-10);
  }
}

TEST(AbruptVariation, ConstantGivesZero) {
  Fixture fx([](std::span<const double>) { return 4.25; }, Bounds(3, Interval{0, 1}));
  const auto o = check_abrupt_variation(fx.root, 2, fx.cut, 1e-12);
  EXPECT_NEAR(o.error, 0.0, 1e-14);
  EXPECT_TRUE(o.satisfied);
}

TEST(AbruptVariation, KinkMatchesIndependentQuadraticFit) {
  Fixture fx([](std::span<const double> x) { return std::abs(x[0] - 0.5); }, Bounds(2, Interval{0, 1}));
  const auto o = check_abrupt_variation(fx.root, 0, fx.cut, 1e-3);
  std::vector<Point> z;
  std::vector<double> v;
  for (double t : chebyshev_nodes_1d(2)) {
    z.push_back({t});
    v.push_back(std::abs(t) / 2);
  }
  const double want = monomial_fit_residual(z, v, 2);
  EXPECT_GT(want, 1e-3);
  EXPECT_NEAR(o.error, want, 1e-12);
  EXPECT_FALSE(o.satisfied);
  EXPECT_EQ(o.detail.size(), 5u);
}

TEST(AbruptVariation, NonFiniteModelValuePropagates) {
  Fixture fx([](std::span<const double> x) { return x[0] > 0.9 ? std::nan("") : 1.0; }, Bounds(1, Interval{0, 1}));
  try {
    check_abrupt_variation(fx.root, 0, fx.cut, 1e-3);
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    EXPECT_EQ(e.point(), Point{1.0});
  }
}

// --- first-level non-interaction ---------------------------------------------

TEST(FirstLevel, Examples) {
  Fixture flat([](std::span<const double>) { return -7.0; }, Bounds(2, Interval{0, 1}));
  EXPECT_TRUE(check_first_level_noninteraction(flat.root, 0, flat.cut, 1e-14).satisfied);

  Fixture lin([](std::span<const double> x) { return x[0]; }, Bounds(2, Interval{0, 1}));
  const auto along2 = check_first_level_noninteraction(lin.root, 1, lin.cut, 0.01);
  EXPECT_TRUE(along2.satisfied);
  EXPECT_EQ(along2.error, 0.0);
  const auto along1 = check_first_level_noninteraction(lin.root, 0, lin.cut, 0.01);
  EXPECT_FALSE(along1.satisfied);
  EXPECT_DOUBLE_EQ(along1.error, 0.5);
}

// --- pairwise interaction ----------------------------------------------------

TEST(Pairwise, ProductOnUnitSquareIsAQuarter) {
  Fixture fx([](std::span<const double> x) { return x[0] * x[1]; }, Bounds(2, Interval{0, 1}));
  const auto o = check_pairwise_interaction(0, 1, fx.cut, 1e-3);
  EXPECT_DOUBLE_EQ(o.error, 0.25);
  EXPECT_FALSE(o.satisfied);
  EXPECT_EQ(o.detail.size(), 4u);
}

TEST(Pairwise, BoundaryIsInclusive) {
  Fixture fx([](std::span<const double> x) { return x[0] * x[1]; }, Bounds(2, Interval{0, 1}));
  EXPECT_TRUE(check_pairwise_interaction(0, 1, fx.cut, 0.25).satisfied);
}

TEST(Pairwise, CostsNineDistinctPointsThenNothing) {
  Fixture fx([](std::span<const double> x) { return x[0] * x[1] + x[2]; }, Bounds(3, Interval{-1, 1}));
  check_pairwise_interaction(0, 2, fx.cut, 1e-3);
  EXPECT_EQ(fx.cache.evaluations(), 9u);
  // level-2 sparse grid contains every corner, axis point and the center
  fx.cut.evaluate(element_grid(fx.root, 2));
  const auto before = fx.cache.evaluations();
  check_pairwise_interaction(0, 1, fx.cut, 1e-3);
  check_pairwise_interaction(1, 2, fx.cut, 1e-3);
  EXPECT_EQ(fx.cache.evaluations(), before);
}

TEST(Pairwise, RejectsBadPair) {
  Fixture fx([](std::span<const double>) { return 0.0; }, Bounds(2, Interval{0, 1}));
  EXPECT_THROW(check_pairwise_interaction(1, 1, fx.cut, 1e-3), InvalidArgument);
  EXPECT_THROW(check_pairwise_interaction(0, 2, fx.cut, 1e-3), InvalidArgument);
}

TEST(Pairwise, F13WeakPairsPass) {
  auto c = make_case("f13");
  EvaluationCache cache;
  auto cut = CutModel::full(c.model, cache, c.domain);
  for (std::size_t i = 5; i < 10; ++i)
    for (std::size_t j = i + 1; j < 10; ++j) {
      const auto o = check_pairwise_interaction(i, j, cut, 2e-4);
      const double oracle = test_util::pair_interaction_error(bench::f13, as_pairs(c.domain), i, j);
      EXPECT_NEAR(o.error, oracle, 1e-14);
      EXPECT_TRUE(o.satisfied) << i << "," << j << " error " << o.error;
    }
  // the two strongest inputs do interact at this tolerance
  EXPECT_FALSE(check_pairwise_interaction(0, 1, cut, 2e-4).satisfied);
}

TEST(Pairwise, AdditiveSeparabilityNullTest) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + trial % 5;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = test_util::uniform_point(1, -3, 3, gen)[0], b[i] = test_util::uniform_point(1, 0.5, 4, gen)[0];
    Fn f = [a, b](std::span<const double> x) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += a[i] * std::sin(b[i] * x[i]) + (i % 2 ? std::exp(x[i]) : x[i] * x[i] * x[i]);
      return s;
    };
    Bounds dom;
    for (std::size_t i = 0; i < n; ++i) {
      const double lo = test_util::uniform_point(1, -2, 0, gen)[0];
      dom.push_back({lo, lo + test_util::uniform_point(1, 0.1, 3, gen)[0]});
    }
    Fixture fx(f, dom);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) EXPECT_LT(check_pairwise_interaction(i, j, fx.cut, 1e-12).error, 1e-12);
  }
}

// Randomized monomial sums: every pair verdict agrees with direct evaluation
// of the corner residual, and with the structural coupling where the mixed
// difference cannot vanish.
TEST(Pairwise, MatchesBruteForceOnRandomMonomialSums) {
  std::mt19937_64 gen(1234);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const auto f = test_util::random_monomial_sum(n, gen);
    Bounds dom(n, Interval{0.0, 1.0});
    Fixture fx([f](std::span<const double> x) { return f(x); }, dom);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double oracle = test_util::pair_interaction_error(f, as_pairs(dom), i, j);
        const auto o = check_pairwise_interaction(i, j, fx.cut, 1e-3);
        EXPECT_NEAR(o.error, oracle, 1e-12);
        EXPECT_EQ(o.satisfied, oracle <= 1e-3);
        if (!f.coupled_pairs().count({i, j})) EXPECT_LT(o.error, 1e-12);
      }
  }
}

// --- element gPC residual ----------------------------------------------------

TEST(GpcResidual, QuadraticIsExactAtOrderTwo) {
  std::mt19937_64 gen(8);
  for (std::size_t n = 1; n <= 5; ++n) {
    const auto f = test_util::random_polynomial(n, 2, gen);
    Fixture fx(f, Bounds(n, Interval{-0.5, 2.0}));
    const auto [o, s] = check_gpc_residual(fx.root, 2, fx.cut, 1e-8);
    EXPECT_TRUE(o.satisfied);
    EXPECT_LT(o.error, 1e-10);
    const auto x = test_util::uniform_point(n, -0.5, 2.0, gen);
    EXPECT_NEAR(surrogate_eval(s, x), f(x), 1e-9);
  }
}

TEST(GpcResidual, LinearAtOrderOneOnLevelOne) {
  Fixture fx([](std::span<const double> x) { return 2 * x[0] - x[1] + 0.5 * x[2]; }, Bounds(3, Interval{0, 1}));
  const auto [o, s] = check_gpc_residual(fx.root, 1, fx.cut, 1e-10);
  EXPECT_TRUE(o.satisfied);
  EXPECT_EQ(fx.cache.evaluations(), 7u);
  EXPECT_EQ(s.coefficients.size(), 4u);
}

TEST(GpcResidual, F7FailsAndMatchesMonomialOracle) {
  Fixture fx(bench::f7, Bounds(2, Interval{0, 1}));
  const auto [o, s] = check_gpc_residual(fx.root, 2, fx.cut, 0.01);
  EXPECT_FALSE(o.satisfied);
  std::vector<Point> pts = element_grid(fx.root, 2);
  std::vector<double> vals;
  for (const auto& p : pts) vals.push_back(bench::f7(p));
  EXPECT_NEAR(o.error, monomial_fit_residual(pts, vals, 2), 1e-9);
}

TEST(GpcResidual, HarvestsPointsStrictlyInside) {
  Fixture fx([](std::span<const double> x) { return std::abs(x[0] - 0.3); }, Bounds(1, Interval{0, 1}));
  fx.cut.evaluate(std::vector<Point>{{0.3}, {0.31}, {1.0}});
  const auto [o, s] = check_gpc_residual(fx.root, 2, fx.cut, 1e-3);
  // 5 grid nodes (one of them 1.0, already known) plus 0.3 and 0.31
  EXPECT_EQ(o.detail.size(), 7u);
}

TEST(GpcResidual, RejectsOrderThree) {
  Fixture fx([](std::span<const double>) { return 0.0; }, Bounds(1, Interval{0, 1}));
  EXPECT_THROW(check_gpc_residual(fx.root, 3, fx.cut, 1e-3), InvalidArgument);
}

// --- ranking ---------------------------------------------------------------

TEST(Ranking, SmoothQuadraticIsEmpty) {
  Fixture fx([](std::span<const double> x) { return x[0] * x[0] + x[0] * x[1]; }, Bounds(2, Interval{0, 1}));
  EXPECT_TRUE(rank_critical_dimensions(fx.root, fx.cut, 1e-8).empty());
}

TEST(Ranking, ScaledKinksOrderedByMagnitude) {
  Fixture fx([](std::span<const double> x) { return std::abs(x[0] - 0.5) + 0.1 * std::abs(x[1] - 0.5); },
             Bounds(2, Interval{0, 1}));
  const auto r = rank_critical_dimensions(fx.root, fx.cut, 1e-3);
  ASSERT_EQ(r.entries.size(), 2u);
  EXPECT_EQ(r.entries[0].first, 0u);
  EXPECT_EQ(r.entries[1].first, 1u);
  EXPECT_GT(r.entries[0].second, r.entries[1].second);
  EXPECT_NEAR(r.entries[1].second, 0.1 * r.entries[0].second, 1e-14);
}

TEST(Ranking, TiesGoToLowerIndex) {
  Fixture fx([](std::span<const double> x) { return std::abs(x[2] - 0.5) + std::abs(x[0] - 0.5); },
             Bounds(3, Interval{0, 1}));
  const auto r = rank_critical_dimensions(fx.root, fx.cut, 1e-3);
  ASSERT_EQ(r.entries.size(), 2u);
  EXPECT_EQ(r.entries[0].first, 0u);
  EXPECT_EQ(r.entries[1].first, 2u);
}

TEST(Ranking, F10BothCritical) {
  Fixture fx(bench::f10, Bounds(2, Interval{0, 1}));
  const auto r = rank_critical_dimensions(fx.root, fx.cut, 1e-3);
  EXPECT_EQ(r.entries.size(), 2u);
}

TEST(Ranking, RepeatedCallsIdenticalAndFree) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = test_util::random_monomial_sum(4, gen);
    Fixture fx([f](std::span<const double> x) { return std::abs(f(x)); }, Bounds(4, Interval{-1, 1}));
    const auto a = rank_critical_dimensions(fx.root, fx.cut, 1e-3);
    const auto calls = fx.cache.evaluations();
    const auto b = rank_critical_dimensions(fx.root, fx.cut, 1e-3);
    EXPECT_EQ(a.entries, b.entries);
    EXPECT_EQ(a.errors, b.errors);
    EXPECT_EQ(fx.cache.evaluations(), calls);
    for (std::size_t k = 1; k < a.entries.size(); ++k) EXPECT_GE(a.entries[k - 1].second, a.entries[k].second);
  }
}

// --- shared properties ---------------------------------------------------------

TEST(CriteriaProperties, QuadraticExactnessEverywhere) {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + trial % 4;
    const auto f = test_util::random_polynomial(n, 2, gen);
    Fixture fx(f, Bounds(n, Interval{-1.5, 0.5}));
    for (std::size_t d = 0; d < n; ++d) EXPECT_LT(check_abrupt_variation(fx.root, d, fx.cut, 1e-10).error, 1e-10);
    EXPECT_LT(check_gpc_residual(fx.root, 2, fx.cut, 1e-10).first.error, 1e-10);
  }
}

TEST(CriteriaProperties, MonotoneTolerance) {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = test_util::random_monomial_sum(3, gen);
    Fixture fx([f](std::span<const double> x) { return std::sin(3 * f(x)); }, Bounds(3, Interval{0, 1}));
    for (double eps : {1e-4, 1e-3, 1e-2, 1e-1}) {
      const auto a1 = check_abrupt_variation(fx.root, 0, fx.cut, eps);
      const auto p1 = check_pairwise_interaction(0, 1, fx.cut, eps);
      const auto g1 = check_gpc_residual(fx.root, 2, fx.cut, eps).first;
      const auto calls = fx.cache.evaluations();
      for (double wider : {eps * 1.5, eps * 10}) {
        if (a1.satisfied) EXPECT_TRUE(check_abrupt_variation(fx.root, 0, fx.cut, wider).satisfied);
        if (p1.satisfied) EXPECT_TRUE(check_pairwise_interaction(0, 1, fx.cut, wider).satisfied);
        if (g1.satisfied) EXPECT_TRUE(check_gpc_residual(fx.root, 2, fx.cut, wider).first.satisfied);
      }
      EXPECT_EQ(fx.cache.evaluations(), calls);
      EXPECT_EQ(a1.satisfied, a1.error < eps);
      EXPECT_EQ(g1.satisfied, g1.error < eps);
    }
  }
}

// --- evaluation cache ------------------------------------------------------

TEST(Cache, EachPointEvaluatedOnceUnderThreads) {
  std::mutex m;
  std::map<Point, int> calls;
  Model f = [&](std::span<const double> x) {
    std::lock_guard lock(m);
    ++calls[Point(x.begin(), x.end())];
    return x[0] + 2 * x[1];
  };
  EvaluationCache cache;
  std::vector<Point> pts;
  for (int i = 0; i < 50; ++i) pts.push_back({i * 0.1, 1.0});
  auto doubled = pts;
  doubled.insert(doubled.end(), pts.begin(), pts.end());
  std::vector<std::jthread> pool;
  for (int t = 0; t < 6; ++t) pool.emplace_back([&] { cache.evaluate_batch(doubled, f, 3); });
  pool.clear();
  EXPECT_EQ(calls.size(), 50u);
  for (const auto& [p, c] : calls) EXPECT_EQ(c, 1) << p[0];
  EXPECT_EQ(cache.evaluations(), 50u);
}

TEST(Cache, RoundingMergesAffineNoiseAndReturnsFirstValue) {
  int calls = 0;
  Model f = [&](std::span<const double> x) {
    ++calls;
    return x[0];
  };
  EvaluationCache cache;
  const double a = 0.1 + 0.2;
  EXPECT_EQ(cache.get_or_evaluate(Point{a}, f), a);
  EXPECT_EQ(cache.get_or_evaluate(Point{0.3}, f), a);
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(cache.get_or_evaluate(Point{0.3 + 1e-9}, f), 0.3 + 1e-9);
  EXPECT_EQ(calls, 2);
}

TEST(Cache, NonFiniteIsAnErrorAndNotCounted) {
  EvaluationCache cache;
  Model f = [](std::span<const double> x) { return x[0] < 0 ? std::numeric_limits<double>::infinity() : 1.0; };
  EXPECT_THROW(cache.get_or_evaluate(Point{-1.0}, f), EvaluationError);
  EXPECT_EQ(cache.evaluations(), 0u);
  EXPECT_FALSE(cache.lookup(Point{-1.0}).has_value());
  Model thrower = [](std::span<const double>) -> double { throw std::runtime_error("solver diverged"); };
  try {
    cache.get_or_evaluate(Point{5.0}, thrower);
    FAIL();
  } catch (const EvaluationError& e) {
    EXPECT_NE(std::string(e.what()).find("solver diverged"), std::string::npos);
    EXPECT_EQ(e.point(), Point{5.0});
  }
}

TEST(Cache, InsertionOrderIndependentOfThreads) {
  auto run = [](unsigned threads) {
    EvaluationCache cache;
    Model f = [](std::span<const double> x) { return std::sin(x[0]) * x[1]; };
    std::vector<Point> pts;
    for (int i = 0; i < 40; ++i) pts.push_back({i * 0.05, 1.0 - i * 0.01});
    cache.evaluate_batch(pts, f, threads);
    std::vector<Point> order;
    cache.for_each([&](const Point& p, double) { order.push_back(p); });
    return order;
  };
  EXPECT_EQ(run(1), run(4));
}

TEST(CutModelTest, EmbedRestrictAndHarvest) {
  Model f = [](std::span<const double> x) { return x[0] + 10 * x[1] + 100 * x[2]; };
  EvaluationCache cache;
  const Bounds dom(3, Interval{0, 1});
  auto full = CutModel::full(f, cache, dom);
  full.evaluate(std::vector<Point>{{0.5, 0.2, 0.5}, {0.5, 0.9, 0.5}, {0.1, 0.2, 0.5}, {0.5, 0.5, 0.5}});

  CutModel cut(f, cache, {1}, Point{0.5, 0.5, 0.5}, dom);
  EXPECT_EQ(cut.embed(Point{0.25}), (Point{0.5, 0.25, 0.5}));
  EXPECT_EQ(cut.restrict(Point{0.1, 0.2, 0.3}), Point{0.2});
  cut.harvest_from_cache();
  EXPECT_EQ(cut.known_count(), 3u);
  EXPECT_EQ(cut.known_in(Bounds{{0.2, 0.9}}, true).size(), 1u);
  EXPECT_EQ(cut.known_in(Bounds{{0.2, 0.9}}, false).size(), 3u);
  EXPECT_DOUBLE_EQ(cut.evaluate(Point{0.9}), 0.5 + 9 + 50);
  EXPECT_EQ(cache.evaluations(), 4u);
}
