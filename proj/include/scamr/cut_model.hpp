#pragma once

#include <span>
#include <unordered_set>
#include <vector>

#include "scamr/cache.hpp"
#include "scamr/reference_map.hpp"
#include "scamr/types.hpp"

namespace scamr {

/// The model restricted to the cut through `cut_center` spanned by `dims`.
///
/// Local points have one coordinate per entry of `dims`; every other input is
/// held at the cut center. All evaluations go through the shared cache, and
/// every local point seen so far is remembered so that later fits on this cut
/// can reuse it.
class CutModel {
 public:
  CutModel(const Model& model, EvaluationCache& cache, std::vector<std::size_t> dims,
           Point cut_center, Bounds domain, unsigned threads = 1)
      : model_(&model),
        cache_(&cache),
        dims_(std::move(dims)),
        center_(std::move(cut_center)),
        threads_(threads) {
    if (dims_.empty()) throw InvalidArgument("cut model needs at least one dimension");
    for (auto d : dims_) {
      if (d >= center_.size()) throw InvalidArgument("cut dimension out of range");
      local_domain_.push_back(domain.at(d));
    }
  }

  /// A cut spanning every input.
  static CutModel full(const Model& model, EvaluationCache& cache, Bounds domain, unsigned threads = 1) {
    std::vector<std::size_t> dims(domain.size());
    Point c(domain.size());
    for (std::size_t i = 0; i < domain.size(); ++i) {
      dims[i] = i;
      c[i] = domain[i].mid();
    }
    return CutModel(model, cache, std::move(dims), std::move(c), std::move(domain), threads);
  }

  std::size_t dim() const noexcept { return dims_.size(); }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  const Point& cut_center() const noexcept { return center_; }
  const Bounds& domain() const noexcept { return local_domain_; }
  EvaluationCache& cache() noexcept { return *cache_; }

  Point embed(std::span<const double> local) const {
    Point full = center_;
    for (std::size_t k = 0; k < dims_.size(); ++k) full[dims_[k]] = local[k];
    return full;
  }

  Point restrict(std::span<const double> full) const {
    Point local(dims_.size());
    for (std::size_t k = 0; k < dims_.size(); ++k) local[k] = full[dims_[k]];
    return local;
  }

  std::vector<double> evaluate(const std::vector<Point>& local) {
    std::vector<Point> full;
    full.reserve(local.size());
    for (const auto& p : local) full.push_back(embed(p));
    auto values = cache_->evaluate_batch(full, *model_, threads_);
    for (std::size_t j = 0; j < local.size(); ++j) remember(local[j], values[j]);
    return values;
  }

  double evaluate(std::span<const double> local) {
    return evaluate(std::vector<Point>{Point(local.begin(), local.end())}).front();
  }

  /// Adopts every cached point that lies on this cut.
  void harvest_from_cache() {
    std::vector<std::int64_t> center_key = EvaluationCache::key_of(center_);
    std::vector<bool> on_cut(center_.size(), false);
    for (auto d : dims_) on_cut[d] = true;
    std::vector<std::pair<Point, double>> found;
    cache_->for_each([&](const Point& p, double v) {
      for (std::size_t i = 0; i < p.size(); ++i)
        if (!on_cut[i] && std::llround(p[i] * EvaluationCache::kKeyScale) != center_key[i]) return;
      found.emplace_back(restrict(p), v);
    });
    for (auto& [p, v] : found) remember(p, v);
  }

  struct Sample {
    Point point;
    double value;
  };

  /// Known local points inside `box`: closed box, or strict interior.
  std::vector<Sample> known_in(const Bounds& box, bool strict) const {
    std::vector<Sample> out;
    for (std::size_t j = 0; j < points_.size(); ++j) {
      const bool inside = strict ? in_open_box(box, points_[j]) : in_closed_box(box, points_[j]);
      if (inside) out.push_back({points_[j], values_[j]});
    }
    return out;
  }

  std::size_t known_count() const noexcept { return points_.size(); }

 private:
  void remember(const Point& local, double value) {
    if (keys_.insert(EvaluationCache::key_of(local)).second) {
      points_.push_back(local);
      values_.push_back(value);
    }
  }

  struct KeyHash {
    std::size_t operator()(const EvaluationCache::Key& k) const noexcept {
      std::size_t h = 0;
      for (auto v : k) h = h * 1000003u ^ std::hash<std::int64_t>{}(v);
      return h;
    }
  };

  const Model* model_;
  EvaluationCache* cache_;
  std::vector<std::size_t> dims_;
  Point center_;
  Bounds local_domain_;
  unsigned threads_;
  std::vector<Point> points_;
  std::vector<double> values_;
  std::unordered_set<EvaluationCache::Key, KeyHash> keys_;
};

}  // namespace scamr
