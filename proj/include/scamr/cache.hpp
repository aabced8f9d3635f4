#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <deque>
#include <exception>
#include <future>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <unordered_map>
#include <vector>

#include "scamr/types.hpp"

namespace scamr {

/// Memoized model evaluations, the unit of cost accounting.
///
/// Points are identified by their coordinates rounded to 12 decimal places so
/// that affine round-off does not defeat reuse; the stored coordinates and
/// values are the exact ones from the first request. Insert-or-get is
/// linearized per point: concurrent requests for the same point wait on a
/// single evaluation.
class EvaluationCache {
 public:
  using Key = std::vector<std::int64_t>;

  static constexpr double kKeyScale = 1e12;
  static constexpr double kKeyRange = 9.0e6;

  static Key key_of(std::span<const double> x) {
    Key k(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!(std::abs(x[i]) < kKeyRange))
        throw InvalidArgument("cache key: coordinate out of representable range " + format_point(x));
      k[i] = std::llround(x[i] * kKeyScale);
    }
    return k;
  }

  double get_or_evaluate(std::span<const double> x, const Model& model) {
    std::vector<Point> one{Point(x.begin(), x.end())};
    return evaluate_batch(one, model, 1).front();
  }

  /// Values for `points`, evaluating each distinct missing point once. Misses
  /// are claimed in request order, so the cache's insertion order does not
  /// depend on `threads`.
  std::vector<double> evaluate_batch(const std::vector<Point>& points, const Model& model,
                                     unsigned threads = 1) {
    std::vector<std::shared_future<double>> futures;
    std::vector<std::pair<std::size_t, std::promise<double>>> owned;
    futures.reserve(points.size());
    {
      std::lock_guard lock(mutex_);
      for (const auto& p : points) {
        Key k = key_of(p);
        auto it = index_.find(k);
        if (it != index_.end()) {
          futures.push_back(entries_[it->second].value);
          continue;
        }
        std::promise<double> promise;
        Entry e{p, promise.get_future().share()};
        futures.push_back(e.value);
        index_.emplace(std::move(k), entries_.size());
        owned.emplace_back(entries_.size(), std::move(promise));
        entries_.push_back(std::move(e));
      }
    }

    auto work = [&](std::size_t slot) {
      auto& [entry, promise] = owned[slot];
      const Point& p = point_at(entry);
      try {
        const double v = model(p);
        if (!std::isfinite(v)) throw EvaluationError(p, "model returned a non-finite value");
        promise.set_value(v);
        evaluations_.fetch_add(1, std::memory_order_relaxed);
      } catch (const EvaluationError&) {
        promise.set_exception(std::current_exception());
      } catch (const std::exception& ex) {
        promise.set_exception(std::make_exception_ptr(EvaluationError(p, ex.what())));
      }
    };

    if (threads <= 1 || owned.size() <= 1) {
      for (std::size_t s = 0; s < owned.size(); ++s) work(s);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::jthread> pool;
      const auto n = std::min<std::size_t>(threads, owned.size());
      for (std::size_t t = 0; t < n; ++t)
        pool.emplace_back([&] {
          for (std::size_t s; (s = next.fetch_add(1)) < owned.size();) work(s);
        });
    }

    std::vector<double> out;
    out.reserve(points.size());
    for (auto& f : futures) out.push_back(f.get());
    return out;
  }

  std::optional<double> lookup(std::span<const double> x) const {
    std::lock_guard lock(mutex_);
    auto it = index_.find(key_of(x));
    if (it == index_.end()) return std::nullopt;
    const auto& f = entries_[it->second].value;
    if (f.wait_for(std::chrono::seconds(0)) != std::future_status::ready) return std::nullopt;
    try {
      return f.get();
    } catch (...) {
      return std::nullopt;
    }
  }

  bool contains(std::span<const double> x) const { return lookup(x).has_value(); }

  /// Number of distinct points successfully evaluated.
  std::size_t evaluations() const noexcept { return evaluations_.load(); }

  /// Visits every successfully evaluated point in insertion order.
  template <typename Fn>
  void for_each(Fn&& fn) const {
    std::lock_guard lock(mutex_);
    for (const auto& e : entries_) {
      if (e.value.wait_for(std::chrono::seconds(0)) != std::future_status::ready) continue;
      double v;
      try {
        v = e.value.get();
      } catch (...) {
        continue;
      }
      fn(e.point, v);
    }
  }

 private:
  struct Entry {
    Point point;
    std::shared_future<double> value;
  };

  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::uint64_t h = 1469598103934665603ull;
      for (auto v : k) {
        h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      }
      return static_cast<std::size_t>(h);
    }
  };

  const Point& point_at(std::size_t i) const {
    std::lock_guard lock(mutex_);
    return entries_[i].point;
  }

  mutable std::mutex mutex_;
  std::deque<Entry> entries_;
  std::unordered_map<Key, std::size_t, KeyHash> index_;
  std::atomic<std::size_t> evaluations_{0};
};

/// Wraps a model so that every call goes through `cache`.
inline Model cached(const Model& model, EvaluationCache& cache) {
  return [&cache, model](std::span<const double> x) { return cache.get_or_evaluate(x, model); };
}

}  // namespace scamr
