#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "scamr/types.hpp"

namespace scamr {

/// Total-degree multi-index set in graded lexicographic order.
///
/// Indices are stored densely (one row of `dim()` degrees per term) together
/// with a sparse view of the non-zero entries, which is what evaluation loops
/// use in high dimension.
class MultiIndexSet {
 public:
  using Degree = std::uint16_t;

  struct Entry {
    std::size_t dim;
    Degree degree;
  };

  MultiIndexSet() = default;

  std::size_t dim() const noexcept { return dim_; }
  unsigned order() const noexcept { return order_; }
  std::size_t size() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }

  std::span<const Degree> operator[](std::size_t i) const {
    return {dense_.data() + i * dim_, dim_};
  }

  std::span<const Entry> nonzeros(std::size_t i) const {
    return {sparse_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }

  unsigned total_degree(std::size_t i) const {
    unsigned s = 0;
    for (auto e : nonzeros(i)) s += e.degree;
    return s;
  }

  friend bool operator==(const MultiIndexSet& a, const MultiIndexSet& b) {
    return a.dim_ == b.dim_ && a.order_ == b.order_ && a.dense_ == b.dense_;
  }

  friend MultiIndexSet total_degree_indices(std::size_t n, unsigned p);

 private:
  void push(const std::vector<Degree>& row) {
    if (offsets_.empty()) offsets_.push_back(0);
    dense_.insert(dense_.end(), row.begin(), row.end());
    for (std::size_t d = 0; d < row.size(); ++d)
      if (row[d] != 0) sparse_.push_back({d, row[d]});
    offsets_.push_back(sparse_.size());
  }

  std::size_t dim_ = 0;
  unsigned order_ = 0;
  std::vector<Degree> dense_;
  std::vector<Entry> sparse_;
  std::vector<std::size_t> offsets_;
};

namespace detail {

// Emits all tuples of `row[pos..]` summing to `remaining`, larger leading
// components first.
inline void emit_graded(std::vector<MultiIndexSet::Degree>& row, std::size_t pos,
                        unsigned remaining,
                        const std::function<void(const std::vector<MultiIndexSet::Degree>&)>& out) {
  if (pos + 1 == row.size()) {
    row[pos] = static_cast<MultiIndexSet::Degree>(remaining);
    out(row);
    row[pos] = 0;
    return;
  }
  for (int k = static_cast<int>(remaining); k >= 0; --k) {
    row[pos] = static_cast<MultiIndexSet::Degree>(k);
    emit_graded(row, pos + 1, remaining - static_cast<unsigned>(k), out);
  }
  row[pos] = 0;
}

}  // namespace detail

/// All n-tuples with component sum <= p, ordered by total degree and then
/// lexicographically descending, e.g. (0,0),(1,0),(0,1),(2,0),(1,1),(0,2).
inline MultiIndexSet total_degree_indices(std::size_t n, unsigned p) {
  if (n == 0) throw InvalidArgument("total_degree_indices: dimension must be >= 1");
  MultiIndexSet set;
  set.dim_ = n;
  set.order_ = p;
  std::vector<MultiIndexSet::Degree> row(n, 0);
  for (unsigned degree = 0; degree <= p; ++degree)
    detail::emit_graded(row, 0, degree, [&](const auto& r) { set.push(r); });
  return set;
}

/// (n+p)! / (n! p!) without overflow for the sizes used here.
inline std::size_t total_degree_cardinality(std::size_t n, unsigned p) {
  std::size_t c = 1;
  for (unsigned k = 1; k <= p; ++k) c = c * (n + k) / k;
  return c;
}

}  // namespace scamr
