#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "scamr/grids.hpp"
#include "scamr/reference_map.hpp"
#include "scamr/types.hpp"

namespace scamr {

using ElementId = std::uint64_t;

/// Monotone id source; ids follow creation order.
class ElementIds {
 public:
  ElementId next() noexcept { return next_++; }
  ElementId peek() const noexcept { return next_; }

 private:
  ElementId next_ = 0;
};

/// Axis-aligned half-open box [a_1,b_1) x ... x [a_n,b_n).
struct Element {
  Bounds bounds;
  ElementId id = 0;
  std::optional<ElementId> parent;
  unsigned depth = 0;

  std::size_t dim() const noexcept { return bounds.size(); }

  Point center() const {
    Point c(bounds.size());
    for (std::size_t i = 0; i < bounds.size(); ++i) c[i] = bounds[i].mid();
    return c;
  }

  double hypervolume() const {
    double v = 1.0;
    for (const auto& iv : bounds) v *= iv.width();
    return v;
  }
};

inline Element make_root(Bounds bounds, ElementIds& ids) {
  if (bounds.empty()) throw InvalidArgument("element needs at least one dimension");
  for (const auto& iv : bounds)
    if (!(iv.lo < iv.hi)) throw InvalidArgument("element bounds must satisfy lo < hi");
  return Element{std::move(bounds), ids.next(), std::nullopt, 0};
}

inline Point to_reference(const Element& e, std::span<const double> point) {
  return to_reference(e.bounds, point);
}

inline Point from_reference(const Element& e, std::span<const double> eta) {
  return from_reference(e.bounds, eta);
}

/// Half-open membership; faces shared with the enclosing `root` upper faces
/// are closed so that every point of the root belongs to exactly one leaf.
inline bool owns(const Element& e, const Bounds& root, std::span<const double> x) {
  for (std::size_t i = 0; i < e.bounds.size(); ++i) {
    const auto& iv = e.bounds[i];
    if (x[i] < iv.lo) return false;
    if (x[i] >= iv.hi && !(x[i] == iv.hi && iv.hi == root[i].hi)) return false;
  }
  return true;
}

/// Points along the line through the element center parallel to axis `dim`,
/// at the Chebyshev nodes of `level` mapped into [a_dim, b_dim].
inline std::vector<Point> centerline_points(const Element& e, std::size_t dim, unsigned level) {
  if (dim >= e.dim()) throw InvalidArgument("centerline_points: invalid dimension index " + std::to_string(dim));
  std::vector<Point> pts;
  for (double z : chebyshev_nodes_1d(level)) {
    Point eta(e.dim(), 0.0);
    eta[dim] = z;
    pts.push_back(from_reference(e, eta));
  }
  return pts;
}

/// The sparse grid of `level` mapped into the element.
inline std::vector<Point> element_grid(const Element& e, unsigned level) {
  const QuadratureRule rule = sparse_grid(e.dim(), level);
  std::vector<Point> pts;
  pts.reserve(rule.size());
  for (const auto& eta : rule.nodes) pts.push_back(from_reference(e, eta));
  return pts;
}

/// Bisects each listed dimension at its midpoint (2 or 4 children).
inline std::vector<Element> subdivide(const Element& e, std::span<const std::size_t> dims, ElementIds& ids) {
  if (dims.empty() || dims.size() > 2) throw InvalidArgument("subdivide: need one or two dimensions");
  for (auto d : dims)
    if (d >= e.dim()) throw InvalidArgument("subdivide: invalid dimension index " + std::to_string(d));
  if (dims.size() == 2 && dims[0] == dims[1]) throw InvalidArgument("subdivide: repeated dimension");

  std::vector<Bounds> boxes{e.bounds};
  for (auto d : dims) {
    std::vector<Bounds> next;
    for (const auto& b : boxes) {
      Bounds lower = b, upper = b;
      const double m = b[d].mid();
      lower[d].hi = m;
      upper[d].lo = m;
      next.push_back(std::move(lower));
      next.push_back(std::move(upper));
    }
    boxes = std::move(next);
  }
  std::vector<Element> children;
  for (auto& b : boxes) children.push_back(Element{std::move(b), ids.next(), e.id, e.depth + 1});
  return children;
}

inline double hypervolume_fraction(const Element& e, const Element& root) {
  double f = 1.0;
  for (std::size_t i = 0; i < e.dim(); ++i) f *= e.bounds[i].width() / root.bounds[i].width();
  return f;
}

}  // namespace scamr
