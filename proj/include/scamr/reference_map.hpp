#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "scamr/types.hpp"

namespace scamr {

/// Slack allowed when a point sits on a box face up to round-off.
inline constexpr double kFaceTolerance = 1e-12;

/// True when `x` lies in the closed box, up to a width-relative slack.
inline bool in_closed_box(const Bounds& b, std::span<const double> x) {
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double slack = kFaceTolerance * (1.0 + b[i].width());
    if (x[i] < b[i].lo - slack || x[i] > b[i].hi + slack) return false;
  }
  return true;
}

/// Strict interior test: no coordinate within round-off of a face.
inline bool in_open_box(const Bounds& b, std::span<const double> x) {
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double slack = kFaceTolerance * (1.0 + b[i].width());
    if (!(x[i] > b[i].lo + slack && x[i] < b[i].hi - slack)) return false;
  }
  return true;
}

/// eta_i = -1 + 2 (x_i - a_i) / (b_i - a_i)
inline Point to_reference(const Bounds& b, std::span<const double> x) {
  if (x.size() != b.size())
    throw InvalidArgument("to_reference: dimension mismatch");
  if (!in_closed_box(b, x)) throw InvalidArgument("to_reference: point outside element " + format_point(x));
  Point eta(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double v = -1.0 + 2.0 * (x[i] - b[i].lo) / b[i].width();
    eta[i] = v > 1.0 ? 1.0 : (v < -1.0 ? -1.0 : v);
  }
  return eta;
}

/// Inverse of to_reference. Reference 0 maps exactly to the interval midpoint
/// and +-1 exactly to the faces, so shared nodes of neighbouring elements
/// coincide bit for bit.
inline Point from_reference(const Bounds& b, std::span<const double> eta) {
  if (eta.size() != b.size())
    throw InvalidArgument("from_reference: dimension mismatch");
  Point x(eta.size());
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (eta[i] == -1.0)
      x[i] = b[i].lo;
    else if (eta[i] == 1.0)
      x[i] = b[i].hi;
    else if (eta[i] == 0.0)
      x[i] = b[i].mid();
    else
      x[i] = b[i].mid() + 0.5 * eta[i] * b[i].width();
  }
  return x;
}

}  // namespace scamr
