#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "scamr/elliptic.hpp"
#include "scamr/reference_map.hpp"
#include "scamr/types.hpp"

namespace scamr {

struct BenchmarkCase {
  std::string id;
  std::size_t dim = 0;
  Bounds domain;
  Model model;
  /// Closed-form mean over the domain, when one exists.
  std::optional<double> analytic_mean;
  /// Validation sample count used when the caller does not choose one.
  std::size_t default_validation = 100000;
};

namespace bench {

inline bool outside_corner(std::span<const double> x) { return x[0] > 0.5 || x[1] > 0.5; }

inline double f1(std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; }
inline double f2(std::span<const double> x) { return std::sin(4 * x[0]) * std::sin(4 * x[1]); }

inline double f3(std::span<const double> x) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += x[i] * x[i];
  return s;
}

inline double f4(std::span<const double> x) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += std::sin(4 * x[i]);
  return s;
}

inline double f5(std::span<const double> x) {
  return std::sin(4 * x[0]) * std::sin(4 * x[1]) + std::sin(4 * x[2]) * std::sin(4 * x[3]);
}

inline double f6(std::span<const double> x) {
  double s = 0.0;
  for (int i = 0; i < 10; ++i) s += std::sin(4 * x[i]);
  return s;
}

inline double ring(std::span<const double> x) {
  return 1.0 / (std::abs(0.3 - x[0] * x[0] - x[1] * x[1]) + 0.1);
}

inline double tail_sum(std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 2; i < x.size(); ++i) s += x[i];
  return s;
}

inline double f7(std::span<const double> x) { return ring(x); }
inline double f8(std::span<const double> x) { return ring(x) + tail_sum(x); }
inline double f9(std::span<const double> x) { return ring(x) + tail_sum(x); }

inline double bump(std::span<const double> x) {
  return outside_corner(x) ? 0.0 : std::sin(std::numbers::pi * x[0]) * std::sin(std::numbers::pi * x[1]);
}

inline double f10(std::span<const double> x) { return bump(x); }
inline double f11(std::span<const double> x) { return bump(x) + tail_sum(x); }
inline double f12(std::span<const double> x) { return bump(x) + tail_sum(x); }

/// On y in [-sqrt3, sqrt3]^10 with x = 2 y folded in.
inline double f13(std::span<const double> y) {
  double s = 0.0;
  for (int i = 0; i < 10; ++i) s += 0.1 / std::ldexp(1.0, i) * 2.0 * y[i];
  return 1.0 / (1.0 + s);
}

inline std::vector<double> f14_coefficients(std::size_t n) {
  std::vector<double> c(n);
  for (std::size_t i = 1; i <= n; ++i) c[i - 1] = std::exp(-35.0 * static_cast<double>(i) / static_cast<double>(n - 1));
  return c;
}

inline double f14(std::span<const double> x, std::span<const double> c) {
  if (outside_corner(x)) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += c[i] * x[i];
  return std::exp(s);
}

/// (e^{c u} - 1) / c, continuous at c = 0.
inline double exp_factor(double c, double upper) { return c == 0.0 ? upper : std::expm1(c * upper) / c; }

}  // namespace bench

/// Mean of f14 over [0,1]^n with coefficients `c`.
inline double analytic_mean_f14(std::span<const double> c) {
  if (c.size() < 2) throw InvalidArgument("analytic_mean_f14: needs n >= 2");
  double m = bench::exp_factor(c[0], 0.5) * bench::exp_factor(c[1], 0.5);
  for (std::size_t i = 2; i < c.size(); ++i) m *= bench::exp_factor(c[i], 1.0);
  return m;
}

inline double analytic_mean_f14(std::size_t n) {
  if (n < 2) throw InvalidArgument("analytic_mean_f14: needs n >= 2");
  return analytic_mean_f14(bench::f14_coefficients(n));
}

inline Bounds unit_box(std::size_t n) { return Bounds(n, Interval{0.0, 1.0}); }

namespace detail {

inline Model checked(Bounds domain, std::function<double(std::span<const double>)> f) {
  return [domain = std::move(domain), f = std::move(f)](std::span<const double> x) {
    if (x.size() != domain.size() || !in_closed_box(domain, x))
      throw InvalidArgument("point outside case domain " + format_point(x));
    return f(x);
  };
}

inline std::optional<std::size_t> parse_suffix_dim(const std::string& id, const std::string& stem) {
  const std::string pre = stem + "-n";
  if (id.rfind(pre, 0) != 0) return std::nullopt;
  try {
    std::size_t used = 0;
    const auto v = std::stoul(id.substr(pre.size()), &used);
    if (used != id.size() - pre.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace detail

/// Case registry. Accepts "f1".."f14", "f14-n200", "elliptic", "elliptic-n50".
/// `dim` overrides the dimension of f14 and elliptic; for the fixed-dimension
/// cases it must match if given.
inline BenchmarkCase make_case(const std::string& id, std::optional<std::size_t> dim = std::nullopt,
                               EllipticSolverSpec elliptic = {}) {
  using namespace bench;
  const double two_sin = (1.0 - std::cos(4.0)) / 4.0;  // mean of sin(4x) on [0,1]
  const double bump_mean = 1.0 / (std::numbers::pi * std::numbers::pi);

  auto fixed = [&](std::size_t n, double (*f)(std::span<const double>), std::optional<double> mean) {
    if (dim && *dim != n) throw ConfigError("dim", id + " is " + std::to_string(n) + "-dimensional");
    BenchmarkCase c{id, n, unit_box(n), detail::checked(unit_box(n), f), mean, 100000};
    return c;
  };

  if (id == "f1") return fixed(2, f1, 2.0 / 3.0);
  if (id == "f2") return fixed(2, f2, two_sin * two_sin);
  if (id == "f3") return fixed(4, f3, 4.0 / 3.0);
  if (id == "f4") return fixed(4, f4, 4.0 * two_sin);
  if (id == "f5") return fixed(4, f5, 2.0 * two_sin * two_sin);
  if (id == "f6") return fixed(10, f6, 10.0 * two_sin);
  if (id == "f7") return fixed(2, f7, std::nullopt);
  if (id == "f8") return fixed(4, f8, std::nullopt);
  if (id == "f9") return fixed(10, f9, std::nullopt);
  if (id == "f10") return fixed(2, f10, bump_mean);
  if (id == "f11") return fixed(4, f11, bump_mean + 1.0);
  if (id == "f12") return fixed(10, f12, bump_mean + 4.0);
  if (id == "f13") {
    if (dim && *dim != 10) throw ConfigError("dim", "f13 is 10-dimensional");
    const double r = std::sqrt(3.0);
    Bounds dom(10, Interval{-r, r});
    return {id, 10, dom, detail::checked(dom, f13), std::nullopt, 1000000};
  }
  if (id == "f14" || detail::parse_suffix_dim(id, "f14")) {
    const auto suffix = detail::parse_suffix_dim(id, "f14");
    if (suffix && dim && *suffix != *dim) throw ConfigError("dim", "conflicts with case id " + id);
    const std::size_t n = suffix ? *suffix : dim.value_or(100);
    if (n < 2) throw ConfigError("dim", "f14 needs at least 2 dimensions");
    auto c = f14_coefficients(n);
    const double mean = analytic_mean_f14(c);
    Model m = detail::checked(unit_box(n), [c = std::move(c)](std::span<const double> x) { return f14(x, c); });
    return {id, n, unit_box(n), std::move(m), mean, 100000};
  }
  if (id == "elliptic" || detail::parse_suffix_dim(id, "elliptic")) {
    const auto suffix = detail::parse_suffix_dim(id, "elliptic");
    if (suffix && dim && *suffix != *dim) throw ConfigError("dim", "conflicts with case id " + id);
    const std::size_t n = suffix ? *suffix : dim.value_or(25);
    if (n < 2) throw ConfigError("dim", "elliptic needs at least 2 dimensions");
    elliptic.validate();
    const double r = std::sqrt(3.0);
    Bounds dom(n, Interval{-r, r});
    Model m = detail::checked(dom, [elliptic](std::span<const double> y) { return solve_elliptic(y, elliptic); });
    return {id, n, dom, std::move(m), std::nullopt, 1000};
  }
  throw ConfigError("case", "unknown case '" + id + "'");
}

inline double eval_case(const BenchmarkCase& c, std::span<const double> x) { return c.model(x); }

// --- error metrics -------------------------------------------------------

inline double rmse(std::span<const double> exact, std::span<const double> approx) {
  if (exact.size() != approx.size()) throw InvalidArgument("rmse: length mismatch");
  if (exact.empty()) throw InvalidArgument("rmse: empty lists");
  double s = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) s += (exact[i] - approx[i]) * (exact[i] - approx[i]);
  return std::sqrt(s / static_cast<double>(exact.size()));
}

inline double normalized_l2(std::span<const double> exact, std::span<const double> approx) {
  if (exact.size() != approx.size()) throw InvalidArgument("normalized_l2: length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    num += (exact[i] - approx[i]) * (exact[i] - approx[i]);
    den += exact[i] * exact[i];
  }
  if (den == 0.0) throw InvalidArgument("normalized_l2: exact values are identically zero");
  return std::sqrt(num / den);
}

inline double relative_mean_error(double i_exact, double i_approx) {
  if (i_exact == 0.0) throw InvalidArgument("relative_mean_error: exact mean is zero");
  return std::abs(i_exact - i_approx) / std::abs(i_exact);
}

// --- sampling oracles ----------------------------------------------------

/// Uniform points in `domain` from a seeded 64-bit Mersenne twister. The
/// mapping from raw bits to doubles is spelled out so the stream is identical
/// across standard libraries.
class UniformSampler {
 public:
  UniformSampler(Bounds domain, std::uint64_t seed) : domain_(std::move(domain)), gen_(seed) {}

  Point next() {
    Point p(domain_.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
      p[i] = domain_[i].lo + u * domain_[i].width();
    }
    return p;
  }

 private:
  Bounds domain_;
  std::mt19937_64 gen_;
};

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

inline MonteCarloEstimate mc_reference(const Model& model, const Bounds& domain, std::size_t samples,
                                       std::uint64_t seed) {
  if (samples < 1000) throw InvalidArgument("mc_reference: needs at least 1000 samples");
  UniformSampler rng(domain, seed);
  // Welford
  double mean = 0.0, m2 = 0.0;
  for (std::size_t k = 1; k <= samples; ++k) {
    const double v = model(rng.next());
    const double d = v - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (v - mean);
  }
  const double var = m2 / static_cast<double>(samples - 1);
  return {mean, std::sqrt(var / static_cast<double>(samples))};
}

inline MonteCarloEstimate mc_reference(const BenchmarkCase& c, std::size_t samples, std::uint64_t seed) {
  return mc_reference(c.model, c.domain, samples, seed);
}

/// Halton sequence in [0,1)^n, advanced by incrementing each coordinate's
/// base-b digit expansion in place.
class HaltonSequence {
 public:
  explicit HaltonSequence(std::size_t n) : digits_(n), value_(n, 0.0), scale_(n) {
    bases_ = first_primes(n);
    for (std::size_t d = 0; d < n; ++d) {
      double s = 1.0;
      for (int k = 0; k < 64; ++k) scale_[d].push_back(s /= static_cast<double>(bases_[d]));
    }
  }

  /// Advances to the next index and returns the point.
  const std::vector<double>& next() {
    for (std::size_t d = 0; d < digits_.size(); ++d) {
      auto& dig = digits_[d];
      const unsigned b = bases_[d];
      double v = value_[d];
      for (std::size_t k = 0;; ++k) {
        if (k == dig.size()) dig.push_back(0);
        if (++dig[k] < b) {
          v += scale_[d][k];
          break;
        }
        dig[k] = 0;
        v -= (b - 1) * scale_[d][k];
      }
      value_[d] = v;
    }
    return value_;
  }

  static std::vector<unsigned> first_primes(std::size_t n) {
    std::vector<unsigned> p;
    for (unsigned c = 2; p.size() < n; ++c) {
      bool prime = true;
      for (unsigned q : p) {
        if (q * q > c) break;
        if (c % q == 0) {
          prime = false;
          break;
        }
      }
      if (prime) p.push_back(c);
    }
    return p;
  }

 private:
  std::vector<std::vector<unsigned>> digits_;
  std::vector<double> value_;
  std::vector<unsigned> bases_;
  std::vector<std::vector<double>> scale_;
};

/// Quasi-Monte Carlo mean over `domain` with a Halton sequence.
inline double qmc_reference(const Model& model, const Bounds& domain, std::size_t samples) {
  HaltonSequence h(domain.size());
  Point x(domain.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const auto& u = h.next();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = domain[i].lo + u[i] * domain[i].width();
    sum += model(x);
  }
  return sum / static_cast<double>(samples);
}

}  // namespace scamr
