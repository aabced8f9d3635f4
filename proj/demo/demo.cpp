// Builds a surrogate of an 8-input model with two interacting groups and
// prints the detected decomposition, the cost and a few spot checks.

#include <cmath>
#include <cstdio>

#include "scamr/scamr.hpp"

int main() {
  using namespace scamr;

  const Model model = [](std::span<const double> x) {
    return std::sin(3 * x[0]) * x[1] + std::exp(x[2] * x[3]) + x[4] + 0.5 * x[5] * x[5] + x[6] - x[7];
  };
  const Bounds domain(8, Interval{0.0, 1.0});

  ScamrConfig cfg;
  cfg.epsilon1 = 1e-4;
  cfg.epsilon2 = 1e-4;
  const ScamrSurrogate s = run_scamr(model, domain, cfg);

  std::printf("evaluations: %zu\n", evaluation_count(s));
  std::printf("decomposition: %s\n", dump_json(to_json(s.decomposition)).c_str());
  std::printf("mean estimate: %.8f\n", estimate_mean(s));

  UniformSampler rng(domain, 7);
  for (int k = 0; k < 3; ++k) {
    const Point p = rng.next();
    std::printf("f%s = %.8f  surrogate = %.8f\n", format_point(p).c_str(), model(p), extract_value(s, p));
  }
}
