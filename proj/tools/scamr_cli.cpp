// scamr: run the adaptive surrogate builder on a benchmark case or an
// external evaluator, and evaluate saved surrogate bundles.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scamr/bench.hpp"
#include "scamr/driver.hpp"
#include "scamr/external.hpp"
#include "scamr/json_io.hpp"

namespace {

using namespace scamr;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitEvaluation = 3;

struct RunConfig {
  std::string case_id;
  std::string external;
  std::optional<std::size_t> dim;
  double lower = 0.0;
  double upper = 1.0;
  std::vector<double> eps1{1e-3};
  double eps2 = 1e-3;
  unsigned max_iterations = 10;
  double min_volume_fraction = 1e-3;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::optional<std::size_t> validate;
  int elliptic_resolution = 64;
  int timeout_ms = 60000;
  std::string csv_path;
  std::string bundle_path;
  std::string log_path;
  bool omit_timing = false;
};

/// Reads the config file, keeping only keys present; flags given on the
/// command line win afterwards.
void apply_config_file(const std::string& path, RunConfig& rc) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const std::exception& ex) {
    throw ConfigError("config", std::string("invalid JSON: ") + ex.what());
  }
  auto read = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const std::exception&) {
      throw ConfigError(key, "has the wrong type");
    }
  };
  read("case", rc.case_id);
  read("external", rc.external);
  if (j.contains("dim")) {
    std::size_t d = 0;
    read("dim", d);
    rc.dim = d;
  }
  read("lower", rc.lower);
  read("upper", rc.upper);
  if (j.contains("epsilon1")) {
    if (j["epsilon1"].is_array())
      read("epsilon1", rc.eps1);
    else {
      double e = 0.0;
      read("epsilon1", e);
      rc.eps1 = {e};
    }
  }
  read("epsilon2", rc.eps2);
  read("max_iterations", rc.max_iterations);
  read("min_volume_fraction", rc.min_volume_fraction);
  read("rng_seed", rc.seed);
  read("threads", rc.threads);
  if (j.contains("validate")) {
    std::size_t v = 0;
    read("validate", v);
    rc.validate = v;
  }
  read("elliptic_resolution", rc.elliptic_resolution);
  read("timeout_ms", rc.timeout_ms);
  read("csv", rc.csv_path);
  read("bundle", rc.bundle_path);
  read("log", rc.log_path);
  read("omit_timing", rc.omit_timing);
}

std::string format_field(std::optional<double> v) {
  if (!v) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", *v);
  return buf;
}

const char* kCsvHeader = "case,dim,eps1,eps2,evaluations,rmse,normalized_l2,relative_mean_error,wall_seconds";

struct Problem {
  std::string label;
  Bounds domain;
  Model model;
  std::optional<double> mean;
  std::size_t default_validation = 1000;
  std::shared_ptr<ExternalEvaluator> child;
};

Problem make_problem(const RunConfig& rc) {
  if (rc.case_id.empty() == rc.external.empty())
    throw ConfigError("case", "give exactly one of --case or --external");
  if (!rc.case_id.empty()) {
    EllipticSolverSpec es;
    es.resolution = rc.elliptic_resolution;
    auto c = make_case(rc.case_id, rc.dim, es);
    return {c.id, c.domain, c.model, c.analytic_mean, c.default_validation, nullptr};
  }
  if (!rc.dim) throw ConfigError("dim", "required with --external");
  if (*rc.dim < 1) throw ConfigError("dim", "must be at least 1");
  if (!(rc.lower < rc.upper)) throw ConfigError("lower", "must be below upper");
  if (rc.timeout_ms <= 0) throw ConfigError("timeout_ms", "must be positive");
  auto child = std::make_shared<ExternalEvaluator>(rc.external, std::chrono::milliseconds(rc.timeout_ms));
  return {"external", Bounds(*rc.dim, Interval{rc.lower, rc.upper}), external_model(child), std::nullopt, 1000,
          child};
}

int run_command(const RunConfig& rc) {
  if (rc.validate && *rc.validate < 1) throw ConfigError("validate", "must be at least 1");
  if (rc.eps1.empty()) throw ConfigError("epsilon1", "no tolerance given");
  Problem prob = make_problem(rc);

  std::ofstream log_file;
  if (!rc.log_path.empty()) {
    log_file.open(rc.log_path);
    if (!log_file) throw ConfigError("log", "cannot write '" + rc.log_path + "'");
  }

  std::vector<std::string> rows;
  for (std::size_t k = 0; k < rc.eps1.size(); ++k) {
    ScamrConfig cfg;
    cfg.epsilon1 = rc.eps1[k];
    cfg.epsilon2 = rc.eps2;
    cfg.max_iterations = rc.max_iterations;
    cfg.min_volume_fraction = rc.min_volume_fraction;
    cfg.rng_seed = rc.seed;
    cfg.threads = rc.threads;
    cfg.validate();

    RunLog log([&](const LogRecord& r) {
      if (log_file) log_file << dump_json(to_json(r)) << '\n';
    });
    EvaluationCache cache;
    RunOptions opts;
    opts.log = &log;
    opts.cache = &cache;
    const auto t0 = std::chrono::steady_clock::now();
    ScamrSurrogate s;
    try {
      s = run_scamr(prob.model, prob.domain, cfg, opts);
    } catch (const EvaluationError&) {
      std::cerr << "scamr: " << cache.evaluations() << " evaluations cached before the failure\n";
      throw;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const std::size_t nval = rc.validate.value_or(prob.default_validation);
    UniformSampler rng(prob.domain, cfg.rng_seed);
    std::vector<double> exact, approx;
    exact.reserve(nval);
    approx.reserve(nval);
    for (std::size_t i = 0; i < nval; ++i) {
      const Point p = rng.next();
      exact.push_back(prob.model(p));
      approx.push_back(extract_value(s, p));
    }
    std::optional<double> nl2;
    try {
      nl2 = normalized_l2(exact, approx);
    } catch (const InvalidArgument&) {
    }
    std::optional<double> rme;
    if (prob.mean && *prob.mean != 0.0) rme = relative_mean_error(*prob.mean, estimate_mean(s));

    std::ostringstream row;
    row << prob.label << ',' << prob.domain.size() << ',' << format_field(cfg.epsilon1) << ','
        << format_field(cfg.epsilon2) << ',' << evaluation_count(s) << ',' << format_field(rmse(exact, approx))
        << ',' << format_field(nl2) << ',' << format_field(rme) << ','
        << (rc.omit_timing ? std::string() : format_field(wall));
    rows.push_back(row.str());
    std::cout << (k == 0 ? std::string(kCsvHeader) + "\n" : "") << rows.back() << std::endl;

    if (!rc.bundle_path.empty()) {
      std::string path = rc.bundle_path;
      if (rc.eps1.size() > 1) path += "." + std::to_string(k);
      std::ofstream out(path);
      if (!out) throw ConfigError("bundle", "cannot write '" + path + "'");
      out << dump_json(to_json(s), 1) << '\n';
    }
  }

  if (!rc.csv_path.empty()) {
    std::ofstream out(rc.csv_path);
    if (!out) throw ConfigError("csv", "cannot write '" + rc.csv_path + "'");
    out << kCsvHeader << '\n';
    for (const auto& r : rows) out << r << '\n';
  }
  return kExitOk;
}

/// Reads points (one per line, whitespace-separated) from stdin and prints the
/// surrogate value for each.
int eval_command(const std::string& bundle_path) {
  std::ifstream in(bundle_path);
  if (!in) throw ConfigError("bundle", "cannot open '" + bundle_path + "'");
  ScamrSurrogate s;
  try {
    s = surrogate_bundle_from_json(Json::parse(in));
  } catch (const ScamrError&) {
    throw;
  } catch (const std::exception& ex) {
    throw ConfigError("bundle", ex.what());
  }
  std::string line;
  while (std::getline(std::cin, line)) {
    std::istringstream ls(line);
    Point p;
    for (double v; ls >> v;) p.push_back(v);
    if (p.empty()) continue;
    std::printf("%.17g\n", extract_value(s, p));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive multi-element gPC surrogates with cut-HDMR dimension reduction"};
  app.require_subcommand(1);

  RunConfig rc;
  std::string config_path;
  auto* run = app.add_subcommand("run", "Build a surrogate and report validation errors");
  run->add_option("--config", config_path, "JSON config file; flags override its keys");
  auto* o_case = run->add_option("--case", rc.case_id, "Benchmark id: f1..f14, f14-n200, elliptic-n25");
  auto* o_ext = run->add_option("--external", rc.external, "Shell command of a line-protocol evaluator");
  std::size_t dim_flag = 0;
  auto* o_dim = run->add_option("--dim", dim_flag, "Input dimension (f14, elliptic, external)");
  auto* o_lo = run->add_option("--lower", rc.lower, "Lower bound of every input (external)");
  auto* o_hi = run->add_option("--upper", rc.upper, "Upper bound of every input (external)");
  std::vector<double> eps1_flag;
  auto* o_e1 = run->add_option("--eps1", eps1_flag, "Tolerance epsilon1; a comma-separated list runs a sweep")
                   ->delimiter(',');
  auto* o_e2 = run->add_option("--eps2", rc.eps2, "Pairwise interaction tolerance epsilon2");
  auto* o_it = run->add_option("--max-iter", rc.max_iterations, "Refinement sweeps per subproblem");
  auto* o_vm = run->add_option("--vmin", rc.min_volume_fraction, "Open-volume fraction stopping threshold");
  auto* o_seed = run->add_option("--seed", rc.seed, "Validation sampling seed");
  auto* o_thr = run->add_option("--threads", rc.threads, "Worker threads for model evaluation");
  std::size_t validate_flag = 0;
  auto* o_val = run->add_option("--validate", validate_flag, "Validation sample count");
  auto* o_res = run->add_option("--elliptic-resolution", rc.elliptic_resolution, "Grid intervals per axis");
  auto* o_to = run->add_option("--timeout-ms", rc.timeout_ms, "Per-request timeout for --external");
  auto* o_csv = run->add_option("--csv", rc.csv_path, "Write the results table here");
  auto* o_bun = run->add_option("--bundle", rc.bundle_path, "Write the surrogate bundle here");
  auto* o_log = run->add_option("--log", rc.log_path, "Write the JSON-lines run log here");
  auto* o_omit = run->add_flag("--omit-timing", rc.omit_timing, "Leave wall_seconds empty");

  std::string bundle_in;
  auto* eval = app.add_subcommand("eval", "Evaluate a saved surrogate at points read from stdin");
  eval->add_option("bundle", bundle_in, "Surrogate bundle JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*eval) return eval_command(bundle_in);

    if (!config_path.empty()) {
      RunConfig file;
      apply_config_file(config_path, file);
      // flags win over the file
      auto keep = [](CLI::Option* o, auto& dst, const auto& src) {
        if (!o->count()) dst = src;
      };
      RunConfig merged = rc;
      keep(o_case, merged.case_id, file.case_id);
      keep(o_ext, merged.external, file.external);
      keep(o_lo, merged.lower, file.lower);
      keep(o_hi, merged.upper, file.upper);
      keep(o_e2, merged.eps2, file.eps2);
      keep(o_it, merged.max_iterations, file.max_iterations);
      keep(o_vm, merged.min_volume_fraction, file.min_volume_fraction);
      keep(o_seed, merged.seed, file.seed);
      keep(o_thr, merged.threads, file.threads);
      keep(o_res, merged.elliptic_resolution, file.elliptic_resolution);
      keep(o_to, merged.timeout_ms, file.timeout_ms);
      keep(o_csv, merged.csv_path, file.csv_path);
      keep(o_bun, merged.bundle_path, file.bundle_path);
      keep(o_log, merged.log_path, file.log_path);
      keep(o_omit, merged.omit_timing, file.omit_timing);
      merged.dim = file.dim;
      merged.validate = file.validate;
      merged.eps1 = file.eps1;
      rc = merged;
    }
    if (o_dim->count()) rc.dim = dim_flag;
    if (o_val->count()) rc.validate = validate_flag;
    if (o_e1->count()) rc.eps1 = eps1_flag;
    return run_command(rc);
  } catch (const ConfigError& e) {
    std::cerr << "scamr: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const EvaluationError& e) {
    std::cerr << "scamr: evaluation failed: " << e.what() << '\n';
    return kExitEvaluation;
  } catch (const std::exception& e) {
    std::cerr << "scamr: " << e.what() << '\n';
    return 1;
  }
}
