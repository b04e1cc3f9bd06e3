#include "markovopt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "markovopt/error.hpp"
#include "markovopt/rng.hpp"
#include "markovopt/serialization.hpp"

#ifndef MARKOVOPT_VERSION
#define MARKOVOPT_VERSION "0.0.0"
#endif

namespace markovopt {

namespace {

using nlohmann::json;

constexpr int kMaxMixingPower = 1 << 20;

bool is_auto(const json& j, const char* key) {
  return !j.contains(key) || (j.at(key).is_string() && j.at(key) == "auto");
}

double number_or(const json& j, const char* key, double fallback) {
  return is_auto(j, key) ? fallback : j.at(key).get<double>();
}

const json& require(const json& j, const char* key) {
  if (!j.contains(key)) {
    throw ConfigError(std::string("config is missing \"") + key + "\"");
  }
  return j.at(key);
}

bool is_vi_algorithm(const std::string& name) { return name == "reg"; }

Vector initial_point(const json& spec, std::size_t dimension) {
  const auto d = static_cast<Eigen::Index>(dimension);
  if (spec.is_null()) return Vector::Zero(d);
  if (spec.is_array()) {
    Vector x = vector_from_json(spec);
    if (x.size() != d) throw ConfigError("initial_point has wrong dimension");
    return x;
  }
  const auto kind = spec.value("kind", std::string("zeros"));
  if (kind == "zeros") return Vector::Zero(d);
  if (kind == "constant") return Vector::Constant(d, spec.at("value").get<double>());
  throw ConfigError("unknown initial_point kind \"" + kind + "\"");
}

json resolve_smooth_params(const ExperimentConfig& config,
                           const ExperimentSetup& setup) {
  const SmoothProblem& problem = *setup.smooth;
  const double L = problem.smoothness();
  const double mu = problem.strong_convexity();
  const double tau = setup.tau;
  const double sigma = setup.growth.sigma;
  const double delta = setup.growth.delta;
  const json& given = config.params;
  const double b = number_or(given, "b", tau);
  const auto N = config.iterations;

  if (config.algorithm == "rasgd") {
    if (mu <= 0.0) throw ConfigError("rasgd requires a strongly convex problem");
    double gamma = 0.0;
    if (is_auto(given, "gamma")) {
      double r0 = 1.0;
      if (problem.minimizer() && problem.optimal_value()) {
        r0 = lyapunov(problem, setup.x0, setup.x0);
      }
      const double p = rasgd_p(L, delta, tau, b, rasgd_max_gamma(L));
      gamma = rasgd_gamma_for_horizon(L, mu, p, N, sigma, r0);
    } else {
      gamma = given.at("gamma").get<double>();
    }
    const RasgdParams p = rasgd_params(L, mu, delta, tau, b, gamma, N);
    return {{"gamma", p.gamma}, {"p", p.p},       {"beta", p.beta},
            {"eta", p.eta},     {"theta", p.theta}, {"M", p.M},
            {"B", p.B},         {"b", p.b},       {"N", p.N},
            {"L", L},           {"mu", mu},       {"delta", delta},
            {"sigma", sigma},   {"tau", tau}};
  }
  if (config.algorithm == "rasgd_restarts") {
    if (mu <= 0.0) throw ConfigError("rasgd_restarts requires mu > 0");
    return {{"L", L},         {"mu", mu}, {"delta", delta}, {"tau", tau},
            {"b", b},         {"budget", N},
            {"same_start", given.value("same_start", false)}};
  }
  if (config.algorithm == "randomized_gd") {
    double gamma = 0.0;
    std::string rule = "max";
    if (!is_auto(given, "gamma")) {
      gamma = given.at("gamma").get<double>();
      rule = "explicit";
    } else if (given.value("stepsize", std::string("max")) == "pl") {
      if (mu <= 0.0 || !problem.optimal_value()) {
        throw ConfigError("the pl stepsize needs mu > 0 and a known f*");
      }
      const double gap0 = problem.value(setup.x0) - *problem.optimal_value();
      gamma = pl_gamma(L, mu, delta, tau, b, N, sigma, gap0);
      rule = "pl";
    } else {
      gamma = rgd_max_gamma(L, delta, tau, b);
    }
    const RgdParams p = rgd_params(L, delta, tau, b, gamma, N);
    return {{"gamma", p.gamma}, {"M", p.M}, {"B", p.B},     {"b", p.b},
            {"N", p.N},         {"L", L},   {"delta", delta}, {"tau", tau},
            {"sigma", sigma},   {"stepsize", rule}};
  }
  throw ConfigError("unknown algorithm \"" + config.algorithm + "\"");
}

json resolve_vi_params(const ExperimentConfig& config,
                       const ExperimentSetup& setup) {
  const VIProblem& problem = *setup.vi;
  const json& given = config.params;
  const double L = problem.lipschitz();
  const double mu_f = problem.strong_monotonicity();
  const double mu_r = problem.composite_strong_convexity();
  const double tau = setup.tau;
  const double b = number_or(given, "b", tau);
  std::string mode = given.value("mode", std::string("auto"));
  if (mode == "auto") mode = mu_f + mu_r > 0.0 ? "strongly_monotone" : "monotone";
  const double gamma = number_or(given, "gamma", 0.0);
  RegParams p;
  if (mode == "strongly_monotone") {
    p = reg_params_strongly_monotone(L, mu_f, mu_r, setup.growth.delta, tau, b,
                                     gamma, config.iterations);
  } else if (mode == "monotone") {
    const auto B = static_cast<std::uint64_t>(number_or(given, "B", 0.0));
    p = reg_params_monotone(L, tau, config.iterations, gamma, B);
  } else {
    throw ConfigError("unknown reg mode \"" + mode + "\"");
  }
  return {{"mode", mode}, {"gamma", p.gamma},    {"M", p.M},
          {"B", p.B},     {"b", p.b},            {"N", p.N},
          {"L", L},       {"mu_F", mu_f},        {"mu_r", mu_r},
          {"tau", tau},   {"sigma", setup.growth.sigma},
          {"delta", setup.growth.delta}};
}

RasgdParams rasgd_from_json(const json& r) {
  return rasgd_params(r.at("L"), r.at("mu"), r.at("delta"), r.at("tau"), r.at("b"),
                      r.at("gamma"), r.at("N"));
}

}  // namespace

std::string library_version() { return MARKOVOPT_VERSION; }

FiniteMarkovKernel kernel_from_spec(const json& spec) {
  const auto kind = require(spec, "kind").get<std::string>();
  if (kind == "two_state") return two_state_kernel(require(spec, "epsilon"));
  if (kind == "perturbed") {
    return perturbed_two_state_kernel(require(spec, "epsilon"), require(spec, "phi"));
  }
  if (kind == "regression") {
    return regression_kernel(require(spec, "Q"), require(spec, "epsilon"));
  }
  if (kind == "matrix") return kernel_from_json(spec);
  if (kind == "kronecker") {
    return kronecker_kernel(kernel_from_spec(require(spec, "first")),
                            kernel_from_spec(require(spec, "second")));
  }
  throw ConfigError("unknown kernel kind \"" + kind + "\"");
}

ExperimentConfig parse_experiment_config(const json& document) {
  if (!document.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  c.document = document;
  try {
    c.name = document.value("name", std::string("experiment"));
    c.problem = require(document, "problem");
    c.kernel = require(document, "kernel");
    c.oracle = require(document, "oracle");
    const json& algorithm = require(document, "algorithm");
    c.algorithm = require(algorithm, "name").get<std::string>();
    c.params = algorithm.value("params", json("auto"));
    if (c.params.is_string()) {
      if (c.params != "auto") throw ConfigError("params must be \"auto\" or an object");
      c.params = json::object();
    }
    c.iterations = require(document, "iterations").get<std::uint64_t>();
    if (c.iterations == 0) throw ConfigError("iterations must be >= 1");
    const json& seeds = require(document, "seeds");
    if (!seeds.is_array() || seeds.empty()) {
      throw ConfigError("seeds must be a nonempty list");
    }
    c.seeds = seeds.get<std::vector<std::uint64_t>>();
    std::vector<std::uint64_t> sorted = c.seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ConfigError("seeds must be distinct");
    }
    if (document.contains("metrics")) {
      c.metrics = metrics_from_names(document.at("metrics").get<std::vector<std::string>>());
    }
    c.record_every = document.value("record_every", std::uint64_t{1});
    if (c.record_every == 0) throw ConfigError("record_every must be >= 1");
    c.initial_point = document.value("initial_point", json());
    if (document.contains("stop")) {
      const json& s = document.at("stop");
      c.stop = StopRule{metric_from_name(require(s, "metric")),
                        require(s, "threshold").get<double>()};
    }
    c.output = document.value("output", c.name);
    c.threads = document.value("threads", 0u);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (c.algorithm != "rasgd" && c.algorithm != "rasgd_restarts" &&
      c.algorithm != "randomized_gd" && c.algorithm != "reg") {
    throw ConfigError("unknown algorithm \"" + c.algorithm + "\"");
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  json document;
  try {
    document = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return parse_experiment_config(document);
}

std::shared_ptr<NoisyOracle> ExperimentSetup::make_oracle() const {
  if (vi) return vi_oracle_from_json(oracle_spec, vi, *kernel);
  return smooth_oracle_from_json(oracle_spec, smooth, *kernel);
}

ExperimentSetup prepare_experiment(const ExperimentConfig& config) {
  ExperimentSetup s;
  try {
    s.kernel = std::make_shared<const FiniteMarkovKernel>(kernel_from_spec(config.kernel));
    s.tau = mixing_time(*s.kernel, kMaxMixingPower).tau;
    s.oracle_spec = config.oracle;
    std::size_t dimension = 0;
    if (is_vi_algorithm(config.algorithm)) {
      s.vi = vi_problem_from_json(config.problem);
      dimension = s.vi->dimension();
    } else {
      s.smooth = smooth_problem_from_json(config.problem);
      dimension = s.smooth->dimension();
    }
    s.growth = s.make_oracle()->growth();
    s.x0 = initial_point(config.initial_point, dimension);
    s.resolved = s.vi ? resolve_vi_params(config, s) : resolve_smooth_params(config, s);
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed spec: ") + e.what());
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return s;
}

std::uint64_t chain_seed(std::uint64_t seed) { return Rng::stream(seed, 0).next_u64(); }
std::uint64_t level_seed(std::uint64_t seed) { return Rng::stream(seed, 1).next_u64(); }

RunRecord run_single(const ExperimentConfig& config, const ExperimentSetup& setup,
                     std::uint64_t seed) {
  const auto oracle = setup.make_oracle();
  ChainSampler sampler(setup.kernel, chain_seed(seed));
  RunOptions options;
  options.metrics = config.metrics;
  options.record_every = config.record_every;
  options.level_seed = level_seed(seed);
  options.stop = config.stop;

  const json& r = setup.resolved;
  RunRecord record;
  if (config.algorithm == "rasgd") {
    record = run_rasgd(*setup.smooth, *oracle, sampler, rasgd_from_json(r), setup.x0,
                       options);
  } else if (config.algorithm == "rasgd_restarts") {
    RestartConfig rc{r.at("L"), r.at("mu"), r.at("delta"), r.at("tau"), r.at("b"),
                     r.at("budget"), r.at("same_start")};
    record = run_rasgd_restarts(*setup.smooth, *oracle, sampler, rc, setup.x0, options);
  } else if (config.algorithm == "randomized_gd") {
    const RgdParams p = rgd_params(r.at("L"), r.at("delta"), r.at("tau"), r.at("b"),
                                   r.at("gamma"), r.at("N"));
    record = run_randomized_gd(*setup.smooth, *oracle, sampler, p, setup.x0, options);
  } else {
    RegParams p;
    p.mode = r.at("mode") == "monotone" ? RegParams::Mode::kMonotone
                                        : RegParams::Mode::kStronglyMonotone;
    p.gamma = r.at("gamma");
    p.M = r.at("M");
    p.B = r.at("B");
    p.b = r.at("b");
    p.N = r.at("N");
    record = run_reg(*setup.vi, *oracle, sampler, p, setup.x0, options);
  }
  record.seed = seed;
  record.config = {{"config", config.document}, {"resolved", setup.resolved}};
  return record;
}

std::vector<RunRecord> run_seeds(const ExperimentConfig& config) {
  const ExperimentSetup setup = prepare_experiment(config);
  const std::size_t runs = config.seeds.size();
  std::vector<RunRecord> records(runs);
  std::vector<std::exception_ptr> errors(runs);
  unsigned workers = config.threads ? config.threads : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(runs)));

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < runs; i = next++) {
      try {
        records[i] = run_single(config, setup, config.seeds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return records;
}

std::filesystem::path default_output_root() {
  const char* root = std::getenv("MARKOVOPT_OUTPUT_ROOT");
  return root && *root ? std::filesystem::path(root) : std::filesystem::path("runs");
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::filesystem::path& output_root) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.records = run_seeds(config);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  result.directory = output_root / config.output;
  json runs = json::array();
  for (const auto& record : result.records) {
    const std::string file = "seed_" + std::to_string(record.seed) + ".csv";
    const auto path = result.directory / file;
    write_csv(record, path);
    result.csv_files.push_back(path);
    runs.push_back({{"seed", record.seed},
                    {"csv", file},
                    {"rows", record.rows()},
                    {"oracle_calls", record.total_oracle_calls},
                    {"chain_advance", record.total_chain_advance},
                    {"stopped_early", record.stopped_early}});
  }
  const json manifest = {
      {"format", "markovopt-manifest"},
      {"version", library_version()},
      {"name", config.name},
      {"config", config.document},
      {"resolved", result.records.front().config.at("resolved")},
      {"runs", runs},
      {"wall_time_seconds", wall},
  };
  result.manifest = result.directory / "manifest.json";
  write_text(result.manifest, manifest.dump(2) + "\n");
  return result;
}

namespace {

json read_manifest(const std::filesystem::path& path) {
  try {
    json m = json::parse(read_text(path));
    if (m.value("format", std::string()) != "markovopt-manifest") {
      throw ConfigError(path.string() + " is not a markovopt manifest");
    }
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig config_from_manifest(const std::filesystem::path& manifest) {
  return parse_experiment_config(read_manifest(manifest).at("config"));
}

std::vector<RunRecord> load_manifest_records(const std::filesystem::path& manifest) {
  const json m = read_manifest(manifest);
  std::vector<RunRecord> records;
  for (const auto& run : m.at("runs")) {
    RunRecord r = read_csv(manifest.parent_path() / run.at("csv").get<std::string>());
    r.seed = run.at("seed");
    r.stopped_early = run.value("stopped_early", false);
    r.config = {{"config", m.at("config")}, {"resolved", m.at("resolved")}};
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace markovopt
