#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "markovopt/error.hpp"
#include "markovopt/experiment.hpp"
#include "markovopt/fit.hpp"
#include "markovopt/params.hpp"
#include "markovopt/plots.hpp"
#include "markovopt/scaling.hpp"
#include "markovopt/serialization.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace markovopt;

namespace {

json small_config() {
  return json::parse(R"({
    "name": "unit_small",
    "problem": {"kind": "quadratic", "dimension": 2, "spectrum": [1.0, 4.0], "seed": 3},
    "kernel": {"kind": "two_state", "epsilon": 0.2},
    "oracle": {"kind": "masked"},
    "algorithm": {"name": "rasgd", "params": "auto"},
    "iterations": 200,
    "seeds": [11, 12],
    "metrics": ["dist_sq", "lyapunov"],
    "initial_point": {"kind": "constant", "value": 2.0},
    "record_every": 20
  })");
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("markovopt_unit_" + name);
  fs::remove_all(p);
  return p;
}

RunRecord synthetic(std::function<double(double)> f, std::uint64_t n) {
  RunRecord r;
  r.metrics = {Metric::kDistSq};
  r.values.resize(1);
  for (std::uint64_t k = 0; k <= n; ++k) {
    r.iteration.push_back(k);
    r.oracle_calls.push_back(3 * k);
    r.values[0].push_back(f(static_cast<double>(k)));
  }
  return r;
}

}  // namespace

TEST(Config, ParseErrors) {
  EXPECT_NO_THROW(parse_experiment_config(small_config()));
  json bad = small_config();
  bad.erase("problem");
  EXPECT_THROW(parse_experiment_config(bad), ConfigError);
  bad = small_config();
  bad["seeds"] = {1, 1};
  EXPECT_THROW(parse_experiment_config(bad), ConfigError);
  bad = small_config();
  bad["metrics"] = {"nope"};
  EXPECT_THROW(parse_experiment_config(bad), ConfigError);
  bad = small_config();
  bad["kernel"] = {{"kind", "two_state"}, {"epsilon", 0.7}};
  EXPECT_THROW(prepare_experiment(parse_experiment_config(bad)), ConfigError);
  EXPECT_THROW(load_experiment_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, ShippedConfigsParse) {
  for (const auto& entry : fs::directory_iterator(MARKOVOPT_CONFIG_DIR)) {
    SCOPED_TRACE(entry.path().string());
    const auto config = load_experiment_config(entry.path());
    EXPECT_NO_THROW(prepare_experiment(config));
  }
}

TEST(Config, KernelSpecs) {
  EXPECT_EQ(kernel_from_spec({{"kind", "two_state"}, {"epsilon", 0.1}}), two_state_kernel(0.1));
  EXPECT_EQ(kernel_from_spec({{"kind", "perturbed"}, {"epsilon", 0.1}, {"phi", 0.05}}),
            perturbed_two_state_kernel(0.1, 0.05));
  const auto k = kernel_from_spec(
      {{"kind", "kronecker"},
       {"first", {{"kind", "two_state"}, {"epsilon", 0.1}}},
       {"second", {{"kind", "two_state"}, {"epsilon", 0.2}}}});
  EXPECT_EQ(k.state_count(), 4u);
  EXPECT_THROW(kernel_from_spec({{"kind", "other"}}), ConfigError);
}

TEST(Config, AutoParamsMatchConstructor) {
  const auto config = parse_experiment_config(small_config());
  const auto setup = prepare_experiment(config);
  EXPECT_EQ(setup.tau, mixing_time(two_state_kernel(0.2), 1000).tau);
  const auto& r = setup.resolved;
  const double gamma = r.at("gamma");
  const auto expected = rasgd_params(setup.smooth->smoothness(), setup.smooth->strong_convexity(),
                                     setup.growth.delta, setup.tau, setup.tau, gamma, 200);
  EXPECT_DOUBLE_EQ(r.at("p").get<double>(), expected.p);
  EXPECT_DOUBLE_EQ(r.at("M").get<double>(), expected.M);
  EXPECT_EQ(r.at("B").get<std::uint64_t>(), expected.B);
  EXPECT_LE(gamma, rasgd_max_gamma(setup.smooth->smoothness()));
}

TEST(Experiment, FilesAndReproducibility) {
  const fs::path root = scratch("run");
  const auto config = parse_experiment_config(small_config());
  const auto result = run_experiment(config, root);
  ASSERT_EQ(result.csv_files.size(), 2u);
  EXPECT_EQ(result.csv_files[0].filename(), "seed_11.csv");
  EXPECT_TRUE(fs::exists(result.manifest));

  const std::string first = read_text(result.csv_files[0]);
  EXPECT_EQ(first.substr(0, first.find('\n')), "k,oracle_calls,dist_sq,lyapunov");
  EXPECT_EQ(std::count(first.begin(), first.end(), '\n'), 12);

  const auto again = run_experiment(config_from_manifest(result.manifest), scratch("rerun"));
  EXPECT_EQ(read_text(again.csv_files[0]), first);
  EXPECT_EQ(read_text(again.csv_files[1]), read_text(result.csv_files[1]));

  const auto loaded = load_manifest_records(result.manifest);
  ASSERT_EQ(loaded.size(), 2u);
  EXPECT_EQ(loaded[1].values, result.records[1].values);
  EXPECT_EQ(loaded[1].oracle_calls, result.records[1].oracle_calls);

  const json manifest = json::parse(read_text(result.manifest));
  EXPECT_EQ(manifest.at("format"), "markovopt-manifest");
  EXPECT_EQ(manifest.at("version"), library_version());
  EXPECT_EQ(manifest.at("runs").size(), 2u);
}

TEST(Experiment, SeedOrderIndependentOfThreads) {
  json doc = small_config();
  doc["threads"] = 1;
  const auto serial = run_seeds(parse_experiment_config(doc));
  doc["threads"] = 2;
  const auto parallel = run_seeds(parse_experiment_config(doc));
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].seed, parallel[i].seed);
    EXPECT_EQ(serial[i].values, parallel[i].values);
  }
}

TEST(Experiment, OtherAlgorithms) {
  json doc = small_config();
  doc["algorithm"] = {{"name", "randomized_gd"}, {"params", "auto"}};
  doc["metrics"] = {"dist_sq", "avg_grad_sq"};
  EXPECT_EQ(run_seeds(parse_experiment_config(doc)).size(), 2u);
  doc["algorithm"] = {{"name", "rasgd_restarts"}, {"params", "auto"}};
  doc["metrics"] = {"dist_sq"};
  EXPECT_EQ(run_seeds(parse_experiment_config(doc)).front().restart_starts.size(), 8u);
  doc["algorithm"] = {{"name", "bogus"}};
  EXPECT_THROW(prepare_experiment(parse_experiment_config(doc)), ConfigError);
}

TEST(Serialization, CsvRoundTrip) {
  RunRecord r = synthetic([](double k) { return 1.0 / 3.0 + k * 1e-17; }, 4);
  r.metrics.push_back(Metric::kGap);
  r.values.push_back({0.1, 0.2, 0.3, 0.4, 0.5});
  const fs::path p = scratch("csv") / "r.csv";
  write_csv(r, p);
  const RunRecord back = read_csv(p);
  EXPECT_EQ(back.metrics, r.metrics);
  EXPECT_EQ(back.values, r.values);
  EXPECT_EQ(back.iteration, r.iteration);
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

TEST(Fit, RecoversSyntheticRate) {
  const auto rec = synthetic([](double k) { return 5.0 * std::exp(-0.013 * k); }, 1000);
  const auto f = fit_rate({rec}, Metric::kDistSq, std::nullopt, FitModel::kLinearRate);
  EXPECT_NEAR(f.slope, -0.013, 1e-10);
  EXPECT_NEAR(std::exp(f.intercept), 5.0, 1e-9);
  EXPECT_NEAR(f.half_width, 0.0, 1e-10);
  EXPECT_EQ(f.points, 901u);

  const auto pw = synthetic([](double k) { return 2.0 * std::pow(k + (k == 0), -1.5); }, 500);
  const auto g = fit_rate({pw}, Metric::kDistSq, FitWindow{10, 500}, FitModel::kPowerLaw);
  EXPECT_NEAR(g.slope, -1.5, 1e-10);
  EXPECT_EQ(g.points, 491u);
}

TEST(Fit, Errors) {
  EXPECT_THROW(fit_series({1, 2}, {1, 0}, FitModel::kLinearRate), FitDomainError);
  EXPECT_THROW(fit_series({0, 2}, {1, 1}, FitModel::kPowerLaw), FitDomainError);
  EXPECT_THROW(fit_series({1}, {1}, FitModel::kLinearRate), ParameterError);
  EXPECT_EQ(fit_model_from_name("power_law"), FitModel::kPowerLaw);
  EXPECT_THROW(fit_model_from_name("cubic"), Error);
}

TEST(Fit, SeedMeanAndQuantiles) {
  const auto a = synthetic([](double k) { return 1.0 + k; }, 4);
  const auto b = synthetic([](double k) { return 3.0 + k; }, 6);
  const auto m = mean_over_seeds({a, b}, Metric::kDistSq);
  ASSERT_EQ(m.mean.size(), 5u);
  EXPECT_DOUBLE_EQ(m.mean[2], 4.0);
  EXPECT_DOUBLE_EQ(median({3, 1, 2, 10}), 2.5);
  EXPECT_DOUBLE_EQ(quantile({0, 10}, 0.25), 2.5);
}

TEST(Scaling, CensoredRow) {
  json base = small_config();
  base["seeds"] = {1, 2, 3};
  base["iterations"] = 5;
  base["record_every"] = 1;
  base["metrics"] = {"dist_sq"};
  const auto table = tau_scaling_study(base, {0.2}, 1e-12);
  ASSERT_EQ(table.rows.size(), 1u);
  EXPECT_TRUE(table.rows[0].censored);
  EXPECT_EQ(table.rows[0].iterations_to_target, 5u);
  EXPECT_FALSE(table.slope.has_value());

  const auto back = scaling_table_from_json(json::parse(to_json(table).dump()));
  EXPECT_EQ(back.rows[0].censored, true);
  EXPECT_EQ(back.rows[0].tau, table.rows[0].tau);
  EXPECT_NE(scaling_csv(table).find(",1,5\n"), std::string::npos);
  EXPECT_THROW(tau_scaling_study(base, {}, 0.1), ConfigError);
}

TEST(Plots, Render) {
  const auto one = synthetic([](double k) { return std::exp(-0.1 * k); }, 50);
  const std::string single = convergence_svg({one}, Metric::kDistSq, "one <run>");
  EXPECT_NE(single.find("<svg"), std::string::npos);
  EXPECT_NE(single.find("single run"), std::string::npos);
  EXPECT_NE(single.find("one &lt;run&gt;"), std::string::npos);

  std::vector<RunRecord> many;
  for (int s = 0; s < 50; ++s) {
    many.push_back(synthetic([s](double k) { return (1 + 0.01 * s) * std::exp(-0.1 * k); }, 50));
  }
  const std::string band = convergence_svg(many, Metric::kDistSq, "many");
  EXPECT_NE(band.find("<polygon"), std::string::npos);
  EXPECT_NE(band.find("50 seeds"), std::string::npos);

  ScalingTable t;
  for (int tau : {1, 2, 4}) {
    ScalingRow r;
    r.tau = tau;
    r.oracle_calls_to_target = 100.0 * tau;
    t.rows.push_back(r);
  }
  t.rows.back().censored = true;
  t.slope = fit_series({1, 2}, {100, 200}, FitModel::kPowerLaw);
  const std::string sc = scaling_svg(t, "scaling");
  EXPECT_EQ(std::count(sc.begin(), sc.end(), '\n') > 5, true);
  EXPECT_NE(sc.find("fill=\"white\"/>"), std::string::npos);
  EXPECT_NE(sc.find("slope 1 +/-"), std::string::npos);
  EXPECT_THROW(convergence_svg({}, Metric::kDistSq, ""), ParameterError);
}

#ifdef MARKOVOPT_CLI
namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MARKOVOPT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, ExitCodes) {
  const fs::path root = scratch("cli");
  const fs::path cfg = root / "small.json";
  write_text(cfg, small_config().dump());
  EXPECT_EQ(run_cli("--output-root " + root.string() + " run " + cfg.string()), 0);
  const fs::path manifest = root / "unit_small" / "manifest.json";
  EXPECT_TRUE(fs::exists(manifest));
  EXPECT_EQ(run_cli("fit " + manifest.string() + " --metric dist_sq"), 0);
  EXPECT_EQ(run_cli("plot " + manifest.string() + " --out " + (root / "p.svg").string()), 0);
  EXPECT_TRUE(fs::exists(root / "p.svg"));

  json bad = small_config();
  bad["kernel"] = {{"kind", "two_state"}, {"epsilon", 0.9}};
  write_text(root / "bad.json", bad.dump());
  EXPECT_EQ(run_cli("--output-root " + root.string() + " run " + (root / "bad.json").string()), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("fit " + manifest.string() + " --metric gap"), 1);
}
#endif
