// markovopt: run experiments, fit rates, run tau-scaling studies, draw plots.
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration error,
// 3 divergence.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "markovopt/error.hpp"
#include "markovopt/experiment.hpp"
#include "markovopt/fit.hpp"
#include "markovopt/plots.hpp"
#include "markovopt/scaling.hpp"
#include "markovopt/serialization.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace markovopt;

namespace {

fs::path root_or_default(const std::string& root) {
  return root.empty() ? default_output_root() : fs::path(root);
}

int cmd_run(const std::string& config_path, const std::string& root) {
  const ExperimentConfig config = load_experiment_config(config_path);
  const ExperimentResult result = run_experiment(config, root_or_default(root));
  std::cout << "manifest " << result.manifest.string() << "\n";
  for (const auto& r : result.records) {
    std::cout << "seed " << r.seed << ": " << r.rows() << " rows, "
              << r.total_oracle_calls << " oracle calls";
    for (Metric m : r.metrics) {
      std::cout << ", " << metric_name(m) << " " << format_double(r.last(m));
    }
    std::cout << "\n";
  }
  return 0;
}

int cmd_fit(const std::string& manifest, const std::string& metric,
            const std::string& model, const std::vector<std::uint64_t>& window,
            double burn_in) {
  const auto records = load_manifest_records(manifest);
  std::optional<FitWindow> w;
  if (!window.empty()) {
    if (window.size() != 2) throw ConfigError("--window takes two iterations");
    w = FitWindow{window[0], window[1]};
  }
  const FitResult f = fit_rate(records, metric_from_name(metric), w,
                               fit_model_from_name(model), burn_in);
  const json out = {{"model", fit_model_name(f.model)},
                    {"slope", f.slope},
                    {"intercept", f.intercept},
                    {"half_width", f.half_width},
                    {"residual", f.residual},
                    {"points", f.points}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_scale(const std::string& config_path, const std::vector<double>& eps,
              double target, const std::string& root) {
  json base;
  try {
    base = json::parse(read_text(config_path));
  } catch (const json::exception& e) {
    throw ConfigError(config_path + ": " + e.what());
  }
  const ScalingTable table = tau_scaling_study(base, eps, target);
  const fs::path dir =
      root_or_default(root) / (base.value("output", base.value("name", std::string("scaling"))));
  write_text(dir / "scaling.json", to_json(table).dump(2) + "\n");
  write_text(dir / "scaling.csv", scaling_csv(table));
  std::cout << scaling_csv(table);
  if (table.slope) {
    std::cout << "slope " << format_double(table.slope->slope) << " +/- "
              << format_double(table.slope->half_width) << "\n";
  }
  std::cout << "table " << (dir / "scaling.json").string() << "\n";
  return 0;
}

int cmd_plot(const std::string& input, const std::string& kind,
             const std::string& metric, const std::string& out) {
  fs::path target = out;
  std::string svg;
  if (kind == "convergence") {
    const auto records = load_manifest_records(input);
    const Metric m = metric.empty() ? records.front().metrics.front()
                                    : metric_from_name(metric);
    svg = convergence_svg(records, m, fs::path(input).parent_path().filename().string());
    if (target.empty()) target = fs::path(input).parent_path() / (metric_name(m) + ".svg");
  } else if (kind == "scaling") {
    const ScalingTable table = scaling_table_from_json(json::parse(read_text(input)));
    svg = scaling_svg(table, "oracle calls to target against tau");
    if (target.empty()) target = fs::path(input).parent_path() / "scaling.svg";
  } else {
    throw ConfigError("unknown plot kind \"" + kind + "\"");
  }
  write_text(target, svg);
  std::cout << target.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markovian-noise optimisation experiments"};
  app.require_subcommand(1);
  std::string root;
  app.add_option("--output-root", root,
                 "Output directory (default $MARKOVOPT_OUTPUT_ROOT or ./runs)");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run every seed of an experiment config");
  run->add_option("config", config_path, "Experiment JSON")->required();

  std::string manifest, metric, model = "linear_rate";
  std::vector<std::uint64_t> window;
  double burn_in = 0.1;
  auto* fit = app.add_subcommand("fit", "Fit a rate to the runs of a manifest");
  fit->add_option("manifest", manifest, "manifest.json")->required();
  fit->add_option("--metric", metric, "Metric column")->required();
  fit->add_option("--model", model, "linear_rate or power_law");
  fit->add_option("--window", window, "First and last iteration")->expected(2);
  fit->add_option("--burn-in", burn_in, "Fraction dropped without --window");

  std::vector<double> eps;
  double target = 1e-3;
  auto* scale = app.add_subcommand("scale", "Tau-scaling study over epsilon");
  scale->add_option("config", config_path, "Base experiment JSON")->required();
  scale->add_option("--eps", eps, "Two-state epsilons")->required();
  scale->add_option("--target", target, "Relative squared distance to reach");

  std::string input, kind = "convergence", out;
  auto* plot = app.add_subcommand("plot", "Draw an SVG from a manifest or scaling table");
  plot->add_option("input", input, "manifest.json or scaling.json")->required();
  plot->add_option("--kind", kind, "convergence or scaling");
  plot->add_option("--metric", metric, "Metric for convergence plots");
  plot->add_option("--out", out, "Output SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(config_path, root);
    if (*fit) return cmd_fit(manifest, metric, model, window, burn_in);
    if (*scale) return cmd_scale(config_path, eps, target, root);
    if (*plot) return cmd_plot(input, kind, metric, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return 3;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
