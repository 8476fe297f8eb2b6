// Command-line front end: dataset generation, training sweeps, theory
// calculators and model evaluation. Exit codes: 0 success, 1 config error,
// 2 data error, 3 completed sweep with failed cells.

#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "shtauc/harness.hpp"

namespace {

using shtauc::harness::json;

void emit(const json& report, const std::string& output_path) {
  if (output_path.empty()) {
    std::cout << report.dump(2) << '\n';
  } else {
    shtauc::harness::write_text_file(output_path, report.dump(2) + "\n");
  }
}

int run_with_phases(const std::function<void()>& configure,
                    const std::function<int()>& execute) {
  try {
    configure();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  try {
    return execute();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse AUC maximization via stochastic hard thresholding"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output;
  std::optional<std::uint64_t> seed_override;
  std::size_t threads = 1;

  auto* generate = app.add_subcommand(
      "generate", "write synthetic libsvm datasets + truth sidecars");
  generate->add_option("--config", config_path, "generator spec (JSON)")
      ->required();
  generate->add_option("--seed", seed_override, "override the spec seed");
  generate->add_option("--output", output, "override the output directory");

  auto* train = app.add_subcommand(
      "train", "run a (grid x trial x fold) training sweep");
  train->add_option("--config", config_path, "experiment config (JSON)")
      ->required();
  train->add_option("--seed", seed_override, "override the master seed");
  train->add_option("--threads", threads, "worker threads for sweep cells");
  train->add_option("--output", output, "override the output directory");

  auto* theory = app.add_subcommand(
      "theory", "evaluate the convergence-theory calculators");
  theory->add_option("--config", config_path, "theory params (JSON)")
      ->required();
  theory->add_option("--output", output, "report path (default: stdout)");

  std::string model_path;
  std::string data_path;
  std::string truth_path;
  std::string aggregate_path;
  double truncate_eps = 0.0;
  std::size_t d_hint = 0;
  auto* eval = app.add_subcommand("eval", "evaluate a model file on a dataset");
  eval->add_option("--model", model_path, "model file (JSON)");
  eval->add_option("--data", data_path, "dataset file (libsvm)");
  eval->add_option("--truth", truth_path, "truth sidecar (JSON)");
  eval->add_option("--truncate-eps", truncate_eps,
                   "zero |w_i| <= eps before support metrics");
  eval->add_option("--d-hint", d_hint, "minimum dataset dimension");
  eval->add_option("--aggregate", aggregate_path,
                   "aggregate a results.json instead (mean +/- std per config)");
  eval->add_option("--output", output, "report path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  if (generate->parsed()) {
    shtauc::harness::GenerateSpec spec;
    return run_with_phases(
        [&] {
          spec = shtauc::harness::parse_generate_spec(
              shtauc::harness::load_json_file(config_path));
          if (seed_override) spec.seed = *seed_override;
          if (!output.empty()) spec.output_dir = output;
          for (std::size_t k_star : spec.k_star_grid) {
            if (k_star > spec.d) {
              throw shtauc::argument_error(
                  "k_star=" + std::to_string(k_star) + " exceeds d=" +
                  std::to_string(spec.d));
            }
          }
        },
        [&] {
          const auto files = shtauc::harness::run_generate(spec);
          for (const auto& file : files) {
            std::printf("wrote %s (+ %s)\n", file.data_path.c_str(),
                        file.truth_path.c_str());
          }
          return 0;
        });
  }

  if (train->parsed()) {
    shtauc::harness::TrainConfig config;
    return run_with_phases(
        [&] {
          config = shtauc::harness::parse_train_config(
              shtauc::harness::load_json_file(config_path));
          if (seed_override) {
            config.seed = *seed_override;
            config.echo["seed"] = *seed_override;
          }
          if (!output.empty()) config.output_dir = output;
        },
        [&] {
          const auto result = shtauc::harness::run_train(config, threads);
          std::size_t failed = 0;
          for (const auto& row : result.rows) failed += row.status != "ok";
          std::printf("wrote %s (%zu rows, %zu failed)\n",
                      result.results_csv.c_str(), result.rows.size(), failed);
          return result.any_failed ? 3 : 0;
        });
  }

  if (theory->parsed()) {
    shtauc::harness::TheoryRequest request;
    return run_with_phases(
        [&] {
          request = shtauc::harness::parse_theory_request(
              shtauc::harness::load_json_file(config_path));
        },
        [&] {
          emit(shtauc::harness::run_theory(request), output);
          return 0;
        });
  }

  if (eval->parsed()) {
    shtauc::harness::EvalRequest request;
    bool aggregate = false;
    return run_with_phases(
        [&] {
          aggregate = !aggregate_path.empty();
          if (aggregate) return;
          if (model_path.empty() || data_path.empty()) {
            throw shtauc::argument_error(
                "eval needs --model and --data (or --aggregate)");
          }
          request.model_path = model_path;
          request.data_path = data_path;
          request.truth_path = truth_path;
          request.truncate_eps = truncate_eps;
          request.d_hint = d_hint;
        },
        [&] {
          if (aggregate) {
            emit(shtauc::harness::aggregate_results(
                     shtauc::harness::load_json_file(aggregate_path)),
                 output);
          } else {
            emit(shtauc::harness::run_eval(request), output);
          }
          return 0;
        });
  }
  return 0;
}
