#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "shtauc/shtauc.hpp"

namespace shtauc::harness {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Small shared utilities
// ---------------------------------------------------------------------------

inline std::string format_double(double x) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", x);
  return buffer;
}

/// RFC 4180 field quoting.
inline std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\r\n") == std::string::npos) return raw;
  std::string quoted = "\"";
  for (char c : raw) {
    quoted += c;
    if (c == '"') quoted += '"';
  }
  quoted += '"';
  return quoted;
}

inline std::string csv_number(double x) {
  return std::isnan(x) ? std::string{} : format_double(x);
}

/// FNV-1a over the canonical (sorted-key) dump of a config document.
inline std::uint64_t config_hash(const json& config) {
  const std::string dump = config.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw argument_error("cannot open config file: " + path);
  try {
    return json::parse(in, nullptr, true, true);  // allow comments
  } catch (const json::exception& e) {
    throw argument_error("config " + path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw argument_error("cannot open output file: " + path);
  out << text;
  if (!out) throw argument_error("failed writing: " + path);
}

/// Model file: {"version", "d", "nonzeros": [[index, value], ...]}.
inline json model_to_json(const Vector& w) {
  json nonzeros = json::array();
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] != 0.0) nonzeros.push_back(json::array({i, w[i]}));
  }
  return json{{"version", kSchemaVersion}, {"d", w.size()},
              {"nonzeros", std::move(nonzeros)}};
}

inline Vector model_from_json(const json& j) {
  try {
    Vector w(j.at("d").get<std::size_t>(), 0.0);
    if (j.contains("weights")) {
      const auto& weights = j.at("weights");
      if (weights.size() != w.size()) {
        throw argument_error("model: weights length != d");
      }
      for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = weights[i].get<double>();
      }
    } else {
      for (const auto& entry : j.at("nonzeros")) {
        const auto index = entry.at(0).get<std::size_t>();
        if (index >= w.size()) throw argument_error("model: index out of range");
        w[index] = entry.at(1).get<double>();
      }
    }
    return w;
  } catch (const json::exception& e) {
    throw argument_error(std::string("model file: ") + e.what());
  }
}

inline json truth_to_json(const PlantedTruth& truth, const SyntheticSpec& spec) {
  return json{{"version", kSchemaVersion},
              {"support", truth.support.indices},
              {"mu", truth.mu},
              {"n", spec.n},
              {"d", spec.d},
              {"k_star", spec.k_star},
              {"r", spec.r},
              {"n_pos", spec.positives()},
              {"seed", spec.seed}};
}

struct TruthInfo {
  SupportSet support;
  double mu = 0.0;
  std::size_t d = 0;
};

inline TruthInfo truth_from_json(const json& j) {
  try {
    TruthInfo info;
    info.support = SupportSet::from_indices(
        j.at("support").get<std::vector<std::size_t>>());
    info.mu = j.value("mu", 0.0);
    info.d = j.value("d", std::size_t{0});
    return info;
  } catch (const json::exception& e) {
    throw argument_error(std::string("truth file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateSpec {
  std::size_t n = 1000;
  std::size_t d = 1000;
  std::vector<std::size_t> k_star_grid;
  std::vector<double> r_grid;
  double mu = 0.3;
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  std::string prefix = "synth";
};

namespace detail {

template <typename T>
std::vector<T> scalar_or_array(const json& j, const char* key) {
  const auto& node = j.at(key);
  if (node.is_array()) return node.get<std::vector<T>>();
  return {node.get<T>()};
}

}  // namespace detail

inline GenerateSpec parse_generate_spec(const json& j) {
  try {
    GenerateSpec spec;
    spec.n = j.at("n").get<std::size_t>();
    spec.d = j.at("d").get<std::size_t>();
    spec.k_star_grid = detail::scalar_or_array<std::size_t>(j, "k_star");
    spec.r_grid = detail::scalar_or_array<double>(j, "r");
    spec.mu = j.value("mu", 0.3);
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.output_dir = j.value("output_dir", std::string("."));
    spec.prefix = j.value("prefix", std::string("synth"));
    if (spec.k_star_grid.empty() || spec.r_grid.empty()) {
      throw argument_error("generate spec: empty grid");
    }
    return spec;
  } catch (const json::exception& e) {
    throw argument_error(std::string("generate spec: ") + e.what());
  }
}

struct GeneratedFile {
  std::size_t k_star = 0;
  double r = 0.0;
  std::string data_path;
  std::string truth_path;
};

/// Writes one libsvm dataset + JSON truth sidecar per (k_star, r) grid
/// point. File seeds derive from (seed, k_star, r), so a rerun of the same
/// spec reproduces every file byte for byte.
inline std::vector<GeneratedFile> run_generate(const GenerateSpec& spec) {
  std::filesystem::create_directories(spec.output_dir);
  std::vector<GeneratedFile> files;
  for (std::size_t k_star : spec.k_star_grid) {
    for (double r : spec.r_grid) {
      SyntheticSpec cell;
      cell.n = spec.n;
      cell.d = spec.d;
      cell.k_star = k_star;
      cell.r = r;
      cell.mu = spec.mu;
      std::uint64_t r_bits = 0;
      std::memcpy(&r_bits, &r, sizeof(r));
      cell.seed = derive_seed(spec.seed, 0xDA7AULL, k_star, r_bits);
      cell.validate();

      auto [data, truth] = generate_synthetic(cell);

      char suffix[64];
      std::snprintf(suffix, sizeof(suffix), "%s_kstar%zu_r%.6g", spec.prefix.c_str(),
                    k_star, r);
      GeneratedFile out;
      out.k_star = k_star;
      out.r = r;
      out.data_path =
          (std::filesystem::path(spec.output_dir) / (std::string(suffix) + ".libsvm"))
              .string();
      out.truth_path =
          (std::filesystem::path(spec.output_dir) / (std::string(suffix) + ".truth.json"))
              .string();
      save_libsvm(data, out.data_path);
      write_text_file(out.truth_path, truth_to_json(truth, cell).dump(2) + "\n");
      files.push_back(std::move(out));
    }
  }
  return files;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

enum class Method { sht_auc, stoiht_logistic };

inline std::string method_name(Method m) {
  return m == Method::sht_auc ? "sht_auc" : "stoiht_logistic";
}

struct DataSourceConfig {
  bool synthetic = true;
  // synthetic
  std::size_t n = 0;
  std::size_t d = 0;
  double mu = 0.3;
  // libsvm
  std::string path;
  std::string truth_path;
  std::size_t d_hint = 0;
};

struct TrainConfig {
  Method method = Method::sht_auc;
  DataSourceConfig data;
  std::vector<std::size_t> k_star_grid{0};  // synthetic only; 0 = n/a
  std::vector<double> r_grid{0.0};          // synthetic only; 0 = n/a
  std::vector<std::size_t> k_grid;
  std::vector<double> gamma_grid;
  std::vector<std::size_t> b_grid;
  bool b_is_block_count = false;  // b_grid holds m; realized b = ceil(n/m)
  std::size_t iterations = 0;
  std::size_t eval_every = 0;
  std::size_t trials = 1;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  double truncate_eps = 0.0;
  std::string output_dir = "out";
  bool write_traces = true;
  json echo;  // canonical config document (output routing removed)
};

inline TrainConfig parse_train_config(const json& j) {
  try {
    TrainConfig config;
    const std::string method = j.at("method").get<std::string>();
    if (method == "sht_auc") {
      config.method = Method::sht_auc;
    } else if (method == "stoiht_logistic") {
      config.method = Method::stoiht_logistic;
    } else {
      throw argument_error("train config: unknown method '" + method + "'");
    }

    const json& data = j.at("data");
    if (data.contains("synthetic")) {
      const json& synth = data.at("synthetic");
      config.data.synthetic = true;
      config.data.n = synth.at("n").get<std::size_t>();
      config.data.d = synth.at("d").get<std::size_t>();
      config.data.mu = synth.value("mu", 0.3);
      config.k_star_grid =
          detail::scalar_or_array<std::size_t>(synth, "k_star");
      config.r_grid = detail::scalar_or_array<double>(synth, "r");
    } else if (data.contains("libsvm")) {
      const json& file = data.at("libsvm");
      config.data.synthetic = false;
      config.data.path = file.at("path").get<std::string>();
      config.data.truth_path = file.value("truth", std::string{});
      config.data.d_hint = file.value("d_hint", std::size_t{0});
    } else {
      throw argument_error("train config: data must be synthetic or libsvm");
    }

    const json& opt = j.at("optimizer");
    config.k_grid = detail::scalar_or_array<std::size_t>(opt, "sparsity_k");
    config.gamma_grid = detail::scalar_or_array<double>(opt, "step_size");
    if (opt.contains("block_count")) {
      config.b_grid = detail::scalar_or_array<std::size_t>(opt, "block_count");
      config.b_is_block_count = true;
    } else {
      config.b_grid = detail::scalar_or_array<std::size_t>(opt, "block_size");
    }
    config.iterations = opt.at("iterations").get<std::size_t>();
    config.eval_every = opt.value("eval_every", std::size_t{0});

    config.trials = j.value("trials", std::size_t{1});
    config.folds = j.value("folds", std::size_t{5});
    config.seed = j.value("seed", std::uint64_t{0});
    config.truncate_eps = j.value("truncate_eps", 0.0);
    config.output_dir = j.value("output_dir", std::string("out"));
    config.write_traces = j.value("write_traces", true);

    if (config.k_grid.empty() || config.gamma_grid.empty() ||
        config.b_grid.empty() || config.k_star_grid.empty() ||
        config.r_grid.empty()) {
      throw argument_error("train config: empty grid");
    }
    if (config.trials < 1) throw argument_error("train config: trials >= 1");

    config.echo = j;
    config.echo.erase("output_dir");
    config.echo.erase("write_traces");
    return config;
  } catch (const json::exception& e) {
    throw argument_error(std::string("train config: ") + e.what());
  }
}

struct ResultRow {
  std::size_t cell = 0;
  std::size_t k_star = 0;
  double r = 0.0;
  std::size_t k = 0;
  double gamma = 0.0;
  std::size_t block_size = 0;
  std::size_t trial = 0;
  std::size_t fold = 0;
  std::uint64_t data_seed = 0;
  std::uint64_t run_seed = 0;
  std::string status = "ok";
  std::string error;
  double final_objective = std::numeric_limits<double>::quiet_NaN();
  double final_auc = std::numeric_limits<double>::quiet_NaN();
  double best_epoch = std::numeric_limits<double>::quiet_NaN();
  double best_epoch_auc = std::numeric_limits<double>::quiet_NaN();
  double f1 = std::numeric_limits<double>::quiet_NaN();
  double jaccard = std::numeric_limits<double>::quiet_NaN();
  double ratio = std::numeric_limits<double>::quiet_NaN();
  double support_size = std::numeric_limits<double>::quiet_NaN();
  std::string trace_file;
};

struct SummaryRow {
  std::size_t k_star = 0;
  double r = 0.0;
  std::size_t k = 0;
  double gamma = 0.0;
  std::size_t block_size = 0;
  std::size_t runs = 0;
  double mean_auc = std::numeric_limits<double>::quiet_NaN();
  double std_auc = std::numeric_limits<double>::quiet_NaN();
  double mean_f1 = std::numeric_limits<double>::quiet_NaN();
  double std_f1 = std::numeric_limits<double>::quiet_NaN();
  double mean_jaccard = std::numeric_limits<double>::quiet_NaN();
  double std_jaccard = std::numeric_limits<double>::quiet_NaN();
  bool selected = false;
};

struct TrainOutput {
  std::vector<ResultRow> rows;
  std::vector<SummaryRow> summary;
  std::string results_csv;   // path
  std::string results_json;  // path
  std::uint64_t config_hash = 0;
  bool any_failed = false;
};

namespace detail {

struct CellSpec {
  std::size_t index = 0;
  std::size_t k_star = 0;
  double r = 0.0;
  std::size_t k = 0;
  double gamma = 0.0;
  std::size_t b_raw = 0;  // block size, or block count when configured so
  std::size_t trial = 0;
  std::size_t fold = 0;
};

struct CellData {
  Dataset data;
  std::optional<TruthInfo> truth;
};

inline std::uint64_t double_bits(double x) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &x, sizeof(x));
  return bits;
}

inline std::shared_ptr<const CellData> materialize_data(
    const TrainConfig& config, const CellSpec& cell, std::uint64_t data_seed,
    const std::shared_ptr<const CellData>& file_data) {
  if (!config.data.synthetic) return file_data;
  SyntheticSpec spec;
  spec.n = config.data.n;
  spec.d = config.data.d;
  spec.mu = config.data.mu;
  spec.k_star = cell.k_star;
  spec.r = cell.r;
  spec.seed = data_seed;
  auto [data, truth] = generate_synthetic(spec);
  TruthInfo info;
  info.support = truth.support;
  info.mu = truth.mu;
  info.d = spec.d;
  return std::make_shared<CellData>(CellData{std::move(data), std::move(info)});
}

inline json trace_to_json(const TrainTrace& trace) {
  json records = json::array();
  for (const auto& rec : trace.records) {
    records.push_back(json{{"iteration", rec.iteration},
                           {"epoch", rec.epoch},
                           {"objective", rec.objective},
                           {"test_auc", rec.test_auc},
                           {"sparsity", rec.sparsity},
                           {"dist_to_truth", rec.dist_to_truth}});
  }
  return records;
}

inline double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

inline double stddev_of(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

}  // namespace detail

/// Runs the whole (grid x trial x fold) sweep. Cells are independent: every
/// cell derives its dataset seed from (master, k_star, r, trial) and its run
/// seed from (master, trial, fold), so results do not depend on scheduling
/// and a diverged cell only produces a failure row. Rows are emitted in grid
/// order regardless of completion order.
inline TrainOutput run_train(const TrainConfig& config,
                             std::size_t threads = 1) {
  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);
  const fs::path out_dir(config.output_dir);
  if (config.write_traces) fs::create_directories(out_dir / "traces");

  // File-backed data loads once and is shared read-only across cells.
  std::shared_ptr<const detail::CellData> file_data;
  if (!config.data.synthetic) {
    auto loaded = load_libsvm(config.data.path, config.data.d_hint);
    std::optional<TruthInfo> truth;
    if (!config.data.truth_path.empty()) {
      truth = truth_from_json(load_json_file(config.data.truth_path));
    }
    file_data = std::make_shared<detail::CellData>(
        detail::CellData{std::move(loaded.data), std::move(truth)});
  }

  std::vector<detail::CellSpec> cells;
  for (std::size_t k_star : config.k_star_grid) {
    for (double r : config.r_grid) {
      for (std::size_t trial = 0; trial < config.trials; ++trial) {
        for (std::size_t k : config.k_grid) {
          for (double gamma : config.gamma_grid) {
            for (std::size_t b : config.b_grid) {
              for (std::size_t fold = 0; fold < config.folds; ++fold) {
                detail::CellSpec cell;
                cell.index = cells.size();
                cell.k_star = k_star;
                cell.r = r;
                cell.k = k;
                cell.gamma = gamma;
                cell.b_raw = b;
                cell.trial = trial;
                cell.fold = fold;
                cells.push_back(cell);
              }
            }
          }
        }
      }
    }
  }

  TrainOutput output;
  output.rows.resize(cells.size());
  output.config_hash = config_hash(config.echo);

  struct DataCache {
    std::uint64_t seed = ~std::uint64_t{0};
    std::shared_ptr<const detail::CellData> data;
  };

  auto run_cell = [&](const detail::CellSpec& cell, DataCache& cache) {
    ResultRow row;
    row.cell = cell.index;
    row.k_star = cell.k_star;
    row.r = cell.r;
    row.k = cell.k;
    row.gamma = cell.gamma;
    row.trial = cell.trial;
    row.fold = cell.fold;
    row.data_seed = config.data.synthetic
                        ? derive_seed(config.seed, 0xDA7AULL, cell.k_star,
                                      detail::double_bits(cell.r), cell.trial)
                        : 0;
    row.run_seed = derive_seed(config.seed, 0x7EA1ULL, cell.trial, cell.fold);
    try {
      if (cache.data == nullptr || cache.seed != row.data_seed) {
        cache.data =
            detail::materialize_data(config, cell, row.data_seed, file_data);
        cache.seed = row.data_seed;
      }
      auto shared = cache.data;
      const Dataset& full = shared->data;
      const std::uint64_t fold_seed =
          derive_seed(config.seed, 0xF01DULL, row.data_seed, cell.trial);
      const auto splits = split_and_shuffle(full, config.folds, fold_seed);
      const Dataset train = full.subset(splits[cell.fold].train);
      const Dataset test = full.subset(splits[cell.fold].test);

      OptimizerConfig opt;
      opt.sparsity_k = cell.k;
      opt.step_size = cell.gamma;
      opt.block_size =
          config.b_is_block_count
              ? (train.n() + cell.b_raw - 1) / cell.b_raw
              : cell.b_raw;
      opt.iterations = config.iterations;
      opt.eval_every = config.eval_every;
      opt.seed = row.run_seed;
      row.block_size = opt.block_size;

      Vector reference;
      EvalHooks hooks;
      hooks.test_set = &test;
      if (shared->truth && shared->truth->mu != 0.0) {
        PlantedTruth planted{shared->truth->support, shared->truth->mu};
        reference = planted.model(full.d());
        hooks.reference_model = &reference;
      }

      const auto started = std::chrono::steady_clock::now();
      const TrainResult result =
          config.method == Method::sht_auc
              ? sht_auc_train(train, opt, hooks)
              : stoiht_logistic_train(train, opt, hooks);
      const double wall_ms =
          std::chrono::duration<double, std::milli>(
              std::chrono::steady_clock::now() - started)
              .count();

      const TraceRecord& last = result.trace.final_record();
      const TraceRecord& best = result.trace.best_auc_record();
      row.final_objective = last.objective;
      row.final_auc = last.test_auc;
      row.best_epoch = best.epoch;
      row.best_epoch_auc = best.test_auc;
      row.support_size = static_cast<double>(l0_norm(result.model));
      if (shared->truth) {
        row.f1 = support_f1(result.model, shared->truth->support,
                            config.truncate_eps);
        row.jaccard = support_jaccard(result.model, shared->truth->support,
                                      config.truncate_eps);
        row.ratio = related_ratio(result.model, shared->truth->support,
                                  config.truncate_eps);
      }

      if (config.write_traces) {
        char name[64];
        std::snprintf(name, sizeof(name), "trace_c%05zu.json", cell.index);
        row.trace_file = (fs::path("traces") / name).string();
        json trace_doc{{"version", kSchemaVersion},
                       {"method", method_name(config.method)},
                       {"cell",
                        json{{"k_star", cell.k_star},
                             {"r", cell.r},
                             {"k", cell.k},
                             {"gamma", cell.gamma},
                             {"block_size", opt.block_size},
                             {"trial", cell.trial},
                             {"fold", cell.fold}}},
                       {"data_seed", row.data_seed},
                       {"run_seed", row.run_seed},
                       {"records", detail::trace_to_json(result.trace)},
                       {"model", model_to_json(result.model)},
                       {"wall_time_ms", wall_ms}};
        write_text_file((out_dir / row.trace_file).string(),
                        trace_doc.dump(2) + "\n");
      }
    } catch (const std::exception& e) {
      row.status = "failed";
      row.error = e.what();
    }
    output.rows[cell.index] = std::move(row);
  };

  const std::size_t workers =
      std::max<std::size_t>(1, std::min(threads, cells.size()));
  if (workers == 1) {
    DataCache cache;
    for (const auto& cell : cells) run_cell(cell, cache);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        DataCache cache;
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= cells.size()) return;
          run_cell(cells[i], cache);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  for (const auto& row : output.rows) {
    output.any_failed |= row.status != "ok";
  }

  // Per-grid-point aggregation over (trial x fold); selection by mean
  // held-out AUC, mirroring grid-search tuning.
  std::map<std::tuple<std::size_t, std::uint64_t, std::size_t, std::uint64_t,
                      std::size_t>,
           std::vector<const ResultRow*>>
      groups;
  for (const auto& row : output.rows) {
    if (row.status != "ok") continue;
    groups[{row.k_star, detail::double_bits(row.r), row.k,
            detail::double_bits(row.gamma), row.block_size}]
        .push_back(&row);
  }
  std::size_t best_index = 0;
  double best_auc = -1.0;
  for (const auto& [key, rows] : groups) {
    SummaryRow s;
    s.k_star = std::get<0>(key);
    s.r = rows.front()->r;
    s.k = std::get<2>(key);
    s.gamma = rows.front()->gamma;
    s.block_size = std::get<4>(key);
    s.runs = rows.size();
    std::vector<double> aucs;
    std::vector<double> f1s;
    std::vector<double> jaccards;
    for (const ResultRow* row : rows) {
      if (!std::isnan(row->final_auc)) aucs.push_back(row->final_auc);
      if (!std::isnan(row->f1)) f1s.push_back(row->f1);
      if (!std::isnan(row->jaccard)) jaccards.push_back(row->jaccard);
    }
    s.mean_auc = detail::mean_of(aucs);
    s.std_auc = detail::stddev_of(aucs, s.mean_auc);
    s.mean_f1 = detail::mean_of(f1s);
    s.std_f1 = detail::stddev_of(f1s, s.mean_f1);
    s.mean_jaccard = detail::mean_of(jaccards);
    s.std_jaccard = detail::stddev_of(jaccards, s.mean_jaccard);
    if (!std::isnan(s.mean_auc) && s.mean_auc > best_auc) {
      best_auc = s.mean_auc;
      best_index = output.summary.size();
    }
    output.summary.push_back(s);
  }
  if (!output.summary.empty() && best_auc >= 0.0) {
    output.summary[best_index].selected = true;
  }

  // results.csv
  std::ostringstream csv;
  csv << "method,n,d,k_star,r,k,gamma,block_size,iterations,trial,fold,"
         "data_seed,run_seed,status,final_objective,final_auc,best_epoch,"
         "best_epoch_auc,f1,jaccard,related_ratio,support_size,trace_file,"
         "error,config_hash,master_seed\r\n";
  const std::size_t data_n =
      config.data.synthetic ? config.data.n : file_data->data.n();
  const std::size_t data_d =
      config.data.synthetic ? config.data.d : file_data->data.d();
  for (const auto& row : output.rows) {
    csv << method_name(config.method) << ',' << data_n << ',' << data_d << ','
        << row.k_star << ',' << csv_number(row.r) << ',' << row.k << ','
        << csv_number(row.gamma) << ',' << row.block_size << ','
        << config.iterations << ',' << row.trial << ',' << row.fold << ','
        << row.data_seed << ',' << row.run_seed << ',' << row.status << ','
        << csv_number(row.final_objective) << ',' << csv_number(row.final_auc)
        << ',' << csv_number(row.best_epoch) << ','
        << csv_number(row.best_epoch_auc) << ',' << csv_number(row.f1) << ','
        << csv_number(row.jaccard) << ',' << csv_number(row.ratio) << ','
        << csv_number(row.support_size) << ',' << csv_field(row.trace_file)
        << ',' << csv_field(row.error) << ',' << output.config_hash << ','
        << config.seed << "\r\n";
  }
  output.results_csv = (out_dir / "results.csv").string();
  write_text_file(output.results_csv, csv.str());

  // results.json mirrors the CSV rows field for field, plus the summary.
  json rows_json = json::array();
  for (const auto& row : output.rows) {
    rows_json.push_back(json{{"method", method_name(config.method)},
                             {"n", data_n},
                             {"d", data_d},
                             {"k_star", row.k_star},
                             {"r", row.r},
                             {"k", row.k},
                             {"gamma", row.gamma},
                             {"block_size", row.block_size},
                             {"iterations", config.iterations},
                             {"trial", row.trial},
                             {"fold", row.fold},
                             {"data_seed", row.data_seed},
                             {"run_seed", row.run_seed},
                             {"status", row.status},
                             {"final_objective", row.final_objective},
                             {"final_auc", row.final_auc},
                             {"best_epoch", row.best_epoch},
                             {"best_epoch_auc", row.best_epoch_auc},
                             {"f1", row.f1},
                             {"jaccard", row.jaccard},
                             {"related_ratio", row.ratio},
                             {"support_size", row.support_size},
                             {"trace_file", row.trace_file},
                             {"error", row.error},
                             {"config_hash", output.config_hash},
                             {"master_seed", config.seed}});
  }
  json summary_json = json::array();
  for (const auto& s : output.summary) {
    summary_json.push_back(json{{"k_star", s.k_star},
                                {"r", s.r},
                                {"k", s.k},
                                {"gamma", s.gamma},
                                {"block_size", s.block_size},
                                {"runs", s.runs},
                                {"mean_auc", s.mean_auc},
                                {"std_auc", s.std_auc},
                                {"mean_f1", s.mean_f1},
                                {"std_f1", s.std_f1},
                                {"mean_jaccard", s.mean_jaccard},
                                {"std_jaccard", s.std_jaccard},
                                {"selected", s.selected}});
  }
  json results{{"version", kSchemaVersion},
               {"config", config.echo},
               {"config_hash", output.config_hash},
               {"master_seed", config.seed},
               {"rows", std::move(rows_json)},
               {"summary", std::move(summary_json)}};
  output.results_json = (out_dir / "results.json").string();
  write_text_file(output.results_json, results.dump(2) + "\n");
  return output;
}

// ---------------------------------------------------------------------------
// theory
// ---------------------------------------------------------------------------

struct TheoryRequest {
  TheoryParams params;
  std::optional<double> norm_w_star;
  double sigma_spectral_bound = 1.0;
  std::vector<double> r_grid;
  // optional empirical probing
  std::string dataset_path;
  std::size_t d_hint = 0;
  std::size_t probe_s = 0;
  std::size_t probes = 100;
  std::size_t probe_block_size = 0;  // 0 = single full-data block
  std::uint64_t probe_seed = 0;
};

inline TheoryRequest parse_theory_request(const json& j) {
  try {
    TheoryRequest req;
    req.params.k = j.at("k").get<std::size_t>();
    req.params.k_star = j.at("k_star").get<std::size_t>();
    req.params.d = j.at("d").get<double>();
    req.params.n = j.at("n").get<double>();
    req.params.b = j.at("b").get<double>();
    req.params.r = j.at("r").get<double>();
    req.params.lambda = j.value("lambda", 1.0);
    if (j.contains("norm_w_star")) {
      req.norm_w_star = j.at("norm_w_star").get<double>();
    }
    req.sigma_spectral_bound = j.value("sigma_spectral_bound", 1.0);
    if (j.contains("r_grid")) {
      req.r_grid = j.at("r_grid").get<std::vector<double>>();
    }
    if (j.contains("probe")) {
      const json& probe = j.at("probe");
      req.dataset_path = probe.at("dataset").get<std::string>();
      req.d_hint = probe.value("d_hint", std::size_t{0});
      req.probe_s = probe.value("s", std::size_t{0});
      req.probes = probe.value("probes", std::size_t{100});
      req.probe_block_size = probe.value("block_size", std::size_t{0});
      req.probe_seed = probe.value("seed", std::uint64_t{0});
    }
    return req;
  } catch (const json::exception& e) {
    throw argument_error(std::string("theory config: ") + e.what());
  }
}

/// Evaluates every calculator the request covers and emits one JSON report
/// with a contraction verdict. The closed forms are high-probability bounds
/// under the Gaussian design; they are labelled as such in the report.
inline json run_theory(const TheoryRequest& req) {
  const ConvergenceConstants constants = gaussian_rsc_rss(req.params);
  json report{{"version", kSchemaVersion},
              {"params",
               json{{"k", req.params.k},
                    {"k_star", req.params.k_star},
                    {"d", req.params.d},
                    {"n", req.params.n},
                    {"b", req.params.b},
                    {"r", req.params.r},
                    {"lambda", req.params.lambda}}},
              {"bound_kind", "gaussian-design high-probability bounds"},
              {"nu", constants.nu},
              {"rho_minus", constants.rho_minus},
              {"rho_plus", constants.rho_plus},
              {"rho", constants.rho},
              {"kappa", constants.kappa},
              {"step_size_suggestion", constants.step_size_suggestion},
              {"regime_ok", constants.regime_ok},
              {"contraction", constants.contraction}};
  if (!constants.regime_ok) {
    report["regime_note"] =
        "rho_minus bound not positive: n too small for the RSC bound";
  }

  if (!req.r_grid.empty()) {
    const CurveCoefficients coeffs = curve_coefficients(req.params);
    json curve = json::array();
    for (const CurvePoint& point :
         condition_number_curve(req.params, req.r_grid)) {
      curve.push_back(json{{"r", point.r},
                           {"rho", point.valid ? json(point.rho) : json()},
                           {"valid", point.valid}});
    }
    report["curve"] = std::move(curve);
    report["sqrt_r_star"] = coeffs.sqrt_r_star;
  }

  if (req.norm_w_star) {
    try {
      const ToleranceBreakdown tol = tolerance_error_breakdown(
          req.params, *req.norm_w_star, req.sigma_spectral_bound);
      report["tolerance_error"] = json{{"value", tol.value},
                                       {"numerator", tol.numerator},
                                       {"kappa", tol.kappa}};
    } catch (const domain_error& e) {
      report["tolerance_error"] = json{{"value", nullptr},
                                       {"reason", e.what()}};
    }
  }

  if (!req.dataset_path.empty()) {
    auto loaded = load_libsvm(req.dataset_path, req.d_hint);
    const std::size_t s =
        req.probe_s > 0 ? req.probe_s
                        : std::min(loaded.data.d(), req.params.k * 2 +
                                                        req.params.k_star);
    RestrictedEigEstimate estimate;
    if (req.probe_block_size > 0) {
      Rng rng(derive_seed(req.probe_seed, 0xB10CULL));
      const BlockPartition partition =
          make_blocks(loaded.data.n(), req.probe_block_size, rng);
      estimate = empirical_restricted_eigs(loaded.data, s, req.probes,
                                           req.probe_seed, &partition);
    } else {
      estimate =
          empirical_restricted_eigs(loaded.data, s, req.probes, req.probe_seed);
    }
    // Tolerance absorbs summation-order rounding between the full-data and
    // per-block quadratic forms.
    const bool consistent =
        estimate.rho_minus_hat <=
        estimate.rho_plus_hat + 1e-12 * std::abs(estimate.rho_plus_hat);
    report["empirical"] = json{{"s", s},
                               {"probes", req.probes},
                               {"rho_minus_hat", estimate.rho_minus_hat},
                               {"rho_plus_hat", estimate.rho_plus_hat},
                               {"witness_consistent", consistent}};
  }
  return report;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalRequest {
  std::string model_path;
  std::string data_path;
  std::string truth_path;  // optional
  std::size_t d_hint = 0;
  double truncate_eps = 0.0;
};

inline json run_eval(const EvalRequest& req) {
  const Vector w = model_from_json(load_json_file(req.model_path));
  auto loaded = load_libsvm(req.data_path, std::max(req.d_hint, w.size()));
  if (loaded.data.d() != w.size()) {
    throw dimension_error("model dimension " + std::to_string(w.size()) +
                          " != dataset dimension " +
                          std::to_string(loaded.data.d()));
  }

  Vector scores(loaded.data.n());
  for (std::size_t i = 0; i < loaded.data.n(); ++i) {
    scores[i] = shtauc::detail::dot_row(loaded.data.row(i), w);
  }

  EvalReport eval;
  eval.auc = auc_score(scores, loaded.data.labels());
  eval.support_size = support(w, req.truncate_eps).size();

  json report{{"version", kSchemaVersion},
              {"model", req.model_path},
              {"data", req.data_path},
              {"auc", eval.auc},
              {"support_size", eval.support_size},
              {"truncate_eps", req.truncate_eps}};
  if (!req.truth_path.empty()) report["truth"] = req.truth_path;
  if (!req.truth_path.empty()) {
    const TruthInfo truth = truth_from_json(load_json_file(req.truth_path));
    report["f1"] = support_f1(w, truth.support, req.truncate_eps);
    report["jaccard"] = support_jaccard(w, truth.support, req.truncate_eps);
    report["related_ratio"] = related_ratio(w, truth.support, req.truncate_eps);
  }
  return report;
}

/// Table-style aggregation of an existing results.json: mean +/- std per
/// grid point over its ok rows.
inline json aggregate_results(const json& results) {
  try {
    std::map<std::string, std::vector<const json*>> groups;
    for (const auto& row : results.at("rows")) {
      if (row.at("status").get<std::string>() != "ok") continue;
      const std::string key = row.at("k_star").dump() + "|" +
                              row.at("r").dump() + "|" + row.at("k").dump() +
                              "|" + row.at("gamma").dump() + "|" +
                              row.at("block_size").dump();
      groups[key].push_back(&row);
    }
    json aggregated = json::array();
    for (const auto& [key, rows] : groups) {
      auto collect = [&](const char* field) {
        std::vector<double> values;
        for (const json* row : rows) {
          if (row->at(field).is_number()) {
            values.push_back(row->at(field).get<double>());
          }
        }
        const double mean = detail::mean_of(values);
        return json{{"mean", mean}, {"std", detail::stddev_of(values, mean)}};
      };
      aggregated.push_back(json{{"k_star", rows.front()->at("k_star")},
                                {"r", rows.front()->at("r")},
                                {"k", rows.front()->at("k")},
                                {"gamma", rows.front()->at("gamma")},
                                {"block_size", rows.front()->at("block_size")},
                                {"runs", rows.size()},
                                {"auc", collect("final_auc")},
                                {"f1", collect("f1")},
                                {"jaccard", collect("jaccard")}});
    }
    return json{{"version", kSchemaVersion}, {"groups", std::move(aggregated)}};
  } catch (const json::exception& e) {
    throw argument_error(std::string("results file: ") + e.what());
  }
}

}  // namespace shtauc::harness
