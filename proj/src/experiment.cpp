#include "nndbench/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "nndbench/errors.hpp"
#include "nndbench/parallel.hpp"
#include "nndbench/textio.hpp"

namespace nndbench {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr int kForwardTimingReps = 1000;
constexpr int kBackwardTimingReps = 300;

struct StepRow {
  std::int64_t step = 0;
  double ber_train_subset = 0.0;
  double ber_full = 0.0;
};

struct SnrRow {
  double ebn0_db = 0.0;
  double ber = 0.0;
  double ber_map = 0.0;
};

struct CellResult {
  std::string arch;
  double p = 1.0;
  bool ok = false;
  std::string error;
  double rho_t_db = std::numeric_limits<double>::infinity();
  std::vector<NvePoint> nve_table;
  std::vector<double> dropped_val_snrs;
  std::vector<StepRow> step_rows;
  std::vector<SnrRow> snr_rows;
  std::vector<LossPoint> loss_trace;
  std::string model_file;
};

std::string p_label(double p) {
  const int pct = static_cast<int>(std::llround(p * 100.0));
  char buf[16];
  std::snprintf(buf, sizeof(buf), "p%03d", pct);
  return buf;
}

std::string cell_name(ArchKind arch, double p) { return to_string(arch) + "_" + p_label(p); }

Json cell_to_json(const CellResult& cell, const std::string& config_hash) {
  Json j;
  j["config_hash"] = config_hash;
  j["arch"] = cell.arch;
  j["p"] = cell.p;
  j["ok"] = cell.ok;
  if (!cell.error.empty()) j["error"] = cell.error;
  j["rho_t_db"] = std::isinf(cell.rho_t_db) ? Json("inf") : Json(cell.rho_t_db);
  Json nve = Json::array();
  for (const auto& point : cell.nve_table) {
    nve.push_back({{"rho_t_db", point.rho_t_db}, {"nve", point.nve}});
  }
  j["nve_table"] = nve;
  j["dropped_val_snrs"] = cell.dropped_val_snrs;
  Json steps = Json::array();
  for (const auto& row : cell.step_rows) {
    steps.push_back({{"step", row.step},
                     {"ber_train_subset", row.ber_train_subset},
                     {"ber_full", row.ber_full}});
  }
  j["step_rows"] = steps;
  Json snrs = Json::array();
  for (const auto& row : cell.snr_rows) {
    snrs.push_back({{"ebn0_db", row.ebn0_db}, {"ber", row.ber}, {"ber_map", row.ber_map}});
  }
  j["snr_rows"] = snrs;
  Json trace = Json::array();
  for (const auto& point : cell.loss_trace) {
    trace.push_back({{"step", point.step}, {"loss", point.loss}});
  }
  j["loss_trace"] = trace;
  j["model_file"] = cell.model_file;
  return j;
}

bool cell_from_json(const Json& j, const std::string& config_hash, CellResult& cell) {
  try {
    if (j.at("config_hash").get<std::string>() != config_hash) return false;
    cell.arch = j.at("arch").get<std::string>();
    cell.p = j.at("p").get<double>();
    cell.ok = j.at("ok").get<bool>();
    cell.error = j.value("error", std::string());
    if (j.at("rho_t_db").is_string()) {
      cell.rho_t_db = std::numeric_limits<double>::infinity();
    } else {
      cell.rho_t_db = j.at("rho_t_db").get<double>();
    }
    cell.nve_table.clear();
    for (const auto& point : j.at("nve_table")) {
      cell.nve_table.push_back({point.at("rho_t_db").get<double>(), point.at("nve").get<double>()});
    }
    cell.dropped_val_snrs = j.at("dropped_val_snrs").get<std::vector<double>>();
    cell.step_rows.clear();
    for (const auto& row : j.at("step_rows")) {
      cell.step_rows.push_back({row.at("step").get<std::int64_t>(),
                                row.at("ber_train_subset").get<double>(),
                                row.at("ber_full").get<double>()});
    }
    cell.snr_rows.clear();
    for (const auto& row : j.at("snr_rows")) {
      cell.snr_rows.push_back({row.at("ebn0_db").get<double>(), row.at("ber").get<double>(),
                               row.at("ber_map").get<double>()});
    }
    cell.loss_trace.clear();
    for (const auto& point : j.at("loss_trace")) {
      cell.loss_trace.push_back({point.at("step").get<std::int64_t>(), point.at("loss").get<double>()});
    }
    cell.model_file = j.value("model_file", std::string());
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open '" + path.string() + "' for writing");
  os << text;
}

// One grid cell: training (with SNR selection in noisy mode) plus evaluation.
CellResult run_cell(ArchKind arch, double p, const ExperimentConfig& config,
                    const Codebook& book, std::span<const double> map_ber_validation,
                    const fs::path& model_dir, int inner_threads) {
  CellResult cell;
  cell.arch = to_string(arch);
  cell.p = p;

  const TrainingSubset subset = make_training_subset(book, p, config.seed);

  if (config.noiseless) {
    const double rho = std::numeric_limits<double>::infinity();
    const std::uint64_t cell_id = cell_stream_id(arch, p, rho);
    RngStream init(derive_seed(config.seed, {stream_tag("init"), cell_id}));
    NetworkModel model = build(config.arch_spec(arch), init);
    model.trained_p = p;
    model.subset_seed = config.seed;
    model.rho_t_db = rho;

    TrainOptions options;
    options.max_steps = config.max_steps;
    options.batch_size = config.batch_size;
    options.num_train_samples = config.num_train_samples;
    options.adam = config.adam();

    auto checkpoint = [&](std::int64_t step, NetworkModel& m) {
      StepRow row;
      row.step = step;
      row.ber_train_subset = exhaustive_noiseless_ber(m, book, &subset);
      row.ber_full = exhaustive_noiseless_ber(m, book);
      cell.step_rows.push_back(row);
      return true;
    };

    const TrainResult trained =
        train_model(model, book, subset, options, rho, config.seed, cell_id, checkpoint);
    cell.loss_trace = trained.loss_trace;
    cell.rho_t_db = rho;

    const fs::path model_path = model_dir / (cell_name(arch, p) + ".model");
    model.save_file(model_path.string());
    cell.model_file = model_path.string();
    cell.ok = true;
    return cell;
  }

  SnrSelectionResult selection =
      select_training_snr(arch, p, config, book, map_ber_validation, inner_threads);
  cell.rho_t_db = selection.selection.rho_t_db;
  cell.nve_table = selection.selection.table;
  cell.dropped_val_snrs = selection.selection.dropped_val_snrs;

  NetworkModel& model = selection.chosen_model;
  const std::uint64_t chosen_cell = cell_stream_id(arch, p, cell.rho_t_db);
  for (std::size_t si = 0; si < config.eval_snr_grid_db.size(); ++si) {
    SnrRow row;
    row.ebn0_db = config.eval_snr_grid_db[si];
    row.ber = nnd_ber(model, book.code, row.ebn0_db, config.num_test_samples,
                      derive_seed(config.seed, {stream_tag("test"), chosen_cell, si}));
    row.ber_map = map_ber_validation[si];
    cell.snr_rows.push_back(row);
  }

  const fs::path model_path = model_dir / (cell_name(arch, p) + ".model");
  model.save_file(model_path.string());
  cell.model_file = model_path.string();
  cell.ok = true;
  return cell;
}

}  // namespace

RunStatus run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();

  const fs::path out_dir(options.out_dir);
  const fs::path cell_dir = out_dir / "cells";
  const fs::path model_dir = out_dir / "models";
  fs::create_directories(cell_dir);
  fs::create_directories(model_dir);

  const std::string config_hash = config.hash_hex();
  const PolarCode code = construct_code(config.n, config.k);
  const Codebook book = enumerate_codebook(code);

  // MAP baseline over the evaluation grid; doubles as NVE denominator.
  std::vector<double> map_baseline(config.eval_snr_grid_db.size(), 0.0);
  if (!config.noiseless && !config.archs.empty()) {
    parallel_for(static_cast<int>(config.eval_snr_grid_db.size()), options.threads, [&](int si) {
      map_baseline[static_cast<std::size_t>(si)] =
          map_ber(code, config.eval_snr_grid_db[static_cast<std::size_t>(si)],
                  config.num_test_samples,
                  derive_seed(config.seed, {stream_tag("map"), static_cast<std::uint64_t>(si)}));
    });
  }

  // Grid cells, cached per (arch, p) and keyed to the config hash.
  struct CellJob {
    ArchKind arch;
    double p;
  };
  std::vector<CellJob> jobs;
  for (ArchKind arch : config.archs) {
    for (double p : config.p_list) jobs.push_back({arch, p});
  }

  std::vector<CellResult> cells(jobs.size());
  const int outer = std::max(1, std::min<int>(options.threads, static_cast<int>(jobs.size())));
  const int inner = std::max(1, options.threads / std::max(1, outer));

  parallel_for(static_cast<int>(jobs.size()), options.threads, [&](int ji) {
    const CellJob& job = jobs[static_cast<std::size_t>(ji)];
    CellResult& cell = cells[static_cast<std::size_t>(ji)];
    const fs::path cache = cell_dir / (cell_name(job.arch, job.p) + ".json");

    if (fs::exists(cache)) {
      std::ifstream is(cache);
      Json j = Json::parse(is, nullptr, false);
      CellResult cached;
      if (!j.is_discarded() && cell_from_json(j, config_hash, cached) && cached.ok) {
        cell = std::move(cached);
        return;
      }
    }

    try {
      cell = run_cell(job.arch, job.p, config, book, map_baseline, model_dir, inner);
    } catch (const std::exception& e) {
      cell.arch = to_string(job.arch);
      cell.p = job.p;
      cell.ok = false;
      cell.error = e.what();
    }
    write_text_file(cache, cell_to_json(cell, config_hash).dump(2) + "\n");
  });

  // Timing rows per architecture at the configured N.
  struct TimingRow {
    std::string arch;
    std::string direction;
    double us = 0.0;
  };
  std::vector<TimingRow> timing(config.archs.size() * 2);
  parallel_for(static_cast<int>(config.archs.size()), options.threads, [&](int ai) {
    const ArchKind arch = config.archs[static_cast<std::size_t>(ai)];
    RngStream init(derive_seed(config.seed, {stream_tag("timing_init"),
                                             static_cast<std::uint64_t>(arch)}));
    NetworkModel model = build(config.arch_spec(arch), init);
    const double fwd = time_per_sample_us(model, Direction::kForward, kForwardTimingReps,
                                          config.seed);
    const double bwd = time_per_sample_us(model, Direction::kBackward, kBackwardTimingReps,
                                          config.seed);
    timing[static_cast<std::size_t>(2 * ai)] = {to_string(arch), "forward", fwd};
    timing[static_cast<std::size_t>(2 * ai + 1)] = {to_string(arch), "backward", bwd};
  });

  // ---- output files ----
  std::string ber_vs_step = "arch,p,rho_t_db,step,ber_train_subset,ber_full\n";
  std::string ber_vs_snr = "arch,p,rho_t_db,ebn0_db,ber,ber_map\n";
  std::string nve_csv = "arch,p,rho_t_db,nve\n";
  std::string timing_csv = "arch,n,direction,us_per_sample\n";

  for (const CellResult& cell : cells) {
    if (!cell.ok) continue;
    const std::string prefix =
        cell.arch + "," + format_double(cell.p) + "," + format_double(cell.rho_t_db) + ",";
    for (const StepRow& row : cell.step_rows) {
      ber_vs_step += prefix + format_int(row.step) + "," + format_double(row.ber_train_subset) +
                     "," + format_double(row.ber_full) + "\n";
    }
    for (const SnrRow& row : cell.snr_rows) {
      ber_vs_snr += prefix + format_double(row.ebn0_db) + "," + format_double(row.ber) + "," +
                    format_double(row.ber_map) + "\n";
    }
    for (const NvePoint& point : cell.nve_table) {
      nve_csv += cell.arch + "," + format_double(cell.p) + "," + format_double(point.rho_t_db) +
                 "," + format_double(point.nve) + "\n";
    }
  }
  for (const TimingRow& row : timing) {
    timing_csv += row.arch + "," + format_int(config.n) + "," + row.direction + "," +
                  format_double(row.us) + "\n";
  }

  write_text_file(out_dir / "ber_vs_step.csv", ber_vs_step);
  write_text_file(out_dir / "ber_vs_snr.csv", ber_vs_snr);
  write_text_file(out_dir / "nve.csv", nve_csv);
  write_text_file(out_dir / "timing.csv", timing_csv);

  Json report;
  report["format_version"] = 1;
  report["build"] = "nndbench 0.1.0";
  report["config"] = Json::parse(config.to_json());
  report["config_hash"] = config_hash;
  report["seed"] = config.seed;
  report["mode"] = config.noiseless ? "noiseless" : "noisy";
  report["info_positions"] = code.info_positions;

  Json map_rows = Json::array();
  if (!config.noiseless) {
    for (std::size_t si = 0; si < config.eval_snr_grid_db.size(); ++si) {
      map_rows.push_back({{"ebn0_db", config.eval_snr_grid_db[si]}, {"ber", map_baseline[si]}});
    }
  }
  report["map_ber"] = map_rows;

  Json cell_rows = Json::array();
  Json incomplete = Json::array();
  for (const CellResult& cell : cells) {
    cell_rows.push_back(cell_to_json(cell, config_hash));
    if (!cell.ok) incomplete.push_back(cell.arch + "_" + p_label(cell.p));
  }
  report["cells"] = cell_rows;
  report["incomplete_cells"] = incomplete;

  Json timing_rows = Json::array();
  for (const TimingRow& row : timing) {
    timing_rows.push_back({{"arch", row.arch},
                           {"n", config.n},
                           {"direction", row.direction},
                           {"us_per_sample", row.us}});
  }
  report["timing"] = timing_rows;

  write_text_file(out_dir / "report.json", report.dump(2) + "\n");

  return incomplete.empty() ? RunStatus::kOk : RunStatus::kPartial;
}

}  // namespace nndbench
