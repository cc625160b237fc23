#include "nndbench/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nndbench/errors.hpp"

namespace nndbench {

namespace {

using Json = nlohmann::ordered_json;

void require_sorted(const std::vector<double>& grid, const char* name) {
  if (grid.empty()) throw ConfigError(std::string(name) + " must not be empty");
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw ConfigError(std::string(name) + " must be sorted ascending");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n < 2 || (n & (n - 1)) != 0) throw ConfigError("n must be a power of two >= 2");
  if (k < 1 || k > n) throw ConfigError("k must satisfy 1 <= k <= n");
  if (k > 24) throw ConfigError("k > 24 exceeds the codebook enumeration guard");
  for (double p : p_list) {
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("each p must lie in (0, 1]");
  }
  if (p_list.empty()) throw ConfigError("p_list must not be empty");
  require_sorted(train_snr_grid_db, "train_snr_grid_db");
  require_sorted(eval_snr_grid_db, "eval_snr_grid_db");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (max_steps < 0) throw ConfigError("max_steps must be >= 0");
  if (num_train_samples < 1) throw ConfigError("num_train_samples must be >= 1");
  if (num_test_samples < 1) throw ConfigError("num_test_samples must be >= 1");
  for (ArchKind kind : archs) arch_spec(kind).validate();
}

ArchitectureSpec ExperimentConfig::arch_spec(ArchKind kind) const {
  ArchitectureSpec spec;
  spec.kind = kind;
  spec.n = n;
  spec.k = k;
  spec.mlp_hidden = mlp_hidden;
  spec.cnn_channels = cnn_channels;
  spec.rnn_hidden = rnn_hidden;
  spec.dropout_p = dropout_p;
  return spec;
}

AdamConfig ExperimentConfig::adam() const {
  return AdamConfig{adam_step_size, adam_beta1, adam_beta2, adam_epsilon};
}

std::string ExperimentConfig::to_json() const {
  Json j;
  j["n"] = n;
  j["k"] = k;
  Json::array_t arch_names;
  for (ArchKind kind : archs) arch_names.push_back(to_string(kind));
  j["archs"] = arch_names;
  j["p_list"] = p_list;
  j["train_snr_grid_db"] = train_snr_grid_db;
  j["eval_snr_grid_db"] = eval_snr_grid_db;
  j["num_train_samples"] = num_train_samples;
  j["num_test_samples"] = num_test_samples;
  j["batch_size"] = batch_size;
  j["max_steps"] = max_steps;
  j["noiseless"] = noiseless;
  j["seed"] = seed;
  j["adam_step_size"] = adam_step_size;
  j["adam_beta1"] = adam_beta1;
  j["adam_beta2"] = adam_beta2;
  j["adam_epsilon"] = adam_epsilon;
  j["dropout_p"] = dropout_p;
  j["mlp_hidden"] = mlp_hidden;
  j["cnn_channels"] = cnn_channels;
  j["rnn_hidden"] = rnn_hidden;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");

  static const std::set<std::string> known{
      "n", "k", "archs", "p_list", "train_snr_grid_db", "eval_snr_grid_db",
      "num_train_samples", "num_test_samples", "batch_size", "max_steps",
      "noiseless", "seed", "adam_step_size", "adam_beta1", "adam_beta2",
      "adam_epsilon", "dropout_p", "mlp_hidden", "cnn_channels", "rnn_hidden"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("config: unknown key '" + key + "'");
  }

  ExperimentConfig cfg;
  try {
    if (j.contains("n")) cfg.n = j["n"].get<int>();
    if (j.contains("k")) cfg.k = j["k"].get<int>();
    if (j.contains("archs")) {
      cfg.archs.clear();
      for (const auto& name : j["archs"]) cfg.archs.push_back(arch_from_string(name.get<std::string>()));
    }
    if (j.contains("p_list")) cfg.p_list = j["p_list"].get<std::vector<double>>();
    if (j.contains("train_snr_grid_db")) {
      cfg.train_snr_grid_db = j["train_snr_grid_db"].get<std::vector<double>>();
    }
    if (j.contains("eval_snr_grid_db")) {
      cfg.eval_snr_grid_db = j["eval_snr_grid_db"].get<std::vector<double>>();
    }
    if (j.contains("num_train_samples")) cfg.num_train_samples = j["num_train_samples"].get<std::int64_t>();
    if (j.contains("num_test_samples")) cfg.num_test_samples = j["num_test_samples"].get<std::int64_t>();
    if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<int>();
    if (j.contains("max_steps")) cfg.max_steps = j["max_steps"].get<std::int64_t>();
    if (j.contains("noiseless")) cfg.noiseless = j["noiseless"].get<bool>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("adam_step_size")) cfg.adam_step_size = j["adam_step_size"].get<double>();
    if (j.contains("adam_beta1")) cfg.adam_beta1 = j["adam_beta1"].get<double>();
    if (j.contains("adam_beta2")) cfg.adam_beta2 = j["adam_beta2"].get<double>();
    if (j.contains("adam_epsilon")) cfg.adam_epsilon = j["adam_epsilon"].get<double>();
    if (j.contains("dropout_p")) cfg.dropout_p = j["dropout_p"].get<double>();
    if (j.contains("mlp_hidden")) cfg.mlp_hidden = j["mlp_hidden"].get<std::vector<int>>();
    if (j.contains("cnn_channels")) cfg.cnn_channels = j["cnn_channels"].get<std::vector<int>>();
    if (j.contains("rnn_hidden")) cfg.rnn_hidden = j["rnn_hidden"].get<int>();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << is.rdbuf();
  return from_json(buf.str());
}

std::string ExperimentConfig::hash_hex() const {
  const std::string text = to_json();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) h = (h ^ c) * 0x100000001b3ULL;
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace nndbench
