#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nndbench/decoders.hpp"

namespace nndbench {

// Declarative description of one benchmark run. JSON fields mirror the
// members one-for-one; unknown keys are rejected.
struct ExperimentConfig {
  int n = 8;
  int k = 4;
  std::vector<ArchKind> archs{ArchKind::kMlp, ArchKind::kCnn, ArchKind::kRnn};
  std::vector<double> p_list{0.40, 0.60, 0.80, 1.00};
  std::vector<double> train_snr_grid_db{-2, 0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
  std::vector<double> eval_snr_grid_db{0, 1, 2, 3, 4, 5, 6, 7, 8};
  std::int64_t num_train_samples = 1'000'000;
  std::int64_t num_test_samples = 100'000;
  int batch_size = 128;
  std::int64_t max_steps = 20'000;
  bool noiseless = false;
  std::uint64_t seed = 1;

  // network hyperparameters, exposed so the pinned defaults stay adjustable
  double adam_step_size = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double dropout_p = 0.1;
  std::vector<int> mlp_hidden{64, 32, 16};
  std::vector<int> cnn_channels{8, 16, 32};
  int rnn_hidden = 256;

  void validate() const;  // throws ConfigError

  ArchitectureSpec arch_spec(ArchKind kind) const;
  AdamConfig adam() const;

  std::string to_json() const;                       // canonical, pretty-printed
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);

  // FNV-1a over the canonical JSON form.
  std::string hash_hex() const;
};

}  // namespace nndbench
