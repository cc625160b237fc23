#pragma once

#include <string>

#include "nndbench/config.hpp"
#include "nndbench/harness.hpp"

namespace nndbench {

enum class RunStatus : int {
  kOk = 0,
  kConfigError = 1,
  kNumericalError = 2,
  kPartial = 3,
};

struct RunOptions {
  std::string out_dir = "out";
  int threads = 1;
};

// Executes the full grid (arch x p, with training-SNR selection in noisy
// mode), then writes report.json, ber_vs_step.csv, ber_vs_snr.csv, nve.csv
// and timing.csv into out_dir. Completed cells are cached under
// out_dir/cells/ and reused on rerun. Failed cells are recorded and skipped;
// any failure yields kPartial.
RunStatus run_experiment(const ExperimentConfig& config, const RunOptions& options);

}  // namespace nndbench
