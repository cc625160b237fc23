#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nndbench/channel.hpp"
#include "nndbench/config.hpp"
#include "nndbench/decoders.hpp"
#include "nndbench/map_oracle.hpp"
#include "nndbench/polar.hpp"

namespace nndbench {

// Sorted codebook indices forming the training pool X_p.
struct TrainingSubset {
  std::vector<std::uint64_t> indices;
  double fraction = 1.0;
};

// Uniform subset without replacement, |subset| = max(1, round(p * 2^K)).
TrainingSubset make_training_subset(const Codebook& book, double p, std::uint64_t seed);

// Deterministic training-sample pool. Sample content is a pure function of
// (seed, cell_id, pool index): wrapping around after num_train_samples draws
// replays the same noisy samples in a freshly shuffled order.
class TrainSampler {
 public:
  struct State {
    std::int64_t cycle = 0;
    std::int64_t pos = 0;
  };

  TrainSampler(const Codebook& book, const TrainingSubset& subset, double sigma,
               std::int64_t pool_size, std::uint64_t seed, std::uint64_t cell_id);

  // Fills inputs [batch, N] and targets [batch, K].
  void next_batch(int batch_size, Tensor<float>& inputs, Tensor<float>& targets);

  State state() const { return state_; }
  void restore(const State& state);

 private:
  void fill_sample(std::int64_t pool_idx, float* input_row, float* target_row);
  void reshuffle();

  const Codebook* book_;
  const TrainingSubset* subset_;
  double sigma_;
  std::int64_t pool_size_;
  std::uint64_t seed_, cell_id_;
  State state_;
  std::vector<std::uint32_t> order_;
};

struct LossPoint {
  std::int64_t step = 0;
  double loss = 0.0;
};

struct TrainStepReport {
  double loss = 0.0;
  double grad_norm = 0.0;
  std::int64_t step_index = 0;
};

// One forward/backward/Adam update on a mini-batch. Throws NumericalError on
// a non-finite loss or gradient.
TrainStepReport backward_and_step(NetworkModel& model, const Tensor<float>& inputs,
                                  const Tensor<float>& targets, const AdamConfig& adam);

struct TrainOptions {
  std::int64_t max_steps = 20'000;
  int batch_size = 128;
  std::int64_t num_train_samples = 1'000'000;
  AdamConfig adam;
};

// Invoked at checkpoint steps (powers of ten and the final step). Returning
// false stops training at that checkpoint.
using CheckpointFn = std::function<bool(std::int64_t step, NetworkModel& model)>;

struct TrainResult {
  std::vector<LossPoint> loss_trace;  // recorded at checkpoint steps
  std::int64_t steps_run = 0;
  bool stopped_early = false;
};

// Serializable mid-training snapshot; resuming from it reproduces the
// uninterrupted run bit-for-bit.
struct TrainCheckpoint {
  std::int64_t step = 0;
  TrainSampler::State sampler;
  RngState dropout;

  void save(std::ostream& os, NetworkModel& model) const;
  static TrainCheckpoint load(std::istream& is, NetworkModel& model);
};

// Runs Adam steps at training SNR rho_t_db (infinite => sigma 0). The model
// must carry the same (seed, cell_id) streams across resume calls.
TrainResult train_model(NetworkModel& model, const Codebook& book, const TrainingSubset& subset,
                        const TrainOptions& options, double rho_t_db, std::uint64_t seed,
                        std::uint64_t cell_id, const CheckpointFn& on_checkpoint = {},
                        const TrainCheckpoint* resume = nullptr,
                        TrainCheckpoint* final_state = nullptr);

enum class EvalSet { kFull, kSubset };

// Monte-Carlo BER of the network decoder. Worker partitioning as map_ber.
double nnd_ber(NetworkModel& model, const PolarCode& code, double ebn0_db,
               std::int64_t num_samples, std::uint64_t seed, EvalSet restrict_to = EvalSet::kFull,
               const TrainingSubset* subset = nullptr, int num_workers = 1);

// Exact noiseless BER: decodes the unperturbed BPSK image of every codebook
// entry (or of the subset) once.
double exhaustive_noiseless_ber(NetworkModel& model, const Codebook& book,
                                const TrainingSubset* subset = nullptr);

// Eq-style normalized validation error: mean over validation SNRs of
// BER_NND / BER_MAP. Zero MAP entries are a caller error.
double compute_nve(std::span<const double> ber_nnd, std::span<const double> ber_map);

struct NvePoint {
  double rho_t_db = 0.0;
  double nve = 0.0;
};

struct SnrSelection {
  double rho_t_db = 0.0;
  int chosen_index = 0;
  std::vector<NvePoint> table;
  std::vector<double> dropped_val_snrs;  // validation points with MAP BER = 0
};

// Index of the minimal NVE; ties resolve to the lower training SNR.
int pick_min_nve(const std::vector<NvePoint>& table);

// Trains one model per training-SNR grid point, scores each against the MAP
// baseline over the validation grid, returns the winner and its model.
// map_ber_validation must align with config.eval_snr_grid_db.
struct SnrSelectionResult {
  SnrSelection selection;
  NetworkModel chosen_model;
  std::vector<std::vector<double>> validation_ber;  // [grid point][val snr]
};
SnrSelectionResult select_training_snr(ArchKind arch, double p, const ExperimentConfig& config,
                                       const Codebook& book,
                                       std::span<const double> map_ber_validation,
                                       int threads = 1);

enum class Direction { kForward, kBackward };

// Median wall-clock microseconds per single-sample pass. Backward timing
// covers the full training-sample pass (forward + gradients, no update).
double time_per_sample_us(NetworkModel& model, Direction direction, int repetitions,
                          std::uint64_t seed = 0, int warmup = 10);

// Stable cell identifier for RNG stream derivation.
std::uint64_t cell_stream_id(ArchKind arch, double p, double rho_t_db);

}  // namespace nndbench
