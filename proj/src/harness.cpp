#include "nndbench/harness.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "nndbench/errors.hpp"
#include "nndbench/loss.hpp"
#include "nndbench/parallel.hpp"
#include "nndbench/serialize.hpp"

namespace nndbench {

namespace {

std::uint64_t key_of(double v) { return std::bit_cast<std::uint64_t>(v); }

NetworkModel clone_model(NetworkModel& model) {
  std::stringstream buf;
  model.save(buf);
  return NetworkModel::load(buf);
}

}  // namespace

std::uint64_t cell_stream_id(ArchKind arch, double p, double rho_t_db) {
  return derive_seed(stream_tag("cell"),
                     {static_cast<std::uint64_t>(arch), key_of(p), key_of(rho_t_db)});
}

TrainingSubset make_training_subset(const Codebook& book, double p, std::uint64_t seed) {
  if (!(p > 0.0 && p <= 1.0)) throw ArgumentError("training subset: p must lie in (0, 1]");
  const std::uint64_t total = book.size();
  const auto wanted = static_cast<std::uint64_t>(
      std::max<long long>(1, std::llround(p * static_cast<double>(total))));
  const std::uint64_t count = std::min(wanted, total);

  RngStream rng(derive_seed(seed, {stream_tag("subset"), key_of(p),
                                   static_cast<std::uint64_t>(book.code.info_length)}));

  // Floyd's sampling: uniform over subsets, O(count) memory.
  std::set<std::uint64_t> chosen;
  for (std::uint64_t j = total - count; j < total; ++j) {
    const std::uint64_t t = rng.below(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }

  TrainingSubset subset;
  subset.fraction = p;
  subset.indices.assign(chosen.begin(), chosen.end());
  return subset;
}

TrainSampler::TrainSampler(const Codebook& book, const TrainingSubset& subset, double sigma,
                           std::int64_t pool_size, std::uint64_t seed, std::uint64_t cell_id)
    : book_(&book), subset_(&subset), sigma_(sigma), pool_size_(pool_size), seed_(seed),
      cell_id_(cell_id) {
  if (pool_size_ < 1) throw ArgumentError("train sampler: pool size must be >= 1");
  if (subset.indices.empty()) throw ArgumentError("train sampler: empty training subset");
  order_.resize(static_cast<std::size_t>(pool_size_));
  reshuffle();
}

void TrainSampler::reshuffle() {
  std::iota(order_.begin(), order_.end(), 0u);
  RngStream rng(derive_seed(seed_, {stream_tag("perm"), cell_id_,
                                    static_cast<std::uint64_t>(state_.cycle)}));
  for (std::int64_t i = pool_size_ - 1; i > 0; --i) {
    const auto j = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(order_[static_cast<std::size_t>(i)], order_[static_cast<std::size_t>(j)]);
  }
}

void TrainSampler::restore(const State& state) {
  state_ = state;
  reshuffle();
}

void TrainSampler::fill_sample(std::int64_t pool_idx, float* input_row, float* target_row) {
  RngStream rng(derive_seed(seed_, {stream_tag("sample"), cell_id_,
                                    static_cast<std::uint64_t>(pool_idx)}));
  const std::uint64_t word = subset_->indices[rng.below(subset_->indices.size())];
  const BitVector& codeword = book_->codewords[word];
  const BitVector& info = book_->info_words[word];
  const int n = book_->code.block_length;
  const int k = book_->code.info_length;
  for (int i = 0; i < n; ++i) {
    double y = codeword[static_cast<std::size_t>(i)] ? -1.0 : 1.0;
    if (sigma_ != 0.0) y += sigma_ * rng.normal();
    input_row[i] = static_cast<float>(y);
  }
  for (int i = 0; i < k; ++i) target_row[i] = static_cast<float>(info[static_cast<std::size_t>(i)]);
}

void TrainSampler::next_batch(int batch_size, Tensor<float>& inputs, Tensor<float>& targets) {
  const int n = book_->code.block_length;
  const int k = book_->code.info_length;
  if (inputs.rank() != 2 || inputs.dim(0) != batch_size || inputs.dim(1) != n) {
    inputs = Tensor<float>({batch_size, n});
  }
  if (targets.rank() != 2 || targets.dim(0) != batch_size || targets.dim(1) != k) {
    targets = Tensor<float>({batch_size, k});
  }
  for (int b = 0; b < batch_size; ++b) {
    if (state_.pos == pool_size_) {
      state_.pos = 0;
      ++state_.cycle;
      reshuffle();
    }
    const std::int64_t pool_idx = order_[static_cast<std::size_t>(state_.pos++)];
    fill_sample(pool_idx, inputs.data() + static_cast<std::int64_t>(b) * n,
                targets.data() + static_cast<std::int64_t>(b) * k);
  }
}

TrainStepReport backward_and_step(NetworkModel& model, const Tensor<float>& inputs,
                                  const Tensor<float>& targets, const AdamConfig& adam) {
  const Tensor<float> out = model.net.forward(inputs, Mode::kTrain);
  const double loss = mse_loss(targets, out);
  model.net.zero_grads();
  model.net.backward(mse_loss_grad(targets, out));
  const double grad_norm = model.net.grad_norm();
  if (!std::isfinite(loss) || !std::isfinite(grad_norm)) {
    throw NumericalError("training diverged: loss=" + std::to_string(loss) +
                         " grad_norm=" + std::to_string(grad_norm) + " at adam step " +
                         std::to_string(model.net.adam_steps() + 1));
  }
  model.net.adam_step(adam);
  return TrainStepReport{loss, grad_norm, model.net.adam_steps()};
}

void TrainCheckpoint::save(std::ostream& os, NetworkModel& model) const {
  io::write_pod<std::uint32_t>(os, 0x504b4354u);  // "TCKP"
  io::write_pod<std::int64_t>(os, step);
  io::write_pod<std::int64_t>(os, sampler.cycle);
  io::write_pod<std::int64_t>(os, sampler.pos);
  for (std::uint64_t w : dropout.s) io::write_pod<std::uint64_t>(os, w);
  io::write_pod<std::uint8_t>(os, dropout.has_cached_normal ? 1 : 0);
  io::write_pod<double>(os, dropout.cached_normal);
  model.save(os);
  model.net.save_adam_state(os);
}

TrainCheckpoint TrainCheckpoint::load(std::istream& is, NetworkModel& model) {
  if (io::read_pod<std::uint32_t>(is) != 0x504b4354u) {
    throw ConfigError("checkpoint file: bad magic");
  }
  TrainCheckpoint ckpt;
  ckpt.step = io::read_pod<std::int64_t>(is);
  ckpt.sampler.cycle = io::read_pod<std::int64_t>(is);
  ckpt.sampler.pos = io::read_pod<std::int64_t>(is);
  for (auto& w : ckpt.dropout.s) w = io::read_pod<std::uint64_t>(is);
  ckpt.dropout.has_cached_normal = io::read_pod<std::uint8_t>(is) != 0;
  ckpt.dropout.cached_normal = io::read_pod<double>(is);
  model = NetworkModel::load(is);
  model.net.load_adam_state(is);
  model.net.set_dropout_stream(RngStream(ckpt.dropout));
  return ckpt;
}

TrainResult train_model(NetworkModel& model, const Codebook& book, const TrainingSubset& subset,
                        const TrainOptions& options, double rho_t_db, std::uint64_t seed,
                        std::uint64_t cell_id, const CheckpointFn& on_checkpoint,
                        const TrainCheckpoint* resume, TrainCheckpoint* final_state) {
  const double sigma =
      std::isinf(rho_t_db) ? 0.0 : sigma_from_ebn0(rho_t_db, book.code.rate());

  TrainSampler sampler(book, subset, sigma, options.num_train_samples, seed, cell_id);
  std::int64_t start_step = 0;
  if (resume != nullptr) {
    sampler.restore(resume->sampler);
    start_step = resume->step;
  } else {
    model.net.set_dropout_stream(
        RngStream(derive_seed(seed, {stream_tag("dropout"), cell_id})));
  }

  // Checkpoints at powers of ten and at the final step.
  std::set<std::int64_t> checkpoints;
  for (std::int64_t s = 1; s <= options.max_steps && s > 0; s *= 10) checkpoints.insert(s);
  if (options.max_steps > 0) checkpoints.insert(options.max_steps);

  TrainResult result;
  Tensor<float> inputs, targets;
  for (std::int64_t step = start_step + 1; step <= options.max_steps; ++step) {
    sampler.next_batch(options.batch_size, inputs, targets);
    const TrainStepReport report = backward_and_step(model, inputs, targets, options.adam);
    result.steps_run = step;
    if (checkpoints.count(step)) {
      result.loss_trace.push_back(LossPoint{step, report.loss});
      model.trained_steps = step;
      if (on_checkpoint && !on_checkpoint(step, model)) {
        result.stopped_early = true;
        break;
      }
    }
  }
  model.trained_steps = std::max(result.steps_run, start_step);

  if (final_state != nullptr) {
    final_state->step = model.trained_steps;
    final_state->sampler = sampler.state();
    final_state->dropout = model.net.dropout_stream()->state();
  }
  return result;
}

double nnd_ber(NetworkModel& model, const PolarCode& code, double ebn0_db,
               std::int64_t num_samples, std::uint64_t seed, EvalSet restrict_to,
               const TrainingSubset* subset, int num_workers) {
  if (num_samples < 1) throw ArgumentError("nnd_ber: num_samples must be >= 1");
  if (restrict_to == EvalSet::kSubset && (subset == nullptr || subset->indices.empty())) {
    throw ArgumentError("nnd_ber: subset evaluation requires a non-empty subset");
  }
  if (num_workers < 1) num_workers = 1;

  const double sigma = std::isinf(ebn0_db) ? 0.0 : sigma_from_ebn0(ebn0_db, code.rate());
  const int n = code.block_length;
  const int k = code.info_length;
  const std::uint64_t full_count = 1ULL << k;
  constexpr int kEvalBatch = 256;

  auto run_chunk = [&](NetworkModel& worker_model, int worker, std::int64_t count) -> std::int64_t {
    RngStream rng(derive_seed(seed, {stream_tag("nnd_ber"), static_cast<std::uint64_t>(worker)}));
    std::int64_t bit_errors = 0;
    Tensor<float> inputs({kEvalBatch, n});
    std::vector<BitVector> sent(kEvalBatch);
    std::int64_t done = 0;
    while (done < count) {
      const int batch = static_cast<int>(std::min<std::int64_t>(kEvalBatch, count - done));
      for (int b = 0; b < batch; ++b) {
        const std::uint64_t word = restrict_to == EvalSet::kSubset
                                       ? subset->indices[rng.below(subset->indices.size())]
                                       : rng.below(full_count);
        sent[static_cast<std::size_t>(b)] = BitVector::from_index(word, static_cast<std::size_t>(k));
        const BitVector codeword = encode(code, sent[static_cast<std::size_t>(b)]);
        float* row = inputs.data() + static_cast<std::int64_t>(b) * n;
        for (int i = 0; i < n; ++i) {
          double y = codeword[static_cast<std::size_t>(i)] ? -1.0 : 1.0;
          if (sigma != 0.0) y += sigma * rng.normal();
          row[i] = static_cast<float>(y);
        }
      }
      Tensor<float> view = inputs;
      if (batch != kEvalBatch) {
        view = Tensor<float>({batch, n});
        std::copy(inputs.data(), inputs.data() + static_cast<std::int64_t>(batch) * n, view.data());
      }
      const std::vector<BitVector> decoded = worker_model.decode_batch(view);
      for (int b = 0; b < batch; ++b) {
        for (int i = 0; i < k; ++i) {
          bit_errors += decoded[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)] !=
                        sent[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)];
        }
      }
      done += batch;
    }
    return bit_errors;
  };

  std::vector<std::int64_t> counts(num_workers, num_samples / num_workers);
  for (std::int64_t r = 0; r < num_samples % num_workers; ++r) counts[r] += 1;

  std::vector<std::int64_t> errors(num_workers, 0);
  if (num_workers == 1) {
    errors[0] = run_chunk(model, 0, counts[0]);
  } else {
    std::vector<NetworkModel> clones;
    clones.reserve(static_cast<std::size_t>(num_workers));
    for (int w = 0; w < num_workers; ++w) clones.push_back(clone_model(model));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(num_workers));
    for (int w = 0; w < num_workers; ++w) {
      pool.emplace_back([&, w] { errors[w] = run_chunk(clones[static_cast<std::size_t>(w)], w, counts[w]); });
    }
    for (auto& t : pool) t.join();
  }

  std::int64_t total = 0;
  for (std::int64_t e : errors) total += e;
  return static_cast<double>(total) / (static_cast<double>(k) * num_samples);
}

double exhaustive_noiseless_ber(NetworkModel& model, const Codebook& book,
                                const TrainingSubset* subset) {
  const int n = book.code.block_length;
  const int k = book.code.info_length;
  std::vector<std::uint64_t> words;
  if (subset != nullptr) {
    words = subset->indices;
  } else {
    words.resize(book.size());
    std::iota(words.begin(), words.end(), 0u);
  }

  constexpr int kEvalBatch = 256;
  std::int64_t bit_errors = 0;
  std::size_t done = 0;
  while (done < words.size()) {
    const int batch = static_cast<int>(std::min<std::size_t>(kEvalBatch, words.size() - done));
    Tensor<float> inputs({batch, n});
    for (int b = 0; b < batch; ++b) {
      const BitVector& codeword = book.codewords[words[done + static_cast<std::size_t>(b)]];
      float* row = inputs.data() + static_cast<std::int64_t>(b) * n;
      for (int i = 0; i < n; ++i) row[i] = codeword[static_cast<std::size_t>(i)] ? -1.0f : 1.0f;
    }
    const std::vector<BitVector> decoded = model.decode_batch(inputs);
    for (int b = 0; b < batch; ++b) {
      const BitVector& info = book.info_words[words[done + static_cast<std::size_t>(b)]];
      for (int i = 0; i < k; ++i) {
        bit_errors += decoded[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)] !=
                      info[static_cast<std::size_t>(i)];
      }
    }
    done += static_cast<std::size_t>(batch);
  }
  return static_cast<double>(bit_errors) / (static_cast<double>(k) * static_cast<double>(words.size()));
}

double compute_nve(std::span<const double> ber_nnd, std::span<const double> ber_map) {
  if (ber_nnd.size() != ber_map.size() || ber_nnd.empty()) {
    throw ArgumentError("compute_nve: lists must be non-empty and of equal length");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < ber_nnd.size(); ++i) {
    if (ber_map[i] == 0.0) {
      throw ArgumentError("compute_nve: MAP BER is zero at validation point " + std::to_string(i) +
                          "; drop that point before averaging");
    }
    acc += ber_nnd[i] / ber_map[i];
  }
  return acc / static_cast<double>(ber_nnd.size());
}

int pick_min_nve(const std::vector<NvePoint>& table) {
  if (table.empty()) throw ArgumentError("pick_min_nve: empty table");
  int best = 0;
  for (int i = 1; i < static_cast<int>(table.size()); ++i) {
    if (table[static_cast<std::size_t>(i)].nve < table[static_cast<std::size_t>(best)].nve) best = i;
  }
  return best;
}

SnrSelectionResult select_training_snr(ArchKind arch, double p, const ExperimentConfig& config,
                                       const Codebook& book,
                                       std::span<const double> map_ber_validation,
                                       int threads) {
  if (config.train_snr_grid_db.empty()) {
    throw ConfigError("select_training_snr: empty training SNR grid");
  }
  if (map_ber_validation.size() != config.eval_snr_grid_db.size()) {
    throw ArgumentError("select_training_snr: MAP baseline does not align with validation grid");
  }

  // Validation points with MAP BER = 0 cannot enter the NVE ratio.
  std::vector<std::size_t> usable;
  std::vector<double> dropped;
  for (std::size_t i = 0; i < map_ber_validation.size(); ++i) {
    if (map_ber_validation[i] > 0.0) {
      usable.push_back(i);
    } else {
      dropped.push_back(config.eval_snr_grid_db[i]);
    }
  }
  if (usable.empty()) {
    throw NumericalError("select_training_snr: MAP BER is zero at every validation point; "
                         "increase num_test_samples or lower the validation SNRs");
  }

  const TrainingSubset subset = make_training_subset(book, p, config.seed);
  const int grid = static_cast<int>(config.train_snr_grid_db.size());

  SnrSelectionResult result;
  result.validation_ber.assign(static_cast<std::size_t>(grid), {});
  std::vector<NvePoint> table(static_cast<std::size_t>(grid));
  std::vector<NetworkModel> models(static_cast<std::size_t>(grid));

  TrainOptions options;
  options.max_steps = config.max_steps;
  options.batch_size = config.batch_size;
  options.num_train_samples = config.num_train_samples;
  options.adam = config.adam();

  parallel_for(grid, threads, [&](int gi) {
    const double rho = config.train_snr_grid_db[static_cast<std::size_t>(gi)];
    const std::uint64_t cell = cell_stream_id(arch, p, rho);
    RngStream init(derive_seed(config.seed, {stream_tag("init"), cell}));
    NetworkModel model = build(config.arch_spec(arch), init);
    model.trained_p = p;
    model.subset_seed = config.seed;
    model.rho_t_db = rho;
    train_model(model, book, subset, options, rho, config.seed, cell);

    std::vector<double> val(config.eval_snr_grid_db.size(), 0.0);
    for (std::size_t si = 0; si < config.eval_snr_grid_db.size(); ++si) {
      val[si] = nnd_ber(model, book.code, config.eval_snr_grid_db[si], config.num_test_samples,
                        derive_seed(config.seed, {stream_tag("val"), cell, si}));
    }

    std::vector<double> nnd_points, map_points;
    for (std::size_t i : usable) {
      nnd_points.push_back(val[i]);
      map_points.push_back(map_ber_validation[i]);
    }
    table[static_cast<std::size_t>(gi)] = NvePoint{rho, compute_nve(nnd_points, map_points)};
    result.validation_ber[static_cast<std::size_t>(gi)] = std::move(val);
    models[static_cast<std::size_t>(gi)] = std::move(model);
  });

  const int chosen = pick_min_nve(table);
  result.selection.rho_t_db = config.train_snr_grid_db[static_cast<std::size_t>(chosen)];
  result.selection.chosen_index = chosen;
  result.selection.table = std::move(table);
  result.selection.dropped_val_snrs = std::move(dropped);
  result.chosen_model = std::move(models[static_cast<std::size_t>(chosen)]);
  return result;
}

double time_per_sample_us(NetworkModel& model, Direction direction, int repetitions,
                          std::uint64_t seed, int warmup) {
  if (repetitions < 100) throw ArgumentError("time_per_sample: repetitions must be >= 100");

  RngStream rng(derive_seed(seed, {stream_tag("timing")}));
  Tensor<float> input({1, model.spec.n});
  for (std::int64_t i = 0; i < input.size(); ++i) {
    input[i] = static_cast<float>(rng.below(2) == 0 ? 1.0 : -1.0) +
               0.1f * static_cast<float>(rng.normal());
  }
  Tensor<float> target({1, model.spec.k});
  for (std::int64_t i = 0; i < target.size(); ++i) {
    target[i] = static_cast<float>(rng.below(2));
  }
  if (model.net.dropout_stream() == nullptr) {
    model.net.set_dropout_stream(RngStream(derive_seed(seed, {stream_tag("timing_dropout")})));
  }

  auto pass = [&]() {
    if (direction == Direction::kForward) {
      (void)model.net.forward(input, Mode::kInfer);
    } else {
      const Tensor<float> out = model.net.forward(input, Mode::kTrain);
      model.net.zero_grads();
      model.net.backward(mse_loss_grad(target, out));
    }
  };

  for (int i = 0; i < warmup; ++i) pass();

  std::vector<double> us(static_cast<std::size_t>(repetitions));
  for (int r = 0; r < repetitions; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    pass();
    const auto t1 = std::chrono::steady_clock::now();
    us[static_cast<std::size_t>(r)] =
        std::chrono::duration<double, std::micro>(t1 - t0).count();
  }
  const auto mid = us.begin() + repetitions / 2;
  std::nth_element(us.begin(), mid, us.end());
  return *mid;
}

}  // namespace nndbench
