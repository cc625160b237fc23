#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nndbench/bits.hpp"
#include "nndbench/network.hpp"

namespace nndbench {

enum class ArchKind { kMlp, kCnn, kRnn };

ArchKind arch_from_string(const std::string& name);
std::string to_string(ArchKind kind);

// Decoder network recipe. Defaults follow the benchmark presets: MLP hidden
// layers 64/32/16, CNN channels 8/16/32 with a final kernel of N/8, LSTM
// hidden size 256 with a dense readout.
struct ArchitectureSpec {
  ArchKind kind = ArchKind::kMlp;
  int n = 8;
  int k = 4;
  std::vector<int> mlp_hidden{64, 32, 16};
  std::vector<int> cnn_channels{8, 16, 32};
  int rnn_hidden = 256;
  double dropout_p = 0.1;

  void validate() const;  // throws ConfigError
};

// Parameter tallies from the recipe alone, no tensors allocated.
// weights_only counts multiplicative weights; biases are excluded.
ParamCount param_count(const ArchitectureSpec& spec);

// Layer stack per the recipe; parameters are Xavier-initialized from rng.
template <typename T>
Network<T> build_network(const ArchitectureSpec& spec, RngStream& init_rng);

extern template Network<float> build_network<float>(const ArchitectureSpec&, RngStream&);
extern template Network<double> build_network<double>(const ArchitectureSpec&, RngStream&);

// A trained (or trainable) decoder: spec + float network + training
// provenance. decode() is a single inference pass with a 0.5 threshold;
// outputs of exactly 0.5 map to bit 0.
struct NetworkModel {
  ArchitectureSpec spec;
  Network<float> net;

  // provenance, populated by the harness
  double trained_p = 0.0;
  std::uint64_t subset_seed = 0;
  double rho_t_db = std::numeric_limits<double>::quiet_NaN();
  std::int64_t trained_steps = 0;

  BitVector decode(std::span<const double> y);
  // Row-per-sample batched forward; returns hard bits, shape [batch][K].
  std::vector<BitVector> decode_batch(const Tensor<float>& inputs);

  void save(std::ostream& os);
  void save_file(const std::string& path);
  static NetworkModel load(std::istream& is);
  static NetworkModel load_file(const std::string& path);
};

NetworkModel build(const ArchitectureSpec& spec, RngStream& init_rng);

// Threshold rule shared by decode paths: probability > 0.5 reads as 1.
inline int hard_bit(double probability) { return probability > 0.5 ? 1 : 0; }

}  // namespace nndbench
