#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nndbench/channel.hpp"
#include "nndbench/polar.hpp"

namespace nndbench {

struct MapDecision {
  BitVector info_bits;
  std::uint64_t codeword_index = 0;  // smallest index attaining the minimum
  double metric = 0.0;               // min squared distance to a BPSK image
};

// Exhaustive minimum-distance decoder over a codebook. Equivalent to MAP for
// equiprobable words over AWGN. Read-only after construction.
class MapDecoder {
 public:
  explicit MapDecoder(const Codebook& book);

  MapDecision decode(std::span<const double> y) const;

  // BPSK image of codebook entry i.
  std::span<const double> symbols(std::uint64_t i) const {
    return {symbols_.data() + i * n_, static_cast<std::size_t>(n_)};
  }

  const Codebook& book() const { return *book_; }

 private:
  const Codebook* book_;
  int n_;
  std::vector<double> symbols_;  // 2^K x N, flattened
};

MapDecision map_decode(const RealVector& y, const Codebook& book);

// Monte-Carlo bit error rate of MAP decoding at a given Eb/N0. Samples are
// partitioned into fixed contiguous chunks per worker, so results are
// reproducible at fixed (seed, num_workers).
double map_ber(const PolarCode& code, double ebn0_db, std::int64_t num_samples,
               std::uint64_t seed, int num_workers = 1);

}  // namespace nndbench
