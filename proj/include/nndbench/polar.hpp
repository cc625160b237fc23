#pragma once

#include <cstdint>
#include <vector>

#include "nndbench/bits.hpp"

namespace nndbench {

// Polar code configuration. Construction is deterministic in (N, K).
struct PolarCode {
  int block_length = 0;             // N, power of two
  int info_length = 0;              // K
  std::vector<int> info_positions;  // sorted ascending, size K
  std::vector<std::uint8_t> is_info;  // mask of length N

  double rate() const { return static_cast<double>(info_length) / block_length; }
};

// All 2^K (information word, codeword) pairs, entry i keyed by the K-bit
// binary expansion of i.
struct Codebook {
  PolarCode code;
  std::vector<BitVector> info_words;
  std::vector<BitVector> codewords;

  std::size_t size() const { return codewords.size(); }
};

// Bhattacharyya parameters of the N synthetic channels in natural index
// order, recursion Z -> {2Z - Z^2, Z^2} from Z = 0.5.
std::vector<double> bhattacharyya_profile(int block_length);

// Picks the K most reliable positions (smallest Z, ties toward the higher
// index). Frozen bits are fixed to 0.
PolarCode construct_code(int block_length, int info_length);

// Scatters x onto the info positions of a length-N vector, 0 elsewhere.
BitVector expand_info(const PolarCode& code, const BitVector& x);

// In-place butterfly for u * F^{(x)n}, F = [[1,0],[1,1]], natural order.
BitVector polar_transform(BitVector u);

BitVector encode(const PolarCode& code, const BitVector& x);

// Enumerates every information word; guarded at K <= 24.
Codebook enumerate_codebook(const PolarCode& code);

}  // namespace nndbench
