#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "nndbench/bits.hpp"
#include "nndbench/rng.hpp"

namespace nndbench {

using RealVector = std::vector<double>;

// sigma^2 = 1 / (2 * R * 10^(ebn0_db/10)); energy per information bit.
double sigma_from_ebn0(double ebn0_db, double rate);

// AWGN description. Noiseless operation is sigma = 0.
struct NoiseSpec {
  double ebn0_db = 0.0;
  double rate = 0.5;
  double sigma = 1.0;
  std::uint64_t seed = 0;

  static NoiseSpec from_ebn0(double ebn0_db, double rate, std::uint64_t seed = 0);
  static NoiseSpec noiseless(std::uint64_t seed = 0);
};

// BPSK mapping: 0 -> +1.0, 1 -> -1.0.
RealVector bpsk_modulate(const BitVector& u);

// y = s + n, n i.i.d. N(0, sigma^2). sigma = 0 passes s through untouched.
RealVector transmit(const RealVector& s, const NoiseSpec& spec, RngStream& rng);

// In-place variant for hot loops.
void transmit_into(std::span<const double> s, double sigma, RngStream& rng,
                   std::span<double> y);

}  // namespace nndbench
