#include "nndbench/channel.hpp"

#include <cmath>
#include <string>

#include "nndbench/errors.hpp"

namespace nndbench {

double sigma_from_ebn0(double ebn0_db, double rate) {
  if (!(rate > 0.0)) {
    throw ArgumentError("sigma_from_ebn0: rate must be positive, got " + std::to_string(rate));
  }
  return std::sqrt(1.0 / (2.0 * rate * std::pow(10.0, ebn0_db / 10.0)));
}

NoiseSpec NoiseSpec::from_ebn0(double ebn0_db, double rate, std::uint64_t seed) {
  NoiseSpec spec;
  spec.ebn0_db = ebn0_db;
  spec.rate = rate;
  spec.sigma = sigma_from_ebn0(ebn0_db, rate);
  spec.seed = seed;
  return spec;
}

NoiseSpec NoiseSpec::noiseless(std::uint64_t seed) {
  NoiseSpec spec;
  spec.ebn0_db = std::numeric_limits<double>::infinity();
  spec.rate = 1.0;
  spec.sigma = 0.0;
  spec.seed = seed;
  return spec;
}

RealVector bpsk_modulate(const BitVector& u) {
  RealVector s(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) s[i] = u[i] ? -1.0 : 1.0;
  return s;
}

RealVector transmit(const RealVector& s, const NoiseSpec& spec, RngStream& rng) {
  RealVector y(s.size());
  transmit_into(s, spec.sigma, rng, y);
  return y;
}

void transmit_into(std::span<const double> s, double sigma, RngStream& rng,
                   std::span<double> y) {
  if (sigma == 0.0) {
    for (std::size_t i = 0; i < s.size(); ++i) y[i] = s[i];
    return;
  }
  for (std::size_t i = 0; i < s.size(); ++i) y[i] = s[i] + sigma * rng.normal();
}

}  // namespace nndbench
