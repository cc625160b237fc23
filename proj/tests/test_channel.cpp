#include <doctest.h>

#include <cmath>

#include "nndbench/channel.hpp"
#include "nndbench/errors.hpp"

using namespace nndbench;

TEST_SUITE("channel") {

TEST_CASE("sigma_from_ebn0 reference points") {
  CHECK(sigma_from_ebn0(0.0, 0.5) == 1.0);
  CHECK(sigma_from_ebn0(10.0, 0.5) == doctest::Approx(std::sqrt(0.1)).epsilon(1e-14));
  CHECK(sigma_from_ebn0(70.0, 0.5) < 1e-3);
}

TEST_CASE("sigma_from_ebn0 is strictly decreasing in Eb/N0") {
  double prev = sigma_from_ebn0(-10.0, 0.5);
  for (double db = -9.0; db <= 20.0; db += 1.0) {
    const double s = sigma_from_ebn0(db, 0.5);
    CHECK(s < prev);
    prev = s;
  }
}

TEST_CASE("sigma_from_ebn0 rejects non-positive rate") {
  CHECK_THROWS_AS(sigma_from_ebn0(0.0, 0.0), ArgumentError);
  CHECK_THROWS_AS(sigma_from_ebn0(0.0, -0.5), ArgumentError);
}

TEST_CASE("bpsk mapping") {
  CHECK(bpsk_modulate(BitVector{0, 0, 0, 0}) == RealVector{1, 1, 1, 1});
  CHECK(bpsk_modulate(BitVector{0, 1}) == RealVector{1, -1});
  CHECK(bpsk_modulate(BitVector{1, 1, 0}) == RealVector{-1, -1, 1});
}

TEST_CASE("hard thresholding the BPSK image recovers the bits") {
  RngStream rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    BitVector u(16);
    for (int i = 0; i < 16; ++i) u.set(i, static_cast<int>(rng.below(2)));
    const RealVector s = bpsk_modulate(u);
    for (int i = 0; i < 16; ++i) {
      CHECK((s[static_cast<std::size_t>(i)] < 0.0 ? 1 : 0) == u[static_cast<std::size_t>(i)]);
    }
  }
}

TEST_CASE("noiseless transmit is exact") {
  const NoiseSpec spec = NoiseSpec::noiseless();
  CHECK(spec.sigma == 0.0);
  RngStream rng(5);
  const RealVector s{1, -1, 1, -1};
  CHECK(transmit(s, spec, rng) == s);
}

TEST_CASE("transmit is deterministic per (seed, stream position)") {
  const NoiseSpec spec = NoiseSpec::from_ebn0(2.0, 0.5);
  const RealVector s{1, -1, 1, -1, 1, -1, 1, -1};
  RngStream a(99);
  RngStream b(99);
  CHECK(transmit(s, spec, a) == transmit(s, spec, b));
  CHECK(transmit(s, spec, a) == transmit(s, spec, b));  // advanced state, still in lockstep
}

TEST_CASE("NoiseSpec ties sigma to the stated conversion") {
  const NoiseSpec spec = NoiseSpec::from_ebn0(4.0, 0.5, 7);
  CHECK(spec.sigma == sigma_from_ebn0(4.0, 0.5));
  CHECK(spec.seed == 7);
}

TEST_CASE("noise calibration over 1e6 samples") {
  constexpr int kSamples = 1'000'000;
  for (double sigma : {0.5, 1.0, 2.0}) {
    RngStream rng(stream_tag("calibration"));
    double sum = 0.0, sum_sq = 0.0;
    const std::vector<double> zeros(8, 0.0);
    std::vector<double> y(8);
    for (int i = 0; i < kSamples / 8; ++i) {
      transmit_into(zeros, sigma, rng, y);
      for (double v : y) {
        sum += v;
        sum_sq += v * v;
      }
    }
    const double mean = sum / kSamples;
    const double var = sum_sq / kSamples - mean * mean;
    CAPTURE(sigma);
    if (sigma == 1.0) CHECK(std::abs(mean) < 0.005);
    CHECK(var > sigma * sigma * 0.99);
    CHECK(var < sigma * sigma * 1.01);
  }
}

}  // TEST_SUITE
