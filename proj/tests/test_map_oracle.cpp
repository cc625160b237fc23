#include <doctest.h>

#include <cmath>
#include <vector>

#include "nndbench/errors.hpp"
#include "nndbench/map_oracle.hpp"
#include "nndbench/rng.hpp"

using namespace nndbench;

TEST_SUITE("map_oracle") {

TEST_CASE("noiseless round trip over the whole codebook") {
  const Codebook book = enumerate_codebook(construct_code(8, 4));
  const MapDecoder decoder(book);
  for (std::size_t i = 0; i < book.size(); ++i) {
    const MapDecision decision = decoder.decode(decoder.symbols(i));
    CHECK(decision.codeword_index == i);
    CHECK(decision.metric == 0.0);
    CHECK(decision.info_bits == book.info_words[i]);
  }
}

TEST_CASE("repetition-code hand example") {
  const Codebook book = enumerate_codebook(construct_code(2, 1));
  const MapDecision decision = map_decode(RealVector{0.1, 0.2}, book);
  // distances: to (+1,+1) 0.81 + 0.64 = 1.45, to (-1,-1) 1.21 + 1.44 = 2.65
  CHECK(decision.info_bits == BitVector{0});
  CHECK(decision.metric == doctest::Approx(1.45).epsilon(1e-12));
}

TEST_CASE("exact ties resolve to the smaller index") {
  const Codebook book = enumerate_codebook(construct_code(2, 1));
  const MapDecision decision = map_decode(RealVector{0.0, 0.0}, book);
  CHECK(decision.codeword_index == 0);
  CHECK(decision.metric == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("length mismatch is rejected") {
  const Codebook book = enumerate_codebook(construct_code(4, 2));
  CHECK_THROWS_AS(map_decode(RealVector{1.0, -1.0}, book), ArgumentError);
}

TEST_CASE("min distance equals the explicit Gaussian likelihood argmax") {
  const Codebook book = enumerate_codebook(construct_code(8, 4));
  const MapDecoder decoder(book);
  const double sigma = 1.0;
  RngStream rng(stream_tag("oracle_equivalence"));
  for (int trial = 0; trial < 1000; ++trial) {
    RealVector y(8);
    for (double& v : y) v = 4.0 * rng.uniform01() - 2.0;

    // brute-force likelihood, computed directly from exp(-d^2 / (2 sigma^2))
    std::size_t best = 0;
    double best_like = -1.0;
    for (std::size_t i = 0; i < book.size(); ++i) {
      double d = 0.0;
      for (int j = 0; j < 8; ++j) {
        const double e = y[static_cast<std::size_t>(j)] - decoder.symbols(i)[static_cast<std::size_t>(j)];
        d += e * e;
      }
      const double like = std::exp(-d / (2.0 * sigma * sigma));
      if (like > best_like) {
        best_like = like;
        best = i;
      }
    }
    CHECK(decoder.decode(y).codeword_index == best);
  }
}

TEST_CASE("metric equals the minimum squared distance") {
  const Codebook book = enumerate_codebook(construct_code(8, 4));
  const MapDecoder decoder(book);
  RngStream rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    RealVector y(8);
    for (double& v : y) v = 3.0 * rng.normal();
    double best = 1e300;
    for (std::size_t i = 0; i < book.size(); ++i) {
      double d = 0.0;
      for (int j = 0; j < 8; ++j) {
        const double e = y[static_cast<std::size_t>(j)] - decoder.symbols(i)[static_cast<std::size_t>(j)];
        d += e * e;
      }
      best = std::min(best, d);
    }
    CHECK(decoder.decode(y).metric == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("map_ber at noiseless SNR is zero") {
  const PolarCode code = construct_code(8, 4);
  CHECK(map_ber(code, std::numeric_limits<double>::infinity(), 1000, 1) == 0.0);
}

TEST_CASE("map_ber near vanishing SNR sits around one half") {
  const PolarCode code = construct_code(8, 4);
  const double ber = map_ber(code, -40.0, 100'000, 2);
  CHECK(ber > 0.4);
  CHECK(ber < 0.6);
}

TEST_CASE("map_ber is deterministic per (seed, worker count)") {
  const PolarCode code = construct_code(8, 4);
  CHECK(map_ber(code, 2.0, 20'000, 123) == map_ber(code, 2.0, 20'000, 123));
  CHECK(map_ber(code, 2.0, 20'000, 123, 4) == map_ber(code, 2.0, 20'000, 123, 4));
}

TEST_CASE("map_ber is statistically non-increasing in Eb/N0") {
  const PolarCode code = construct_code(8, 4);
  std::vector<double> bers;
  for (double db : {0.0, 2.0, 4.0, 6.0}) {
    bers.push_back(map_ber(code, db, 100'000, 17));
  }
  int bad = 0;
  for (std::size_t i = 0; i + 1 < bers.size(); ++i) {
    if (bers[i + 1] > bers[i]) {
      // tolerated only deep in the Monte-Carlo noise floor
      if (std::max(bers[i], bers[i + 1]) < 1e-4) {
        ++bad;
      } else {
        FAIL("BER increased from " << bers[i] << " to " << bers[i + 1]);
      }
    }
  }
  CHECK(bad <= 1);
}

}  // TEST_SUITE
