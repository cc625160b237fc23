#include <doctest.h>

#include <set>

#include "nndbench/errors.hpp"
#include "nndbench/polar.hpp"
#include "nndbench/rng.hpp"

using namespace nndbench;

namespace {

// Independent oracle: the Z recursion written recursively, upgrade branch
// first, as opposed to the iterative in-place sweep in the library.
void z_recursion(double z, int i, int h, std::vector<double>& out) {
  if (h == 0) {
    out[static_cast<std::size_t>(i)] = z;
    return;
  }
  z_recursion(2.0 * z - z * z, i, h / 2, out);
  z_recursion(z * z, i + h, h / 2, out);
}

std::vector<double> z_oracle(int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  z_recursion(0.5, 0, n / 2, out);
  return out;
}

BitVector random_word(RngStream& rng, int k) {
  BitVector x(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) x.set(i, static_cast<int>(rng.below(2)));
  return x;
}

}  // namespace

TEST_SUITE("polar") {

TEST_CASE("bhattacharyya profile matches hand-computed N=4 values") {
  const std::vector<double> z = bhattacharyya_profile(4);
  CHECK(z[0] == doctest::Approx(0.9375).epsilon(1e-15));
  CHECK(z[1] == doctest::Approx(0.5625).epsilon(1e-15));
  CHECK(z[2] == doctest::Approx(0.4375).epsilon(1e-15));
  CHECK(z[3] == doctest::Approx(0.0625).epsilon(1e-15));
}

TEST_CASE("bhattacharyya profile matches the recursive oracle") {
  for (int n : {2, 4, 8, 16, 32, 64}) {
    const std::vector<double> got = bhattacharyya_profile(n);
    const std::vector<double> want = z_oracle(n);
    for (int i = 0; i < n; ++i) {
      CAPTURE(n);
      CAPTURE(i);
      CHECK(got[static_cast<std::size_t>(i)] ==
            doctest::Approx(want[static_cast<std::size_t>(i)]).epsilon(1e-13));
    }
  }
}

TEST_CASE("construct_code picks the expected positions") {
  SUBCASE("N=4 K=2") {
    const PolarCode code = construct_code(4, 2);
    CHECK(code.info_positions == std::vector<int>{2, 3});
  }
  SUBCASE("N=2 K=2 takes everything") {
    const PolarCode code = construct_code(2, 2);
    CHECK(code.info_positions == std::vector<int>{0, 1});
  }
  SUBCASE("N=8 K=4 golden set") {
    // brute-forced from the Z recursion: four smallest Z at 3, 5, 6, 7
    const PolarCode code = construct_code(8, 4);
    CHECK(code.info_positions == std::vector<int>{3, 5, 6, 7});
  }
  SUBCASE("N=2 K=1 is the repetition code") {
    const PolarCode code = construct_code(2, 1);
    CHECK(code.info_positions == std::vector<int>{1});
  }
}

TEST_CASE("construct_code is deterministic") {
  const PolarCode a = construct_code(32, 16);
  const PolarCode b = construct_code(32, 16);
  CHECK(a.info_positions == b.info_positions);
}

TEST_CASE("construct_code rejects bad shapes") {
  CHECK_THROWS_AS(construct_code(3, 1), ConfigError);
  CHECK_THROWS_AS(construct_code(0, 1), ConfigError);
  CHECK_THROWS_AS(construct_code(4, 5), ConfigError);
  CHECK_THROWS_AS(construct_code(4, 0), ConfigError);
}

TEST_CASE("encode matches hand multiplication") {
  const PolarCode code = construct_code(4, 2);
  CHECK(encode(code, BitVector{0, 0}) == BitVector{0, 0, 0, 0});
  // u_full = [0,0,1,0]; row 2 of F(x)F is [1,0,1,0]
  CHECK(encode(code, BitVector{1, 0}) == BitVector{1, 0, 1, 0});

  const PolarCode rep = construct_code(2, 1);
  CHECK(encode(rep, BitVector{1}) == BitVector{1, 1});
}

TEST_CASE("encode rejects length mismatch") {
  const PolarCode code = construct_code(4, 2);
  CHECK_THROWS_AS(encode(code, BitVector{1, 0, 1}), ArgumentError);
}

TEST_CASE("frozen positions of the pre-transform vector stay zero") {
  const PolarCode code = construct_code(16, 8);
  RngStream rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const BitVector u = expand_info(code, random_word(rng, code.info_length));
    for (int i = 0; i < code.block_length; ++i) {
      if (!code.is_info[static_cast<std::size_t>(i)]) CHECK(u[static_cast<std::size_t>(i)] == 0);
    }
  }
}

TEST_CASE("encoder is linear") {
  RngStream rng(42);
  for (int n : {8, 16, 32}) {
    const PolarCode code = construct_code(n, n / 2);
    for (int trial = 0; trial < 1000; ++trial) {
      const BitVector a = random_word(rng, code.info_length);
      const BitVector b = random_word(rng, code.info_length);
      CHECK(encode(code, a ^ b) == (encode(code, a) ^ encode(code, b)));
    }
  }
}

TEST_CASE("codebook enumeration") {
  SUBCASE("sizes") {
    CHECK(enumerate_codebook(construct_code(2, 1)).size() == 2);
    CHECK(enumerate_codebook(construct_code(8, 4)).size() == 16);
  }
  SUBCASE("info word of entry i is the binary expansion of i") {
    const Codebook book = enumerate_codebook(construct_code(8, 4));
    for (std::size_t i = 0; i < book.size(); ++i) {
      CHECK(book.info_words[i].to_index() == i);
    }
  }
  SUBCASE("contains the all-zero codeword") {
    const Codebook book = enumerate_codebook(construct_code(4, 2));
    CHECK(book.codewords[0] == BitVector{0, 0, 0, 0});
  }
  SUBCASE("codewords are distinct for N in {8,16,32}") {
    for (int n : {8, 16, 32}) {
      const Codebook book = enumerate_codebook(construct_code(n, n / 2));
      std::set<std::uint64_t> seen;
      for (const BitVector& c : book.codewords) seen.insert(c.to_index());
      CHECK(seen.size() == book.size());
    }
  }
  SUBCASE("guard on huge codebooks") {
    PolarCode code;
    code.block_length = 1 << 25;
    code.info_length = 25;
    CHECK_THROWS_AS(enumerate_codebook(code), ResourceError);
  }
}

}  // TEST_SUITE
