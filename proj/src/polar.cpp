#include "nndbench/polar.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "nndbench/errors.hpp"

namespace nndbench {

namespace {

bool is_power_of_two(int n) { return n >= 2 && (n & (n - 1)) == 0; }

}  // namespace

std::vector<double> bhattacharyya_profile(int block_length) {
  if (!is_power_of_two(block_length)) {
    throw ConfigError("polar: block length must be a power of two >= 2, got " +
                      std::to_string(block_length));
  }
  std::vector<double> z(block_length, 0.5);
  for (int h = block_length / 2; h >= 1; h /= 2) {
    for (int i = 0; i < block_length; i += 2 * h) {
      for (int j = i; j < i + h; ++j) {
        const double c = z[j];
        z[j] = 2.0 * c - c * c;
        z[j + h] = c * c;
      }
    }
  }
  return z;
}

PolarCode construct_code(int block_length, int info_length) {
  if (!is_power_of_two(block_length)) {
    throw ConfigError("polar: block length must be a power of two >= 2, got " +
                      std::to_string(block_length));
  }
  if (info_length < 1 || info_length > block_length) {
    throw ConfigError("polar: info length must be in [1, N], got " +
                      std::to_string(info_length));
  }

  const std::vector<double> z = bhattacharyya_profile(block_length);
  std::vector<int> order(block_length);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&z](int a, int b) {
    if (z[a] != z[b]) return z[a] < z[b];
    return a > b;  // ties toward the higher index
  });

  PolarCode code;
  code.block_length = block_length;
  code.info_length = info_length;
  code.info_positions.assign(order.begin(), order.begin() + info_length);
  std::sort(code.info_positions.begin(), code.info_positions.end());
  code.is_info.assign(block_length, 0);
  for (int pos : code.info_positions) code.is_info[pos] = 1;
  return code;
}

BitVector expand_info(const PolarCode& code, const BitVector& x) {
  if (static_cast<int>(x.size()) != code.info_length) {
    throw ArgumentError("polar: expected " + std::to_string(code.info_length) +
                        " information bits, got " + std::to_string(x.size()));
  }
  BitVector u(code.block_length);
  for (int i = 0; i < code.info_length; ++i) {
    u.set(code.info_positions[i], x[i]);
  }
  return u;
}

BitVector polar_transform(BitVector u) {
  const int n = static_cast<int>(u.size());
  for (int h = n / 2; h >= 1; h /= 2) {
    for (int i = 0; i < n; i += 2 * h) {
      for (int j = i; j < i + h; ++j) {
        u.set(j, u[j] ^ u[j + h]);
      }
    }
  }
  return u;
}

BitVector encode(const PolarCode& code, const BitVector& x) {
  return polar_transform(expand_info(code, x));
}

Codebook enumerate_codebook(const PolarCode& code) {
  if (code.info_length > 24) {
    throw ResourceError("polar: refusing to enumerate 2^" +
                        std::to_string(code.info_length) + " codewords (guard: K <= 24)");
  }
  const std::uint64_t count = 1ULL << code.info_length;
  Codebook book;
  book.code = code;
  book.info_words.reserve(count);
  book.codewords.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    BitVector x = BitVector::from_index(i, code.info_length);
    book.codewords.push_back(encode(code, x));
    book.info_words.push_back(std::move(x));
  }
  return book;
}

}  // namespace nndbench
