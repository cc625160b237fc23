#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <istream>
#include <ostream>

#include "nndbench/errors.hpp"

namespace nndbench {

// SplitMix64 finalizer, used for seed expansion and derivation.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a over a label, for naming RNG streams.
constexpr std::uint64_t stream_tag(const char* label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char* p = label; *p != '\0'; ++p) {
    h = (h ^ static_cast<unsigned char>(*p)) * 0x100000001b3ULL;
  }
  return h;
}

// Folds components into a child seed; order-sensitive.
inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = root;
  for (std::uint64_t p : parts) {
    h = mix64(h + 0x9e3779b97f4a7c15ULL + p);
  }
  return h;
}

struct RngState {
  std::array<std::uint64_t, 4> s{};
  bool has_cached_normal = false;
  double cached_normal = 0.0;
};

// xoshiro256++ with Box-Muller normals. Streams are cheap to construct, so
// workers and per-sample generators derive their own via derive_seed.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : state_.s) {
      sm += 0x9e3779b97f4a7c15ULL;
      w = mix64(sm);
    }
  }

  explicit RngStream(const RngState& state) : state_(state) {}

  std::uint64_t next_u64() {
    auto& s = state_.s;
    const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }

  // Uniform on [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform01_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Unbiased integer in [0, n). Lemire's multiply-with-rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw ArgumentError("RngStream::below: n must be positive");
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = -n % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (state_.has_cached_normal) {
      state_.has_cached_normal = false;
      return state_.cached_normal;
    }
    const double u1 = uniform01_open();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    state_.cached_normal = r * std::sin(theta);
    state_.has_cached_normal = true;
    return r * std::cos(theta);
  }

  const RngState& state() const { return state_; }
  void restore(const RngState& state) { state_ = state; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  RngState state_;
};

}  // namespace nndbench
