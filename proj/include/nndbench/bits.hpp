#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "nndbench/errors.hpp"

namespace nndbench {

// Fixed-length vector of {0,1} values. Length is set at construction.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t length) : bits_(length, 0) {}

  BitVector(std::initializer_list<int> values) {
    bits_.reserve(values.size());
    for (int v : values) bits_.push_back(checked(v));
  }

  static BitVector from_bits(const std::vector<int>& values) {
    BitVector out;
    out.bits_.reserve(values.size());
    for (int v : values) out.bits_.push_back(checked(v));
    return out;
  }

  // MSB-first K-bit binary expansion of index, so lexicographic word order
  // matches numeric index order.
  static BitVector from_index(std::uint64_t index, std::size_t k) {
    BitVector out(k);
    for (std::size_t i = 0; i < k; ++i) {
      out.bits_[i] = static_cast<std::uint8_t>((index >> (k - 1 - i)) & 1u);
    }
    return out;
  }

  std::size_t size() const { return bits_.size(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }

  void set(std::size_t i, int value) { bits_[i] = checked(value); }

  std::uint64_t to_index() const {
    std::uint64_t v = 0;
    for (std::uint8_t b : bits_) v = (v << 1) | b;
    return v;
  }

  BitVector operator^(const BitVector& other) const {
    if (other.size() != size()) throw ArgumentError("BitVector xor: length mismatch");
    BitVector out(size());
    for (std::size_t i = 0; i < size(); ++i) out.bits_[i] = bits_[i] ^ other.bits_[i];
    return out;
  }

  bool operator==(const BitVector& other) const { return bits_ == other.bits_; }
  bool operator!=(const BitVector& other) const { return bits_ != other.bits_; }

  std::string to_string() const {
    std::string s;
    s.reserve(size());
    for (std::uint8_t b : bits_) s.push_back(b ? '1' : '0');
    return s;
  }

  const std::vector<std::uint8_t>& raw() const { return bits_; }

 private:
  static std::uint8_t checked(int v) {
    if (v != 0 && v != 1) throw ArgumentError("BitVector: elements must be 0 or 1");
    return static_cast<std::uint8_t>(v);
  }

  std::vector<std::uint8_t> bits_;
};

}  // namespace nndbench
