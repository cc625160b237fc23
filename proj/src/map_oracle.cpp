#include "nndbench/map_oracle.hpp"

#include <string>
#include <thread>

#include "nndbench/errors.hpp"

namespace nndbench {

MapDecoder::MapDecoder(const Codebook& book)
    : book_(&book), n_(book.code.block_length) {
  symbols_.resize(book.size() * static_cast<std::size_t>(n_));
  for (std::size_t i = 0; i < book.size(); ++i) {
    const BitVector& c = book.codewords[i];
    for (int j = 0; j < n_; ++j) {
      symbols_[i * n_ + j] = c[static_cast<std::size_t>(j)] ? -1.0 : 1.0;
    }
  }
}

MapDecision MapDecoder::decode(std::span<const double> y) const {
  if (static_cast<int>(y.size()) != n_) {
    throw ArgumentError("map_decode: received vector has length " +
                        std::to_string(y.size()) + ", expected " + std::to_string(n_));
  }
  std::uint64_t best = 0;
  double best_metric = 0.0;
  for (std::size_t i = 0; i < book_->size(); ++i) {
    const double* c = symbols_.data() + i * n_;
    double d = 0.0;
    for (int j = 0; j < n_; ++j) {
      const double e = y[static_cast<std::size_t>(j)] - c[j];
      d += e * e;
    }
    if (i == 0 || d < best_metric) {
      best_metric = d;
      best = i;
    }
  }
  return MapDecision{book_->info_words[best], best, best_metric};
}

MapDecision map_decode(const RealVector& y, const Codebook& book) {
  return MapDecoder(book).decode(y);
}

double map_ber(const PolarCode& code, double ebn0_db, std::int64_t num_samples,
               std::uint64_t seed, int num_workers) {
  if (num_samples < 1) throw ArgumentError("map_ber: num_samples must be >= 1");
  if (num_workers < 1) num_workers = 1;

  const Codebook book = enumerate_codebook(code);
  const MapDecoder decoder(book);
  const double sigma = sigma_from_ebn0(ebn0_db, code.rate());
  const std::uint64_t words = book.size();
  const int k = code.info_length;

  auto run_chunk = [&](int worker, std::int64_t count) -> std::int64_t {
    RngStream rng(derive_seed(seed, {stream_tag("map_ber"), static_cast<std::uint64_t>(worker)}));
    std::vector<double> y(static_cast<std::size_t>(code.block_length));
    std::int64_t bit_errors = 0;
    for (std::int64_t t = 0; t < count; ++t) {
      const std::uint64_t idx = rng.below(words);
      transmit_into(decoder.symbols(idx), sigma, rng, y);
      const MapDecision decision = decoder.decode(y);
      const BitVector& sent = book.info_words[idx];
      for (int b = 0; b < k; ++b) bit_errors += sent[b] != decision.info_bits[b];
    }
    return bit_errors;
  };

  std::vector<std::int64_t> counts(num_workers, num_samples / num_workers);
  for (std::int64_t r = 0; r < num_samples % num_workers; ++r) counts[r] += 1;

  std::vector<std::int64_t> errors(num_workers, 0);
  if (num_workers == 1) {
    errors[0] = run_chunk(0, counts[0]);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(num_workers);
    for (int w = 0; w < num_workers; ++w) {
      pool.emplace_back([&, w] { errors[w] = run_chunk(w, counts[w]); });
    }
    for (auto& t : pool) t.join();
  }

  std::int64_t total = 0;
  for (std::int64_t e : errors) total += e;
  return static_cast<double>(total) / (static_cast<double>(k) * num_samples);
}

}  // namespace nndbench
