#pragma once

#include <cstdint>
#include <mutex>
#include <random>

#include "ocsplab/bytes.hpp"

namespace ocsplab {

/// Thread-safe random source: a seeded Mersenne Twister for reproducible
/// runs, or the OpenSSL CSPRNG for live service.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed = 0, bool secure = false) : secure_(secure), engine_(seed) {}

  bool secure() const { return secure_; }
  std::uint64_t next();
  /// Uniform integer in [0, max].
  std::uint64_t uniform(std::uint64_t max);
  Bytes bytes(std::size_t n);

 private:
  bool secure_;
  std::mutex mu_;
  std::mt19937_64 engine_;
};

}  // namespace ocsplab
