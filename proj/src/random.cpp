#include "ocsplab/random.hpp"

#include <openssl/rand.h>

#include "ocsplab/error.hpp"

namespace ocsplab {

std::uint64_t RandomSource::next() {
  if (secure_) {
    std::uint64_t v = 0;
    if (RAND_bytes(reinterpret_cast<unsigned char*>(&v), sizeof v) != 1) {
      throw Error(Errc::io_error, "system random generator failed");
    }
    return v;
  }
  std::lock_guard lock(mu_);
  return engine_();
}

std::uint64_t RandomSource::uniform(std::uint64_t max) {
  if (max == UINT64_MAX) return next();
  const std::uint64_t range = max + 1;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
  for (;;) {
    const std::uint64_t v = next();
    if (v < limit) return v % range;
  }
}

Bytes RandomSource::bytes(std::size_t n) {
  Bytes out(n);
  if (secure_) {
    if (n > 0 && RAND_bytes(out.data(), static_cast<int>(n)) != 1) {
      throw Error(Errc::io_error, "system random generator failed");
    }
    return out;
  }
  std::lock_guard lock(mu_);
  for (std::size_t i = 0; i < n; i += 8) {
    const std::uint64_t v = engine_();
    for (std::size_t j = 0; j < 8 && i + j < n; ++j) out[i + j] = static_cast<std::uint8_t>(v >> (8 * j));
  }
  return out;
}

}  // namespace ocsplab
