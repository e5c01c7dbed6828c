#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "ocsplab/bytes.hpp"

namespace ocsplab {

/// Unbounded non-negative certificate serial number held as a minimal
/// big-endian magnitude (zero is the empty magnitude).
class SerialNumber {
 public:
  SerialNumber() = default;
  explicit SerialNumber(std::uint64_t v);

  static SerialNumber from_magnitude(ByteView big_endian);
  /// Decimal for values that fit 64 bits, otherwise 0x-prefixed hex.
  static SerialNumber parse(std::string_view text);

  const Bytes& magnitude() const { return magnitude_; }
  std::optional<std::uint64_t> to_u64() const;
  std::string to_string() const;

  friend bool operator==(const SerialNumber&, const SerialNumber&) = default;
  friend std::strong_ordering operator<=>(const SerialNumber& a, const SerialNumber& b) {
    if (auto c = a.magnitude_.size() <=> b.magnitude_.size(); c != 0) return c;
    return a.magnitude_ <=> b.magnitude_;
  }

 private:
  Bytes magnitude_;
};

}  // namespace ocsplab
