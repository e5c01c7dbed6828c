#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ocsplab {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

inline ByteView as_view(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline void append(Bytes& out, ByteView data) { out.insert(out.end(), data.begin(), data.end()); }

/// Big-endian rendering of `value` into exactly `width` bytes (high bytes zero-filled).
Bytes be_bytes(std::uint64_t value, std::size_t width = 8);

/// Little-endian rendering of `value` into exactly `width` bytes.
Bytes le_bytes(std::uint64_t value, std::size_t width);

}  // namespace ocsplab
