#include "ocsplab/bytes.hpp"
#include "ocsplab/error.hpp"

namespace ocsplab {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::malformed_encoding: return "MalformedEncoding";
    case Errc::unsupported_feature: return "UnsupportedFeature";
    case Errc::instant_out_of_range: return "InstantOutOfRange";
    case Errc::missing_mandatory_field: return "MissingMandatoryField";
    case Errc::duplicate_serial: return "DuplicateSerial";
    case Errc::model_incomplete: return "ModelIncomplete";
    case Errc::nonce_unsupported: return "NonceUnsupported";
    case Errc::inconclusive_profile: return "InconclusiveProfile";
    case Errc::unreachable: return "Unreachable";
    case Errc::window_missed: return "WindowMissed";
    case Errc::transport_error: return "TransportError";
    case Errc::digest_mismatch: return "DigestMismatch";
    case Errc::empty_input: return "EmptyInput";
    case Errc::bind_failure: return "BindFailure";
    case Errc::malformed_record: return "MalformedRecord";
    case Errc::io_error: return "IoError";
    case Errc::budget_exhausted: return "BudgetExhausted";
  }
  return "Unknown";
}

std::string to_hex(ByteView data) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0x0f]);
  }
  return out;
}

namespace {
int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex) {
  std::string compact;
  compact.reserve(hex.size());
  for (char c : hex) {
    if (c == ' ' || c == '\n' || c == '\r' || c == '\t' || c == ':') continue;
    compact.push_back(c);
  }
  if (compact.size() % 2 != 0) throw Error(Errc::invalid_argument, "odd-length hex string");
  Bytes out(compact.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(compact[2 * i]);
    int lo = nibble(compact[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(Errc::invalid_argument, "invalid hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

Bytes be_bytes(std::uint64_t value, std::size_t width) {
  Bytes out(width, 0);
  for (std::size_t i = 0; i < width && i < 8; ++i) {
    out[width - 1 - i] = static_cast<std::uint8_t>(value >> (8 * i));
  }
  return out;
}

Bytes le_bytes(std::uint64_t value, std::size_t width) {
  Bytes out(width, 0);
  for (std::size_t i = 0; i < width && i < 8; ++i) {
    out[i] = static_cast<std::uint8_t>(value >> (8 * i));
  }
  return out;
}

}  // namespace ocsplab
