#include "ocsplab/hash.hpp"

#include <openssl/sha.h>

#include <charconv>

#include "ocsplab/error.hpp"
#include "ocsplab/serial.hpp"

namespace ocsplab {

namespace {
// Lab arc under the documentation private enterprise number (RFC 5612).
constexpr std::string_view toy_digest_arc = "1.3.6.1.4.1.32473.1.1.";
constexpr std::string_view toy_sha1_digest_arc = "1.3.6.1.4.1.32473.1.2.";
constexpr std::string_view mock_sig_arc = "1.3.6.1.4.1.32473.2.";

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

bool valid_toy_bits(int bits) { return bits >= 8 && bits <= 48 && bits % 8 == 0; }
}  // namespace

HashSpec HashSpec::toy(int bits, bool sha1_class) {
  if (!valid_toy_bits(bits)) {
    throw Error(Errc::invalid_argument, "TOY hash width must be one of 8,16,24,32,40,48");
  }
  return HashSpec(HashAlgorithm::toy, bits, sha1_class);
}

HashSpec HashSpec::parse(std::string_view name) {
  if (name == "sha1") return sha1();
  if (name == "sha256") return sha256();
  if (name.starts_with("toy")) {
    auto rest = name.substr(3);
    bool flagged = false;
    if (rest.ends_with("-sha1")) {
      flagged = true;
      rest.remove_suffix(5);
    }
    if (auto bits = parse_int(rest); bits && valid_toy_bits(*bits)) return toy(*bits, flagged);
  }
  throw Error(Errc::invalid_argument, "unknown hash '" + std::string(name) + "'");
}

std::string HashSpec::name() const {
  switch (algorithm_) {
    case HashAlgorithm::sha1: return "sha1";
    case HashAlgorithm::sha256: return "sha256";
    case HashAlgorithm::toy: return "toy" + std::to_string(bits_) + (sha1_class_ ? "-sha1" : "");
  }
  return "?";
}

std::string HashSpec::digest_oid() const {
  switch (algorithm_) {
    case HashAlgorithm::sha1: return "1.3.14.3.2.26";
    case HashAlgorithm::sha256: return "2.16.840.1.101.3.4.2.1";
    case HashAlgorithm::toy:
      return std::string(sha1_class_ ? toy_sha1_digest_arc : toy_digest_arc) + std::to_string(bits_);
  }
  return {};
}

std::string HashSpec::signature_oid() const {
  switch (algorithm_) {
    case HashAlgorithm::sha1: return std::string(mock_sig_arc) + "1";
    case HashAlgorithm::sha256: return std::string(mock_sig_arc) + "2";
    case HashAlgorithm::toy:
      return std::string(mock_sig_arc) + (sha1_class_ ? "4." : "3.") + std::to_string(bits_);
  }
  return {};
}

std::optional<HashSpec> HashSpec::from_digest_oid(std::string_view oid) {
  if (oid == "1.3.14.3.2.26") return sha1();
  if (oid == "2.16.840.1.101.3.4.2.1") return sha256();
  for (bool flagged : {false, true}) {
    auto arc = flagged ? toy_sha1_digest_arc : toy_digest_arc;
    if (oid.starts_with(arc)) {
      if (auto bits = parse_int(oid.substr(arc.size())); bits && valid_toy_bits(*bits)) return toy(*bits, flagged);
    }
  }
  return std::nullopt;
}

std::optional<HashSpec> HashSpec::from_signature_oid(std::string_view oid) {
  if (!oid.starts_with(mock_sig_arc)) return std::nullopt;
  auto rest = oid.substr(mock_sig_arc.size());
  if (rest == "1") return sha1();
  if (rest == "2") return sha256();
  for (bool flagged : {false, true}) {
    std::string_view prefix = flagged ? "4." : "3.";
    if (rest.starts_with(prefix)) {
      if (auto bits = parse_int(rest.substr(2)); bits && valid_toy_bits(*bits)) return toy(*bits, flagged);
    }
  }
  return std::nullopt;
}

Bytes sha256(ByteView data) {
  Bytes out(SHA256_DIGEST_LENGTH);
  SHA256(data.data(), data.size(), out.data());
  return out;
}

Bytes sha1(ByteView data) {
  Bytes out(SHA_DIGEST_LENGTH);
  SHA1(data.data(), data.size(), out.data());
  return out;
}

Bytes digest(const HashSpec& spec, ByteView data) {
  switch (spec.algorithm()) {
    case HashAlgorithm::sha1: return sha1(data);
    case HashAlgorithm::sha256: return sha256(data);
    case HashAlgorithm::toy: {
      Bytes full = sha256(data);
      full.resize(spec.bytes());
      if (const int rem = spec.bits() % 8; rem != 0) full.back() &= static_cast<std::uint8_t>(0xff << (8 - rem));
      return full;
    }
  }
  return {};
}

SerialNumber::SerialNumber(std::uint64_t v) {
  Bytes be = be_bytes(v, 8);
  *this = from_magnitude(be);
}

SerialNumber SerialNumber::from_magnitude(ByteView big_endian) {
  SerialNumber s;
  std::size_t skip = 0;
  while (skip < big_endian.size() && big_endian[skip] == 0) ++skip;
  s.magnitude_.assign(big_endian.begin() + static_cast<std::ptrdiff_t>(skip), big_endian.end());
  return s;
}

SerialNumber SerialNumber::parse(std::string_view text) {
  if (text.starts_with("0x") || text.starts_with("0X")) {
    std::string hex(text.substr(2));
    if (hex.size() % 2) hex.insert(hex.begin(), '0');
    return from_magnitude(from_hex(hex));
  }
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || p != text.data() + text.size()) {
    throw Error(Errc::invalid_argument, "bad serial number '" + std::string(text) + "'");
  }
  return SerialNumber(v);
}

std::optional<std::uint64_t> SerialNumber::to_u64() const {
  if (magnitude_.size() > 8) return std::nullopt;
  std::uint64_t v = 0;
  for (auto b : magnitude_) v = (v << 8) | b;
  return v;
}

std::string SerialNumber::to_string() const {
  if (auto v = to_u64()) return std::to_string(*v);
  return "0x" + to_hex(magnitude_);
}

}  // namespace ocsplab
