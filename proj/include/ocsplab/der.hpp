#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ocsplab/bytes.hpp"
#include "ocsplab/time.hpp"

/// Strict DER for the ASN.1 subset used by OCSP messages and TBSCertificate.
namespace ocsplab::der {

enum class TagClass : std::uint8_t { universal = 0, application = 1, context = 2, private_use = 3 };

struct Tag {
  TagClass cls = TagClass::universal;
  bool constructed = false;
  std::uint32_t number = 0;

  friend bool operator==(const Tag&, const Tag&) = default;
};

namespace tag {
inline constexpr Tag boolean{TagClass::universal, false, 1};
inline constexpr Tag integer{TagClass::universal, false, 2};
inline constexpr Tag bit_string{TagClass::universal, false, 3};
inline constexpr Tag octet_string{TagClass::universal, false, 4};
inline constexpr Tag null{TagClass::universal, false, 5};
inline constexpr Tag oid{TagClass::universal, false, 6};
inline constexpr Tag enumerated{TagClass::universal, false, 10};
inline constexpr Tag utf8_string{TagClass::universal, false, 12};
inline constexpr Tag sequence{TagClass::universal, true, 16};
inline constexpr Tag set{TagClass::universal, true, 17};
inline constexpr Tag printable_string{TagClass::universal, false, 19};
inline constexpr Tag ia5_string{TagClass::universal, false, 22};
inline constexpr Tag generalized_time{TagClass::universal, false, 24};

constexpr Tag context(std::uint32_t number, bool constructed = true) {
  return Tag{TagClass::context, constructed, number};
}
}  // namespace tag

/// Generic decoded tree. Primitive values keep `content`; constructed values
/// keep `children` and leave `content` empty.
struct Value {
  Tag tag;
  Bytes content;
  std::vector<Value> children;

  friend bool operator==(const Value&, const Value&) = default;
};

Bytes encode(const Value& value);

/// Decodes exactly one TLV spanning all of `data`, recursing into constructed
/// values. Throws MalformedEncoding or UnsupportedFeature.
Value decode(ByteView data);

/// A TLV borrowed from a caller-owned buffer. `raw` covers tag, length and
/// content octets exactly as they appeared on the wire.
struct Tlv {
  Tag tag;
  ByteView content;
  ByteView raw;
};

/// Sequential reader over the content of a constructed value. Each TLV it
/// yields has been checked for canonical tag/length encoding and, for
/// universal primitive types, canonical content.
class Reader {
 public:
  explicit Reader(ByteView data) : data_(data) {}

  bool empty() const { return pos_ >= data_.size(); }
  bool next_is(Tag t) const;
  Tlv next();
  Tlv expect(Tag t);
  std::optional<Tlv> optional(Tag t);
  /// Throws MalformedEncoding if unread bytes remain.
  void finish() const;

 private:
  Tlv read_at(std::size_t pos, std::size_t& end) const;

  ByteView data_;
  std::size_t pos_ = 0;
};

/// `data` must hold exactly one TLV.
Tlv read_single(ByteView data);

// Writers. Every function returns a complete TLV.
Bytes tlv(Tag t, ByteView content);
Bytes concat(std::initializer_list<ByteView> parts);
Bytes sequence(std::initializer_list<ByteView> parts);
Bytes sequence_of(const std::vector<Bytes>& items);
/// SET OF with elements sorted by their encodings, as DER requires.
Bytes set_of(std::vector<Bytes> items);
Bytes explicit_tag(std::uint32_t number, ByteView inner_tlv);
/// Replaces the tag of an encoded TLV, keeping length and content.
Bytes implicit_tag(Tag t, ByteView tlv_bytes);

Bytes boolean(bool v);
Bytes null();
Bytes integer(std::int64_t v);
/// Non-negative INTEGER from a big-endian magnitude (leading zeros ignored).
Bytes unsigned_integer(ByteView magnitude);
Bytes enumerated(std::int64_t v);
Bytes octet_string(ByteView v);
Bytes bit_string(ByteView bits, unsigned unused_bits = 0);
Bytes oid(std::string_view dotted);
Bytes utf8_string(std::string_view s);
Bytes printable_string(std::string_view s);
Bytes ia5_string(std::string_view s);

// Content parsers (input is an already validated TLV).
bool parse_boolean(const Tlv& t);
std::int64_t parse_small_integer(const Tlv& t);
/// Big-endian magnitude without leading zero octets; rejects negatives.
Bytes parse_unsigned_integer(const Tlv& t);
std::string parse_oid(const Tlv& t);
Bytes oid_content(std::string_view dotted);
std::string oid_to_string(ByteView content);

struct BitString {
  Bytes bits;
  unsigned unused_bits = 0;
  friend bool operator==(const BitString&, const BitString&) = default;
};
BitString parse_bit_string(const Tlv& t);

/// A GeneralizedTime value. The instant is truncated to the granularity on
/// construction, so equality compares instants only.
struct GeneralizedTime {
  Instant instant{};
  Granularity granularity = Granularity::second;

  GeneralizedTime() = default;
  GeneralizedTime(Instant t, Granularity g = Granularity::second)
      : instant(truncate(t, g)), granularity(g) {}

  /// YYYYMMDDHHMMSS[.f]Z; throws InstantOutOfRange outside 1950-2999.
  std::string render() const;

  friend bool operator==(const GeneralizedTime& a, const GeneralizedTime& b) {
    return a.instant == b.instant;
  }
};

Bytes encode_generalized_time(const GeneralizedTime& t);
/// Fractional seconds decode with millisecond granularity, whole seconds
/// with second granularity.
GeneralizedTime parse_generalized_time(const Tlv& t);

}  // namespace ocsplab::der
