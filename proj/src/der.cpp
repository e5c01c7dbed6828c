#include "ocsplab/der.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "ocsplab/error.hpp"

namespace ocsplab::der {

namespace {

constexpr int max_depth = 48;

[[noreturn]] void malformed(const std::string& what) { throw Error(Errc::malformed_encoding, what); }

void put_tag(Bytes& out, Tag t) {
  std::uint8_t first = static_cast<std::uint8_t>(static_cast<unsigned>(t.cls) << 6);
  if (t.constructed) first |= 0x20;
  if (t.number < 31) {
    out.push_back(first | static_cast<std::uint8_t>(t.number));
    return;
  }
  out.push_back(first | 0x1f);
  std::uint8_t groups[5];
  int n = 0;
  std::uint32_t v = t.number;
  do {
    groups[n++] = v & 0x7f;
    v >>= 7;
  } while (v != 0);
  while (n-- > 0) out.push_back(groups[n] | (n > 0 ? 0x80 : 0x00));
}

void put_length(Bytes& out, std::size_t len) {
  if (len < 0x80) {
    out.push_back(static_cast<std::uint8_t>(len));
    return;
  }
  std::uint8_t tmp[8];
  int n = 0;
  while (len != 0) {
    tmp[n++] = static_cast<std::uint8_t>(len & 0xff);
    len >>= 8;
  }
  out.push_back(static_cast<std::uint8_t>(0x80 | n));
  while (n-- > 0) out.push_back(tmp[n]);
}

bool is_universal(Tag t, std::uint32_t number) {
  return t.cls == TagClass::universal && t.number == number;
}

void validate_oid_content(ByteView c) {
  if (c.empty()) malformed("empty OBJECT IDENTIFIER");
  if (c.back() & 0x80) malformed("truncated OID subidentifier");
  bool start = true;
  for (auto b : c) {
    if (start && b == 0x80) malformed("non-minimal OID subidentifier");
    start = (b & 0x80) == 0;
  }
}

void validate_integer_content(ByteView c) {
  if (c.empty()) malformed("empty INTEGER");
  if (c.size() > 1 && ((c[0] == 0x00 && !(c[1] & 0x80)) || (c[0] == 0xff && (c[1] & 0x80)))) {
    malformed("non-minimal INTEGER");
  }
}

void validate_universal(Tag t, ByteView c) {
  if (t.cls != TagClass::universal) return;
  switch (t.number) {
    case 0:
      malformed("end-of-contents octets are not DER");
    case 1:
    case 2:
    case 3:
    case 4:
    case 5:
    case 6:
    case 10:
    case 12:
    case 19:
    case 22:
    case 24:
      if (t.constructed) malformed("constructed encoding of a primitive type");
      break;
    case 16:
    case 17:
      if (!t.constructed) malformed("primitive SEQUENCE/SET");
      break;
    default:
      break;
  }
  switch (t.number) {
    case 1:
      if (c.size() != 1 || (c[0] != 0x00 && c[0] != 0xff)) malformed("non-DER BOOLEAN");
      break;
    case 2:
    case 10:
      validate_integer_content(c);
      break;
    case 3:
      if (c.empty() || c[0] > 7 || (c.size() == 1 && c[0] != 0)) malformed("bad BIT STRING");
      if (c.size() > 1 && (c.back() & ((1u << c[0]) - 1)) != 0) malformed("non-zero unused bits");
      break;
    case 5:
      if (!c.empty()) malformed("NULL with content");
      break;
    case 6:
      validate_oid_content(c);
      break;
    case 19:
      for (auto ch : c) {
        bool ok = (ch >= 'A' && ch <= 'Z') || (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') ||
                  std::string_view(" '()+,-./:=?").find(static_cast<char>(ch)) != std::string_view::npos;
        if (!ok) malformed("invalid PrintableString character");
      }
      break;
    case 22:
      for (auto ch : c) {
        if (ch > 0x7f) malformed("invalid IA5String character");
      }
      break;
    default:
      break;
  }
}

Value decode_value(ByteView data, int depth);

void decode_children(ByteView content, std::vector<Value>& out, int depth) {
  Reader r(content);
  while (!r.empty()) {
    Tlv t = r.next();
    out.push_back(decode_value(t.raw, depth + 1));
  }
}

Value decode_value(ByteView data, int depth) {
  if (depth > max_depth) malformed("nesting too deep");
  Tlv t = read_single(data);
  Value v;
  v.tag = t.tag;
  if (t.tag.constructed) {
    decode_children(t.content, v.children, depth);
    if (is_universal(t.tag, 17)) {
      for (std::size_t i = 1; i < v.children.size(); ++i) {
        if (encode(v.children[i]) < encode(v.children[i - 1])) malformed("SET OF elements not in DER order");
      }
    }
  } else {
    v.content.assign(t.content.begin(), t.content.end());
  }
  return v;
}

}  // namespace

Bytes encode(const Value& value) {
  Bytes content;
  if (value.tag.constructed) {
    for (const auto& child : value.children) append(content, encode(child));
  } else {
    content = value.content;
  }
  return tlv(value.tag, content);
}

Value decode(ByteView data) { return decode_value(data, 0); }

Tlv Reader::read_at(std::size_t pos, std::size_t& end) const {
  const std::size_t size = data_.size();
  if (pos >= size) malformed("unexpected end of data");
  const std::uint8_t first = data_[pos++];
  Tag t;
  t.cls = static_cast<TagClass>(first >> 6);
  t.constructed = (first & 0x20) != 0;
  if ((first & 0x1f) != 0x1f) {
    t.number = first & 0x1f;
  } else {
    std::uint32_t number = 0;
    int groups = 0;
    while (true) {
      if (pos >= size) malformed("truncated tag");
      const std::uint8_t b = data_[pos++];
      if (groups == 0 && b == 0x80) malformed("non-minimal tag");
      if (++groups > 4) throw Error(Errc::unsupported_feature, "tag number too large");
      number = (number << 7) | (b & 0x7f);
      if (!(b & 0x80)) break;
    }
    if (number < 31) malformed("high-tag-number form for a low tag");
    t.number = number;
  }
  if (pos >= size) malformed("truncated length");
  const std::uint8_t lb = data_[pos++];
  std::size_t len = 0;
  if (lb < 0x80) {
    len = lb;
  } else if (lb == 0x80) {
    throw Error(Errc::unsupported_feature, "indefinite length");
  } else if (lb == 0xff) {
    malformed("reserved length octet");
  } else {
    const int n = lb & 0x7f;
    if (n > 4) throw Error(Errc::unsupported_feature, "length exceeds 32 bits");
    if (pos + n > size) malformed("truncated length");
    if (data_[pos] == 0) malformed("non-minimal length");
    for (int i = 0; i < n; ++i) len = (len << 8) | data_[pos++];
    if (len < 0x80) malformed("non-minimal length");
  }
  if (len > size - pos) malformed("content exceeds available data");
  Tlv out;
  out.tag = t;
  out.content = data_.subspan(pos, len);
  end = pos + len;
  return out;
}

bool Reader::next_is(Tag t) const {
  if (empty()) return false;
  std::size_t end = 0;
  return read_at(pos_, end).tag == t;
}

Tlv Reader::next() {
  const std::size_t start = pos_;
  std::size_t end = 0;
  Tlv t = read_at(pos_, end);
  t.raw = data_.subspan(start, end - start);
  validate_universal(t.tag, t.content);
  pos_ = end;
  return t;
}

Tlv Reader::expect(Tag t) {
  if (empty()) malformed("missing expected element");
  Tlv v = next();
  if (!(v.tag == t)) malformed("unexpected tag");
  return v;
}

std::optional<Tlv> Reader::optional(Tag t) {
  if (!next_is(t)) return std::nullopt;
  return next();
}

void Reader::finish() const {
  if (!empty()) malformed("trailing data");
}

Tlv read_single(ByteView data) {
  Reader r(data);
  Tlv t = r.next();
  r.finish();
  return t;
}

Bytes tlv(Tag t, ByteView content) {
  Bytes out;
  out.reserve(content.size() + 6);
  put_tag(out, t);
  put_length(out, content.size());
  append(out, content);
  return out;
}

Bytes concat(std::initializer_list<ByteView> parts) {
  Bytes out;
  for (auto p : parts) append(out, p);
  return out;
}

Bytes sequence(std::initializer_list<ByteView> parts) { return tlv(tag::sequence, concat(parts)); }

Bytes sequence_of(const std::vector<Bytes>& items) {
  Bytes content;
  for (const auto& i : items) append(content, i);
  return tlv(tag::sequence, content);
}

Bytes set_of(std::vector<Bytes> items) {
  std::sort(items.begin(), items.end());
  Bytes content;
  for (const auto& i : items) append(content, i);
  return tlv(tag::set, content);
}

Bytes explicit_tag(std::uint32_t number, ByteView inner_tlv) {
  return tlv(tag::context(number, true), inner_tlv);
}

Bytes implicit_tag(Tag t, ByteView tlv_bytes) {
  Tlv inner = read_single(tlv_bytes);
  return tlv(t, inner.content);
}

Bytes boolean(bool v) {
  const std::uint8_t b = v ? 0xff : 0x00;
  return tlv(tag::boolean, ByteView(&b, 1));
}

Bytes null() { return tlv(tag::null, {}); }

namespace {
Bytes twos_complement(std::int64_t v) {
  Bytes out = be_bytes(static_cast<std::uint64_t>(v), 8);
  std::size_t skip = 0;
  while (skip + 1 < out.size() &&
         ((out[skip] == 0x00 && !(out[skip + 1] & 0x80)) || (out[skip] == 0xff && (out[skip + 1] & 0x80)))) {
    ++skip;
  }
  return Bytes(out.begin() + static_cast<std::ptrdiff_t>(skip), out.end());
}
}  // namespace

Bytes integer(std::int64_t v) { return tlv(tag::integer, twos_complement(v)); }

Bytes unsigned_integer(ByteView magnitude) {
  std::size_t skip = 0;
  while (skip < magnitude.size() && magnitude[skip] == 0) ++skip;
  Bytes content;
  if (skip == magnitude.size()) {
    content.push_back(0);
  } else {
    if (magnitude[skip] & 0x80) content.push_back(0);
    content.insert(content.end(), magnitude.begin() + static_cast<std::ptrdiff_t>(skip), magnitude.end());
  }
  return tlv(tag::integer, content);
}

Bytes enumerated(std::int64_t v) { return tlv(tag::enumerated, twos_complement(v)); }
Bytes octet_string(ByteView v) { return tlv(tag::octet_string, v); }

Bytes bit_string(ByteView bits, unsigned unused_bits) {
  Bytes content;
  content.push_back(static_cast<std::uint8_t>(bits.empty() ? 0 : unused_bits));
  append(content, bits);
  return tlv(tag::bit_string, content);
}

Bytes oid_content(std::string_view dotted) {
  std::vector<std::uint64_t> arcs;
  std::size_t i = 0;
  while (i <= dotted.size()) {
    std::size_t j = dotted.find('.', i);
    if (j == std::string_view::npos) j = dotted.size();
    std::uint64_t arc = 0;
    auto part = dotted.substr(i, j - i);
    auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), arc);
    if (part.empty() || ec != std::errc() || p != part.data() + part.size()) {
      throw Error(Errc::invalid_argument, "bad OID '" + std::string(dotted) + "'");
    }
    arcs.push_back(arc);
    i = j + 1;
  }
  if (arcs.size() < 2 || arcs[0] > 2 || (arcs[0] < 2 && arcs[1] >= 40)) {
    throw Error(Errc::invalid_argument, "bad OID '" + std::string(dotted) + "'");
  }
  Bytes out;
  auto put = [&](std::uint64_t v) {
    std::uint8_t tmp[10];
    int n = 0;
    do {
      tmp[n++] = v & 0x7f;
      v >>= 7;
    } while (v != 0);
    while (n-- > 0) out.push_back(tmp[n] | (n > 0 ? 0x80 : 0x00));
  };
  put(arcs[0] * 40 + arcs[1]);
  for (std::size_t k = 2; k < arcs.size(); ++k) put(arcs[k]);
  return out;
}

Bytes oid(std::string_view dotted) { return tlv(tag::oid, oid_content(dotted)); }

std::string oid_to_string(ByteView content) {
  validate_oid_content(content);
  std::string out;
  std::uint64_t v = 0;
  bool first = true;
  for (auto b : content) {
    if (v > (UINT64_MAX >> 7)) throw Error(Errc::unsupported_feature, "OID arc too large");
    v = (v << 7) | (b & 0x7f);
    if (b & 0x80) continue;
    if (first) {
      const std::uint64_t top = v < 80 ? v / 40 : 2;
      out = std::to_string(top) + "." + std::to_string(v - top * 40);
      first = false;
    } else {
      out += "." + std::to_string(v);
    }
    v = 0;
  }
  return out;
}

Bytes utf8_string(std::string_view s) { return tlv(tag::utf8_string, as_view(s)); }
Bytes printable_string(std::string_view s) { return tlv(tag::printable_string, as_view(s)); }
Bytes ia5_string(std::string_view s) { return tlv(tag::ia5_string, as_view(s)); }

bool parse_boolean(const Tlv& t) {
  if (t.content.size() != 1 || (t.content[0] != 0 && t.content[0] != 0xff)) malformed("non-DER BOOLEAN");
  return t.content[0] == 0xff;
}

std::int64_t parse_small_integer(const Tlv& t) {
  validate_integer_content(t.content);
  if (t.content.size() > 8) throw Error(Errc::unsupported_feature, "INTEGER too large");
  std::int64_t v = (t.content[0] & 0x80) ? -1 : 0;
  for (auto b : t.content) v = static_cast<std::int64_t>((static_cast<std::uint64_t>(v) << 8) | b);
  return v;
}

Bytes parse_unsigned_integer(const Tlv& t) {
  validate_integer_content(t.content);
  if (t.content[0] & 0x80) malformed("negative INTEGER where non-negative required");
  std::size_t skip = 0;
  while (skip < t.content.size() && t.content[skip] == 0) ++skip;
  return Bytes(t.content.begin() + static_cast<std::ptrdiff_t>(skip), t.content.end());
}

std::string parse_oid(const Tlv& t) { return oid_to_string(t.content); }

BitString parse_bit_string(const Tlv& t) {
  if (t.content.empty()) malformed("empty BIT STRING");
  BitString b;
  b.unused_bits = t.content[0];
  b.bits.assign(t.content.begin() + 1, t.content.end());
  return b;
}

std::string GeneralizedTime::render() const {
  using namespace std::chrono;
  const auto day = floor<days>(instant);
  const year_month_day ymd{day};
  const int y = static_cast<int>(ymd.year());
  if (y < 1950 || y > 2999) {
    throw Error(Errc::instant_out_of_range, "year " + std::to_string(y) + " outside 1950-2999");
  }
  const auto tod = instant - day;
  const auto h = duration_cast<hours>(tod);
  const auto m = duration_cast<minutes>(tod - h);
  const auto s = duration_cast<seconds>(tod - h - m);
  const int ms = static_cast<int>((tod - h - m - s).count());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d%02u%02u%02d%02d%02d", y, static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(h.count()),
                static_cast<int>(m.count()), static_cast<int>(s.count()));
  std::string out = buf;
  if (granularity == Granularity::millisecond && ms != 0) {
    char frac[8];
    std::snprintf(frac, sizeof frac, "%03d", ms);
    std::string f = frac;
    while (!f.empty() && f.back() == '0') f.pop_back();
    out += "." + f;
  }
  out += "Z";
  return out;
}

Bytes encode_generalized_time(const GeneralizedTime& t) {
  const std::string s = t.render();
  return tlv(tag::generalized_time, as_view(s));
}

GeneralizedTime parse_generalized_time(const Tlv& t) {
  using namespace std::chrono;
  if (!(t.tag == tag::generalized_time)) malformed("expected GeneralizedTime");
  std::string_view s(reinterpret_cast<const char*>(t.content.data()), t.content.size());
  if (s.size() < 15 || s.back() != 'Z') malformed("GeneralizedTime must be UTC ('Z')");
  auto digits = [&](std::size_t pos, std::size_t n) {
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
      if (s[i] < '0' || s[i] > '9') malformed("non-digit in GeneralizedTime");
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  const int y = digits(0, 4), mo = digits(4, 2), d = digits(6, 2);
  const int h = digits(8, 2), mi = digits(10, 2), sec = digits(12, 2);
  int ms = 0;
  Granularity g = Granularity::second;
  if (s.size() > 15) {
    if (s[14] != '.') malformed("bad GeneralizedTime fraction");
    const std::size_t flen = s.size() - 16;
    if (flen == 0) malformed("empty fraction");
    if (flen > 3) throw Error(Errc::unsupported_feature, "sub-millisecond GeneralizedTime");
    if (s[s.size() - 2] == '0') malformed("trailing zero in GeneralizedTime fraction");
    ms = digits(15, flen);
    for (std::size_t k = flen; k < 3; ++k) ms *= 10;
    g = Granularity::millisecond;
  }
  const year_month_day ymd{year(y), month(static_cast<unsigned>(mo)), day(static_cast<unsigned>(d))};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 59) malformed("invalid GeneralizedTime fields");
  const Instant inst = Instant(sys_days(ymd)) + hours(h) + minutes(mi) + seconds(sec) + Duration(ms);
  return GeneralizedTime(inst, g);
}

}  // namespace ocsplab::der
