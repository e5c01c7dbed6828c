#include "ocsplab/messages.hpp"

#include <algorithm>

#include "ocsplab/error.hpp"

namespace ocsplab {

namespace {

using der::Reader;
using der::Tlv;
namespace tag = der::tag;

[[noreturn]] void malformed(const std::string& what) { throw Error(Errc::malformed_encoding, what); }

/// Content of an EXPLICIT [n] wrapper, which must hold exactly one TLV.
Tlv unwrap_explicit(const Tlv& t) { return der::read_single(t.content); }

void reject_explicit_default_version(const Tlv& wrapper) {
  const auto v = der::parse_small_integer(unwrap_explicit(wrapper));
  if (v == 0) malformed("DEFAULT version encoded explicitly");
  throw Error(Errc::unsupported_feature, "version " + std::to_string(v + 1));
}

Bytes encode_status(const CertStatus& s) {
  switch (s.kind) {
    case CertStatusKind::good: return der::tlv(tag::context(0, false), {});
    case CertStatusKind::unknown: return der::tlv(tag::context(2, false), {});
    case CertStatusKind::revoked: {
      Bytes inner = der::encode_generalized_time(s.revocation_time);
      if (s.revocation_reason) append(inner, der::explicit_tag(0, der::enumerated(*s.revocation_reason)));
      return der::tlv(tag::context(1, true), inner);
    }
  }
  return {};
}

CertStatus decode_status(const Tlv& t) {
  if (t.tag == tag::context(0, false) || t.tag == tag::context(2, false)) {
    if (!t.content.empty()) malformed("certStatus NULL with content");
    return t.tag.number == 0 ? CertStatus::good() : CertStatus::unknown();
  }
  if (t.tag == tag::context(1, true)) {
    Reader r(t.content);
    CertStatus s;
    s.kind = CertStatusKind::revoked;
    s.revocation_time = der::parse_generalized_time(r.expect(tag::generalized_time));
    if (auto reason = r.optional(tag::context(0, true))) {
      const Tlv e = unwrap_explicit(*reason);
      if (!(e.tag == tag::enumerated)) malformed("revocationReason must be ENUMERATED");
      s.revocation_reason = static_cast<int>(der::parse_small_integer(e));
    }
    r.finish();
    return s;
  }
  malformed("unknown certStatus choice");
}

std::vector<Attribute> decode_rdn(const Tlv& set) {
  if (!(set.tag == tag::set)) malformed("RDN must be a SET");
  Reader r(set.content);
  std::vector<Attribute> rdn;
  Bytes previous;
  while (!r.empty()) {
    const Tlv atv = r.expect(tag::sequence);
    Bytes raw(atv.raw.begin(), atv.raw.end());
    if (!rdn.empty() && raw < previous) malformed("RDN attributes not in DER order");
    previous = raw;
    Reader ar(atv.content);
    Attribute a;
    a.oid = der::parse_oid(ar.expect(tag::oid));
    a.value = der::decode(ar.next().raw);
    ar.finish();
    rdn.push_back(std::move(a));
  }
  if (rdn.empty()) malformed("empty RDN");
  return rdn;
}

}  // namespace

// ---- common -------------------------------------------------------------

Bytes encode_algorithm_identifier(const AlgorithmIdentifier& alg) {
  Bytes content = der::oid(alg.oid);
  if (alg.parameters) append(content, *alg.parameters);
  return der::tlv(tag::sequence, content);
}

AlgorithmIdentifier decode_algorithm_identifier(const Tlv& t) {
  if (!(t.tag == tag::sequence)) malformed("AlgorithmIdentifier must be a SEQUENCE");
  Reader r(t.content);
  AlgorithmIdentifier alg;
  alg.oid = der::parse_oid(r.expect(tag::oid));
  if (!r.empty()) {
    const Tlv p = r.next();
    der::decode(p.raw);
    alg.parameters = Bytes(p.raw.begin(), p.raw.end());
  }
  r.finish();
  return alg;
}

Bytes encode_extensions(const std::vector<Extension>& exts) {
  std::vector<Bytes> items;
  items.reserve(exts.size());
  for (const auto& e : exts) {
    Bytes content = der::oid(e.oid);
    if (e.critical) append(content, der::boolean(true));
    append(content, der::octet_string(e.value));
    items.push_back(der::tlv(tag::sequence, content));
  }
  return der::sequence_of(items);
}

std::vector<Extension> decode_extensions(ByteView sequence_tlv) {
  const Tlv seq = der::read_single(sequence_tlv);
  if (!(seq.tag == tag::sequence)) malformed("Extensions must be a SEQUENCE");
  Reader r(seq.content);
  std::vector<Extension> out;
  while (!r.empty()) {
    const Tlv et = r.expect(tag::sequence);
    Reader er(et.content);
    Extension e;
    e.oid = der::parse_oid(er.expect(tag::oid));
    if (auto crit = er.optional(tag::boolean)) {
      e.critical = der::parse_boolean(*crit);
      if (!e.critical) malformed("DEFAULT FALSE critical flag encoded");
    }
    const Tlv v = er.expect(tag::octet_string);
    e.value.assign(v.content.begin(), v.content.end());
    er.finish();
    out.push_back(std::move(e));
  }
  if (out.empty()) malformed("empty Extensions");
  return out;
}

const Extension* find_extension(const std::vector<Extension>& exts, std::string_view oid) {
  for (const auto& e : exts) {
    if (e.oid == oid) return &e;
  }
  return nullptr;
}

Extension make_nonce_extension(ByteView nonce) {
  return Extension{std::string(oid::ocsp_nonce), false, der::octet_string(nonce)};
}

std::optional<Bytes> find_nonce(const std::vector<Extension>& exts) {
  const Extension* e = find_extension(exts, oid::ocsp_nonce);
  if (!e) return std::nullopt;
  try {
    const Tlv t = der::read_single(e->value);
    if (t.tag == tag::octet_string) return Bytes(t.content.begin(), t.content.end());
  } catch (const Error&) {
  }
  // Non-conforming responders may carry the raw nonce directly.
  return e->value;
}

Bytes encode_cert_id(const CertId& id) {
  if (id.issuer_name_hash.size() != id.hash_algorithm.bytes() ||
      id.issuer_key_hash.size() != id.hash_algorithm.bytes()) {
    throw Error(Errc::invalid_argument, "CertID hash length does not match its algorithm");
  }
  const Bytes alg = encode_algorithm_identifier({id.hash_algorithm.digest_oid(), der::null()});
  return der::sequence({alg, der::octet_string(id.issuer_name_hash), der::octet_string(id.issuer_key_hash),
                        der::unsigned_integer(id.serial.magnitude())});
}

CertId decode_cert_id(const Tlv& t) {
  if (!(t.tag == tag::sequence)) malformed("CertID must be a SEQUENCE");
  Reader r(t.content);
  const AlgorithmIdentifier alg = decode_algorithm_identifier(r.expect(tag::sequence));
  auto spec = HashSpec::from_digest_oid(alg.oid);
  if (!spec) throw Error(Errc::unsupported_feature, "CertID hash algorithm " + alg.oid);
  if (alg.parameters && *alg.parameters != der::null()) malformed("hash algorithm parameters must be NULL");
  CertId id;
  id.hash_algorithm = *spec;
  const Tlv nh = r.expect(tag::octet_string);
  const Tlv kh = r.expect(tag::octet_string);
  id.issuer_name_hash.assign(nh.content.begin(), nh.content.end());
  id.issuer_key_hash.assign(kh.content.begin(), kh.content.end());
  id.serial = SerialNumber::from_magnitude(der::parse_unsigned_integer(r.expect(tag::integer)));
  r.finish();
  if (id.issuer_name_hash.size() != spec->bytes() || id.issuer_key_hash.size() != spec->bytes()) {
    malformed("CertID hash length does not match its algorithm");
  }
  return id;
}

// ---- request ------------------------------------------------------------

Bytes encode_ocsp_request(const OcspRequest& req) {
  Bytes tbs;
  if (req.requestor_name) append(tbs, der::explicit_tag(1, der::encode(*req.requestor_name)));
  std::vector<Bytes> list;
  for (const auto& single : req.requests) {
    Bytes content = encode_cert_id(single.cert_id);
    if (!single.extensions.empty()) append(content, der::explicit_tag(0, encode_extensions(single.extensions)));
    list.push_back(der::tlv(tag::sequence, content));
  }
  append(tbs, der::sequence_of(list));
  if (!req.extensions.empty()) append(tbs, der::explicit_tag(2, encode_extensions(req.extensions)));
  Bytes outer = der::tlv(tag::sequence, tbs);
  if (req.optional_signature) append(outer, der::explicit_tag(0, der::encode(*req.optional_signature)));
  return der::tlv(tag::sequence, outer);
}

OcspRequest decode_ocsp_request(ByteView data) {
  const Tlv outer = der::read_single(data);
  if (!(outer.tag == tag::sequence)) malformed("OCSPRequest must be a SEQUENCE");
  Reader r(outer.content);
  const Tlv tbs = r.expect(tag::sequence);
  OcspRequest req;
  if (auto sig = r.optional(tag::context(0))) req.optional_signature = der::decode(unwrap_explicit(*sig).raw);
  r.finish();

  Reader tr(tbs.content);
  if (auto v = tr.optional(tag::context(0))) reject_explicit_default_version(*v);
  if (auto name = tr.optional(tag::context(1))) req.requestor_name = der::decode(unwrap_explicit(*name).raw);
  const Tlv list = tr.expect(tag::sequence);
  Reader lr(list.content);
  while (!lr.empty()) {
    const Tlv single = lr.expect(tag::sequence);
    Reader sr(single.content);
    SingleRequest s;
    s.cert_id = decode_cert_id(sr.expect(tag::sequence));
    if (auto ext = sr.optional(tag::context(0))) s.extensions = decode_extensions(unwrap_explicit(*ext).raw);
    sr.finish();
    req.requests.push_back(std::move(s));
  }
  if (auto ext = tr.optional(tag::context(2))) req.extensions = decode_extensions(unwrap_explicit(*ext).raw);
  tr.finish();
  return req;
}

// ---- response -----------------------------------------------------------

std::string_view cert_status_name(CertStatusKind k) {
  switch (k) {
    case CertStatusKind::good: return "good";
    case CertStatusKind::revoked: return "revoked";
    case CertStatusKind::unknown: return "unknown";
  }
  return "?";
}

CertStatusKind parse_cert_status(std::string_view s) {
  if (s == "good") return CertStatusKind::good;
  if (s == "revoked") return CertStatusKind::revoked;
  if (s == "unknown") return CertStatusKind::unknown;
  throw Error(Errc::invalid_argument, "unknown certificate status '" + std::string(s) + "'");
}

Bytes encode_tbs_response_data(const TbsResponseData& tbs) {
  Bytes content;
  if (tbs.responder_id.kind == ResponderId::Kind::by_key) {
    append(content, der::explicit_tag(2, der::octet_string(tbs.responder_id.value)));
  } else {
    append(content, der::explicit_tag(1, tbs.responder_id.value));
  }
  append(content, der::encode_generalized_time(tbs.produced_at));
  std::vector<Bytes> responses;
  for (const auto& s : tbs.responses) {
    Bytes single = encode_cert_id(s.cert_id);
    append(single, encode_status(s.status));
    append(single, der::encode_generalized_time(s.this_update));
    if (s.next_update) append(single, der::explicit_tag(0, der::encode_generalized_time(*s.next_update)));
    if (!s.extensions.empty()) append(single, der::explicit_tag(1, encode_extensions(s.extensions)));
    responses.push_back(der::tlv(tag::sequence, single));
  }
  append(content, der::sequence_of(responses));
  if (!tbs.extensions.empty()) append(content, der::explicit_tag(1, encode_extensions(tbs.extensions)));
  return der::tlv(tag::sequence, content);
}

TbsResponseData decode_tbs_response_data(ByteView data) {
  const Tlv outer = der::read_single(data);
  if (!(outer.tag == tag::sequence)) malformed("tbsResponseData must be a SEQUENCE");
  Reader r(outer.content);
  TbsResponseData tbs;
  if (auto v = r.optional(tag::context(0))) reject_explicit_default_version(*v);
  if (auto by_name = r.optional(tag::context(1))) {
    const Tlv name = unwrap_explicit(*by_name);
    decode_name(name);
    tbs.responder_id = {ResponderId::Kind::by_name, Bytes(name.raw.begin(), name.raw.end())};
  } else if (auto by_key = r.optional(tag::context(2))) {
    const Tlv key = unwrap_explicit(*by_key);
    if (!(key.tag == tag::octet_string)) malformed("KeyHash must be an OCTET STRING");
    tbs.responder_id = {ResponderId::Kind::by_key, Bytes(key.content.begin(), key.content.end())};
  } else {
    malformed("missing responderID");
  }
  tbs.produced_at = der::parse_generalized_time(r.expect(tag::generalized_time));
  const Tlv list = r.expect(tag::sequence);
  Reader lr(list.content);
  while (!lr.empty()) {
    const Tlv single = lr.expect(tag::sequence);
    Reader sr(single.content);
    SingleResponse s;
    s.cert_id = decode_cert_id(sr.expect(tag::sequence));
    s.status = decode_status(sr.next());
    s.this_update = der::parse_generalized_time(sr.expect(tag::generalized_time));
    if (auto nu = sr.optional(tag::context(0))) s.next_update = der::parse_generalized_time(unwrap_explicit(*nu));
    if (auto ext = sr.optional(tag::context(1))) s.extensions = decode_extensions(unwrap_explicit(*ext).raw);
    sr.finish();
    tbs.responses.push_back(std::move(s));
  }
  if (auto ext = r.optional(tag::context(1))) tbs.extensions = decode_extensions(unwrap_explicit(*ext).raw);
  r.finish();
  return tbs;
}

Bytes frame_basic_ocsp_response(ByteView tbs_raw, const AlgorithmIdentifier& sig_alg, ByteView signature,
                                const std::vector<Bytes>& certs) {
  Bytes content(tbs_raw.begin(), tbs_raw.end());
  append(content, encode_algorithm_identifier(sig_alg));
  append(content, der::bit_string(signature));
  if (!certs.empty()) append(content, der::explicit_tag(0, der::sequence_of(certs)));
  return der::tlv(tag::sequence, content);
}

Bytes encode_basic_ocsp_response(const BasicOcspResponse& resp) {
  const Bytes tbs = resp.tbs_raw.empty() ? encode_tbs_response_data(resp.tbs) : resp.tbs_raw;
  return frame_basic_ocsp_response(tbs, resp.signature_algorithm, resp.signature, resp.certs);
}

BasicOcspResponse decode_basic_ocsp_response(ByteView data) {
  const Tlv outer = der::read_single(data);
  if (!(outer.tag == tag::sequence)) malformed("BasicOCSPResponse must be a SEQUENCE");
  Reader r(outer.content);
  BasicOcspResponse resp;
  const Tlv tbs = r.expect(tag::sequence);
  resp.tbs_raw.assign(tbs.raw.begin(), tbs.raw.end());
  resp.tbs = decode_tbs_response_data(tbs.raw);
  resp.signature_algorithm = decode_algorithm_identifier(r.expect(tag::sequence));
  const der::BitString sig = der::parse_bit_string(r.expect(tag::bit_string));
  if (sig.unused_bits != 0) throw Error(Errc::unsupported_feature, "signature with unused bits");
  resp.signature = sig.bits;
  if (auto certs = r.optional(tag::context(0))) {
    const Tlv seq = unwrap_explicit(*certs);
    if (!(seq.tag == tag::sequence)) malformed("certs must be a SEQUENCE OF Certificate");
    Reader cr(seq.content);
    while (!cr.empty()) {
      const Tlv c = cr.expect(tag::sequence);
      resp.certs.emplace_back(c.raw.begin(), c.raw.end());
    }
  }
  r.finish();
  return resp;
}

std::string_view response_status_name(ResponseStatus s) {
  switch (s) {
    case ResponseStatus::successful: return "successful";
    case ResponseStatus::malformed_request: return "malformedRequest";
    case ResponseStatus::internal_error: return "internalError";
    case ResponseStatus::try_later: return "tryLater";
    case ResponseStatus::sig_required: return "sigRequired";
    case ResponseStatus::unauthorized: return "unauthorized";
  }
  return "?";
}

Bytes encode_ocsp_response(const OcspResponse& resp) {
  Bytes content = der::enumerated(static_cast<int>(resp.status));
  if (resp.status == ResponseStatus::successful) {
    const Bytes bytes = der::sequence({der::oid(oid::ocsp_basic), der::octet_string(resp.basic_response)});
    append(content, der::explicit_tag(0, bytes));
  }
  return der::tlv(tag::sequence, content);
}

OcspResponse decode_ocsp_response(ByteView data) {
  const Tlv outer = der::read_single(data);
  if (!(outer.tag == tag::sequence)) malformed("OCSPResponse must be a SEQUENCE");
  Reader r(outer.content);
  OcspResponse resp;
  const auto status = der::parse_small_integer(r.expect(tag::enumerated));
  switch (status) {
    case 0: case 1: case 2: case 3: case 5: case 6:
      resp.status = static_cast<ResponseStatus>(status);
      break;
    default:
      malformed("unknown responseStatus " + std::to_string(status));
  }
  if (auto rb = r.optional(tag::context(0))) {
    if (resp.status != ResponseStatus::successful) malformed("responseBytes on unsuccessful response");
    const Tlv seq = unwrap_explicit(*rb);
    if (!(seq.tag == tag::sequence)) malformed("ResponseBytes must be a SEQUENCE");
    Reader br(seq.content);
    const std::string type = der::parse_oid(br.expect(tag::oid));
    if (type != oid::ocsp_basic) throw Error(Errc::unsupported_feature, "response type " + type);
    const Tlv body = br.expect(tag::octet_string);
    br.finish();
    resp.basic_response.assign(body.content.begin(), body.content.end());
  } else if (resp.status == ResponseStatus::successful) {
    malformed("successful response without responseBytes");
  }
  r.finish();
  return resp;
}

// ---- X.509 --------------------------------------------------------------

Name Name::simple(std::initializer_list<std::pair<std::string_view, std::string_view>> entries) {
  Name n;
  for (const auto& [type, value] : entries) {
    n.rdns.push_back({Attribute{std::string(type), der::decode(der::utf8_string(value))}});
  }
  return n;
}

Bytes encode_name(const Name& n) {
  std::vector<Bytes> rdns;
  for (const auto& rdn : n.rdns) {
    std::vector<Bytes> atvs;
    for (const auto& a : rdn) atvs.push_back(der::sequence({der::oid(a.oid), der::encode(a.value)}));
    rdns.push_back(der::set_of(std::move(atvs)));
  }
  return der::sequence_of(rdns);
}

Name decode_name(const Tlv& t) {
  if (!(t.tag == tag::sequence)) malformed("Name must be a SEQUENCE");
  Reader r(t.content);
  Name n;
  while (!r.empty()) n.rdns.push_back(decode_rdn(r.next()));
  return n;
}

Bytes encode_tbs_certificate(const TbsCertificate& tbs) {
  auto missing = [](const char* field) { return Error(Errc::missing_mandatory_field, field); };
  if (!tbs.serial) throw missing("serialNumber");
  if (!tbs.signature) throw missing("signature");
  if (tbs.issuer.rdns.empty()) throw missing("issuer");
  if (!tbs.validity) throw missing("validity");
  if (tbs.subject.rdns.empty()) throw missing("subject");
  if (!tbs.spki) throw missing("subjectPublicKeyInfo");
  if (tbs.version < 0 || tbs.version > 2) throw Error(Errc::invalid_argument, "certificate version must be v1..v3");
  Bytes content;
  if (tbs.version != 0) append(content, der::explicit_tag(0, der::integer(tbs.version)));
  append(content, der::unsigned_integer(tbs.serial->magnitude()));
  append(content, encode_algorithm_identifier(*tbs.signature));
  append(content, encode_name(tbs.issuer));
  append(content, der::sequence({der::encode_generalized_time(tbs.validity->not_before),
                                 der::encode_generalized_time(tbs.validity->not_after)}));
  append(content, encode_name(tbs.subject));
  append(content, der::sequence({encode_algorithm_identifier(tbs.spki->algorithm), der::bit_string(tbs.spki->public_key)}));
  if (!tbs.extensions.empty()) {
    if (tbs.version != 2) throw Error(Errc::invalid_argument, "extensions require a v3 certificate");
    append(content, der::explicit_tag(3, encode_extensions(tbs.extensions)));
  }
  return der::tlv(tag::sequence, content);
}

TbsCertificate decode_tbs_certificate(ByteView data) {
  const Tlv outer = der::read_single(data);
  if (!(outer.tag == tag::sequence)) malformed("TBSCertificate must be a SEQUENCE");
  Reader r(outer.content);
  TbsCertificate tbs;
  tbs.version = 0;
  if (auto v = r.optional(tag::context(0))) {
    const auto version = der::parse_small_integer(unwrap_explicit(*v));
    if (version == 0) malformed("DEFAULT version encoded explicitly");
    if (version != 1 && version != 2) throw Error(Errc::unsupported_feature, "certificate version");
    tbs.version = static_cast<int>(version);
  }
  tbs.serial = SerialNumber::from_magnitude(der::parse_unsigned_integer(r.expect(tag::integer)));
  tbs.signature = decode_algorithm_identifier(r.expect(tag::sequence));
  tbs.issuer = decode_name(r.expect(tag::sequence));
  {
    const Tlv validity = r.expect(tag::sequence);
    Reader vr(validity.content);
    Validity v;
    if (vr.next_is(der::Tag{der::TagClass::universal, false, 23})) {
      throw Error(Errc::unsupported_feature, "UTCTime validity");
    }
    v.not_before = der::parse_generalized_time(vr.expect(tag::generalized_time));
    if (vr.next_is(der::Tag{der::TagClass::universal, false, 23})) {
      throw Error(Errc::unsupported_feature, "UTCTime validity");
    }
    v.not_after = der::parse_generalized_time(vr.expect(tag::generalized_time));
    vr.finish();
    tbs.validity = v;
  }
  tbs.subject = decode_name(r.expect(tag::sequence));
  {
    const Tlv spki = r.expect(tag::sequence);
    Reader sr(spki.content);
    SubjectPublicKeyInfo info;
    info.algorithm = decode_algorithm_identifier(sr.expect(tag::sequence));
    const der::BitString key = der::parse_bit_string(sr.expect(tag::bit_string));
    if (key.unused_bits != 0) throw Error(Errc::unsupported_feature, "public key with unused bits");
    info.public_key = key.bits;
    sr.finish();
    tbs.spki = info;
  }
  if (r.next_is(tag::context(1, false)) || r.next_is(tag::context(2, false))) {
    throw Error(Errc::unsupported_feature, "issuer/subject unique identifiers");
  }
  if (auto ext = r.optional(tag::context(3))) {
    if (tbs.version != 2) malformed("extensions in a pre-v3 certificate");
    tbs.extensions = decode_extensions(unwrap_explicit(*ext).raw);
  }
  r.finish();
  return tbs;
}

Bytes frame_certificate(ByteView tbs_raw, const AlgorithmIdentifier& sig_alg, ByteView signature) {
  Bytes content(tbs_raw.begin(), tbs_raw.end());
  append(content, encode_algorithm_identifier(sig_alg));
  append(content, der::bit_string(signature));
  return der::tlv(tag::sequence, content);
}

Certificate decode_certificate(ByteView data) {
  const Tlv outer = der::read_single(data);
  if (!(outer.tag == tag::sequence)) malformed("Certificate must be a SEQUENCE");
  Reader r(outer.content);
  Certificate cert;
  const Tlv tbs = r.expect(tag::sequence);
  cert.tbs_raw.assign(tbs.raw.begin(), tbs.raw.end());
  cert.tbs = decode_tbs_certificate(tbs.raw);
  cert.signature_algorithm = decode_algorithm_identifier(r.expect(tag::sequence));
  const der::BitString sig = der::parse_bit_string(r.expect(tag::bit_string));
  if (sig.unused_bits != 0) throw Error(Errc::unsupported_feature, "signature with unused bits");
  cert.signature = sig.bits;
  r.finish();
  return cert;
}

Extension basic_constraints_extension(bool ca) {
  const Bytes value = ca ? der::sequence({der::boolean(true)}) : der::sequence({});
  return Extension{std::string(oid::basic_constraints), true, value};
}

std::optional<bool> basic_constraints_ca(const std::vector<Extension>& exts) {
  const Extension* e = find_extension(exts, oid::basic_constraints);
  if (!e) return std::nullopt;
  const Tlv seq = der::read_single(e->value);
  Reader r(seq.content);
  bool ca = false;
  if (auto b = r.optional(tag::boolean)) ca = der::parse_boolean(*b);
  return ca;
}

Extension subject_key_identifier_extension(ByteView key_id) {
  return Extension{std::string(oid::subject_key_identifier), false, der::octet_string(key_id)};
}

Extension authority_key_identifier_extension(ByteView key_id) {
  const Bytes value = der::tlv(tag::sequence, der::tlv(tag::context(0, false), key_id));
  return Extension{std::string(oid::authority_key_identifier), false, value};
}

std::optional<Bytes> authority_key_identifier(const std::vector<Extension>& exts) {
  const Extension* e = find_extension(exts, oid::authority_key_identifier);
  if (!e) return std::nullopt;
  const Tlv seq = der::read_single(e->value);
  Reader r(seq.content);
  if (auto id = r.optional(tag::context(0, false))) return Bytes(id->content.begin(), id->content.end());
  return std::nullopt;
}

std::optional<Bytes> subject_key_identifier(const std::vector<Extension>& exts) {
  const Extension* e = find_extension(exts, oid::subject_key_identifier);
  if (!e) return std::nullopt;
  const Tlv t = der::read_single(e->value);
  if (!(t.tag == tag::octet_string)) malformed("subjectKeyIdentifier must be an OCTET STRING");
  return Bytes(t.content.begin(), t.content.end());
}

Extension extended_key_usage_extension(const std::vector<std::string>& purposes) {
  std::vector<Bytes> oids;
  for (const auto& p : purposes) oids.push_back(der::oid(p));
  return Extension{std::string(oid::ext_key_usage), false, der::sequence_of(oids)};
}

std::vector<std::string> extended_key_usages(const std::vector<Extension>& exts) {
  const Extension* e = find_extension(exts, oid::ext_key_usage);
  if (!e) return {};
  const Tlv seq = der::read_single(e->value);
  Reader r(seq.content);
  std::vector<std::string> out;
  while (!r.empty()) out.push_back(der::parse_oid(r.expect(tag::oid)));
  return out;
}

Extension crl_distribution_point_extension(std::string_view uri) {
  const Bytes general_name = der::tlv(tag::context(6, false), as_view(uri));
  const Bytes full_name = der::tlv(tag::context(0, true), general_name);
  const Bytes dp_name = der::tlv(tag::context(0, true), full_name);
  const Bytes value = der::sequence({der::sequence({dp_name})});
  return Extension{std::string(oid::crl_distribution_points), false, value};
}

Extension authority_info_access_extension(std::string_view ocsp_uri) {
  const Bytes location = der::tlv(tag::context(6, false), as_view(ocsp_uri));
  const Bytes value = der::sequence({der::sequence({der::oid(oid::ad_ocsp), location})});
  return Extension{std::string(oid::authority_info_access), false, value};
}

}  // namespace ocsplab
