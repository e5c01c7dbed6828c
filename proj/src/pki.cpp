#include "ocsplab/pki.hpp"

#include <algorithm>
#include <chrono>

#include "ocsplab/error.hpp"
#include "ocsplab/textio.hpp"

namespace ocsplab {

namespace {

Instant utc(int y, unsigned m, unsigned d) {
  using namespace std::chrono;
  return Instant(sys_days(year_month_day{year{y}, month{m}, day{d}}));
}

Bytes derive_secret(std::string_view seed, std::string_view role) {
  std::string material = "ocsplab-secret/";
  material += seed;
  material += '/';
  material += role;
  return sha256(as_view(material));
}

SignerIdentity make_identity(SignerRole role, std::string label, Bytes secret, const HashSpec& hash) {
  SignerIdentity id;
  id.role = role;
  id.label = std::move(label);
  id.secret = std::move(secret);
  id.hash = hash;
  return id;
}

}  // namespace

std::string_view signer_role_name(SignerRole r) { return r == SignerRole::ca ? "ca" : "dedicated"; }

SignerRole parse_signer_role(std::string_view s) {
  if (s == "ca") return SignerRole::ca;
  if (s == "dedicated" || s == "dedicated-ocsp") return SignerRole::dedicated_ocsp;
  throw Error(Errc::invalid_argument, "unknown signer role '" + std::string(s) + "'");
}

std::string_view content_kind_name(ContentKind k) {
  return k == ContentKind::ocsp_response ? "response" : "certificate";
}

ContentKind parse_content_kind(std::string_view s) {
  if (s == "response" || s == "ocsp-response") return ContentKind::ocsp_response;
  if (s == "certificate") return ContentKind::certificate;
  throw Error(Errc::invalid_argument, "unknown content kind '" + std::string(s) + "'");
}

std::string_view eku_profile_name(EkuProfile p) {
  switch (p) {
    case EkuProfile::proper: return "proper";
    case EkuProfile::polluted: return "polluted";
    case EkuProfile::missing: return "missing";
  }
  return "?";
}

EkuProfile parse_eku_profile(std::string_view s) {
  if (s == "proper") return EkuProfile::proper;
  if (s == "polluted") return EkuProfile::polluted;
  if (s == "missing") return EkuProfile::missing;
  throw Error(Errc::invalid_argument, "unknown EKU profile '" + std::string(s) + "'");
}

std::string_view validator_policy_name(ValidatorPolicy p) {
  return p == ValidatorPolicy::strict_eku ? "strict" : "relaxed";
}

ValidatorPolicy parse_validator_policy(std::string_view s) {
  if (s == "strict" || s == "strict_eku" || s == "strict-eku") return ValidatorPolicy::strict_eku;
  if (s == "relaxed") return ValidatorPolicy::relaxed;
  throw Error(Errc::invalid_argument, "unknown validator policy '" + std::string(s) + "'");
}

SignerIdentity SignerIdentity::with_hash(const HashSpec& h) const {
  SignerIdentity copy = *this;
  copy.hash = h;
  return copy;
}

std::vector<std::string> SignerIdentity::extended_key_usages() const {
  return ocsplab::extended_key_usages(certificate.tbs.extensions);
}

AlgorithmIdentifier SignerIdentity::signature_algorithm() const { return {hash.signature_oid(), std::nullopt}; }

Bytes sign(const SignerIdentity& identity, ByteView tbs_digest) {
  if (tbs_digest.size() != identity.hash.bytes()) {
    throw Error(Errc::invalid_argument, "digest length " + std::to_string(tbs_digest.size()) +
                                            " does not match " + identity.hash.name());
  }
  Bytes material = identity.secret;
  append(material, tbs_digest);
  return sha256(material);
}

bool policy_eligible(const SignerIdentity& identity, ContentKind kind, ValidatorPolicy policy) {
  if (policy == ValidatorPolicy::relaxed) return true;
  const auto& exts = identity.certificate.tbs.extensions;
  if (kind == ContentKind::certificate) return basic_constraints_ca(exts).value_or(false);
  if (identity.role == SignerRole::ca) return true;
  const auto ekus = extended_key_usages(exts);
  return std::find(ekus.begin(), ekus.end(), oid::kp_ocsp_signing) != ekus.end();
}

Verification verify(const SignerIdentity& identity, ByteView tbs, ByteView sig, const HashSpec& spec, ContentKind kind,
                    ValidatorPolicy policy) {
  Verification v;
  v.policy_eligible = policy_eligible(identity, kind, policy);
  if (spec.bytes() != identity.hash.bytes()) return v;
  const Bytes expected = sign(identity.with_hash(spec), digest(spec, tbs));
  v.valid = std::equal(expected.begin(), expected.end(), sig.begin(), sig.end());
  return v;
}

Bytes responder_key_hash(const Certificate& signer) {
  if (!signer.tbs.spki) throw Error(Errc::missing_mandatory_field, "signer certificate has no SPKI");
  return sha1(signer.tbs.spki->public_key);
}

Bytes issuer_name_hash(const Certificate& issuer, const HashSpec& spec) {
  return digest(spec, encode_name(issuer.tbs.subject));
}

Bytes issuer_key_hash(const Certificate& issuer, const HashSpec& spec) {
  if (!issuer.tbs.spki) throw Error(Errc::missing_mandatory_field, "issuer certificate has no SPKI");
  return digest(spec, issuer.tbs.spki->public_key);
}

CertId make_cert_id(const Certificate& issuer, const HashSpec& spec, const SerialNumber& serial) {
  return CertId{spec, issuer_name_hash(issuer, spec), issuer_key_hash(issuer, spec), serial};
}

OcspRequest make_status_request(const Certificate& issuer, const HashSpec& spec, const SerialNumber& serial,
                                const std::optional<Bytes>& nonce) {
  OcspRequest req;
  req.requests.push_back({make_cert_id(issuer, spec, serial), {}});
  if (nonce) req.extensions.push_back(make_nonce_extension(*nonce));
  return req;
}

Bytes mock_public_key(ByteView secret) {
  Bytes material = to_bytes("ocsplab-mock-public-key");
  append(material, secret);
  return sha256(material);
}

Bytes issue_certificate(const SignerIdentity& issuer, const TbsCertificate& tbs) {
  TbsCertificate body = tbs;
  body.signature = issuer.signature_algorithm();
  const Bytes tbs_der = encode_tbs_certificate(body);
  const Bytes sig = sign(issuer, digest(issuer.hash, tbs_der));
  return frame_certificate(tbs_der, issuer.signature_algorithm(), sig);
}

PkiFixture make_fixture(const HashSpec& hash, EkuProfile eku, std::string_view seed) {
  PkiFixture fx;
  fx.ca = make_identity(SignerRole::ca, "ca", derive_secret(seed, "ca"), hash);
  fx.ocsp_signer = make_identity(SignerRole::dedicated_ocsp, "ocsp", derive_secret(seed, "ocsp"), hash);

  const Name ca_name = Name::simple({{oid::common_name, "OCSP Lab Root CA"}, {oid::organization, "OCSP Lab"}});
  const Name signer_name = Name::simple({{oid::common_name, "OCSP Lab Responder"}, {oid::organization, "OCSP Lab"}});
  const Validity validity{der::GeneralizedTime(utc(2016, 1, 1)), der::GeneralizedTime(utc(2046, 1, 1))};
  const Bytes ca_key = mock_public_key(fx.ca.secret);
  const Bytes ca_key_id = sha1(ca_key);

  TbsCertificate ca_tbs;
  ca_tbs.serial = SerialNumber(1);
  ca_tbs.issuer = ca_name;
  ca_tbs.subject = ca_name;
  ca_tbs.validity = validity;
  ca_tbs.spki = SubjectPublicKeyInfo{{std::string(oid::mock_public_key), std::nullopt}, ca_key};
  ca_tbs.extensions = {basic_constraints_extension(true), subject_key_identifier_extension(ca_key_id)};
  fx.ca.certificate_der = issue_certificate(fx.ca, ca_tbs);
  fx.ca.certificate = decode_certificate(fx.ca.certificate_der);

  const Bytes signer_key = mock_public_key(fx.ocsp_signer.secret);
  TbsCertificate signer_tbs;
  signer_tbs.serial = SerialNumber(2);
  signer_tbs.issuer = ca_name;
  signer_tbs.subject = signer_name;
  signer_tbs.validity = validity;
  signer_tbs.spki = SubjectPublicKeyInfo{{std::string(oid::mock_public_key), std::nullopt}, signer_key};
  signer_tbs.extensions = {basic_constraints_extension(false), subject_key_identifier_extension(sha1(signer_key)),
                           authority_key_identifier_extension(ca_key_id)};
  switch (eku) {
    case EkuProfile::proper:
      signer_tbs.extensions.push_back(extended_key_usage_extension({std::string(oid::kp_ocsp_signing)}));
      break;
    case EkuProfile::polluted:
      signer_tbs.extensions.push_back(extended_key_usage_extension(
          {std::string(oid::kp_ocsp_signing), std::string(oid::kp_time_stamping)}));
      break;
    case EkuProfile::missing:
      break;
  }
  fx.ocsp_signer.certificate_der = issue_certificate(fx.ca, signer_tbs);
  fx.ocsp_signer.certificate = decode_certificate(fx.ocsp_signer.certificate_der);
  return fx;
}

std::string serialize_identity(const SignerIdentity& id) {
  KvRecord rec;
  rec.add("role", std::string(signer_role_name(id.role)));
  rec.add("label", id.label);
  rec.add("hash", id.hash.name());
  rec.add("secret", to_hex(id.secret));
  rec.add("certificate", to_hex(id.certificate_der));
  return rec.render();
}

SignerIdentity parse_identity(std::string_view text) {
  const KvRecord rec = KvRecord::parse(text);
  SignerIdentity id;
  id.role = parse_signer_role(rec.require("role"));
  id.label = rec.get("label").value_or("");
  id.hash = HashSpec::parse(rec.require("hash"));
  id.secret = from_hex(rec.require("secret"));
  id.certificate_der = from_hex(rec.require("certificate"));
  id.certificate = decode_certificate(id.certificate_der);
  return id;
}

void save_identity(const SignerIdentity& id, const std::filesystem::path& path) {
  write_text_file(path, "# ocsplab signer identity\n" + serialize_identity(id));
}

SignerIdentity load_identity(const std::filesystem::path& path) { return parse_identity(read_text_file(path)); }

}  // namespace ocsplab
