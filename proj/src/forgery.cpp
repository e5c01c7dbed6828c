#include "ocsplab/forgery.hpp"

#include "ocsplab/error.hpp"
#include "ocsplab/textio.hpp"

namespace ocsplab {

Bytes salt_bytes(std::uint64_t index, std::size_t width) {
  if (width < 8) throw Error(Errc::invalid_argument, "salt width must be at least 8 bytes");
  return be_bytes(index, width);
}

FakeResponseSpec FakeResponseSpec::from_model(const PredictionModel& model, const SerialNumber& target,
                                              CertStatus status, Instant this_update, Duration lifetime) {
  if (!model.responder_id || !model.cert_id_template) {
    throw Error(Errc::model_incomplete, "model lacks the responder's fixed fields");
  }
  const Granularity g =
      model.granularity_estimate == GranularityEstimate::millisecond ? Granularity::millisecond : Granularity::second;
  FakeResponseSpec spec;
  spec.responder_id = *model.responder_id;
  spec.cert_id = *model.cert_id_template;
  spec.cert_id.serial = target;
  spec.desired_status = std::move(status);
  spec.produced_at = der::GeneralizedTime(this_update, g);
  spec.this_update = der::GeneralizedTime(this_update, g);
  if (model.next_update_present) spec.next_update = der::GeneralizedTime(this_update + lifetime, g);
  return spec;
}

Bytes fake_response_source(const FakeResponseSpec& spec, std::uint64_t i) {
  TbsResponseData tbs;
  tbs.responder_id = spec.responder_id;
  tbs.produced_at = spec.produced_at;
  tbs.responses.push_back({spec.cert_id, spec.desired_status, spec.this_update, spec.next_update, {}});
  tbs.extensions.push_back(make_nonce_extension(salt_bytes(i, spec.salt_width)));
  return encode_tbs_response_data(tbs);
}

std::string_view salt_channel_name(SaltChannel c) {
  switch (c) {
    case SaltChannel::custom_extension: return "extension";
    case SaltChannel::unique_identifier: return "unique-identifier";
    case SaltChannel::subject_key_identifier: return "ski";
  }
  return "?";
}

SaltChannel parse_salt_channel(std::string_view s) {
  if (s == "extension") return SaltChannel::custom_extension;
  if (s == "unique-identifier") return SaltChannel::unique_identifier;
  if (s == "ski") return SaltChannel::subject_key_identifier;
  throw Error(Errc::invalid_argument, "unknown salt channel '" + std::string(s) + "'");
}

FakeCertificateSpec FakeCertificateSpec::against(const Certificate& signer, const AlgorithmIdentifier& signature,
                                                 std::string_view subject_cn, std::string_view attacker_seed) {
  const auto& signer_tbs = signer.tbs;
  auto aki = subject_key_identifier(signer_tbs.extensions);
  if (!aki) throw Error(Errc::invalid_argument, "signer certificate has no subjectKeyIdentifier");

  FakeCertificateSpec spec;
  spec.serial = SerialNumber::parse("0x0badc0ffee");
  spec.signature = signature;
  spec.issuer = signer_tbs.subject;
  spec.authority_key_id = *aki;
  spec.validity = signer_tbs.validity.value_or(Validity{});
  spec.subject = Name::simple({{oid::organization, "OCSP Lab"}, {oid::common_name, subject_cn}});
  const std::string seed = "ocsplab-attacker-secret/" + std::string(attacker_seed);
  spec.spki = {AlgorithmIdentifier{std::string(oid::mock_public_key), std::nullopt},
               mock_public_key(sha256(as_view(seed)))};
  return spec;
}

Bytes fake_certificate_source(const FakeCertificateSpec& spec, std::uint64_t i) {
  const Bytes salt = salt_bytes(i, spec.salt_width);
  TbsCertificate tbs;
  tbs.serial = spec.serial;
  tbs.signature = spec.signature;
  tbs.issuer = spec.issuer;
  tbs.validity = spec.validity;
  tbs.subject = spec.subject;
  if (spec.salt_channel == SaltChannel::unique_identifier) {
    tbs.subject.rdns.push_back({Attribute{std::string(oid::unique_identifier), der::decode(der::bit_string(salt))}});
  }
  tbs.spki = spec.spki;

  tbs.extensions.push_back(basic_constraints_extension(spec.ca));
  const Bytes key_id = spec.salt_channel == SaltChannel::subject_key_identifier
                           ? salt
                           : Bytes(sha1(spec.spki.public_key));
  tbs.extensions.push_back(subject_key_identifier_extension(key_id));
  tbs.extensions.push_back(authority_key_identifier_extension(spec.authority_key_id));
  if (spec.crl_uri) tbs.extensions.push_back(crl_distribution_point_extension(*spec.crl_uri));
  if (spec.ocsp_uri) tbs.extensions.push_back(authority_info_access_extension(*spec.ocsp_uri));
  if (spec.salt_channel == SaltChannel::custom_extension) {
    tbs.extensions.push_back(Extension{std::string(oid::lab_salt_extension), false, der::octet_string(salt)});
  }
  return encode_tbs_certificate(tbs);
}

void export_der(const std::filesystem::path& path, ByteView der) { write_binary_file(path, der); }

}  // namespace ocsplab
