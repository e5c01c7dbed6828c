#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "ocsplab/messages.hpp"
#include "ocsplab/pki.hpp"
#include "ocsplab/predictor.hpp"

/// Generators for the sources an attacker wants signed. Each output carries
/// a salt derived from an index so that distinct indices give distinct bytes.
namespace ocsplab {

/// Index rendered as a big-endian block of `width` bytes (at least 8).
Bytes salt_bytes(std::uint64_t index, std::size_t width = 8);

struct FakeResponseSpec {
  ResponderId responder_id;
  /// CertID of the target; its serial is the certificate whose status is faked.
  CertId cert_id;
  CertStatus desired_status = CertStatus::good();
  der::GeneralizedTime produced_at;
  der::GeneralizedTime this_update;
  std::optional<der::GeneralizedTime> next_update;
  std::size_t salt_width = 8;

  /// Spec that mimics the profiled responder's fixed fields. The lifetime
  /// may exceed the responder's real validity window.
  static FakeResponseSpec from_model(const PredictionModel& model, const SerialNumber& target, CertStatus status,
                                     Instant this_update, Duration lifetime);
};

/// tbsResponseData for index i; the salt travels in the nonce extension.
Bytes fake_response_source(const FakeResponseSpec& spec, std::uint64_t i);

enum class SaltChannel { custom_extension, unique_identifier, subject_key_identifier };

std::string_view salt_channel_name(SaltChannel c);
SaltChannel parse_salt_channel(std::string_view s);

struct FakeCertificateSpec {
  SerialNumber serial;
  AlgorithmIdentifier signature;
  /// Copied from the signer certificate's subject.
  Name issuer;
  /// Copied from the signer certificate's subjectKeyIdentifier.
  Bytes authority_key_id;
  Validity validity;
  Name subject;
  SubjectPublicKeyInfo spki;
  bool ca = true;
  SaltChannel salt_channel = SaltChannel::custom_extension;
  std::size_t salt_width = 8;
  /// Revocation pointers; absent means the issuer has nowhere to publish a
  /// revocation of the forgery.
  std::optional<std::string> crl_uri;
  std::optional<std::string> ocsp_uri;

  /// Spec whose issuer-matching fields come from the signer certificate, with
  /// an attacker key derived from attacker_seed.
  static FakeCertificateSpec against(const Certificate& signer, const AlgorithmIdentifier& signature,
                                     std::string_view subject_cn = "Forged Intermediate CA",
                                     std::string_view attacker_seed = "attacker");
};

/// TBSCertificate for index i with the salt in the configured channel.
Bytes fake_certificate_source(const FakeCertificateSpec& spec, std::uint64_t i);

void export_der(const std::filesystem::path& path, ByteView der);

}  // namespace ocsplab
