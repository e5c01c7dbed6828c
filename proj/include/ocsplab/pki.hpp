#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ocsplab/hash.hpp"
#include "ocsplab/messages.hpp"

/// Signer identities, the mock signature scheme and CertID construction.
namespace ocsplab {

enum class SignerRole { ca, dedicated_ocsp };

/// How the extended key usage of a dedicated OCSP certificate is formed.
enum class EkuProfile {
  proper,    // id-kp-OCSPSigning only
  polluted,  // id-kp-OCSPSigning plus id-kp-timeStamping
  missing,   // no extended key usage extension
};

enum class ContentKind { ocsp_response, certificate };
enum class ValidatorPolicy { strict_eku, relaxed };

/// "response" or "certificate".
std::string_view content_kind_name(ContentKind k);
ContentKind parse_content_kind(std::string_view s);

std::string_view signer_role_name(SignerRole r);
SignerRole parse_signer_role(std::string_view s);
std::string_view eku_profile_name(EkuProfile p);
EkuProfile parse_eku_profile(std::string_view s);
std::string_view validator_policy_name(ValidatorPolicy p);
ValidatorPolicy parse_validator_policy(std::string_view s);

struct SignerIdentity {
  SignerRole role = SignerRole::ca;
  std::string label;
  Bytes secret;
  /// Digest the identity signs with.
  HashSpec hash = HashSpec::sha256();
  Bytes certificate_der;
  Certificate certificate;

  SignerIdentity with_hash(const HashSpec& h) const;
  std::vector<std::string> extended_key_usages() const;
  AlgorithmIdentifier signature_algorithm() const;

  friend bool operator==(const SignerIdentity&, const SignerIdentity&) = default;
};

/// Mock signature: SHA-256(secret || tbs_digest). Throws InvalidArgument when
/// the digest length does not match the identity's hash.
Bytes sign(const SignerIdentity& identity, ByteView tbs_digest);

struct Verification {
  bool valid = false;
  bool policy_eligible = false;
};

/// Checks sig against digest(spec, tbs), and separately whether the identity
/// may sign content of `kind` under `policy`.
Verification verify(const SignerIdentity& identity, ByteView tbs, ByteView sig, const HashSpec& spec,
                    ContentKind kind = ContentKind::ocsp_response,
                    ValidatorPolicy policy = ValidatorPolicy::strict_eku);

bool policy_eligible(const SignerIdentity& identity, ContentKind kind, ValidatorPolicy policy);

/// SHA-1 over the subjectPublicKey bits, as used by responderID byKey.
Bytes responder_key_hash(const Certificate& signer);
Bytes issuer_name_hash(const Certificate& issuer, const HashSpec& spec);
Bytes issuer_key_hash(const Certificate& issuer, const HashSpec& spec);
CertId make_cert_id(const Certificate& issuer, const HashSpec& spec, const SerialNumber& serial);

/// Single-certificate status request, with a nonce extension when given.
OcspRequest make_status_request(const Certificate& issuer, const HashSpec& spec, const SerialNumber& serial,
                                const std::optional<Bytes>& nonce = std::nullopt);

/// A CA and a dedicated OCSP signer issued by it, derived deterministically
/// from `seed`.
struct PkiFixture {
  SignerIdentity ca;
  SignerIdentity ocsp_signer;

  const SignerIdentity& signer(SignerRole role) const {
    return role == SignerRole::ca ? ca : ocsp_signer;
  }
};

PkiFixture make_fixture(const HashSpec& hash, EkuProfile eku = EkuProfile::proper,
                        std::string_view seed = "ocsplab");

/// Signs `tbs` as a certificate issued by `issuer` and returns the DER.
Bytes issue_certificate(const SignerIdentity& issuer, const TbsCertificate& tbs);

/// Mock public key bits bound to a secret.
Bytes mock_public_key(ByteView secret);

// Identity files: one `key=value` per line with keys role, label, hash,
// secret (hex) and certificate (hex DER).
std::string serialize_identity(const SignerIdentity& id);
SignerIdentity parse_identity(std::string_view text);
void save_identity(const SignerIdentity& id, const std::filesystem::path& path);
SignerIdentity load_identity(const std::filesystem::path& path);

}  // namespace ocsplab
