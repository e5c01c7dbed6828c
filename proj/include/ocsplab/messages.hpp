#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ocsplab/der.hpp"
#include "ocsplab/hash.hpp"
#include "ocsplab/serial.hpp"

/// OCSP request/response and TBSCertificate schemas on top of der.
namespace ocsplab {

namespace oid {
inline constexpr std::string_view ocsp_nonce = "1.3.6.1.5.5.7.48.1.2";
inline constexpr std::string_view ocsp_basic = "1.3.6.1.5.5.7.48.1.1";
inline constexpr std::string_view ad_ocsp = "1.3.6.1.5.5.7.48.1";
inline constexpr std::string_view kp_ocsp_signing = "1.3.6.1.5.5.7.3.9";
inline constexpr std::string_view kp_time_stamping = "1.3.6.1.5.5.7.3.8";
inline constexpr std::string_view basic_constraints = "2.5.29.19";
inline constexpr std::string_view subject_key_identifier = "2.5.29.14";
inline constexpr std::string_view authority_key_identifier = "2.5.29.35";
inline constexpr std::string_view ext_key_usage = "2.5.29.37";
inline constexpr std::string_view crl_distribution_points = "2.5.29.31";
inline constexpr std::string_view authority_info_access = "1.3.6.1.5.5.7.1.1";
inline constexpr std::string_view common_name = "2.5.4.3";
inline constexpr std::string_view organization = "2.5.4.10";
inline constexpr std::string_view country = "2.5.4.6";
inline constexpr std::string_view unique_identifier = "2.5.4.45";
inline constexpr std::string_view lab_salt_extension = "1.3.6.1.4.1.32473.3.1";
inline constexpr std::string_view mock_public_key = "1.3.6.1.4.1.32473.4.1";
}  // namespace oid

struct AlgorithmIdentifier {
  std::string oid;
  /// Raw DER of the parameters element, when present.
  std::optional<Bytes> parameters;

  friend bool operator==(const AlgorithmIdentifier&, const AlgorithmIdentifier&) = default;
};

Bytes encode_algorithm_identifier(const AlgorithmIdentifier& alg);
AlgorithmIdentifier decode_algorithm_identifier(const der::Tlv& t);

struct Extension {
  std::string oid;
  bool critical = false;
  Bytes value;  // extnValue octets

  friend bool operator==(const Extension&, const Extension&) = default;
};

/// SEQUENCE OF Extension. Callers never encode an empty list: an empty
/// vector means the optional field is absent.
Bytes encode_extensions(const std::vector<Extension>& exts);
std::vector<Extension> decode_extensions(ByteView sequence_tlv);

const Extension* find_extension(const std::vector<Extension>& exts, std::string_view oid);

/// Nonce extension whose extnValue is the DER OCTET STRING of the nonce.
Extension make_nonce_extension(ByteView nonce);
std::optional<Bytes> find_nonce(const std::vector<Extension>& exts);

struct CertId {
  HashSpec hash_algorithm;
  Bytes issuer_name_hash;
  Bytes issuer_key_hash;
  SerialNumber serial;

  friend bool operator==(const CertId&, const CertId&) = default;
};

Bytes encode_cert_id(const CertId& id);
CertId decode_cert_id(const der::Tlv& t);

// ---- OCSP request -------------------------------------------------------

struct SingleRequest {
  CertId cert_id;
  std::vector<Extension> extensions;

  friend bool operator==(const SingleRequest&, const SingleRequest&) = default;
};

struct OcspRequest {
  std::optional<der::Value> requestor_name;  // GeneralName, kept opaque
  std::vector<SingleRequest> requests;
  std::vector<Extension> extensions;
  std::optional<der::Value> optional_signature;  // kept opaque, never checked

  friend bool operator==(const OcspRequest&, const OcspRequest&) = default;
};

Bytes encode_ocsp_request(const OcspRequest& req);
OcspRequest decode_ocsp_request(ByteView data);

// ---- OCSP response ------------------------------------------------------

enum class CertStatusKind { good, revoked, unknown };

std::string_view cert_status_name(CertStatusKind k);
CertStatusKind parse_cert_status(std::string_view s);

struct CertStatus {
  CertStatusKind kind = CertStatusKind::good;
  der::GeneralizedTime revocation_time;  // meaningful when revoked
  std::optional<int> revocation_reason;

  static CertStatus good() { return {}; }
  static CertStatus unknown() { return {CertStatusKind::unknown, {}, std::nullopt}; }
  static CertStatus revoked(Instant at) {
    return {CertStatusKind::revoked, der::GeneralizedTime(at, Granularity::second), std::nullopt};
  }

  friend bool operator==(const CertStatus& a, const CertStatus& b) {
    if (a.kind != b.kind) return false;
    return a.kind != CertStatusKind::revoked ||
           (a.revocation_time == b.revocation_time && a.revocation_reason == b.revocation_reason);
  }
};

struct SingleResponse {
  CertId cert_id;
  CertStatus status;
  der::GeneralizedTime this_update;
  std::optional<der::GeneralizedTime> next_update;
  std::vector<Extension> extensions;

  friend bool operator==(const SingleResponse&, const SingleResponse&) = default;
};

struct ResponderId {
  enum class Kind { by_name, by_key };
  Kind kind = Kind::by_key;
  /// by_name: DER of the Name; by_key: the SHA-1 key hash.
  Bytes value;

  friend bool operator==(const ResponderId&, const ResponderId&) = default;
};

struct TbsResponseData {
  ResponderId responder_id;
  der::GeneralizedTime produced_at;
  std::vector<SingleResponse> responses;
  std::vector<Extension> extensions;

  friend bool operator==(const TbsResponseData&, const TbsResponseData&) = default;
};

Bytes encode_tbs_response_data(const TbsResponseData& tbs);
TbsResponseData decode_tbs_response_data(ByteView data);

struct BasicOcspResponse {
  TbsResponseData tbs;
  /// The exact signed bytes as received; signatures are checked against
  /// these and never against a re-encoding.
  Bytes tbs_raw;
  AlgorithmIdentifier signature_algorithm;
  Bytes signature;
  std::vector<Bytes> certs;  // DER certificates

  friend bool operator==(const BasicOcspResponse&, const BasicOcspResponse&) = default;
};

/// Encodes using tbs_raw when set, otherwise encodes tbs.
Bytes encode_basic_ocsp_response(const BasicOcspResponse& resp);
/// Frames already-encoded tbsResponseData bytes verbatim.
Bytes frame_basic_ocsp_response(ByteView tbs_raw, const AlgorithmIdentifier& sig_alg, ByteView signature,
                                const std::vector<Bytes>& certs);
BasicOcspResponse decode_basic_ocsp_response(ByteView data);

enum class ResponseStatus {
  successful = 0,
  malformed_request = 1,
  internal_error = 2,
  try_later = 3,
  sig_required = 5,
  unauthorized = 6,
};

std::string_view response_status_name(ResponseStatus s);

/// Transport framing: OCSPResponse { responseStatus, responseBytes }.
struct OcspResponse {
  ResponseStatus status = ResponseStatus::successful;
  Bytes basic_response;  // BasicOCSPResponse DER, successful only

  friend bool operator==(const OcspResponse&, const OcspResponse&) = default;
};

Bytes encode_ocsp_response(const OcspResponse& resp);
OcspResponse decode_ocsp_response(ByteView data);

// ---- X.509 --------------------------------------------------------------

struct Attribute {
  std::string oid;
  der::Value value;

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

using Rdn = std::vector<Attribute>;

struct Name {
  std::vector<Rdn> rdns;

  /// One single-attribute RDN per entry, values as UTF8String.
  static Name simple(std::initializer_list<std::pair<std::string_view, std::string_view>> entries);
  friend bool operator==(const Name&, const Name&) = default;
};

Bytes encode_name(const Name& n);
Name decode_name(const der::Tlv& t);

struct Validity {
  der::GeneralizedTime not_before;
  der::GeneralizedTime not_after;

  friend bool operator==(const Validity&, const Validity&) = default;
};

struct SubjectPublicKeyInfo {
  AlgorithmIdentifier algorithm;
  Bytes public_key;

  friend bool operator==(const SubjectPublicKeyInfo&, const SubjectPublicKeyInfo&) = default;
};

struct TbsCertificate {
  int version = 2;  // v3
  std::optional<SerialNumber> serial;
  std::optional<AlgorithmIdentifier> signature;
  Name issuer;
  std::optional<Validity> validity;
  Name subject;
  std::optional<SubjectPublicKeyInfo> spki;
  std::vector<Extension> extensions;

  friend bool operator==(const TbsCertificate&, const TbsCertificate&) = default;
};

/// Throws MissingMandatoryField when serial, signature, issuer, validity,
/// subject or SPKI is absent.
Bytes encode_tbs_certificate(const TbsCertificate& tbs);
TbsCertificate decode_tbs_certificate(ByteView data);

struct Certificate {
  TbsCertificate tbs;
  Bytes tbs_raw;
  AlgorithmIdentifier signature_algorithm;
  Bytes signature;

  friend bool operator==(const Certificate&, const Certificate&) = default;
};

Bytes frame_certificate(ByteView tbs_raw, const AlgorithmIdentifier& sig_alg, ByteView signature);
Certificate decode_certificate(ByteView data);

// Certificate extension builders and accessors.
Extension basic_constraints_extension(bool ca);
/// nullopt when the extension is absent.
std::optional<bool> basic_constraints_ca(const std::vector<Extension>& exts);
Extension subject_key_identifier_extension(ByteView key_id);
Extension authority_key_identifier_extension(ByteView key_id);
std::optional<Bytes> authority_key_identifier(const std::vector<Extension>& exts);
std::optional<Bytes> subject_key_identifier(const std::vector<Extension>& exts);
Extension extended_key_usage_extension(const std::vector<std::string>& purposes);
std::vector<std::string> extended_key_usages(const std::vector<Extension>& exts);
Extension crl_distribution_point_extension(std::string_view uri);
Extension authority_info_access_extension(std::string_view ocsp_uri);

}  // namespace ocsplab
