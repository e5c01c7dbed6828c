#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ocsplab/collision.hpp"
#include "ocsplab/error.hpp"
#include "ocsplab/pki.hpp"
#include "ocsplab/transport.hpp"

/// Timed request bursts, signature harvesting and splicing.
namespace ocsplab {

struct TimingPolicy {
  /// Burst length, centred on the recipe's arrival target.
  Duration window = std::chrono::seconds(5);
  double rate = 10.0;  // requests per second
  std::uint64_t abort_after = 50;
  /// One-way delay is taken as half of this.
  Duration round_trip = Duration(0);
};

/// Local send instants of the burst for a given arrival target.
std::vector<Instant> burst_schedule(Instant fire_at, const TimingPolicy& policy);

struct ForgedArtifact {
  ContentKind kind = ContentKind::ocsp_response;
  Bytes tbs_bytes;
  AlgorithmIdentifier signature_algorithm;
  Bytes signature;
  Bytes signer_certificate;
  /// BasicOCSPResponse or Certificate DER combining tbs_bytes and signature.
  Bytes framed;
  /// Every response received during the burst.
  std::vector<Bytes> harvest_log;

  friend bool operator==(const ForgedArtifact&, const ForgedArtifact&) = default;
};

/// Attaches the harvested signature to forged_tbs. Throws DigestMismatch when
/// the two bodies do not share a digest under the harvested algorithm.
ForgedArtifact splice(ByteView forged_tbs, const BasicOcspResponse& harvested, ContentKind kind);

struct AttackOutcome {
  std::optional<ForgedArtifact> artifact;
  /// window_missed or digest_mismatch when no artifact was produced.
  std::optional<Errc> failure;
  std::string detail;
  std::uint64_t requests_sent = 0;
  std::uint64_t responses = 0;
  std::uint64_t matches = 0;
  std::uint64_t aborted = 0;
  std::uint64_t rejected = 0;  // non-successful statuses
  std::optional<Instant> matched_at;

  bool success() const { return artifact.has_value(); }
};

/// Fires the candidate's request across the window and splices the first
/// signature over a body equal to the prediction onto the forged source
/// regenerated from gen2. Stops at the first match.
AttackOutcome execute(const CollisionCandidate& candidate, const SourceGenerator& gen2, ContentKind kind,
                      Transport& transport, const TimingPolicy& policy = {});

struct Verdict {
  bool signature_valid = false;
  bool policy_eligible = false;
  /// nullopt when no threshold applies.
  std::optional<bool> fresh;
  std::optional<Duration> lifetime;
  bool accepted = false;
};

/// The consumer-side checks: signature, signer eligibility and, for
/// responses, an upper bound on nextUpdate - thisUpdate.
Verdict validate_artifact(const ForgedArtifact& a, const SignerIdentity& signer, ValidatorPolicy policy,
                          std::optional<Duration> freshness_threshold = std::nullopt);

std::string serialize_artifact(const ForgedArtifact& a);
ForgedArtifact parse_artifact(std::string_view text);

std::string describe_outcome(const AttackOutcome& o);

}  // namespace ocsplab
