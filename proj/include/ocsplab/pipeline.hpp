#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "ocsplab/attacker.hpp"
#include "ocsplab/clock.hpp"
#include "ocsplab/responder.hpp"

/// The whole attack run in one process against a mock responder:
/// profile, enumerate, search, burst, splice and validate.
namespace ocsplab {

enum class Countermeasure { none, ms_granularity, random_bias, responder_nonce, rate_limit };

std::string_view countermeasure_name(Countermeasure c);
Countermeasure parse_countermeasure(std::string_view s);

/// Applies a countermeasure to a responder configuration.
void apply_countermeasure(ResponderConfig& cfg, Countermeasure c);

struct DemoOptions {
  HashSpec hash = HashSpec::toy(32);
  std::uint64_t seed = 1;
  Countermeasure countermeasure = Countermeasure::none;
  ContentKind kind = ContentKind::ocsp_response;
  SignerRole signer = SignerRole::dedicated_ocsp;
  EkuProfile eku = EkuProfile::proper;
  unsigned workers = 1;
  std::uint64_t budget = std::uint64_t{1} << 22;
  std::uint64_t serials = 1000;
  /// Span of responder times the recipes cover, starting after lead_time.
  Duration horizon = std::chrono::hours(24);
  Duration lead_time = std::chrono::minutes(10);
  Duration forged_lifetime = std::chrono::hours(24 * 7);
  /// Serial whose status the forged response asserts.
  SerialNumber target_serial = SerialNumber(7);
  std::optional<std::filesystem::path> out_dir;
};

struct DemoResult {
  bool forged = false;
  std::string failure;  // error kind name when not forged
  std::string detail;
  std::optional<PredictionModel> model;
  std::optional<CollisionCandidate> candidate;
  std::optional<AttackOutcome> outcome;
  std::optional<Verdict> strict;
  std::optional<Verdict> relaxed;
  std::uint64_t log_requests = 0;
  bool log_well_formed = true;

  /// key=value summary; contains no wall-clock values.
  std::string report() const;
};

/// The fake-content side of the search: a response asserting `status` for
/// `target` from `this_update` on, or a certificate signed as the harvested
/// responder certificate's issuer.
SourceGenerator make_fake_generator(const PredictionModel& model, ContentKind kind, const SerialNumber& target,
                                    Instant this_update, Duration lifetime, const CertStatus& status = CertStatus::good());

/// Fixed simulated start instant of a demo run for the given seed.
Instant demo_start(std::uint64_t seed);
LatencyModel demo_latency(std::uint64_t seed);

DemoResult run_demo(const DemoOptions& options);

/// True when every logged request decodes as a well-formed OCSP request.
bool log_well_formed(const RequestLog& log);

}  // namespace ocsplab
