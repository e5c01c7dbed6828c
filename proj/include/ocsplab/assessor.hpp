#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ocsplab/predictor.hpp"
#include "ocsplab/transport.hpp"

/// Black-box exposure audit of one endpoint and aggregation over many.
namespace ocsplab {

struct ProbeTranscript {
  std::string label;
  Bytes request;
  Instant sent_at{};
  Instant received_at{};
  bool aborted = false;
  int http_status = 0;
  Bytes response;

  friend bool operator==(const ProbeTranscript&, const ProbeTranscript&) = default;
};

struct AuditReport {
  std::string endpoint;
  std::optional<bool> realtime;
  std::optional<bool> nonce_mirrored;
  std::optional<NonexistentBehavior> nonexistent_behavior;
  /// Signature hash as observed in the response.
  std::optional<std::string> hash_algorithm;
  /// Hash of the CertID echoed in the response.
  std::optional<std::string> cert_id_hash_algorithm;
  std::optional<bool> sha1_in_use;
  std::optional<bool> ca_signed;
  std::optional<GranularityEstimate> granularity;
  std::optional<bool> good_for_nonexistent;

  /// Field name → indices into transcripts that support it.
  std::map<std::string, std::vector<std::size_t>> evidence;
  std::vector<ProbeTranscript> transcripts;
  /// The probe budget ran out before every field was determined.
  bool partial = false;
  /// Free-form origin tag, "audit" for live runs.
  std::string source = "audit";

  /// nonce_mirrored OR nonexistent behavior in {unknown, good}; nullopt when
  /// the known facts do not decide it.
  std::optional<bool> scaling_exposed() const;
  /// True when the signature and CertID hashes are both known and differ.
  bool hash_disagreement() const;

  friend bool operator==(const AuditReport&, const AuditReport&) = default;
};

struct AuditOptions {
  int probe_budget = 5;
  /// Gap between the two realtime-detection probes.
  Duration realtime_gap = std::chrono::milliseconds(2500);
  SerialNumber nonexistent_serial = SerialNumber::parse("0x7fffffffffffffff5a5a");
  SerialNumber second_nonexistent_serial = SerialNumber::parse("0x7fffffffffffffff5a5b");
  std::size_t nonce_length = 16;
  HashSpec cert_id_hash = HashSpec::sha1();
  std::uint64_t seed = 1;
};

/// Number of probes in the full battery.
inline constexpr int audit_battery_size = 5;

/// Runs the probe battery. Throws Unreachable; a short budget yields a
/// report with partial set and undetermined fields.
AuditReport audit(Transport& transport, const Certificate& issuer, const SerialNumber& known_serial,
                  const AuditOptions& options = {});

enum class RiskGrade { low, elevated, high, critical };

std::string_view risk_grade_name(RiskGrade g);

struct RiskAssessment {
  RiskGrade grade = RiskGrade::low;
  std::vector<std::string> triggers;
  /// Some field the rules depend on is undetermined.
  bool uncertain = false;
};

/// critical: ca_signed and scaling; high: sha1 and scaling; elevated:
/// scaling and realtime; low otherwise.
RiskAssessment risk_grade(const AuditReport& r);

struct FieldSummary {
  std::size_t count = 0;
  std::size_t undetermined = 0;
  double percent = 0;

  friend bool operator==(const FieldSummary&, const FieldSummary&) = default;
};

struct SurveySummary {
  std::size_t total = 0;
  /// Keyed by field name, e.g. "realtime" or "sha1_and_scaling".
  std::map<std::string, FieldSummary> fields;

  const FieldSummary& at(const std::string& name) const;
  std::string render() const;

  friend bool operator==(const SurveySummary&, const SurveySummary&) = default;
};

/// round(count / total * 1000) / 10
double one_decimal_percent(std::size_t count, std::size_t total);

/// Throws EmptyInput on an empty list.
SurveySummary aggregate(const std::vector<AuditReport>& reports);

std::string serialize_report(const AuditReport& r);
AuditReport parse_report(std::string_view text);
void save_report(const AuditReport& r, const std::filesystem::path& path);
AuditReport load_report(const std::filesystem::path& path);
/// Every *.txt report in a directory, in file-name order.
std::vector<AuditReport> load_reports(const std::filesystem::path& dir);

}  // namespace ocsplab
