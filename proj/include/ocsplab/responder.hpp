#pragma once

#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "ocsplab/clock.hpp"
#include "ocsplab/messages.hpp"
#include "ocsplab/pki.hpp"
#include "ocsplab/random.hpp"
#include "ocsplab/textio.hpp"

/// Configurable mock OCSP responder.
namespace ocsplab {

enum class ResponderMode { realtime, lightweight };
enum class NoncePolicy { mirror, ignore, responder_side };
enum class NonexistentPolicy { unknown, good, close_connection, unauthorized, randomized_times };

std::string_view responder_mode_name(ResponderMode m);
ResponderMode parse_responder_mode(std::string_view s);
std::string_view nonce_policy_name(NoncePolicy p);
NoncePolicy parse_nonce_policy(std::string_view s);
std::string_view nonexistent_policy_name(NonexistentPolicy p);
NonexistentPolicy parse_nonexistent_policy(std::string_view s);

/// "0-999,1005" style serial lists.
std::vector<SerialNumber> parse_serial_ranges(std::string_view s);

struct RateLimit {
  int max_identical = 10;
  Duration window = std::chrono::seconds(5);
};

/// "N/<duration>", e.g. "10/5s".
RateLimit parse_rate_limit(std::string_view s);
std::string format_rate_limit(const RateLimit& r);

struct ResponderConfig {
  ResponderMode mode = ResponderMode::realtime;
  Granularity granularity = Granularity::second;
  Duration random_bias_max{0};
  /// Defaults to 1 hour (realtime) or 7 days (lightweight) when unset.
  std::optional<Duration> validity_window;
  Duration lightweight_cache_period = std::chrono::hours(24);
  NoncePolicy nonce_policy = NoncePolicy::mirror;
  NonexistentPolicy nonexistent_serial_policy = NonexistentPolicy::unknown;
  SignerIdentity signer;
  /// Certificate of the CA whose certificates this responder reports on.
  Certificate issuer;
  HashSpec hash_spec = HashSpec::sha256();
  Duration clock_bias{0};
  std::optional<RateLimit> rate_limit;
  /// Live mode draws biases and nonces from the OpenSSL CSPRNG.
  bool secure_random = false;
  std::uint64_t seed = 0;

  Duration effective_window() const;
  /// Signer and issuer taken from a fixture.
  static ResponderConfig for_fixture(const PkiFixture& fx, SignerRole role, const HashSpec& hash);
};

class StatusDatabase {
 public:
  /// Throws DuplicateSerial.
  void register_certificate(const SerialNumber& serial, const CertStatus& status);
  std::optional<CertStatus> lookup(const SerialNumber& serial) const;
  std::size_t size() const;
  std::vector<SerialNumber> serials() const;

 private:
  mutable std::shared_mutex mu_;
  std::map<SerialNumber, CertStatus> entries_;
};

struct TimeFields {
  der::GeneralizedTime produced_at;
  der::GeneralizedTime this_update;
  der::GeneralizedTime next_update;

  friend bool operator==(const TimeFields&, const TimeFields&) = default;
};

/// Realtime time triple for a request served at `now`. Biased fields are
/// rendered at millisecond precision.
TimeFields compute_time_fields(const ResponderConfig& cfg, Instant now, RandomSource* rng = nullptr);

struct LogRecord {
  Instant arrival;
  Bytes request;
};

class RequestLog {
 public:
  void append(Instant arrival, ByteView request);
  std::vector<LogRecord> snapshot() const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::vector<LogRecord> records_;
};

struct HandleResult {
  /// Connection dropped without any response bytes.
  bool aborted = false;
  int http_status = 200;
  Bytes response;  // OCSPResponse DER
};

class Responder {
 public:
  Responder(ResponderConfig cfg, std::shared_ptr<StatusDatabase> db, Clock& clock);

  HandleResult handle(ByteView request);
  HandleResult handle_at(ByteView request, Instant arrival);

  const ResponderConfig& config() const { return cfg_; }
  StatusDatabase& database() { return *db_; }
  const RequestLog& log() const { return log_; }
  Clock& clock() { return clock_; }

 private:
  struct Cache {
    bool valid = false;
    Instant epoch{};
    TimeFields fields;
  };

  TimeFields time_fields(Instant now);
  TimeFields randomized_fields(Instant now);
  bool throttled(ByteView request, Instant now);
  SingleResponse resolve(const SingleRequest& single, const TimeFields& t, bool& abort, bool& unauthorized,
                         bool& randomized);

  ResponderConfig cfg_;
  SignerIdentity signer_;
  Bytes responder_key_hash_;
  std::shared_ptr<StatusDatabase> db_;
  Clock& clock_;
  RandomSource rng_;
  RequestLog log_;
  std::mutex state_mu_;
  Cache cache_;
  std::unordered_map<std::string, std::deque<Instant>> recent_;
};

/// Responder configuration plus database contents, as loaded from a
/// `key=value` file (see README for the keys).
struct ResponderSetup {
  ResponderConfig config;
  std::vector<std::pair<SerialNumber, CertStatus>> certificates;

  std::shared_ptr<StatusDatabase> make_database() const;
};

ResponderSetup parse_responder_setup(const KvRecord& rec);
ResponderSetup load_responder_setup(const std::filesystem::path& path);
/// Keys understood by parse_responder_setup.
const std::vector<std::string>& responder_setup_keys();

}  // namespace ocsplab
