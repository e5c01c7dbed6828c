#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ocsplab/messages.hpp"
#include "ocsplab/responder.hpp"
#include "ocsplab/transport.hpp"

/// The attacker's model of a responder and byte-exact response prediction.
namespace ocsplab {

enum class GranularityEstimate { second, millisecond, unknown };
enum class NonexistentBehavior { unknown, good, close_connection, unauthorized, randomized };

std::string_view granularity_estimate_name(GranularityEstimate g);
GranularityEstimate parse_granularity_estimate(std::string_view s);
std::string_view nonexistent_behavior_name(NonexistentBehavior b);
NonexistentBehavior parse_nonexistent_behavior(std::string_view s);

struct PredictionModel {
  Duration clock_bias_estimate{0};
  Duration clock_bias_iqr{0};
  std::size_t clock_bias_observations = 0;
  /// Median probe round trip, used to centre attack bursts.
  Duration round_trip_estimate{0};

  GranularityEstimate granularity_estimate = GranularityEstimate::unknown;
  std::size_t time_fields_observed = 0;
  std::size_t time_fields_with_fraction = 0;

  Duration validity_window_estimate{0};
  std::size_t validity_window_observations = 0;

  ResponderMode mode_estimate = ResponderMode::realtime;
  std::size_t mode_observations = 0;

  bool nonce_supported = false;
  std::size_t nonce_probes = 0;
  std::size_t nonce_echoes = 0;
  std::size_t nonce_min_length = 0;
  std::size_t nonce_max_length = 0;

  NonexistentBehavior nonexistent_behavior = NonexistentBehavior::unknown;
  std::size_t nonexistent_observations = 0;

  // Fixed fields copied from observed responses.
  std::optional<ResponderId> responder_id;
  /// CertID the requests were built with; its serial is ignored.
  std::optional<CertId> cert_id_template;
  /// True when responses without a request nonce still carry extensions.
  bool unsolicited_extensions = false;
  bool next_update_present = true;
  AlgorithmIdentifier signature_algorithm;
  HashSpec hash_spec_estimate = HashSpec::sha256();
  Bytes signer_certificate;

  std::size_t probes_sent = 0;

  friend bool operator==(const PredictionModel&, const PredictionModel&) = default;
};

struct ProfileOptions {
  /// Digest used in CertIDs of the probe requests.
  HashSpec cert_id_hash = HashSpec::sha1();
  /// Probes are spaced so that realtime responders visibly advance.
  Duration probe_spacing = Duration(2137);
  std::vector<std::size_t> nonce_lengths = {2, 16, 32};
  /// Serial assumed absent from the responder's database.
  SerialNumber nonexistent_serial = SerialNumber::parse("0x7fffffffffffffff5a5a");
  std::uint64_t seed = 1;
};

/// Sends probe_count benign requests and fits a model. Throws Unreachable,
/// TransportError or InconclusiveProfile.
PredictionModel profile(Transport& transport, const Certificate& issuer, const std::vector<SerialNumber>& probe_serials,
                        int probe_count, const ProfileOptions& options = {});

/// Predicted tbsResponseData for a request without nonce served at
/// responder time t. Throws ModelIncomplete.
Bytes tbsresp(const PredictionModel& model, const SerialNumber& serial, Instant t,
              CertStatusKind status = CertStatusKind::good);
/// As tbsresp with the mirrored nonce extension. Throws ModelIncomplete or
/// NonceUnsupported.
Bytes tbsrespex(const PredictionModel& model, const SerialNumber& serial, Instant t, ByteView nonce,
                CertStatusKind status = CertStatusKind::good);

/// Attacker-local instant at which a request must reach the responder for
/// it to be served at responder time t.
Instant arrival_for(const PredictionModel& model, Instant t);

/// Bytes of the request a recipe sends.
Bytes recipe_request(const PredictionModel& model, const SerialNumber& serial, const std::optional<Bytes>& nonce);

/// Fixed-width little-endian counter nonces. count == 0 means "no nonce".
struct NonceIterator {
  std::uint64_t count = 0;
  std::size_t width = 0;

  static NonceIterator none() { return {}; }
  /// Width defaults to the smallest that fits count values, raised to
  /// min_width.
  static NonceIterator counter(std::uint64_t count, std::size_t min_width = 1);
  std::uint64_t size() const { return count == 0 ? 1 : count; }
  std::optional<Bytes> at(std::uint64_t i) const;
};

struct RequestRecipe {
  std::uint64_t index = 0;
  SerialNumber serial;
  CertStatusKind status = CertStatusKind::good;
  Instant t{};        // responder time
  Instant fire_at{};  // attacker-local arrival target
  std::optional<Bytes> nonce;
  Bytes request;
  Bytes predicted_tbs;
  Bytes predicted_hash;

  friend bool operator==(const RequestRecipe&, const RequestRecipe&) = default;
};

/// Random-access, restartable view of |S| * ((t1 - t0) / dt) * |nonces|
/// recipes, ordered by serial, then time, then nonce.
class RecipeStream {
 public:
  RecipeStream(const PredictionModel& model, std::vector<SerialNumber> serials, Instant t0, Instant t1, Duration dt,
               NonceIterator nonces, std::vector<SerialNumber> nonexistent = {});

  /// Exact count, computed without materializing anything.
  std::uint64_t count() const { return count_; }
  RequestRecipe at(std::uint64_t index) const;
  /// predicted_tbs only, for hash evaluation.
  Bytes tbs_at(std::uint64_t index) const;

  bool next(RequestRecipe& out);
  void reset() { cursor_ = 0; }

  const PredictionModel& model() const { return model_; }

 private:
  struct Coordinates {
    const SerialNumber* serial;
    CertStatusKind status;
    Instant t;
    std::optional<Bytes> nonce;
  };
  Coordinates locate(std::uint64_t index) const;

  PredictionModel model_;
  std::vector<SerialNumber> serials_;
  std::vector<CertStatusKind> statuses_;
  Instant t0_;
  Duration dt_;
  std::uint64_t slots_ = 0;
  NonceIterator nonces_;
  std::uint64_t count_ = 0;
  std::uint64_t cursor_ = 0;
};

RecipeStream enumerate_recipes(const PredictionModel& model, const std::vector<SerialNumber>& serials, Instant t0,
                               Instant t1, Duration dt, NonceIterator nonces = NonceIterator::none(),
                               const std::vector<SerialNumber>& nonexistent = {});

std::string serialize_model(const PredictionModel& model);
PredictionModel parse_model(std::string_view text);
void save_model(const PredictionModel& model, const std::filesystem::path& path);
PredictionModel load_model(const std::filesystem::path& path);

}  // namespace ocsplab
