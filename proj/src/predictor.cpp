#include "ocsplab/predictor.hpp"

#include <algorithm>
#include <charconv>

#include "ocsplab/error.hpp"
#include "ocsplab/pki.hpp"

namespace ocsplab {

namespace {

using namespace std::chrono_literals;

Granularity granularity_of(const PredictionModel& m) {
  return m.granularity_estimate == GranularityEstimate::millisecond ? Granularity::millisecond : Granularity::second;
}

/// Value at quantile q of sorted samples (linear interpolation between ranks).
Duration quantile(const std::vector<Duration>& sorted, double q) {
  if (sorted.empty()) return Duration(0);
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  const double v = static_cast<double>(sorted[lo].count()) * (1 - frac) + static_cast<double>(sorted[hi].count()) * frac;
  return Duration(static_cast<Duration::rep>(std::llround(v)));
}

bool has_fraction(const der::GeneralizedTime& t) {
  return t.instant.time_since_epoch().count() % 1000 != 0;
}

void require_predictable(const PredictionModel& m) {
  if (m.mode_estimate != ResponderMode::realtime) {
    throw Error(Errc::model_incomplete, "responder is not realtime; its responses are cached rather than predicted");
  }
  if (m.granularity_estimate == GranularityEstimate::unknown) throw Error(Errc::model_incomplete, "granularity unknown");
  if (!m.responder_id || !m.cert_id_template) throw Error(Errc::model_incomplete, "fixed fields were never observed");
  if (m.unsolicited_extensions) {
    throw Error(Errc::model_incomplete, "responses carry extensions the requestor does not control");
  }
}

TbsResponseData predicted_body(const PredictionModel& m, const SerialNumber& serial, Instant t, CertStatusKind status) {
  require_predictable(m);
  const Granularity g = granularity_of(m);
  TbsResponseData tbs;
  tbs.responder_id = *m.responder_id;
  tbs.produced_at = der::GeneralizedTime(t, g);
  SingleResponse single;
  single.cert_id = *m.cert_id_template;
  single.cert_id.serial = serial;
  switch (status) {
    case CertStatusKind::good: single.status = CertStatus::good(); break;
    case CertStatusKind::unknown: single.status = CertStatus::unknown(); break;
    case CertStatusKind::revoked: throw Error(Errc::invalid_argument, "revoked predictions need a revocation time");
  }
  single.this_update = der::GeneralizedTime(t, g);
  if (m.next_update_present) single.next_update = der::GeneralizedTime(t + m.validity_window_estimate, g);
  tbs.responses.push_back(std::move(single));
  return tbs;
}

std::string duration_text(Duration d) { return std::to_string(d.count()) + "ms"; }

std::uint64_t parse_count(std::string_view s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
    throw Error(Errc::malformed_record, "expected a count, got '" + std::string(s) + "'");
  }
  return v;
}

bool parse_flag(std::string_view s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw Error(Errc::malformed_record, "expected true/false, got '" + std::string(s) + "'");
}

}  // namespace

std::string_view granularity_estimate_name(GranularityEstimate g) {
  switch (g) {
    case GranularityEstimate::second: return "second";
    case GranularityEstimate::millisecond: return "millisecond";
    case GranularityEstimate::unknown: return "unknown";
  }
  return "?";
}

GranularityEstimate parse_granularity_estimate(std::string_view s) {
  if (s == "unknown") return GranularityEstimate::unknown;
  return parse_granularity(s) == Granularity::second ? GranularityEstimate::second : GranularityEstimate::millisecond;
}

std::string_view nonexistent_behavior_name(NonexistentBehavior b) {
  switch (b) {
    case NonexistentBehavior::unknown: return "unknown";
    case NonexistentBehavior::good: return "good";
    case NonexistentBehavior::close_connection: return "close_connection";
    case NonexistentBehavior::unauthorized: return "unauthorized";
    case NonexistentBehavior::randomized: return "randomized";
  }
  return "?";
}

NonexistentBehavior parse_nonexistent_behavior(std::string_view s) {
  if (s == "unknown") return NonexistentBehavior::unknown;
  if (s == "good") return NonexistentBehavior::good;
  if (s == "close_connection") return NonexistentBehavior::close_connection;
  if (s == "unauthorized") return NonexistentBehavior::unauthorized;
  if (s == "randomized") return NonexistentBehavior::randomized;
  throw Error(Errc::invalid_argument, "unknown non-existent behavior '" + std::string(s) + "'");
}

// ---- profiling ----------------------------------------------------------

PredictionModel profile(Transport& transport, const Certificate& issuer, const std::vector<SerialNumber>& probe_serials,
                        int probe_count, const ProfileOptions& options) {
  if (probe_count < 3) throw Error(Errc::invalid_argument, "profiling needs at least 3 probes");
  if (probe_serials.empty()) throw Error(Errc::invalid_argument, "profiling needs at least one known serial");

  PredictionModel m;
  RandomSource rng(options.seed);
  Clock& clock = transport.clock();
  const Instant start = clock.now();

  std::vector<Duration> bias_samples, window_samples, round_trips;
  std::vector<Instant> known_this_updates;
  std::optional<Exchange> nonexistent_exchange;
  Instant nonexistent_mid{};

  for (int i = 0; i < probe_count; ++i) {
    clock.sleep_until(start + i * options.probe_spacing);
    const bool last = i == probe_count - 1;
    const SerialNumber serial =
        last ? options.nonexistent_serial : probe_serials[static_cast<std::size_t>(i) % probe_serials.size()];
    std::optional<Bytes> nonce;
    if (!last && i % 2 == 1 && !options.nonce_lengths.empty()) {
      nonce = rng.bytes(options.nonce_lengths[static_cast<std::size_t>(i / 2) % options.nonce_lengths.size()]);
    }
    const OcspRequest req = make_status_request(issuer, options.cert_id_hash, serial, nonce);
    if (!m.cert_id_template) {
      m.cert_id_template = req.requests[0].cert_id;
      m.cert_id_template->serial = SerialNumber();
    }
    const Exchange ex = transport.exchange(encode_ocsp_request(req));
    ++m.probes_sent;
    const Instant mid = ex.sent_at + (ex.received_at - ex.sent_at) / 2;
    round_trips.push_back(ex.received_at - ex.sent_at);
    if (last) {
      nonexistent_exchange = ex;
      nonexistent_mid = mid;
      continue;
    }
    if (ex.aborted) throw Error(Errc::transport_error, "connection closed on probe " + std::to_string(i));

    BasicOcspResponse basic;
    try {
      const OcspResponse outer = decode_ocsp_response(ex.response);
      if (outer.status != ResponseStatus::successful) {
        throw Error(Errc::transport_error, "probe " + std::to_string(i) + " answered " +
                                               std::string(response_status_name(outer.status)));
      }
      basic = decode_basic_ocsp_response(outer.basic_response);
    } catch (const Error& e) {
      if (e.code() == Errc::transport_error) throw;
      throw Error(Errc::transport_error, std::string("undecodable response: ") + e.what());
    }
    if (basic.tbs.responses.size() != 1) throw Error(Errc::inconclusive_profile, "expected one singleResponse");
    const SingleResponse& sr = basic.tbs.responses[0];

    bias_samples.push_back(sr.this_update.instant - mid);
    known_this_updates.push_back(sr.this_update.instant);
    for (const der::GeneralizedTime* t : std::initializer_list<const der::GeneralizedTime*>{&basic.tbs.produced_at, &sr.this_update}) {
      ++m.time_fields_observed;
      m.time_fields_with_fraction += has_fraction(*t);
    }
    if (sr.next_update) {
      ++m.time_fields_observed;
      m.time_fields_with_fraction += has_fraction(*sr.next_update);
      window_samples.push_back(sr.next_update->instant - sr.this_update.instant);
    } else {
      m.next_update_present = false;
    }

    if (nonce) {
      ++m.nonce_probes;
      if (find_nonce(basic.tbs.extensions) == nonce) {
        const std::size_t len = nonce->size();
        m.nonce_min_length = m.nonce_echoes == 0 ? len : std::min(m.nonce_min_length, len);
        m.nonce_max_length = std::max(m.nonce_max_length, len);
        ++m.nonce_echoes;
      }
    } else if (!basic.tbs.extensions.empty()) {
      m.unsolicited_extensions = true;
    }

    if (!m.responder_id) {
      m.responder_id = basic.tbs.responder_id;
      m.signature_algorithm = basic.signature_algorithm;
      if (auto spec = HashSpec::from_signature_oid(basic.signature_algorithm.oid)) m.hash_spec_estimate = *spec;
      if (!basic.certs.empty()) m.signer_certificate = basic.certs.front();
    }
  }

  m.nonce_supported = m.nonce_echoes > 0;
  m.granularity_estimate = m.time_fields_observed == 0 ? GranularityEstimate::unknown
                           : m.time_fields_with_fraction * 20 <= m.time_fields_observed
                               ? GranularityEstimate::second
                               : GranularityEstimate::millisecond;

  m.mode_observations = known_this_updates.size();
  const bool frozen = known_this_updates.size() >= 2 &&
                      std::all_of(known_this_updates.begin(), known_this_updates.end(),
                                  [&](Instant t) { return t == known_this_updates.front(); });
  m.mode_estimate = frozen ? ResponderMode::lightweight : ResponderMode::realtime;

  std::sort(bias_samples.begin(), bias_samples.end());
  m.clock_bias_observations = bias_samples.size();
  m.clock_bias_iqr = quantile(bias_samples, 0.75) - quantile(bias_samples, 0.25);
  // Truncation floors the responder time, so the raw samples sit half a
  // granule below the true bias on average.
  const Duration half_step = granularity_of(m) == Granularity::second ? 500ms : 0ms;
  m.clock_bias_estimate = quantile(bias_samples, 0.5) + half_step;
  if (m.mode_estimate == ResponderMode::realtime && m.clock_bias_iqr >= 2s) {
    throw Error(Errc::inconclusive_profile,
                "clock bias estimates spread over " + format_duration(m.clock_bias_iqr) + " (IQR)");
  }

  std::sort(round_trips.begin(), round_trips.end());
  m.round_trip_estimate = quantile(round_trips, 0.5);

  std::sort(window_samples.begin(), window_samples.end());
  m.validity_window_observations = window_samples.size();
  m.validity_window_estimate = quantile(window_samples, 0.5);

  m.nonexistent_observations = 1;
  const Exchange& ne = *nonexistent_exchange;
  if (ne.aborted) {
    m.nonexistent_behavior = NonexistentBehavior::close_connection;
  } else {
    OcspResponse outer;
    try {
      outer = decode_ocsp_response(ne.response);
    } catch (const Error& e) {
      throw Error(Errc::transport_error, std::string("undecodable response: ") + e.what());
    }
    if (outer.status != ResponseStatus::successful) {
      m.nonexistent_behavior = NonexistentBehavior::unauthorized;
    } else {
      const BasicOcspResponse basic = decode_basic_ocsp_response(outer.basic_response);
      if (basic.tbs.responses.empty()) throw Error(Errc::inconclusive_profile, "empty response to non-existent probe");
      const SingleResponse& sr = basic.tbs.responses[0];
      if (sr.status.kind == CertStatusKind::good) {
        m.nonexistent_behavior = NonexistentBehavior::good;
      } else {
        bool off_schedule = false;
        if (m.mode_estimate == ResponderMode::lightweight) {
          off_schedule = sr.this_update.instant != known_this_updates.front();
        } else {
          const Duration drift = sr.this_update.instant - (nonexistent_mid + m.clock_bias_estimate);
          off_schedule = std::chrono::abs(drift) > 2s + m.clock_bias_iqr;
        }
        m.nonexistent_behavior = off_schedule ? NonexistentBehavior::randomized : NonexistentBehavior::unknown;
      }
    }
  }
  return m;
}

// ---- prediction ---------------------------------------------------------

Bytes tbsresp(const PredictionModel& model, const SerialNumber& serial, Instant t, CertStatusKind status) {
  return encode_tbs_response_data(predicted_body(model, serial, t, status));
}

Bytes tbsrespex(const PredictionModel& model, const SerialNumber& serial, Instant t, ByteView nonce,
                CertStatusKind status) {
  if (nonce.empty()) return tbsresp(model, serial, t, status);
  TbsResponseData tbs = predicted_body(model, serial, t, status);
  if (!model.nonce_supported) throw Error(Errc::nonce_unsupported, "responder does not mirror nonces");
  if (nonce.size() < model.nonce_min_length || nonce.size() > model.nonce_max_length) {
    throw Error(Errc::nonce_unsupported, "nonce length " + std::to_string(nonce.size()) + " outside observed range " +
                                             std::to_string(model.nonce_min_length) + ".." +
                                             std::to_string(model.nonce_max_length));
  }
  tbs.extensions.push_back(make_nonce_extension(nonce));
  return encode_tbs_response_data(tbs);
}

Instant arrival_for(const PredictionModel& model, Instant t) {
  const Granularity g = granularity_of(model);
  return t - model.clock_bias_estimate + step(g) / 2;
}

Bytes recipe_request(const PredictionModel& model, const SerialNumber& serial, const std::optional<Bytes>& nonce) {
  if (!model.cert_id_template) throw Error(Errc::model_incomplete, "no CertID template");
  OcspRequest req;
  CertId id = *model.cert_id_template;
  id.serial = serial;
  req.requests.push_back({std::move(id), {}});
  if (nonce) req.extensions.push_back(make_nonce_extension(*nonce));
  return encode_ocsp_request(req);
}

NonceIterator NonceIterator::counter(std::uint64_t count, std::size_t min_width) {
  NonceIterator it;
  it.count = count;
  std::size_t width = 1;
  for (std::uint64_t top = count == 0 ? 0 : count - 1; top > 0xff; top >>= 8) ++width;
  it.width = std::max(width, min_width);
  return it;
}

std::optional<Bytes> NonceIterator::at(std::uint64_t i) const {
  if (count == 0) return std::nullopt;
  if (width < 8) {
    const std::uint64_t limit = std::uint64_t{1} << (8 * width);
    if (count > limit) throw Error(Errc::invalid_argument, "nonce width too small for the count");
  }
  return le_bytes(i, width);
}

RecipeStream::RecipeStream(const PredictionModel& model, std::vector<SerialNumber> serials, Instant t0, Instant t1,
                           Duration dt, NonceIterator nonces, std::vector<SerialNumber> nonexistent)
    : model_(model), serials_(std::move(serials)), t0_(t0), dt_(dt), nonces_(nonces) {
  if (!(t0 < t1)) throw Error(Errc::invalid_argument, "time range must satisfy t0 < t1");
  if (dt <= Duration::zero()) throw Error(Errc::invalid_argument, "time step must be positive");
  if (model.granularity_estimate == GranularityEstimate::second && dt % std::chrono::seconds(1) != Duration::zero()) {
    throw Error(Errc::invalid_argument, "time step must be a whole number of seconds for this responder");
  }
  statuses_.assign(serials_.size(), CertStatusKind::good);
  if (model.nonexistent_behavior == NonexistentBehavior::good ||
      model.nonexistent_behavior == NonexistentBehavior::unknown) {
    const auto status = model.nonexistent_behavior == NonexistentBehavior::good ? CertStatusKind::good
                                                                                 : CertStatusKind::unknown;
    for (auto& s : nonexistent) {
      serials_.push_back(std::move(s));
      statuses_.push_back(status);
    }
  }
  slots_ = static_cast<std::uint64_t>((t1 - t0) / dt);
  std::uint64_t partial = 0;
  if (__builtin_mul_overflow(static_cast<std::uint64_t>(serials_.size()), slots_, &partial) ||
      __builtin_mul_overflow(partial, nonces_.size(), &count_)) {
    throw Error(Errc::invalid_argument, "recipe count overflows 64 bits");
  }
}

RecipeStream::Coordinates RecipeStream::locate(std::uint64_t index) const {
  if (index >= count_) throw Error(Errc::invalid_argument, "recipe index out of range");
  const std::uint64_t nn = nonces_.size();
  const std::uint64_t nonce_i = index % nn;
  const std::uint64_t rest = index / nn;
  const std::uint64_t slot = rest % slots_;
  const std::uint64_t serial_i = rest / slots_;
  return {&serials_[serial_i], statuses_[serial_i], t0_ + static_cast<Duration::rep>(slot) * dt_,
          nonces_.at(nonce_i)};
}

RequestRecipe RecipeStream::at(std::uint64_t index) const {
  const Coordinates c = locate(index);
  RequestRecipe r;
  r.index = index;
  r.serial = *c.serial;
  r.status = c.status;
  r.t = c.t;
  r.fire_at = arrival_for(model_, c.t);
  r.nonce = c.nonce;
  r.request = recipe_request(model_, r.serial, r.nonce);
  r.predicted_tbs = c.nonce ? tbsrespex(model_, r.serial, r.t, *c.nonce, r.status) : tbsresp(model_, r.serial, r.t, r.status);
  r.predicted_hash = digest(model_.hash_spec_estimate, r.predicted_tbs);
  return r;
}

Bytes RecipeStream::tbs_at(std::uint64_t index) const {
  const Coordinates c = locate(index);
  return c.nonce ? tbsrespex(model_, *c.serial, c.t, *c.nonce, c.status) : tbsresp(model_, *c.serial, c.t, c.status);
}

bool RecipeStream::next(RequestRecipe& out) {
  if (cursor_ >= count_) return false;
  out = at(cursor_++);
  return true;
}

RecipeStream enumerate_recipes(const PredictionModel& model, const std::vector<SerialNumber>& serials, Instant t0,
                               Instant t1, Duration dt, NonceIterator nonces,
                               const std::vector<SerialNumber>& nonexistent) {
  return RecipeStream(model, serials, t0, t1, dt, nonces, nonexistent);
}

// ---- model files --------------------------------------------------------

std::string serialize_model(const PredictionModel& m) {
  KvRecord r;
  r.add("format", "ocsplab-model-1");
  r.add("clock_bias_estimate", duration_text(m.clock_bias_estimate));
  r.add("clock_bias_iqr", duration_text(m.clock_bias_iqr));
  r.add("clock_bias_observations", std::to_string(m.clock_bias_observations));
  r.add("round_trip_estimate", duration_text(m.round_trip_estimate));
  r.add("granularity_estimate", std::string(granularity_estimate_name(m.granularity_estimate)));
  r.add("time_fields_observed", std::to_string(m.time_fields_observed));
  r.add("time_fields_with_fraction", std::to_string(m.time_fields_with_fraction));
  r.add("validity_window_estimate", duration_text(m.validity_window_estimate));
  r.add("validity_window_observations", std::to_string(m.validity_window_observations));
  r.add("mode_estimate", std::string(responder_mode_name(m.mode_estimate)));
  r.add("mode_observations", std::to_string(m.mode_observations));
  r.add("nonce_supported", m.nonce_supported ? "true" : "false");
  r.add("nonce_probes", std::to_string(m.nonce_probes));
  r.add("nonce_echoes", std::to_string(m.nonce_echoes));
  r.add("nonce_min_length", std::to_string(m.nonce_min_length));
  r.add("nonce_max_length", std::to_string(m.nonce_max_length));
  r.add("nonexistent_behavior", std::string(nonexistent_behavior_name(m.nonexistent_behavior)));
  r.add("nonexistent_observations", std::to_string(m.nonexistent_observations));
  if (m.responder_id) {
    r.add("responder_id", std::string(m.responder_id->kind == ResponderId::Kind::by_key ? "key:" : "name:") +
                              to_hex(m.responder_id->value));
  }
  if (m.cert_id_template) {
    r.add("cert_id_hash", m.cert_id_template->hash_algorithm.name());
    r.add("cert_id_issuer_name_hash", to_hex(m.cert_id_template->issuer_name_hash));
    r.add("cert_id_issuer_key_hash", to_hex(m.cert_id_template->issuer_key_hash));
  }
  r.add("unsolicited_extensions", m.unsolicited_extensions ? "true" : "false");
  r.add("next_update_present", m.next_update_present ? "true" : "false");
  r.add("signature_algorithm", m.signature_algorithm.oid);
  if (m.signature_algorithm.parameters) r.add("signature_parameters", to_hex(*m.signature_algorithm.parameters));
  r.add("hash_spec_estimate", m.hash_spec_estimate.name());
  r.add("signer_certificate", to_hex(m.signer_certificate));
  r.add("probes_sent", std::to_string(m.probes_sent));
  return r.render();
}

PredictionModel parse_model(std::string_view text) {
  const KvRecord r = KvRecord::parse(text);
  if (r.require("format") != "ocsplab-model-1") throw Error(Errc::malformed_record, "not an ocsplab model file");
  PredictionModel m;
  auto count = [&](const char* key) { return static_cast<std::size_t>(parse_count(r.require(key))); };
  m.clock_bias_estimate = parse_duration(r.require("clock_bias_estimate"));
  m.clock_bias_iqr = parse_duration(r.require("clock_bias_iqr"));
  m.clock_bias_observations = count("clock_bias_observations");
  m.round_trip_estimate = parse_duration(r.require("round_trip_estimate"));
  m.granularity_estimate = parse_granularity_estimate(r.require("granularity_estimate"));
  m.time_fields_observed = count("time_fields_observed");
  m.time_fields_with_fraction = count("time_fields_with_fraction");
  m.validity_window_estimate = parse_duration(r.require("validity_window_estimate"));
  m.validity_window_observations = count("validity_window_observations");
  m.mode_estimate = parse_responder_mode(r.require("mode_estimate"));
  m.mode_observations = count("mode_observations");
  m.nonce_supported = parse_flag(r.require("nonce_supported"));
  m.nonce_probes = count("nonce_probes");
  m.nonce_echoes = count("nonce_echoes");
  m.nonce_min_length = count("nonce_min_length");
  m.nonce_max_length = count("nonce_max_length");
  m.nonexistent_behavior = parse_nonexistent_behavior(r.require("nonexistent_behavior"));
  m.nonexistent_observations = count("nonexistent_observations");
  if (auto id = r.get("responder_id")) {
    const auto colon = id->find(':');
    if (colon == std::string::npos) throw Error(Errc::malformed_record, "bad responder_id");
    const std::string kind = id->substr(0, colon);
    if (kind != "key" && kind != "name") throw Error(Errc::malformed_record, "bad responder_id kind");
    m.responder_id = ResponderId{kind == "key" ? ResponderId::Kind::by_key : ResponderId::Kind::by_name,
                                 from_hex(id->substr(colon + 1))};
  }
  if (auto h = r.get("cert_id_hash")) {
    m.cert_id_template = CertId{HashSpec::parse(*h), from_hex(r.require("cert_id_issuer_name_hash")),
                                from_hex(r.require("cert_id_issuer_key_hash")), SerialNumber()};
  }
  m.unsolicited_extensions = parse_flag(r.require("unsolicited_extensions"));
  m.next_update_present = parse_flag(r.require("next_update_present"));
  m.signature_algorithm.oid = r.require("signature_algorithm");
  if (auto p = r.get("signature_parameters")) m.signature_algorithm.parameters = from_hex(*p);
  m.hash_spec_estimate = HashSpec::parse(r.require("hash_spec_estimate"));
  m.signer_certificate = from_hex(r.require("signer_certificate"));
  m.probes_sent = count("probes_sent");
  return m;
}

void save_model(const PredictionModel& model, const std::filesystem::path& path) {
  write_text_file(path, serialize_model(model));
}

PredictionModel load_model(const std::filesystem::path& path) { return parse_model(read_text_file(path)); }

}  // namespace ocsplab
