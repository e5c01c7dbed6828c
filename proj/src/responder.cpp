#include "ocsplab/responder.hpp"

#include <algorithm>
#include <charconv>

#include "ocsplab/error.hpp"

namespace ocsplab {

namespace {

using namespace std::chrono_literals;

HandleResult framed(ResponseStatus status, int http_status = 200) {
  return HandleResult{false, http_status, encode_ocsp_response(OcspResponse{status, {}})};
}

bool parse_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw Error(Errc::invalid_argument, "expected a boolean, got '" + std::string(s) + "'");
}

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
    throw Error(Errc::invalid_argument, "expected an unsigned integer, got '" + std::string(s) + "'");
  }
  return v;
}


}  // namespace

std::vector<SerialNumber> parse_serial_ranges(std::string_view s) {
  std::vector<SerialNumber> out;
  while (!s.empty()) {
    const auto comma = s.find(',');
    std::string_view item = s.substr(0, comma);
    s = comma == std::string_view::npos ? std::string_view{} : s.substr(comma + 1);
    if (item.empty()) continue;
    const auto dash = item.find('-');
    if (dash == std::string_view::npos) {
      out.push_back(SerialNumber::parse(item));
      continue;
    }
    const std::uint64_t lo = parse_u64(item.substr(0, dash)), hi = parse_u64(item.substr(dash + 1));
    if (hi < lo || hi - lo > 10'000'000) throw Error(Errc::invalid_argument, "bad serial range");
    for (std::uint64_t v = lo; v <= hi; ++v) out.emplace_back(v);
  }
  return out;
}

std::string_view responder_mode_name(ResponderMode m) {
  return m == ResponderMode::realtime ? "realtime" : "lightweight";
}

ResponderMode parse_responder_mode(std::string_view s) {
  if (s == "realtime") return ResponderMode::realtime;
  if (s == "lightweight") return ResponderMode::lightweight;
  throw Error(Errc::invalid_argument, "unknown mode '" + std::string(s) + "'");
}

std::string_view nonce_policy_name(NoncePolicy p) {
  switch (p) {
    case NoncePolicy::mirror: return "mirror";
    case NoncePolicy::ignore: return "ignore";
    case NoncePolicy::responder_side: return "responder_side";
  }
  return "?";
}

NoncePolicy parse_nonce_policy(std::string_view s) {
  if (s == "mirror") return NoncePolicy::mirror;
  if (s == "ignore") return NoncePolicy::ignore;
  if (s == "responder_side" || s == "responder-side") return NoncePolicy::responder_side;
  throw Error(Errc::invalid_argument, "unknown nonce policy '" + std::string(s) + "'");
}

std::string_view nonexistent_policy_name(NonexistentPolicy p) {
  switch (p) {
    case NonexistentPolicy::unknown: return "unknown";
    case NonexistentPolicy::good: return "good";
    case NonexistentPolicy::close_connection: return "close_connection";
    case NonexistentPolicy::unauthorized: return "unauthorized";
    case NonexistentPolicy::randomized_times: return "randomized_times";
  }
  return "?";
}

NonexistentPolicy parse_nonexistent_policy(std::string_view s) {
  if (s == "unknown") return NonexistentPolicy::unknown;
  if (s == "good") return NonexistentPolicy::good;
  if (s == "close_connection" || s == "close-connection") return NonexistentPolicy::close_connection;
  if (s == "unauthorized") return NonexistentPolicy::unauthorized;
  if (s == "randomized_times" || s == "randomized-times" || s == "randomized") {
    return NonexistentPolicy::randomized_times;
  }
  throw Error(Errc::invalid_argument, "unknown non-existent serial policy '" + std::string(s) + "'");
}

RateLimit parse_rate_limit(std::string_view s) {
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) throw Error(Errc::invalid_argument, "rate limit must look like 10/5s");
  RateLimit r;
  r.max_identical = static_cast<int>(parse_u64(s.substr(0, slash)));
  r.window = parse_duration(s.substr(slash + 1));
  if (r.max_identical < 1 || r.window <= Duration::zero()) throw Error(Errc::invalid_argument, "bad rate limit");
  return r;
}

std::string format_rate_limit(const RateLimit& r) {
  return std::to_string(r.max_identical) + "/" + format_duration(r.window);
}

Duration ResponderConfig::effective_window() const {
  if (validity_window) return *validity_window;
  return mode == ResponderMode::realtime ? Duration(1h) : Duration(24h * 7);
}

ResponderConfig ResponderConfig::for_fixture(const PkiFixture& fx, SignerRole role, const HashSpec& hash) {
  ResponderConfig cfg;
  cfg.signer = fx.signer(role);
  cfg.issuer = fx.ca.certificate;
  cfg.hash_spec = hash;
  return cfg;
}

// ---- database and log ---------------------------------------------------

void StatusDatabase::register_certificate(const SerialNumber& serial, const CertStatus& status) {
  std::unique_lock lock(mu_);
  if (!entries_.emplace(serial, status).second) {
    throw Error(Errc::duplicate_serial, "serial " + serial.to_string() + " already registered");
  }
}

std::optional<CertStatus> StatusDatabase::lookup(const SerialNumber& serial) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(serial);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::size_t StatusDatabase::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::vector<SerialNumber> StatusDatabase::serials() const {
  std::shared_lock lock(mu_);
  std::vector<SerialNumber> out;
  out.reserve(entries_.size());
  for (const auto& [s, _] : entries_) out.push_back(s);
  return out;
}

void RequestLog::append(Instant arrival, ByteView request) {
  std::lock_guard lock(mu_);
  records_.push_back({arrival, Bytes(request.begin(), request.end())});
}

std::vector<LogRecord> RequestLog::snapshot() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::size_t RequestLog::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

// ---- time fields --------------------------------------------------------

TimeFields compute_time_fields(const ResponderConfig& cfg, Instant now, RandomSource* rng) {
  const Instant base = truncate(now + cfg.clock_bias, cfg.granularity);
  const Duration window = cfg.effective_window();
  if (cfg.random_bias_max <= Duration::zero() || rng == nullptr) {
    const der::GeneralizedTime t(base, cfg.granularity);
    return {t, t, der::GeneralizedTime(base + window, cfg.granularity)};
  }
  const auto max = static_cast<std::uint64_t>(cfg.random_bias_max.count());
  const Duration b1(rng->uniform(max)), b2(rng->uniform(max)), b3(rng->uniform(max));
  // The larger backward shift goes to thisUpdate so thisUpdate <= producedAt holds.
  const auto ms = Granularity::millisecond;
  return {der::GeneralizedTime(base - std::min(b1, b2), ms), der::GeneralizedTime(base - std::max(b1, b2), ms),
          der::GeneralizedTime(base + window + b3, ms)};
}

// ---- responder ----------------------------------------------------------

Responder::Responder(ResponderConfig cfg, std::shared_ptr<StatusDatabase> db, Clock& clock)
    : cfg_(std::move(cfg)),
      signer_(cfg_.signer.with_hash(cfg_.hash_spec)),
      responder_key_hash_(responder_key_hash(cfg_.signer.certificate)),
      db_(db ? std::move(db) : std::make_shared<StatusDatabase>()),
      clock_(clock),
      rng_(cfg_.seed, cfg_.secure_random) {}

HandleResult Responder::handle(ByteView request) { return handle_at(request, clock_.now()); }

TimeFields Responder::time_fields(Instant now) {
  if (cfg_.mode == ResponderMode::realtime) return compute_time_fields(cfg_, now, &rng_);
  std::lock_guard lock(state_mu_);
  const Instant shifted = now + cfg_.clock_bias;
  if (!cache_.valid || shifted - cache_.epoch >= cfg_.lightweight_cache_period) {
    cache_.fields = compute_time_fields(cfg_, now, &rng_);
    cache_.epoch = truncate(shifted, cfg_.granularity);
    cache_.valid = true;
  }
  return cache_.fields;
}

TimeFields Responder::randomized_fields(Instant now) {
  const Instant base = now + cfg_.clock_bias;
  constexpr std::uint64_t spread = 24ull * 3600 * 1000;
  const Duration r1(rng_.uniform(spread)), r2(rng_.uniform(spread));
  const auto g = cfg_.granularity;
  const Instant this_update = base - std::max(r1, r2);
  return {der::GeneralizedTime(base - std::min(r1, r2), g), der::GeneralizedTime(this_update, g),
          der::GeneralizedTime(this_update + cfg_.effective_window(), g)};
}

bool Responder::throttled(ByteView request, Instant now) {
  if (!cfg_.rate_limit) return false;
  std::lock_guard lock(state_mu_);
  auto& q = recent_[std::string(request.begin(), request.end())];
  while (!q.empty() && q.front() <= now - cfg_.rate_limit->window) q.pop_front();
  if (static_cast<int>(q.size()) >= cfg_.rate_limit->max_identical) return true;
  q.push_back(now);
  if (recent_.size() > 100'000) {
    std::erase_if(recent_, [&](const auto& kv) { return kv.second.empty() || kv.second.back() <= now - cfg_.rate_limit->window; });
  }
  return false;
}

SingleResponse Responder::resolve(const SingleRequest& single, const TimeFields& t, bool& abort, bool& unauthorized,
                                  bool& randomized) {
  SingleResponse out;
  out.cert_id = single.cert_id;
  out.this_update = t.this_update;
  out.next_update = t.next_update;
  const auto& spec = single.cert_id.hash_algorithm;
  if (single.cert_id.issuer_name_hash != issuer_name_hash(cfg_.issuer, spec) ||
      single.cert_id.issuer_key_hash != issuer_key_hash(cfg_.issuer, spec)) {
    out.status = CertStatus::unknown();
    return out;
  }
  if (auto status = db_->lookup(single.cert_id.serial)) {
    out.status = *status;
    return out;
  }
  switch (cfg_.nonexistent_serial_policy) {
    case NonexistentPolicy::unknown: out.status = CertStatus::unknown(); break;
    case NonexistentPolicy::good: out.status = CertStatus::good(); break;
    case NonexistentPolicy::close_connection: abort = true; break;
    case NonexistentPolicy::unauthorized: unauthorized = true; break;
    case NonexistentPolicy::randomized_times:
      out.status = CertStatus::unknown();
      randomized = true;
      break;
  }
  return out;
}

HandleResult Responder::handle_at(ByteView request, Instant arrival) {
  log_.append(arrival, request);
  if (throttled(request, arrival)) return framed(ResponseStatus::try_later, 429);

  OcspRequest req;
  try {
    req = decode_ocsp_request(request);
  } catch (const Error&) {
    return framed(ResponseStatus::malformed_request);
  }
  if (req.requests.empty()) return framed(ResponseStatus::malformed_request);

  const TimeFields t = time_fields(arrival);
  TbsResponseData tbs;
  tbs.responder_id = {ResponderId::Kind::by_key, responder_key_hash_};
  tbs.produced_at = t.produced_at;
  bool abort = false, unauthorized = false, any_randomized = false;
  std::vector<bool> randomized;
  for (const auto& single : req.requests) {
    bool r = false;
    tbs.responses.push_back(resolve(single, t, abort, unauthorized, r));
    randomized.push_back(r);
    any_randomized = any_randomized || r;
  }
  if (abort) return HandleResult{true, 0, {}};
  if (unauthorized) return framed(ResponseStatus::unauthorized);
  if (any_randomized) {
    const TimeFields r = randomized_fields(arrival);
    tbs.produced_at = r.produced_at;
    for (std::size_t i = 0; i < tbs.responses.size(); ++i) {
      if (!randomized[i]) continue;
      tbs.responses[i].this_update = r.this_update;
      tbs.responses[i].next_update = r.next_update;
    }
  }

  switch (cfg_.nonce_policy) {
    case NoncePolicy::mirror:
      if (const Extension* n = find_extension(req.extensions, oid::ocsp_nonce)) tbs.extensions.push_back(*n);
      break;
    case NoncePolicy::ignore:
      break;
    case NoncePolicy::responder_side:
      tbs.extensions.push_back(make_nonce_extension(rng_.bytes(16)));
      break;
  }

  const Bytes tbs_der = encode_tbs_response_data(tbs);
  const Bytes sig = sign(signer_, digest(cfg_.hash_spec, tbs_der));
  const Bytes basic = frame_basic_ocsp_response(tbs_der, signer_.signature_algorithm(), sig, {signer_.certificate_der});
  return HandleResult{false, 200, encode_ocsp_response(OcspResponse{ResponseStatus::successful, basic})};
}

// ---- setup files --------------------------------------------------------

const std::vector<std::string>& responder_setup_keys() {
  static const std::vector<std::string> keys = {
      "mode",       "granularity", "random_bias_max", "validity_window",  "lightweight_cache_period",
      "nonce_policy", "nonexistent_serial_policy", "signer", "eku", "pki_seed",
      "signer_identity", "issuer_identity", "hash", "clock_bias", "rate_limit",
      "secure_random", "seed", "serials", "revoked"};
  return keys;
}

std::shared_ptr<StatusDatabase> ResponderSetup::make_database() const {
  auto db = std::make_shared<StatusDatabase>();
  for (const auto& [serial, status] : certificates) db->register_certificate(serial, status);
  return db;
}

ResponderSetup parse_responder_setup(const KvRecord& rec) {
  const auto& keys = responder_setup_keys();
  for (const auto& [k, _] : rec.entries()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw Error(Errc::malformed_record, "unknown responder key '" + k + "'");
    }
  }
  ResponderSetup setup;
  ResponderConfig& cfg = setup.config;
  if (auto v = rec.get("mode")) cfg.mode = parse_responder_mode(*v);
  if (auto v = rec.get("granularity")) cfg.granularity = parse_granularity(*v);
  if (auto v = rec.get("random_bias_max")) cfg.random_bias_max = parse_duration(*v);
  if (auto v = rec.get("validity_window")) cfg.validity_window = parse_duration(*v);
  if (auto v = rec.get("lightweight_cache_period")) cfg.lightweight_cache_period = parse_duration(*v);
  if (auto v = rec.get("nonce_policy")) cfg.nonce_policy = parse_nonce_policy(*v);
  if (auto v = rec.get("nonexistent_serial_policy")) cfg.nonexistent_serial_policy = parse_nonexistent_policy(*v);
  if (auto v = rec.get("hash")) cfg.hash_spec = HashSpec::parse(*v);
  if (auto v = rec.get("clock_bias")) cfg.clock_bias = parse_duration(*v);
  if (auto v = rec.get("rate_limit"); v && *v != "none") cfg.rate_limit = parse_rate_limit(*v);
  if (auto v = rec.get("secure_random")) cfg.secure_random = parse_bool(*v);
  if (auto v = rec.get("seed")) cfg.seed = parse_u64(*v);
  if (cfg.random_bias_max < Duration::zero()) throw Error(Errc::invalid_argument, "random_bias_max must be >= 0");

  const SignerRole role = parse_signer_role(rec.get("signer").value_or("dedicated"));
  const EkuProfile eku = parse_eku_profile(rec.get("eku").value_or("proper"));
  const PkiFixture fx = make_fixture(cfg.hash_spec, eku, rec.get("pki_seed").value_or("ocsplab"));
  cfg.signer = fx.signer(role);
  cfg.issuer = fx.ca.certificate;
  if (auto path = rec.get("issuer_identity")) cfg.issuer = load_identity(*path).certificate;
  if (auto path = rec.get("signer_identity")) cfg.signer = load_identity(*path);

  for (const auto& serial : parse_serial_ranges(rec.get("serials").value_or("0-999"))) {
    setup.certificates.emplace_back(serial, CertStatus::good());
  }
  for (const auto& entry : rec.all("revoked")) {
    const auto atpos = entry.find('@');
    if (atpos == std::string::npos) throw Error(Errc::malformed_record, "revoked entries look like serial@time");
    const SerialNumber serial = SerialNumber::parse(std::string_view(entry).substr(0, atpos));
    const CertStatus status = CertStatus::revoked(parse_instant(std::string_view(entry).substr(atpos + 1)));
    auto it = std::find_if(setup.certificates.begin(), setup.certificates.end(),
                           [&](const auto& c) { return c.first == serial; });
    if (it != setup.certificates.end()) {
      it->second = status;
    } else {
      setup.certificates.emplace_back(serial, status);
    }
  }
  return setup;
}

ResponderSetup load_responder_setup(const std::filesystem::path& path) {
  return parse_responder_setup(KvRecord::parse(read_text_file(path)));
}

}  // namespace ocsplab
