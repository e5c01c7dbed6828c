#include "ocsplab/pipeline.hpp"

#include "ocsplab/error.hpp"
#include "ocsplab/textio.hpp"

namespace ocsplab {

using namespace std::chrono_literals;

std::string_view countermeasure_name(Countermeasure c) {
  switch (c) {
    case Countermeasure::none: return "none";
    case Countermeasure::ms_granularity: return "ms-granularity";
    case Countermeasure::random_bias: return "random-bias";
    case Countermeasure::responder_nonce: return "responder-nonce";
    case Countermeasure::rate_limit: return "rate-limit";
  }
  return "?";
}

Countermeasure parse_countermeasure(std::string_view s) {
  for (auto c : {Countermeasure::none, Countermeasure::ms_granularity, Countermeasure::random_bias,
                 Countermeasure::responder_nonce, Countermeasure::rate_limit}) {
    if (s == countermeasure_name(c)) return c;
  }
  throw Error(Errc::invalid_argument, "unknown countermeasure '" + std::string(s) + "'");
}

void apply_countermeasure(ResponderConfig& cfg, Countermeasure c) {
  switch (c) {
    case Countermeasure::none: break;
    case Countermeasure::ms_granularity: cfg.granularity = Granularity::millisecond; break;
    case Countermeasure::random_bias: cfg.random_bias_max = 10s; break;
    case Countermeasure::responder_nonce: cfg.nonce_policy = NoncePolicy::responder_side; break;
    case Countermeasure::rate_limit: cfg.rate_limit = RateLimit{}; break;
  }
}

Instant demo_start(std::uint64_t seed) {
  RandomSource rng(seed ^ 0x6f63737073746172ull);
  return parse_instant("2026-03-02T09:00:00Z") + Duration(static_cast<Duration::rep>(rng.uniform(999)));
}

LatencyModel demo_latency(std::uint64_t seed) { return LatencyModel{25ms, 5ms, seed}; }

bool log_well_formed(const RequestLog& log) {
  for (const auto& rec : log.snapshot()) {
    try {
      decode_ocsp_request(rec.request);
    } catch (const Error&) {
      return false;
    }
  }
  return true;
}

std::string DemoResult::report() const {
  KvRecord r;
  r.add("result", forged ? "forged" : failure);
  if (!detail.empty()) r.add("detail", detail);
  if (model) {
    r.add("model_clock_bias", format_duration(model->clock_bias_estimate));
    r.add("model_granularity", std::string(granularity_estimate_name(model->granularity_estimate)));
    r.add("model_mode", std::string(responder_mode_name(model->mode_estimate)));
    r.add("model_nonce_supported", model->nonce_supported ? "true" : "false");
  }
  if (candidate) {
    r.add("search_evaluations", std::to_string(candidate->stats.evaluations));
    r.add("collision_hash", to_hex(candidate->hash));
    r.add("recipe_serial", candidate->recipe->serial.to_string());
    r.add("recipe_time", format_instant(candidate->recipe->t));
    r.add("fake_index", std::to_string(candidate->h2_index));
  }
  if (outcome) {
    r.add("requests_sent", std::to_string(outcome->requests_sent));
    r.add("matches", std::to_string(outcome->matches));
  }
  auto verdict = [&](const char* prefix, const std::optional<Verdict>& v) {
    if (!v) return;
    const std::string p = prefix;
    r.add(p + "_signature_valid", v->signature_valid ? "true" : "false");
    r.add(p + "_policy_eligible", v->policy_eligible ? "true" : "false");
    r.add(p + "_accepted", v->accepted ? "true" : "false");
  };
  verdict("strict", strict);
  verdict("relaxed", relaxed);
  r.add("log_requests", std::to_string(log_requests));
  r.add("log_well_formed", log_well_formed ? "true" : "false");
  return r.render();
}

SourceGenerator make_fake_generator(const PredictionModel& model, ContentKind kind, const SerialNumber& target,
                                    Instant this_update, Duration lifetime, const CertStatus& status) {
  if (kind == ContentKind::ocsp_response) {
    return fake_response_generator(FakeResponseSpec::from_model(model, target, status, this_update, lifetime));
  }
  return fake_certificate_generator(
      FakeCertificateSpec::against(decode_certificate(model.signer_certificate), model.signature_algorithm));
}

DemoResult run_demo(const DemoOptions& o) {
  DemoResult result;
  const PkiFixture fx = make_fixture(o.hash, o.eku);
  ResponderConfig cfg = ResponderConfig::for_fixture(fx, o.signer, o.hash);
  cfg.seed = o.seed;
  apply_countermeasure(cfg, o.countermeasure);
  auto db = std::make_shared<StatusDatabase>();
  for (std::uint64_t s = 0; s < o.serials; ++s) db->register_certificate(SerialNumber(s), CertStatus::good());

  ManualClock clock(demo_start(o.seed));
  Responder responder(cfg, db, clock);
  InProcessTransport transport(responder, clock, demo_latency(o.seed));

  std::vector<SerialNumber> serials;
  for (std::uint64_t s = 0; s < o.serials; ++s) serials.emplace_back(s);

  try {
    ProfileOptions po;
    po.seed = o.seed;
    const std::vector<SerialNumber> probes(serials.begin(), serials.begin() + std::min<std::size_t>(3, serials.size()));
    result.model = profile(transport, fx.ca.certificate, probes, 12, po);
    const PredictionModel& model = *result.model;

    const Instant t0 = truncate(clock.now() + model.clock_bias_estimate + o.lead_time, Granularity::second);
    const RecipeStream stream = enumerate_recipes(model, serials, t0, t0 + o.horizon, 1s);
    const SourceGenerator gen1 = recipe_generator(stream);

    const SourceGenerator gen2 = make_fake_generator(model, o.kind, o.target_serial, t0, o.forged_lifetime);

    SearchOptions so;
    so.seed = o.seed;
    so.budget = o.budget;
    so.workers = o.workers;
    CollisionCandidate candidate = require_collision(gen1, gen2, o.hash, so);
    attach_recipe(candidate, stream);
    result.candidate = candidate;

    TimingPolicy policy;
    policy.round_trip = model.round_trip_estimate;
    result.outcome = execute(candidate, gen2, o.kind, transport, policy);
    if (result.outcome->artifact) {
      const SignerIdentity& signer = fx.signer(o.signer);
      result.strict = validate_artifact(*result.outcome->artifact, signer, ValidatorPolicy::strict_eku);
      result.relaxed = validate_artifact(*result.outcome->artifact, signer, ValidatorPolicy::relaxed);
      result.forged = result.strict->signature_valid;
      if (!result.forged) {
        result.failure = "SignatureInvalid";
        result.detail = "spliced signature does not verify";
      }
    } else {
      result.failure = std::string(errc_name(result.outcome->failure.value_or(Errc::window_missed)));
      result.detail = result.outcome->detail;
    }

    if (o.out_dir) {
      std::filesystem::create_directories(*o.out_dir);
      save_model(model, *o.out_dir / "model.txt");
      write_text_file(*o.out_dir / "candidate.txt", serialize_candidate(candidate));
      if (result.outcome->artifact) {
        export_der(*o.out_dir / "artifact.der", result.outcome->artifact->framed);
        write_text_file(*o.out_dir / "artifact.txt", serialize_artifact(*result.outcome->artifact));
      }
    }
  } catch (const Error& e) {
    result.failure = std::string(errc_name(e.code()));
    result.detail = e.what();
  }

  result.log_requests = responder.log().size();
  result.log_well_formed = log_well_formed(responder.log());
  if (o.out_dir) {
    std::filesystem::create_directories(*o.out_dir);
    write_text_file(*o.out_dir / "report.txt", result.report());
  }
  return result;
}

}  // namespace ocsplab
