#include <chrono>

#include "doctest.h"
#include "ocsplab/attacker.hpp"
#include "ocsplab/error.hpp"
#include "ocsplab/pipeline.hpp"
#include "support/scenario.hpp"

using namespace ocsplab;
using ocsplab::testing::Scenario;
using namespace std::chrono_literals;


TEST_CASE("burst schedule") {
  TimingPolicy p;
  p.round_trip = 50ms;
  const Instant fire = parse_instant("2026-03-02T10:00:00.500Z");
  const auto s = burst_schedule(fire, p);
  REQUIRE(s.size() == 50);
  CHECK(s.front() == fire - 25ms - 2500ms + 50ms);
  CHECK(s[1] - s[0] == Duration(100ms));
  CHECK(s.back() == fire - 25ms + 2500ms - 50ms);
  p.abort_after = 20;
  CHECK(burst_schedule(fire, p).size() == 20);
  p.rate = 0;
  CHECK_THROWS_AS(burst_schedule(fire, p), Error);
}

TEST_CASE("execute forges against the baseline responder") {
  const Scenario sc;
  bool well_formed = false;
  const AttackOutcome out = sc.replay(sc.cfg, 1, ContentKind::ocsp_response, &well_formed);
  CHECK(well_formed);
  REQUIRE(out.success());
  CHECK(out.requests_sent <= 50);
  CHECK(out.matches == 1);
  const ForgedArtifact& a = *out.artifact;
  CHECK(a.tbs_bytes == sc.fakes.produce(sc.candidate.h2_index));
  CHECK_FALSE(a.harvest_log.empty());

  // The signature is one the responder actually produced.
  const BasicOcspResponse harvested = decode_basic_ocsp_response(decode_ocsp_response(a.harvest_log.back()).basic_response);
  CHECK(harvested.signature == a.signature);
  CHECK(harvested.tbs_raw == sc.candidate.recipe->predicted_tbs);

  const BasicOcspResponse framed = decode_basic_ocsp_response(a.framed);
  CHECK(framed.tbs_raw == a.tbs_bytes);
  CHECK(verify(sc.fx.ocsp_signer, framed.tbs_raw, framed.signature, sc.hash).valid);

  const Verdict v = validate_artifact(a, sc.fx.ocsp_signer, ValidatorPolicy::strict_eku);
  CHECK(v.signature_valid);
  CHECK(v.policy_eligible);
  CHECK(v.accepted);
  const Verdict fresh = validate_artifact(a, sc.fx.ocsp_signer, ValidatorPolicy::strict_eku, Duration(1h));
  CHECK(fresh.signature_valid);
  CHECK(fresh.fresh == false);
  CHECK_FALSE(fresh.accepted);
  CHECK(fresh.lifetime == Duration(7 * 24h));

  CHECK(parse_artifact(serialize_artifact(a)) == a);
}

TEST_CASE("execute succeeds in more than 95 of 100 seeded runs") {
  const Scenario sc;
  int ok = 0;
  std::uint64_t max_requests = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto out = sc.replay(sc.cfg, seed);
    ok += out.success();
    max_requests = std::max(max_requests, out.requests_sent);
  }
  CHECK(ok > 95);
  CHECK(max_requests <= 50);
}

TEST_CASE("countermeasures defeat the burst") {
  const Scenario sc;
  for (auto c : {Countermeasure::ms_granularity, Countermeasure::random_bias, Countermeasure::responder_nonce,
                 Countermeasure::rate_limit}) {
    CAPTURE(countermeasure_name(c));
    ResponderConfig cfg = sc.cfg;
    apply_countermeasure(cfg, c);
    int ok = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const auto out = sc.replay(cfg, seed);
      ok += out.success();
      if (!out.success()) CHECK(out.failure == Errc::window_missed);
    }
    CHECK(ok == 0);
  }
}

TEST_CASE("a burst whose start has passed sends nothing") {
  const Scenario sc;
  ManualClock clock(sc.candidate.recipe->fire_at);
  Responder responder(sc.cfg, sc.db, clock);
  InProcessTransport transport(responder, clock);
  const auto out = execute(sc.candidate, sc.fakes, ContentKind::ocsp_response, transport, sc.policy());
  CHECK_FALSE(out.success());
  CHECK(out.failure == Errc::window_missed);
  CHECK(out.requests_sent == 0);
  CHECK(responder.log().size() == 0);

  CollisionCandidate bare = sc.candidate;
  bare.recipe.reset();
  CHECK_THROWS_AS(execute(bare, sc.fakes, ContentKind::ocsp_response, transport, sc.policy()), Error);
}

TEST_CASE("splice requires equal digests") {
  const Scenario sc;
  const auto out = sc.replay(sc.cfg, 1);
  REQUIRE(out.success());
  const BasicOcspResponse harvested =
      decode_basic_ocsp_response(decode_ocsp_response(out.artifact->harvest_log.back()).basic_response);
  std::uint64_t other = sc.candidate.h2_index + 1;
  while (digest(sc.hash, sc.fakes.produce(other)) == sc.candidate.hash) ++other;
  try {
    splice(sc.fakes.produce(other), harvested, ContentKind::ocsp_response);
    FAIL("expected DigestMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::digest_mismatch);
  }
}

TEST_CASE("forged certificates and signer roles") {
  for (SignerRole role : {SignerRole::ca, SignerRole::dedicated_ocsp}) {
    const Scenario sc(ContentKind::certificate, role);
    const auto out = sc.replay(sc.cfg, 2, ContentKind::certificate);
    REQUIRE(out.success());
    const ForgedArtifact& a = *out.artifact;
    const Certificate cert = decode_certificate(a.framed);
    CHECK(basic_constraints_ca(cert.tbs.extensions) == true);
    const SignerIdentity& signer = sc.fx.signer(role);
    const Verdict strict = validate_artifact(a, signer, ValidatorPolicy::strict_eku);
    const Verdict relaxed = validate_artifact(a, signer, ValidatorPolicy::relaxed);
    CHECK(strict.signature_valid);
    CHECK(strict.policy_eligible == (role == SignerRole::ca));
    CHECK(relaxed.accepted);
    CHECK_FALSE(strict.fresh.has_value());
  }
}

TEST_CASE("run_demo end to end") {
  DemoOptions o;
  const DemoResult r = run_demo(o);
  CHECK(r.forged);
  CHECK(r.log_well_formed);
  CHECK(r.log_requests > 12);
  CHECK(r.report() == run_demo(o).report());

  o.countermeasure = Countermeasure::ms_granularity;
  const DemoResult ms = run_demo(o);
  CHECK_FALSE(ms.forged);
  CHECK(ms.failure == "WindowMissed");

  o.countermeasure = Countermeasure::random_bias;
  const DemoResult biased = run_demo(o);
  CHECK_FALSE(biased.forged);
  CHECK((biased.failure == "InconclusiveProfile" || biased.failure == "WindowMissed"));
  o.countermeasure = Countermeasure::responder_nonce;
  CHECK(run_demo(o).failure == "ModelIncomplete");
}
