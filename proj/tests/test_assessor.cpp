#include <algorithm>
#include <random>

#include "doctest.h"
#include "ocsplab/assessor.hpp"
#include "ocsplab/error.hpp"
#include "ocsplab/pipeline.hpp"
#include "support/audit_lab.hpp"

using namespace ocsplab;
using namespace std::chrono_literals;
using ocsplab::testing::Endpoint;
using ocsplab::testing::expected_behavior;

namespace {

const char* boolean_fields[] = {"realtime", "nonce_mirrored", "sha1_in_use", "ca_signed", "good_for_nonexistent"};

AuditReport synthetic(bool realtime, bool mirrored, NonexistentBehavior nb, bool sha1, bool ca) {
  AuditReport r;
  r.endpoint = "synthetic";
  r.source = "synthetic";
  r.realtime = realtime;
  r.nonce_mirrored = mirrored;
  r.nonexistent_behavior = nb;
  r.sha1_in_use = sha1;
  r.hash_algorithm = sha1 ? "sha1" : "sha256";
  r.cert_id_hash_algorithm = "sha1";
  r.ca_signed = ca;
  r.granularity = GranularityEstimate::second;
  r.good_for_nonexistent = nb == NonexistentBehavior::good;
  return r;
}

}  // namespace

TEST_CASE("ground-truth matrix over mode, nonce policy, non-existent policy and signer role") {
  const HashSpec hash = HashSpec::toy(32, true);
  int audited = 0;
  for (auto role : {SignerRole::ca, SignerRole::dedicated_ocsp}) {
    for (auto mode : {ResponderMode::realtime, ResponderMode::lightweight}) {
      for (auto nonce : {NoncePolicy::mirror, NoncePolicy::ignore, NoncePolicy::responder_side}) {
        for (auto nx : {NonexistentPolicy::unknown, NonexistentPolicy::good, NonexistentPolicy::close_connection,
                        NonexistentPolicy::unauthorized, NonexistentPolicy::randomized_times}) {
          Endpoint ep(hash, role, [&](ResponderConfig& c) {
            c.mode = mode;
            c.nonce_policy = nonce;
            c.nonexistent_serial_policy = nx;
          });
          CAPTURE(signer_role_name(role));
          CAPTURE(responder_mode_name(mode));
          CAPTURE(nonce_policy_name(nonce));
          CAPTURE(nonexistent_policy_name(nx));
          const AuditReport r = ep.run();
          ++audited;
          CHECK_FALSE(r.partial);
          CHECK(r.realtime == (mode == ResponderMode::realtime));
          CHECK(r.nonce_mirrored == (nonce == NoncePolicy::mirror));
          CHECK(r.nonexistent_behavior == expected_behavior(nx));
          CHECK(r.good_for_nonexistent == (nx == NonexistentPolicy::good));
          CHECK(r.ca_signed == (role == SignerRole::ca));
          CHECK(r.sha1_in_use == true);
          CHECK(r.hash_algorithm == hash.name());
          CHECK(r.cert_id_hash_algorithm == "sha1");
          CHECK(r.granularity == GranularityEstimate::second);
          const bool exposed = nonce == NoncePolicy::mirror || nx == NonexistentPolicy::unknown ||
                               nx == NonexistentPolicy::good;
          CHECK(r.scaling_exposed() == exposed);
          const RiskAssessment g = risk_grade(r);
          CHECK_FALSE(g.uncertain);
          CHECK((g.grade == RiskGrade::critical) == (role == SignerRole::ca && exposed));
          CHECK(ep.responder->log().size() == audit_battery_size);
          for (const char* f : boolean_fields) {
            REQUIRE(r.evidence.count(f) == 1);
            CHECK_FALSE(r.evidence.at(f).empty());
            for (std::size_t i : r.evidence.at(f)) CHECK(i < r.transcripts.size());
          }
        }
      }
    }
  }
  CHECK(audited == 60);
}

TEST_CASE("probes are well-formed protocol requests") {
  Endpoint ep(HashSpec::sha256(), SignerRole::dedicated_ocsp);
  const AuditReport r = ep.run();
  REQUIRE(r.transcripts.size() == audit_battery_size);
  for (const auto& t : r.transcripts) {
    const OcspRequest req = decode_ocsp_request(t.request);
    CHECK(encode_ocsp_request(req) == t.request);
    CHECK(req.requests.size() == 1);
  }
  CHECK(r.transcripts[1].sent_at - r.transcripts[0].sent_at >= Duration(2s));
  CHECK(r.hash_algorithm == "sha256");
  CHECK(r.sha1_in_use == false);
  CHECK(r.hash_disagreement());
}

TEST_CASE("documented audit examples") {
  SUBCASE("mirror + good with a SHA-1-class toy hash") {
    Endpoint ep(HashSpec::toy(32, true), SignerRole::dedicated_ocsp,
                [](ResponderConfig& c) { c.nonexistent_serial_policy = NonexistentPolicy::good; });
    const AuditReport r = ep.run();
    CHECK(r.scaling_exposed() == true);
    CHECK(r.good_for_nonexistent == true);
    CHECK(r.sha1_in_use == true);
    CHECK(risk_grade(r).grade == RiskGrade::high);
  }
  SUBCASE("lightweight") {
    Endpoint ep(HashSpec::sha256(), SignerRole::dedicated_ocsp,
                [](ResponderConfig& c) { c.mode = ResponderMode::lightweight; });
    CHECK(ep.run().realtime == false);
  }
  SUBCASE("CA signer") {
    Endpoint ep(HashSpec::sha256(), SignerRole::ca);
    CHECK(ep.run().ca_signed == true);
  }
  SUBCASE("millisecond responder") {
    Endpoint ep(HashSpec::sha256(), SignerRole::dedicated_ocsp,
                [](ResponderConfig& c) { c.granularity = Granularity::millisecond; });
    CHECK(ep.run().granularity == GranularityEstimate::millisecond);
  }
}

TEST_CASE("short probe budget yields a partial report") {
  Endpoint ep(HashSpec::sha256(), SignerRole::dedicated_ocsp);
  AuditOptions o;
  o.probe_budget = 2;
  const AuditReport r = ep.run(o);
  CHECK(r.partial);
  CHECK(r.transcripts.size() == 2);
  CHECK(r.realtime == true);
  CHECK_FALSE(r.nonce_mirrored.has_value());
  CHECK_FALSE(r.nonexistent_behavior.has_value());
  CHECK_FALSE(r.scaling_exposed().has_value());
  CHECK(risk_grade(r).uncertain);
  CHECK(serialize_report(r).find("nonce_mirrored=undetermined") != std::string::npos);

  o.probe_budget = 4;
  Endpoint ep2(HashSpec::sha256(), SignerRole::dedicated_ocsp);
  const AuditReport r2 = ep2.run(o);
  CHECK(r2.partial);
  CHECK(r2.nonce_mirrored == true);
  // Mirroring alone already decides exposure.
  CHECK(r2.scaling_exposed() == true);
}

TEST_CASE("risk grades") {
  using NB = NonexistentBehavior;
  CHECK(risk_grade(synthetic(true, true, NB::unauthorized, true, false)).grade == RiskGrade::high);
  CHECK(risk_grade(synthetic(true, false, NB::unknown, false, true)).grade == RiskGrade::critical);
  CHECK(risk_grade(synthetic(true, true, NB::unauthorized, false, false)).grade == RiskGrade::elevated);
  CHECK(risk_grade(synthetic(false, false, NB::unauthorized, true, true)).grade == RiskGrade::low);
  CHECK(risk_grade(synthetic(false, false, NB::close_connection, false, false)).grade == RiskGrade::low);
  const auto crit = risk_grade(synthetic(true, true, NB::good, true, true));
  CHECK(crit.grade == RiskGrade::critical);
  CHECK(std::find(crit.triggers.begin(), crit.triggers.end(), "ca_signed") != crit.triggers.end());
  AuditReport open = synthetic(true, false, NB::unauthorized, true, true);
  open.nonce_mirrored.reset();
  CHECK(risk_grade(open).grade == RiskGrade::low);
  CHECK(risk_grade(open).uncertain);
}

TEST_CASE("report records round trip") {
  Endpoint ep(HashSpec::toy(32, true), SignerRole::ca);
  const AuditReport r = ep.run();
  const AuditReport back = parse_report(serialize_report(r));
  CHECK(back == r);
  std::string tampered = serialize_report(r);
  const auto pos = tampered.find("scaling_exposed=true");
  REQUIRE(pos != std::string::npos);
  tampered.replace(pos, 20, "scaling_exposed=false");
  CHECK_THROWS_AS(parse_report(tampered), Error);
}

TEST_CASE("aggregate") {
  CHECK_THROWS_AS(aggregate({}), Error);
  const SurveySummary one = aggregate({synthetic(true, true, NonexistentBehavior::good, true, true)});
  for (const char* f : {"realtime", "nonce_mirrored", "scaling_exposed", "sha1_in_use", "sha1_and_scaling",
                        "ca_signed", "ca_and_scaling", "good_for_nonexistent", "second_granularity"}) {
    CAPTURE(f);
    CHECK(one.at(f).percent == 100.0);
  }
  CHECK(one_decimal_percent(53, 70) == doctest::Approx(75.7));
  CHECK(one_decimal_percent(1, 3) == doctest::Approx(33.3));
  CHECK_THROWS_AS(one_decimal_percent(1, 0), Error);
}

TEST_CASE("survey fixture reproduces the published table") {
  const auto reports = load_reports(std::filesystem::path(OCSPLAB_FIXTURE_DIR) / "survey");
  REQUIRE(reports.size() == 70);
  const SurveySummary s = aggregate(reports);
  CHECK(s.total == 70);
  CHECK(s.at("realtime").count == 53);
  CHECK(s.at("realtime").percent == doctest::Approx(75.7));
  CHECK(s.at("scaling_exposed").count == 52);
  CHECK(s.at("scaling_exposed").percent == doctest::Approx(74.3));
  CHECK(s.at("sha1_in_use").count == 40);
  CHECK(s.at("sha1_in_use").percent == doctest::Approx(57.1));
  CHECK(s.at("sha1_and_scaling").count == 29);
  CHECK(s.at("sha1_and_scaling").percent == doctest::Approx(41.4));
  CHECK(s.at("ca_signed").count == 7);
  CHECK(s.at("ca_signed").percent == doctest::Approx(10.0));
  CHECK(s.at("ca_and_scaling").count == 1);
  CHECK(s.at("ca_and_scaling").percent == doctest::Approx(1.4));
  CHECK(s.at("good_for_nonexistent").count == 22);
  CHECK(s.at("good_for_nonexistent").percent == doctest::Approx(31.4));
  CHECK(s.at("second_granularity").percent == doctest::Approx(100.0));

  SUBCASE("permutation invariance") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 20; ++k) {
      auto shuffled = reports;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      CHECK(aggregate(shuffled) == s);
    }
  }
}
