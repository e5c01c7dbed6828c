// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when
// all of them pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "ocsplab/assessor.hpp"
#include "ocsplab/error.hpp"
#include "ocsplab/pipeline.hpp"
#include "support/audit_lab.hpp"
#include "support/der_properties.hpp"
#include "support/scenario.hpp"

using namespace ocsplab;
using namespace ocsplab::testing;
using namespace std::chrono_literals;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Stopwatch = std::chrono::steady_clock;

double seconds_since(Stopwatch::time_point t0) {
  return std::chrono::duration<double>(Stopwatch::now() - t0).count();
}

std::string fixed(double v, int digits = 1) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

Outcome der_canonicity() {
  const auto t0 = Stopwatch::now();
  const PropertyTally rt = der_round_trips(1, 10000);
  const FuzzTally fz = fuzz_decoders(2, 100000);
  const double took = seconds_since(t0);
  std::ostringstream d;
  d << rt.checked << " round trips, " << rt.failures.size() << " failures; " << fz.inputs << " fuzz inputs ("
    << fz.rejected << " rejected, " << fz.accepted << " accepted), " << fz.crashes.size() << " crashes; "
    << fixed(took) << " s";
  for (const auto& f : rt.failures) d << "\n    round trip: " << f;
  for (const auto& c : fz.crashes) d << "\n    crash: " << c;
  return {rt.checked >= 30000 && rt.failures.empty() && fz.inputs >= 100000 && fz.crashes.empty() && took < 60, d.str()};
}

Outcome predictor_exactness() {
  const HashSpec hash = HashSpec::toy(32);
  const PkiFixture fx = make_fixture(hash);
  const ResponderConfig cfg = ResponderConfig::for_fixture(fx, SignerRole::dedicated_ocsp, hash);
  auto db = std::make_shared<StatusDatabase>();
  for (std::uint64_t s = 0; s < 1000; ++s) db->register_certificate(SerialNumber(s), CertStatus::good());
  ManualClock clock(parse_instant("2026-03-02T09:00:00Z"));
  Responder responder(cfg, db, clock);
  InProcessTransport transport(responder, clock);
  const PredictionModel model = profile(transport, fx.ca.certificate, {SerialNumber(1), SerialNumber(2), SerialNumber(3)}, 12);

  std::mt19937_64 rng(42);
  const Instant base = truncate(clock.now() + 1h, Granularity::second);
  int equal = 0;
  for (int i = 0; i < 1000; ++i) {
    const SerialNumber serial(rng() % 1000);
    const Instant t = base + std::chrono::seconds(rng() % 86400);
    const Bytes request = recipe_request(model, serial, std::nullopt);
    const HandleResult h = responder.handle_at(request, t + Duration(static_cast<Duration::rep>(rng() % 1000)));
    if (h.aborted) continue;
    const OcspResponse outer = decode_ocsp_response(h.response);
    if (outer.status != ResponseStatus::successful) continue;
    equal += decode_basic_ocsp_response(outer.basic_response).tbs_raw == tbsresp(model, serial, t);
  }
  return {equal == 1000, std::to_string(equal) + "/1000 predicted tbs equal to served bytes"};
}

Outcome cardinality() {
  const Scenario sc;
  std::vector<SerialNumber> serials;
  for (std::uint64_t s = 0; s < 1000; ++s) serials.emplace_back(s);
  const Instant t0 = truncate(sc.attack_start + 10min, Granularity::second);
  const auto c0 = Stopwatch::now();
  const RecipeStream full = enumerate_recipes(sc.model, serials, t0, t0 + 86400s, 1s);
  const std::uint64_t count = full.count();
  const double took = seconds_since(c0);

  const std::vector<SerialNumber> ten(serials.begin(), serials.begin() + 10);
  const RecipeStream small = enumerate_recipes(sc.model, ten, t0, t0 + 864s, 1s);
  std::set<Bytes> digests;
  for (std::uint64_t i = 0; i < small.count(); ++i) digests.insert(digest(HashSpec::toy(32), small.tbs_at(i)));
  std::ostringstream d;
  d << "count " << count << " in " << fixed(took * 1000, 3) << " ms; materialized " << small.count() << " with "
    << digests.size() << " distinct TOY(32) digests";
  return {count == 86'400'000 && took < 10 && small.count() == 8640 && digests.size() == 8640, d.str()};
}

Outcome birthday_statistics() {
  const auto t0 = Stopwatch::now();
  const Scenario sc;
  const SourceGenerator gen1 = recipe_generator(*sc.stream);
  std::vector<std::uint64_t> evals;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SearchOptions so;
    so.seed = seed;
    so.budget = std::uint64_t{1} << 24;
    so.workers = workers();
    const SearchResult r = birthday_search(gen1, sc.fakes, HashSpec::toy(32), so);
    evals.push_back(r.candidate ? r.stats.evaluations : so.budget);
  }
  std::sort(evals.begin(), evals.end());
  const double median = (static_cast<double>(evals[9]) + static_cast<double>(evals[10])) / 2;
  const double bound = expected_trials(32);
  const double took = seconds_since(t0);
  std::ostringstream d;
  d << "median " << fixed(median, 0) << " evaluations = " << fixed(median / bound, 3) << " x " << fixed(bound, 0)
    << " (min " << evals.front() << ", max " << evals.back() << "; two-set theory median "
    << fixed(2 * std::sqrt(std::log(2.0) * 4294967296.0) / bound, 3) << " x); " << fixed(took) << " s";
  return {median >= 0.6 * bound && median <= 1.6 * bound && took < 120, d.str()};
}

Outcome end_to_end_forgery() {
  DemoOptions o;
  o.workers = workers();
  const DemoResult baseline = run_demo(o);
  o.kind = ContentKind::certificate;
  o.signer = SignerRole::ca;
  const DemoResult ca = run_demo(o);
  o.signer = SignerRole::dedicated_ocsp;
  const DemoResult dedicated = run_demo(o);

  auto strict_valid = [](const DemoResult& r) { return r.strict && r.strict->signature_valid; };
  auto strict_eligible = [](const DemoResult& r) { return r.strict && r.strict->policy_eligible; };
  const bool response_ok = baseline.forged && strict_valid(baseline) && baseline.log_well_formed;
  const bool ca_ok = strict_valid(ca) && strict_eligible(ca) && ca.log_well_formed;
  const bool dedicated_ok = strict_valid(dedicated) && !strict_eligible(dedicated) && dedicated.log_well_formed;
  std::ostringstream d;
  d << "response forgery " << (response_ok ? "verified" : "FAILED (" + baseline.failure + ")") << " after "
    << baseline.log_requests << " logged requests; certificate via CA signer valid="
    << strict_valid(ca) << " eligible=" << strict_eligible(ca) << "; via dedicated signer valid="
    << strict_valid(dedicated) << " eligible=" << strict_eligible(dedicated);
  return {response_ok && ca_ok && dedicated_ok, d.str()};
}

Outcome countermeasure_efficacy() {
  const Scenario sc;
  struct Row {
    Countermeasure c;
    int successes = 0;
    std::uint64_t max_requests = 0;
  };
  std::vector<Row> rows = {{Countermeasure::none}, {Countermeasure::ms_granularity}, {Countermeasure::random_bias},
                           {Countermeasure::responder_nonce}};
  for (Row& row : rows) {
    ResponderConfig cfg = sc.cfg;
    apply_countermeasure(cfg, row.c);
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
      const AttackOutcome out = sc.replay(cfg, seed);
      row.successes += out.success();
      row.max_requests = std::max(row.max_requests, out.requests_sent);
    }
  }
  std::ostringstream d;
  for (const Row& r : rows) {
    d << countermeasure_name(r.c) << " " << r.successes << "/1000";
    if (r.c == Countermeasure::none) d << " (max " << r.max_requests << " requests)";
    d << (&r == &rows.back() ? "" : "; ");
  }
  const bool pass = rows[0].successes > 950 && rows[0].max_requests <= 50 && rows[1].successes <= 10 &&
                    rows[2].successes <= 10 && rows[3].successes == 0;
  return {pass, d.str()};
}

Outcome audit_ground_truth() {
  const HashSpec hash = HashSpec::toy(32, true);
  int configs = 0, exact = 0, grade_ok = 0;
  std::ostringstream misses;
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
          const AuditReport r = ep.run();
          ++configs;
          const bool exposed = nonce == NoncePolicy::mirror || nx == NonexistentPolicy::unknown ||
                               nx == NonexistentPolicy::good;
          const bool fields = !r.partial && r.realtime == (mode == ResponderMode::realtime) &&
                              r.nonce_mirrored == (nonce == NoncePolicy::mirror) &&
                              r.nonexistent_behavior == expected_behavior(nx) &&
                              r.good_for_nonexistent == (nx == NonexistentPolicy::good) &&
                              r.ca_signed == (role == SignerRole::ca) && r.sha1_in_use == true &&
                              r.hash_algorithm == hash.name() && r.granularity == GranularityEstimate::second &&
                              r.scaling_exposed() == exposed;
          const RiskAssessment g = risk_grade(r);
          const bool critical_ok = !g.uncertain && (g.grade == RiskGrade::critical) == (role == SignerRole::ca && exposed);
          exact += fields;
          grade_ok += critical_ok;
          if (!fields || !critical_ok) {
            misses << "\n    mismatch: " << signer_role_name(role) << "/" << responder_mode_name(mode) << "/"
                   << nonce_policy_name(nonce) << "/" << nonexistent_policy_name(nx);
          }
        }
      }
    }
  }
  std::ostringstream d;
  d << exact << "/" << configs << " configs with every field exact (30 per signer role); critical grading correct for "
    << grade_ok << "/" << configs << misses.str();
  return {configs == 60 && exact == configs && grade_ok == configs, d.str()};
}

Outcome survey_reproduction() {
  const SurveySummary s = aggregate(load_reports(std::filesystem::path(OCSPLAB_FIXTURE_DIR) / "survey"));
  const std::vector<std::pair<std::string, double>> expected = {
      {"realtime", 75.7},        {"scaling_exposed", 74.3}, {"sha1_in_use", 57.1},          {"sha1_and_scaling", 41.4},
      {"ca_signed", 10.0},       {"ca_and_scaling", 1.4},   {"good_for_nonexistent", 31.4},
  };
  bool pass = s.total == 70;
  std::ostringstream d;
  d << s.total << " records:";
  for (const auto& [field, pct] : expected) {
    const double got = s.at(field).percent;
    pass = pass && std::abs(got - pct) < 1e-9;
    d << " " << field << "=" << fixed(got) << "%";
  }
  return {pass, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"DER canonicity", der_canonicity},
      {"predictor exactness", predictor_exactness},
      {"recipe cardinality", cardinality},
      {"birthday statistics", birthday_statistics},
      {"end-to-end forgery", end_to_end_forgery},
      {"countermeasure efficacy", countermeasure_efficacy},
      {"audit ground truth", audit_ground_truth},
      {"survey reproduction", survey_reproduction},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %zu %s %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
