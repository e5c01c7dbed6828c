#include <chrono>
#include <set>

#include "doctest.h"
#include "httplib.h"
#include "ocsplab/error.hpp"
#include "ocsplab/http.hpp"
#include "ocsplab/responder.hpp"
#include "ocsplab/transport.hpp"

using namespace ocsplab;
using namespace std::chrono_literals;

namespace {

Instant at(int y, unsigned mo, unsigned d, int h = 0, int mi = 0, int s = 0, int ms = 0) {
  using namespace std::chrono;
  return Instant(sys_days(year_month_day{year{y}, month{mo}, day{d}})) + hours(h) + minutes(mi) + seconds(s) +
         milliseconds(ms);
}

struct Lab {
  PkiFixture fx = make_fixture(HashSpec::toy(32));
  ResponderConfig cfg = ResponderConfig::for_fixture(fx, SignerRole::dedicated_ocsp, HashSpec::toy(32));
  ManualClock clock{at(2016, 8, 1, 12)};
  std::shared_ptr<StatusDatabase> db = std::make_shared<StatusDatabase>();

  Lab() {
    for (std::uint64_t s = 0; s < 10; ++s) db->register_certificate(SerialNumber(s), CertStatus::good());
  }

  Bytes request(std::uint64_t serial, std::optional<Bytes> nonce = std::nullopt) const {
    return encode_ocsp_request(make_status_request(fx.ca.certificate, HashSpec::sha1(), SerialNumber(serial), nonce));
  }
};

BasicOcspResponse basic_of(const HandleResult& r) {
  REQUIRE_FALSE(r.aborted);
  const OcspResponse outer = decode_ocsp_response(r.response);
  REQUIRE(outer.status == ResponseStatus::successful);
  return decode_basic_ocsp_response(outer.basic_response);
}

}  // namespace

TEST_CASE("compute_time_fields examples") {
  Lab lab;
  auto cfg = lab.cfg;
  auto t = compute_time_fields(cfg, at(2016, 8, 1, 12, 0, 0, 400));
  CHECK(t.this_update.instant == at(2016, 8, 1, 12));
  CHECK(t.produced_at.instant == at(2016, 8, 1, 12));
  CHECK(t.next_update.instant == at(2016, 8, 1, 13));

  cfg.mode = ResponderMode::lightweight;
  t = compute_time_fields(cfg, at(2016, 8, 1, 12));
  CHECK(t.next_update.instant - t.this_update.instant == Duration(7 * 24h));

  cfg.mode = ResponderMode::realtime;
  cfg.clock_bias = 3s;
  CHECK(compute_time_fields(cfg, at(2016, 8, 1, 12)).this_update.instant == at(2016, 8, 1, 12, 0, 3));
}

TEST_CASE("random bias keeps the field ordering") {
  Lab lab;
  lab.cfg.random_bias_max = 10s;
  RandomSource rng(3);
  std::set<Instant> seen;
  for (int i = 0; i < 500; ++i) {
    const Instant now = at(2016, 8, 1, 12);
    const auto t = compute_time_fields(lab.cfg, now, &rng);
    CHECK(t.this_update.instant <= t.produced_at.instant);
    CHECK(t.produced_at.instant <= now);
    CHECK(t.produced_at.instant >= now - 10s);
    CHECK(t.next_update.instant >= now + 1h);
    CHECK(t.next_update.instant <= now + 1h + 10s);
    seen.insert(t.this_update.instant);
  }
  CHECK(seen.size() > 400);
}

TEST_CASE("status database") {
  StatusDatabase db;
  db.register_certificate(SerialNumber(5), CertStatus::good());
  CHECK(db.lookup(SerialNumber(5)) == CertStatus::good());
  CHECK_FALSE(db.lookup(SerialNumber(6)).has_value());
  try {
    db.register_certificate(SerialNumber(5), CertStatus::unknown());
    FAIL("duplicate accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::duplicate_serial);
  }
  StatusDatabase big;
  for (std::uint64_t s = 0; s < 1000; ++s) big.register_certificate(SerialNumber(s), CertStatus::good());
  CHECK(big.size() == 1000);
}

TEST_CASE("known serial yields a verifiable good response") {
  Lab lab;
  Responder responder(lab.cfg, lab.db, lab.clock);
  const auto basic = basic_of(responder.handle(lab.request(3)));
  REQUIRE(basic.tbs.responses.size() == 1);
  CHECK(basic.tbs.responses[0].status.kind == CertStatusKind::good);
  CHECK(basic.tbs.responder_id.value == responder_key_hash(lab.fx.ocsp_signer.certificate));
  CHECK(verify(lab.fx.ocsp_signer, basic.tbs_raw, basic.signature, lab.cfg.hash_spec).valid);
  CHECK(basic.certs == std::vector<Bytes>{lab.fx.ocsp_signer.certificate_der});
  CHECK(responder.log().size() == 1);
}

TEST_CASE("non-existent serial policies") {
  Lab lab;
  auto run = [&](NonexistentPolicy p) {
    lab.cfg.nonexistent_serial_policy = p;
    Responder responder(lab.cfg, lab.db, lab.clock);
    return responder.handle(lab.request(12345));
  };
  CHECK(basic_of(run(NonexistentPolicy::good)).tbs.responses[0].status.kind == CertStatusKind::good);
  CHECK(basic_of(run(NonexistentPolicy::unknown)).tbs.responses[0].status.kind == CertStatusKind::unknown);
  CHECK(run(NonexistentPolicy::close_connection).aborted);
  CHECK(run(NonexistentPolicy::close_connection).response.empty());
  CHECK(decode_ocsp_response(run(NonexistentPolicy::unauthorized).response).status == ResponseStatus::unauthorized);

  lab.cfg.nonexistent_serial_policy = NonexistentPolicy::randomized_times;
  Responder responder(lab.cfg, lab.db, lab.clock);
  const auto a = basic_of(responder.handle(lab.request(12345)));
  const auto b = basic_of(responder.handle(lab.request(12345)));
  CHECK(a.tbs.responses[0].status.kind == CertStatusKind::unknown);
  CHECK(a.tbs.responses[0].this_update != b.tbs.responses[0].this_update);
  CHECK(a.tbs.produced_at != b.tbs.produced_at);
}

TEST_CASE("certificates of another issuer are unknown") {
  Lab lab;
  Responder responder(lab.cfg, lab.db, lab.clock);
  const auto other = make_fixture(HashSpec::toy(32), EkuProfile::proper, "other");
  const Bytes req = encode_ocsp_request(make_status_request(other.ca.certificate, HashSpec::sha1(), SerialNumber(3)));
  CHECK(basic_of(responder.handle(req)).tbs.responses[0].status.kind == CertStatusKind::unknown);
}

TEST_CASE("nonce policies") {
  Lab lab;
  const Bytes nonce = from_hex("00112233445566778899aabbccddeeff");
  {
    Responder responder(lab.cfg, lab.db, lab.clock);
    const auto basic = basic_of(responder.handle(lab.request(1, nonce)));
    CHECK(find_nonce(basic.tbs.extensions) == nonce);
    CHECK(basic_of(responder.handle(lab.request(1))).tbs.extensions.empty());
  }
  {
    lab.cfg.nonce_policy = NoncePolicy::ignore;
    Responder responder(lab.cfg, lab.db, lab.clock);
    CHECK(basic_of(responder.handle(lab.request(1, nonce))).tbs.extensions.empty());
  }
  {
    lab.cfg.nonce_policy = NoncePolicy::responder_side;
    lab.cfg.seed = 99;
    Responder responder(lab.cfg, lab.db, lab.clock);
    const auto a = basic_of(responder.handle(lab.request(1)));
    const auto b = basic_of(responder.handle(lab.request(1)));
    CHECK(find_nonce(a.tbs.extensions)->size() == 16);
    CHECK(a.tbs_raw != b.tbs_raw);
  }
}

TEST_CASE("millisecond granularity separates close requests") {
  Lab lab;
  lab.cfg.granularity = Granularity::millisecond;
  Responder responder(lab.cfg, lab.db, lab.clock);
  lab.clock.advance(123ms);
  const auto a = basic_of(responder.handle(lab.request(1)));
  lab.clock.advance(2ms);
  const auto b = basic_of(responder.handle(lab.request(1)));
  CHECK(a.tbs.produced_at != b.tbs.produced_at);
  CHECK(a.tbs.produced_at.granularity == Granularity::millisecond);
}

TEST_CASE("second granularity emits whole seconds") {
  Lab lab;
  Responder responder(lab.cfg, lab.db, lab.clock);
  lab.clock.advance(777ms);
  const auto basic = basic_of(responder.handle(lab.request(2)));
  CHECK(basic.tbs.produced_at.instant == at(2016, 8, 1, 12));
  CHECK(basic.tbs.responses[0].next_update->instant == at(2016, 8, 1, 13));
}

TEST_CASE("lightweight responses stay frozen within a cache period") {
  Lab lab;
  lab.cfg.mode = ResponderMode::lightweight;
  lab.cfg.lightweight_cache_period = 1h;
  Responder responder(lab.cfg, lab.db, lab.clock);
  const auto a = basic_of(responder.handle(lab.request(1)));
  lab.clock.advance(30min);
  const auto b = basic_of(responder.handle(lab.request(1)));
  lab.clock.advance(31min);
  const auto c = basic_of(responder.handle(lab.request(1)));
  CHECK(a.tbs_raw == b.tbs_raw);
  CHECK(c.tbs.produced_at.instant == a.tbs.produced_at.instant + 61min);
}

TEST_CASE("malformed requests get malformedRequest") {
  Lab lab;
  Responder responder(lab.cfg, lab.db, lab.clock);
  const auto r = responder.handle(from_hex("3003020101"));
  CHECK(decode_ocsp_response(r.response).status == ResponseStatus::malformed_request);
  CHECK(decode_ocsp_response(responder.handle(from_hex("300430023000")).response).status ==
        ResponseStatus::malformed_request);
}

TEST_CASE("in-process transport simulates latency") {
  Lab lab;
  Responder responder(lab.cfg, lab.db, lab.clock);
  InProcessTransport transport(responder, lab.clock, {25ms, 0ms, 1});
  const auto ex = transport.exchange(lab.request(1));
  CHECK(ex.received_at - ex.sent_at == 50ms);
  CHECK(responder.log().snapshot()[0].arrival == ex.sent_at + 25ms);
}

TEST_CASE("setup files") {
  const auto rec = KvRecord::parse(
      "# lab responder\nmode=lightweight\ngranularity=ms\nrandom_bias_max=10s\nnonce_policy=responder_side\n"
      "nonexistent_serial_policy=good\nsigner=ca\nhash=toy32-sha1\nclock_bias=-2s\nrate_limit=10/5s\n"
      "serials=0-9,20\nrevoked=3@2016-01-01T00:00:00Z\n");
  const auto setup = parse_responder_setup(rec);
  CHECK(setup.config.mode == ResponderMode::lightweight);
  CHECK(setup.config.granularity == Granularity::millisecond);
  CHECK(setup.config.random_bias_max == 10s);
  CHECK(setup.config.effective_window() == Duration(7 * 24h));
  CHECK(setup.config.signer.role == SignerRole::ca);
  CHECK(setup.config.hash_spec == HashSpec::toy(32, true));
  CHECK(setup.config.clock_bias == -2s);
  CHECK(setup.config.rate_limit->max_identical == 10);
  const auto db = setup.make_database();
  CHECK(db->size() == 11);
  CHECK(db->lookup(SerialNumber(3))->kind == CertStatusKind::revoked);
  CHECK_THROWS_AS(parse_responder_setup(KvRecord::parse("colour=blue\n")), Error);
}

TEST_CASE("HTTP service") {
  Lab lab;
  SystemClock clock;
  lab.cfg.rate_limit = RateLimit{10, 5s};
  lab.cfg.nonexistent_serial_policy = NonexistentPolicy::close_connection;
  Responder responder(lab.cfg, lab.db, clock);
  auto svc = serve_http(responder, "127.0.0.1:0");
  HttpTransport transport(svc->url(), clock);

  const auto ok = transport.exchange(lab.request(1));
  CHECK(ok.http_status == 200);
  CHECK(basic_of(HandleResult{false, 200, ok.response}).tbs.responses[0].status.kind == CertStatusKind::good);

  int rejected = 0;
  for (int i = 0; i < 50; ++i) {
    const auto ex = transport.exchange(lab.request(2));
    if (ex.http_status == 429) {
      ++rejected;
      CHECK(decode_ocsp_response(ex.response).status == ResponseStatus::try_later);
    }
  }
  CHECK(rejected >= 40);

  CHECK(transport.exchange(lab.request(4242)).aborted);

  httplib::Client raw("127.0.0.1", svc->port());
  auto get = raw.Get("/");
  REQUIRE(get);
  CHECK(get->status == 405);
  auto wrong_type = raw.Post("/", "0", "text/plain");
  REQUIRE(wrong_type);
  CHECK(wrong_type->status == 415);
  svc->stop();
  CHECK_THROWS_AS(transport.exchange(lab.request(1)), Error);
}
