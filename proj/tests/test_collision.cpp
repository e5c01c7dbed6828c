#include <algorithm>
#include <chrono>
#include <numeric>

#include "doctest.h"
#include "ocsplab/collision.hpp"
#include "ocsplab/error.hpp"

using namespace ocsplab;
using namespace std::chrono_literals;

namespace {

Instant at(int y, unsigned mo, unsigned d, int h = 0) {
  using namespace std::chrono;
  return Instant(sys_days(year_month_day{year{y}, month{mo}, day{d}})) + hours(h);
}

PredictionModel lab_model() {
  static const PkiFixture fx = make_fixture(HashSpec::toy(32));
  PredictionModel m;
  m.granularity_estimate = GranularityEstimate::second;
  m.responder_id = ResponderId{ResponderId::Kind::by_key, responder_key_hash(fx.ocsp_signer.certificate)};
  m.cert_id_template = make_cert_id(fx.ca.certificate, HashSpec::sha1(), SerialNumber());
  m.validity_window_estimate = 1h;
  m.hash_spec_estimate = HashSpec::toy(32);
  return m;
}

std::vector<SerialNumber> serials(std::uint64_t n) {
  std::vector<SerialNumber> out;
  for (std::uint64_t s = 0; s < n; ++s) out.emplace_back(s);
  return out;
}

}  // namespace

TEST_CASE("expected_trials") {
  CHECK(expected_trials(32) == doctest::Approx(81920));
  CHECK(expected_trials(2) == doctest::Approx(2.5));
  CHECK(expected_trials(16) == doctest::Approx(320));
  CHECK_THROWS_AS(expected_trials(0), Error);
}

TEST_CASE("hash store") {
  HashStore store;
  CHECK(store.insert(42, 0, 7) == HashStore::Outcome::fresh);
  CHECK(store.insert(42, 0, 3) == HashStore::Outcome::same_side);
  CHECK(store.insert(42, 1, 9) == HashStore::Outcome::cross);
  const auto e = store.lookup(42);
  REQUIRE(e);
  CHECK(e->ordinal[0] == 3);
  CHECK(e->ordinal[1] == 9);
  CHECK_FALSE(store.lookup(43));
  CHECK(store.size() == 1);
  CHECK(store_key(Bytes{1, 2, 3, 4}) == 0x01020304u);
  CHECK(store_key(Bytes(12, 0xff)) == ~std::uint64_t{0});
}

TEST_CASE("hash store stays compact") {
  HashStore store;
  RandomSource rng(5);
  for (std::uint64_t i = 0; i < (1u << 17); ++i) store.insert(rng.next() >> 32, static_cast<int>(i & 1), i);
  CHECK(store.size() > 120000);
  CHECK(store.memory_bytes() < 16u * 1024 * 1024);
  RandomSource again(5);
  for (std::uint64_t i = 0; i < 1000; ++i) CHECK(store.lookup(again.next() >> 32));
}

TEST_CASE("TOY(8) random generators collide within 10,000 evaluations") {
  const auto g1 = random_generator("a"), g2 = random_generator("b");
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    SearchOptions o;
    o.budget = 10000;
    o.seed = seed;
    const auto r = birthday_search(g1, g2, HashSpec::toy(8), o);
    REQUIRE(r.candidate);
    CHECK(verify_candidate(*r.candidate, g1, g2));
    CHECK(r.stats.evaluations <= 10000);
  }
}

TEST_CASE("TOY(16) mean evaluations track the birthday bound") {
  const auto g1 = random_generator("left"), g2 = random_generator("right");
  double total = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    SearchOptions o;
    o.seed = seed;
    total += static_cast<double>(require_collision(g1, g2, HashSpec::toy(16), o).stats.evaluations);
  }
  const double mean = total / 100;
  CHECK(mean >= 0.6 * 320);
  CHECK(mean <= 1.6 * 320);
}

TEST_CASE("equal preimages are never reported") {
  const auto g = random_generator("same");
  SearchOptions o;
  o.h1_offset = 0;
  o.h2_offset = 1;
  o.budget = 1000;
  const auto r = birthday_search(g, g, HashSpec::toy(16), o);
  CHECK(r.stats.equal_preimage_rejections >= 1);
  if (r.candidate) {
    CHECK(r.candidate->h1_index != r.candidate->h2_index);
    CHECK(verify_candidate(*r.candidate, g, g));
  }

  const auto other = random_generator("other");
  const auto c = require_collision(g, other, HashSpec::toy(16));
  CollisionCandidate same = c;
  same.h2_generator = g.id;
  same.h2_index = same.h1_index;
  CHECK_FALSE(verify_candidate(same, g, g));
}

TEST_CASE("tampered candidates fail verification") {
  const auto g1 = random_generator("a"), g2 = random_generator("b");
  const auto c = require_collision(g1, g2, HashSpec::toy(16));
  CHECK(verify_candidate(c, g1, g2));
  CollisionCandidate bad = c;
  do {
    ++bad.h2_index;
  } while (digest(HashSpec::toy(16), g2.produce(bad.h2_index)) == c.hash);
  CHECK_FALSE(verify_candidate(bad, g1, g2));
  CHECK_FALSE(verify_candidate(c, g2, g1));
}

TEST_CASE("search is deterministic and worker-count invariant") {
  const auto g1 = random_generator("a"), g2 = random_generator("b");
  SearchOptions o;
  o.seed = 9;
  o.round_size = 512;
  const auto one = birthday_search(g1, g2, HashSpec::toy(24), o);
  CHECK(birthday_search(g1, g2, HashSpec::toy(24), o).candidate == one.candidate);
  for (unsigned w : {2u, 4u, 7u}) {
    o.workers = w;
    const auto many = birthday_search(g1, g2, HashSpec::toy(24), o);
    REQUIRE(many.candidate);
    CHECK(verify_candidate(*many.candidate, g1, g2));
    CHECK(many.candidate == one.candidate);
  }
  o.seed = 10;
  o.workers = 1;
  CHECK(birthday_search(g1, g2, HashSpec::toy(24), o).candidate != one.candidate);
}

TEST_CASE("budget and exhaustion") {
  const auto g1 = random_generator("a"), g2 = random_generator("b");
  SearchOptions o;
  o.budget = 1000;
  const auto r = birthday_search(g1, g2, HashSpec::toy(48), o);
  CHECK_FALSE(r.candidate);
  CHECK(r.stats.evaluations == 1000);
  CHECK(r.stats.h1_evaluations == 500);
  try {
    require_collision(g1, g2, HashSpec::toy(48), o);
    FAIL("expected BudgetExhausted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::budget_exhausted);
  }

  SourceGenerator small1 = g1, small2 = g2;
  small1.size = 10;
  small2.size = 30;
  const auto f = birthday_search(small1, small2, HashSpec::toy(48), o);
  CHECK(f.stats.evaluations == 40);
  CHECK(f.stats.h2_evaluations == 30);

  o.h1_per_block = 1;
  o.h2_per_block = 3;
  const auto skew = birthday_search(g1, g2, HashSpec::toy(48), o);
  CHECK(skew.stats.h1_evaluations == 250);
  CHECK(skew.stats.h2_evaluations == 750);

  o.budget = 1;
  CHECK_THROWS_AS(birthday_search(g1, g2, HashSpec::toy(8), o), Error);
}

TEST_CASE("recipes against fake responses under TOY(32)") {
  const PredictionModel m = lab_model();
  const Instant t0 = at(2016, 8, 1, 12);
  const auto stream = enumerate_recipes(m, serials(1000), t0, t0 + 86400s, 1s);
  const auto fake = FakeResponseSpec::from_model(m, SerialNumber(7), CertStatus::good(), t0, 7 * 24h);
  const auto g1 = recipe_generator(stream);
  const auto g2 = fake_response_generator(fake);

  SearchOptions o;
  o.seed = 3;
  o.workers = 4;
  auto c = require_collision(g1, g2, HashSpec::toy(32), o);
  attach_recipe(c, stream);
  CHECK(verify_candidate(c, g1, g2));
  REQUIRE(c.recipe);
  CHECK(c.recipe->predicted_hash == c.hash);
  CHECK(digest(HashSpec::toy(32), fake_response_source(fake, c.h2_index)) == c.hash);
  CHECK(c.stats.evaluations < (1u << 20));

  const CollisionCandidate back = parse_candidate(serialize_candidate(c));
  CHECK(back == c);
  CHECK(verify_candidate(back, g1, g2));
  CHECK_THROWS_AS(parse_candidate("format=nope\n"), Error);
}
