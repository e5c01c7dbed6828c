#include <random>
#include <unordered_map>
#include <unordered_set>

#include "doctest.h"
#include "ocsplab/error.hpp"
#include "ocsplab/pki.hpp"
#include "support/vectors.hpp"

using namespace ocsplab;

namespace {
std::string vec(const char* key) { return ocsplab::testing::fixture_vector("hash.txt", key); }
}  // namespace

TEST_CASE("digest vectors") {
  CHECK(to_hex(digest(HashSpec::sha1(), as_view("abc"))) == vec("sha1_abc"));
  CHECK(to_hex(digest(HashSpec::toy(32), {})) == vec("toy32_empty"));
  CHECK(to_hex(digest(HashSpec::sha256(), {})) == vec("sha256_empty"));
  CHECK(digest(HashSpec::toy(48), as_view("x")).size() == 6);
  CHECK_THROWS_AS(HashSpec::toy(12), Error);
}

TEST_CASE("TOY(8) agrees exactly when the first SHA-256 byte agrees") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 2000; ++i) {
    const Bytes x = be_bytes(rng()), y = be_bytes(rng());
    CHECK((digest(HashSpec::toy(8), x) == digest(HashSpec::toy(8), y)) == (sha256(x)[0] == sha256(y)[0]));
  }
}

TEST_CASE("hash spec names and OIDs round-trip") {
  for (const auto& spec : {HashSpec::sha1(), HashSpec::sha256(), HashSpec::toy(8), HashSpec::toy(32, true)}) {
    CHECK(HashSpec::parse(spec.name()) == spec);
    CHECK(HashSpec::from_digest_oid(spec.digest_oid()) == spec);
    CHECK(HashSpec::from_signature_oid(spec.signature_oid()) == spec);
  }
  CHECK(HashSpec::toy(32, true).sha1_class());
  CHECK_FALSE(HashSpec::toy(32).sha1_class());
  CHECK(HashSpec::sha1().digest_oid() == "1.3.14.3.2.26");
}

TEST_CASE("mock signature vector and contract") {
  SignerIdentity id;
  id.secret = to_bytes(vec("mock_secret"));
  id.hash = HashSpec::toy(32);
  CHECK(to_hex(sign(id, from_hex(vec("mock_digest")))) == vec("mock_sig"));
  CHECK_THROWS_AS(sign(id, from_hex("e3b0c4")), Error);
}

TEST_CASE("sign and verify with fixtures") {
  const auto fx = make_fixture(HashSpec::toy(32));
  const Bytes tbs = to_bytes("tbs body");
  const Bytes sig = sign(fx.ca, digest(fx.ca.hash, tbs));
  CHECK(verify(fx.ca, tbs, sig, fx.ca.hash).valid);
  CHECK_FALSE(verify(fx.ocsp_signer, tbs, sig, fx.ca.hash).valid);

  // Bit-flipped pair whose TOY(32) digests differ (checked below).
  Bytes flipped = tbs;
  flipped[0] ^= 0x01;
  REQUIRE(digest(fx.ca.hash, flipped) != digest(fx.ca.hash, tbs));
  CHECK_FALSE(verify(fx.ca, flipped, sig, fx.ca.hash).valid);
}

TEST_CASE("colliding preimages share signatures") {
  const auto fx = make_fixture(HashSpec::toy(16));
  std::unordered_map<std::string, std::uint64_t> seen;
  for (std::uint64_t i = 0;; ++i) {
    const Bytes x = be_bytes(i);
    const std::string h = to_hex(digest(fx.ca.hash, x));
    if (auto it = seen.find(h); it != seen.end()) {
      const Bytes y = be_bytes(it->second);
      const Bytes sig_y = sign(fx.ca, digest(fx.ca.hash, y));
      CHECK(sign(fx.ca, digest(fx.ca.hash, x)) == sig_y);
      CHECK(verify(fx.ca, x, sig_y, fx.ca.hash).valid);
      break;
    }
    seen.emplace(h, i);
  }
}

TEST_CASE("TOY collision density") {
  for (int bits : {8, 16, 24, 32}) {
    const auto spec = HashSpec::toy(bits);
    const std::uint64_t n = 10ull << (bits / 2);
    int found_runs = 0;
    const int runs = bits <= 16 ? 50 : 5;
    for (int run = 0; run < runs; ++run) {
      std::unordered_set<std::string> seen;
      bool hit = false;
      for (std::uint64_t i = 0; i < n && !hit; ++i) {
        Bytes x = be_bytes(i);
        append(x, be_bytes(run));
        hit = !seen.insert(to_hex(digest(spec, x))).second;
      }
      found_runs += hit;
    }
    CHECK(found_runs == runs);
  }
}

TEST_CASE("policy eligibility") {
  const auto proper = make_fixture(HashSpec::sha256(), EkuProfile::proper);
  const auto missing = make_fixture(HashSpec::sha256(), EkuProfile::missing);
  using K = ContentKind;
  using P = ValidatorPolicy;
  CHECK(policy_eligible(proper.ca, K::certificate, P::strict_eku));
  CHECK(policy_eligible(proper.ca, K::ocsp_response, P::strict_eku));
  CHECK(policy_eligible(proper.ocsp_signer, K::ocsp_response, P::strict_eku));
  CHECK_FALSE(policy_eligible(proper.ocsp_signer, K::certificate, P::strict_eku));
  CHECK(policy_eligible(proper.ocsp_signer, K::certificate, P::relaxed));
  CHECK_FALSE(policy_eligible(missing.ocsp_signer, K::ocsp_response, P::strict_eku));

  const Bytes tbs = to_bytes("certificate body");
  const Bytes sig = sign(proper.ocsp_signer, digest(proper.ocsp_signer.hash, tbs));
  const auto v = verify(proper.ocsp_signer, tbs, sig, proper.ocsp_signer.hash, K::certificate);
  CHECK(v.valid);
  CHECK_FALSE(v.policy_eligible);
}

TEST_CASE("fixture certificates") {
  const auto fx = make_fixture(HashSpec::sha1(), EkuProfile::polluted);
  CHECK(fx.ca.certificate.tbs.issuer == fx.ca.certificate.tbs.subject);
  CHECK(fx.ocsp_signer.certificate.tbs.issuer == fx.ca.certificate.tbs.subject);
  CHECK(basic_constraints_ca(fx.ca.certificate.tbs.extensions) == true);
  CHECK(basic_constraints_ca(fx.ocsp_signer.certificate.tbs.extensions) == false);
  CHECK(fx.ocsp_signer.extended_key_usages() ==
        std::vector<std::string>{std::string(oid::kp_ocsp_signing), std::string(oid::kp_time_stamping)});
  CHECK(verify(fx.ca, fx.ocsp_signer.certificate.tbs_raw, fx.ocsp_signer.certificate.signature, fx.ca.hash,
               ContentKind::certificate)
            .valid);
  CHECK(make_fixture(HashSpec::sha1()).ca == make_fixture(HashSpec::sha1()).ca);

  const CertId id = make_cert_id(fx.ca.certificate, HashSpec::sha1(), SerialNumber(5));
  CHECK(id.issuer_name_hash.size() == 20);
  CHECK(id.issuer_key_hash == sha1(fx.ca.certificate.tbs.spki->public_key));
}

TEST_CASE("identity files round-trip") {
  const auto fx = make_fixture(HashSpec::toy(32, true));
  CHECK(parse_identity(serialize_identity(fx.ocsp_signer)) == fx.ocsp_signer);
  CHECK_THROWS_AS(parse_identity("role=ca\n"), Error);
}

TEST_CASE("shipped identity fixtures match the deterministic generator") {
  for (const char* h : {"toy32", "sha256"}) {
    CAPTURE(h);
    const PkiFixture fx = make_fixture(HashSpec::parse(h));
    const std::filesystem::path dir = std::filesystem::path(OCSPLAB_FIXTURE_DIR) / "identities";
    const SignerIdentity ca = load_identity(dir / (std::string(h) + "-ca.txt"));
    const SignerIdentity ocsp = load_identity(dir / (std::string(h) + "-ocsp.txt"));
    CHECK(serialize_identity(ca) == serialize_identity(fx.ca));
    CHECK(serialize_identity(ocsp) == serialize_identity(fx.ocsp_signer));
    CHECK(ocsp.certificate.tbs.issuer == ca.certificate.tbs.subject);
  }
}
