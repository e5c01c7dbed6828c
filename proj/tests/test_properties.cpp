#include "doctest.h"
#include "support/der_properties.hpp"

using namespace ocsplab;
using namespace ocsplab::testing;

TEST_CASE("random messages round-trip byte-exactly") {
  const PropertyTally t = der_round_trips(2024, 1500);
  for (const auto& f : t.failures) MESSAGE(f);
  CHECK(t.failures.empty());
  CHECK(t.checked == 4500);
}

TEST_CASE("decoders reject garbage without escaping") {
  const FuzzTally f = fuzz_decoders(77, 20000);
  for (const auto& c : f.crashes) MESSAGE(c);
  CHECK(f.crashes.empty());
  CHECK(f.rejected > 0);
  CHECK(f.accepted > 0);
}
