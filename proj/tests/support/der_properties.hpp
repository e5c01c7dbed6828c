#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ocsplab/error.hpp"
#include "support/random_messages.hpp"

namespace ocsplab::testing {

struct PropertyTally {
  std::size_t checked = 0;
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    ++checked;
    if (!ok && failures.size() < 20) failures.push_back(what);
  }
};

/// decode(encode(x)) == x and encode(decode(b)) == b for `count` random
/// requests, responses and TBSCertificates each.
inline PropertyTally der_round_trips(std::uint64_t seed, std::size_t count) {
  MessageGen g(seed);
  PropertyTally t;
  for (std::size_t i = 0; i < count; ++i) {
    const std::string tag = " #" + std::to_string(i);
    try {
      const OcspRequest req = g.request();
      const Bytes rb = encode_ocsp_request(req);
      const OcspRequest back = decode_ocsp_request(rb);
      t.expect(back == req && encode_ocsp_request(back) == rb, "request" + tag);

      const BasicOcspResponse basic = g.basic_response();
      const Bytes bb = encode_basic_ocsp_response(basic);
      const Bytes outer = encode_ocsp_response(OcspResponse{ResponseStatus::successful, bb});
      const OcspResponse outer_back = decode_ocsp_response(outer);
      const BasicOcspResponse basic_back = decode_basic_ocsp_response(outer_back.basic_response);
      t.expect(outer_back.basic_response == bb && basic_back.tbs == basic.tbs &&
                   basic_back.tbs_raw == encode_tbs_response_data(basic.tbs) &&
                   basic_back.signature_algorithm == basic.signature_algorithm &&
                   basic_back.signature == basic.signature && basic_back.certs == basic.certs &&
                   encode_basic_ocsp_response(basic_back) == bb && encode_ocsp_response(outer_back) == outer,
               "response" + tag);

      const TbsCertificate cert = g.tbs_certificate();
      const Bytes cb = encode_tbs_certificate(cert);
      const TbsCertificate cert_back = decode_tbs_certificate(cb);
      t.expect(cert_back == cert && encode_tbs_certificate(cert_back) == cb, "tbsCertificate" + tag);
    } catch (const std::exception& e) {
      t.expect(false, std::string("exception") + tag + ": " + e.what());
    }
  }
  return t;
}

struct FuzzTally {
  std::size_t inputs = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  /// Escapes other than the library's own Error, e.g. std::bad_alloc.
  std::vector<std::string> crashes;
};

/// Feeds random and mutated byte strings to every decoder.
inline FuzzTally fuzz_decoders(std::uint64_t seed, std::size_t count) {
  MessageGen g(seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  const std::vector<std::function<void(ByteView)>> decoders = {
      [](ByteView b) { der::decode(b); },
      [](ByteView b) { decode_ocsp_request(b); },
      [](ByteView b) { decode_ocsp_response(b); },
      [](ByteView b) { decode_basic_ocsp_response(b); },
      [](ByteView b) { decode_tbs_certificate(b); },
      [](ByteView b) { decode_certificate(b); },
  };
  FuzzTally f;
  for (std::size_t i = 0; i < count; ++i) {
    Bytes input;
    switch (i % 4) {
      case 0: input = g.bytes(0, 96); break;
      case 1:
        input = g.bytes(1, 96);
        input[0] = 0x30;
        break;
      case 2: input = encode_ocsp_request(g.request()); break;
      default: input = encode_basic_ocsp_response(g.basic_response()); break;
    }
    if (i % 4 >= 2) {
      const std::size_t flips = 1 + rng() % 4;
      for (std::size_t k = 0; k < flips; ++k) input[rng() % input.size()] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
      if (rng() % 3 == 0) input.resize(rng() % input.size());
    }
    const auto& decode = decoders[i % decoders.size()];
    ++f.inputs;
    try {
      decode(input);
      ++f.accepted;
    } catch (const Error&) {
      ++f.rejected;
    } catch (const std::exception& e) {
      if (f.crashes.size() < 20) f.crashes.push_back(std::to_string(i) + ": " + e.what());
    }
  }
  return f;
}

}  // namespace ocsplab::testing
