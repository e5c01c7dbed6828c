#pragma once

#include <memory>
#include <mutex>
#include <random>
#include <string>

#include "ocsplab/clock.hpp"
#include "ocsplab/responder.hpp"

namespace ocsplab {

/// One request/response round trip as seen by the client.
struct Exchange {
  bool aborted = false;  // connection closed without a response
  int http_status = 0;
  Bytes response;        // OCSPResponse DER
  Instant sent_at{};
  Instant received_at{};
};

class Transport {
 public:
  virtual ~Transport() = default;
  /// Throws Unreachable when no connection can be made at all.
  virtual Exchange exchange(ByteView request) = 0;
  /// The client-side clock used to timestamp exchanges and schedule sends.
  virtual Clock& clock() = 0;
  virtual std::string endpoint() const = 0;
};

/// One-way delay = base + N(0, jitter), clamped at zero, drawn per direction.
struct LatencyModel {
  Duration base{0};
  Duration jitter{0};
  std::uint64_t seed = 0;
};

/// Calls Responder::handle_at directly. Latency is simulated by advancing the
/// shared clock, so with a ManualClock the whole exchange is deterministic.
class InProcessTransport final : public Transport {
 public:
  InProcessTransport(Responder& responder, Clock& clock, LatencyModel latency = {});

  Exchange exchange(ByteView request) override;
  Clock& clock() override { return clock_; }
  std::string endpoint() const override { return "inprocess:"; }

 private:
  Duration draw_delay();

  Responder& responder_;
  Clock& clock_;
  LatencyModel latency_;
  std::mutex mu_;
  std::mt19937_64 rng_;
};

struct Url {
  std::string scheme;
  std::string host;
  int port = 80;
  std::string path = "/";
};

/// Parses http://host[:port][/path]. Throws InvalidArgument otherwise.
Url parse_url(std::string_view url);
bool is_loopback_host(std::string_view host);

class HttpTransport final : public Transport {
 public:
  HttpTransport(const std::string& url, Clock& clock, Duration timeout = std::chrono::seconds(5));

  Exchange exchange(ByteView request) override;
  Clock& clock() override { return clock_; }
  std::string endpoint() const override { return url_; }

 private:
  std::string url_;
  Url parsed_;
  Clock& clock_;
  Duration timeout_;
};

}  // namespace ocsplab
