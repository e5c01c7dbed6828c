#include "ocsplab/transport.hpp"

#include <charconv>

#include "httplib.h"
#include "ocsplab/error.hpp"

namespace ocsplab {

InProcessTransport::InProcessTransport(Responder& responder, Clock& clock, LatencyModel latency)
    : responder_(responder), clock_(clock), latency_(latency), rng_(latency.seed) {}

Duration InProcessTransport::draw_delay() {
  if (latency_.jitter <= Duration::zero()) return std::max(latency_.base, Duration::zero());
  std::lock_guard lock(mu_);
  std::normal_distribution<double> jitter(0.0, static_cast<double>(latency_.jitter.count()));
  const auto d = latency_.base.count() + static_cast<Duration::rep>(std::llround(jitter(rng_)));
  return Duration(std::max<Duration::rep>(d, 0));
}

Exchange InProcessTransport::exchange(ByteView request) {
  Exchange ex;
  ex.sent_at = clock_.now();
  const Instant arrival = ex.sent_at + draw_delay();
  clock_.sleep_until(arrival);
  const HandleResult r = responder_.handle_at(request, arrival);
  clock_.sleep_until(arrival + draw_delay());
  ex.received_at = clock_.now();
  ex.aborted = r.aborted;
  ex.http_status = r.http_status;
  ex.response = r.response;
  return ex;
}

Url parse_url(std::string_view url) {
  Url out;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) throw Error(Errc::invalid_argument, "URL needs a scheme: " + std::string(url));
  out.scheme = std::string(url.substr(0, scheme_end));
  if (out.scheme != "http") throw Error(Errc::invalid_argument, "only http:// endpoints are supported");
  std::string_view rest = url.substr(scheme_end + 3);
  const auto slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  out.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  std::string_view port_text;
  if (authority.starts_with('[')) {
    const auto close = authority.find(']');
    if (close == std::string_view::npos) throw Error(Errc::invalid_argument, "bad IPv6 literal");
    out.host = std::string(authority.substr(1, close - 1));
    if (close + 1 < authority.size() && authority[close + 1] == ':') port_text = authority.substr(close + 2);
  } else {
    const auto colon = authority.rfind(':');
    out.host = std::string(authority.substr(0, colon));
    if (colon != std::string_view::npos) port_text = authority.substr(colon + 1);
  }
  if (out.host.empty()) throw Error(Errc::invalid_argument, "URL has no host");
  if (!port_text.empty()) {
    auto [p, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), out.port);
    if (ec != std::errc() || p != port_text.data() + port_text.size() || out.port < 1 || out.port > 65535) {
      throw Error(Errc::invalid_argument, "bad port in URL");
    }
  }
  return out;
}

bool is_loopback_host(std::string_view host) {
  return host == "localhost" || host == "::1" || host.starts_with("127.");
}

HttpTransport::HttpTransport(const std::string& url, Clock& clock, Duration timeout)
    : url_(url), parsed_(parse_url(url)), clock_(clock), timeout_(timeout) {}

Exchange HttpTransport::exchange(ByteView request) {
  httplib::Client client(parsed_.host, parsed_.port);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_).count();
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_).count() % 1'000'000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  Exchange ex;
  ex.sent_at = clock_.now();
  auto res = client.Post(parsed_.path, reinterpret_cast<const char*>(request.data()), request.size(),
                         "application/ocsp-request");
  ex.received_at = clock_.now();
  if (!res) {
    if (res.error() == httplib::Error::Connection) {
      throw Error(Errc::unreachable, "cannot connect to " + url_ + ": " + httplib::to_string(res.error()));
    }
    ex.aborted = true;
    return ex;
  }
  ex.http_status = res->status;
  ex.response.assign(res->body.begin(), res->body.end());
  return ex;
}

}  // namespace ocsplab
