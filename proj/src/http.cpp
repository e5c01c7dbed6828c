#include "ocsplab/http.hpp"

#include <arpa/inet.h>
#include <dirent.h>
#include <netinet/in.h>
#include <sys/socket.h>

#include <charconv>

#include "httplib.h"
#include "ocsplab/error.hpp"

namespace ocsplab {

namespace {

int port_of(const sockaddr_storage& a) {
  if (a.ss_family == AF_INET) return ntohs(reinterpret_cast<const sockaddr_in&>(a).sin_port);
  if (a.ss_family == AF_INET6) return ntohs(reinterpret_cast<const sockaddr_in6&>(a).sin6_port);
  return -1;
}

/// httplib does not hand the socket to handlers, so the connection serving
/// `req` is located by its port pair and shut down in place.
void abort_connection(const httplib::Request& req) {
  DIR* dir = opendir("/proc/self/fd");
  if (!dir) return;
  while (dirent* entry = readdir(dir)) {
    int fd = -1;
    const std::string_view name = entry->d_name;
    if (std::from_chars(name.data(), name.data() + name.size(), fd).ec != std::errc()) continue;
    sockaddr_storage local{}, peer{};
    socklen_t llen = sizeof local, plen = sizeof peer;
    if (getsockname(fd, reinterpret_cast<sockaddr*>(&local), &llen) != 0) continue;
    if (getpeername(fd, reinterpret_cast<sockaddr*>(&peer), &plen) != 0) continue;
    if (port_of(local) == req.local_port && port_of(peer) == req.remote_port) {
      shutdown(fd, SHUT_RDWR);
      break;
    }
  }
  closedir(dir);
}

}  // namespace

HttpService::~HttpService() { stop(); }

std::string HttpService::url() const {
  const bool v6 = host_.find(':') != std::string::npos;
  return "http://" + (v6 ? "[" + host_ + "]" : host_) + ":" + std::to_string(port_) + "/";
}

void HttpService::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

void HttpService::wait() {
  if (thread_.joinable()) thread_.join();
}

std::unique_ptr<HttpService> serve_http(Responder& responder, const std::string& bind_address) {
  const auto colon = bind_address.rfind(':');
  if (colon == std::string::npos) throw Error(Errc::invalid_argument, "bind address must be host:port");
  std::string host = bind_address.substr(0, colon);
  if (host.size() > 1 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  int port = 0;
  const std::string port_text = bind_address.substr(colon + 1);
  auto [p, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || p != port_text.data() + port_text.size() || port < 0 || port > 65535) {
    throw Error(Errc::invalid_argument, "bad port in bind address");
  }

  std::unique_ptr<HttpService> svc(new HttpService());
  svc->server_ = std::make_unique<httplib::Server>();
  auto& server = *svc->server_;
  server.set_keep_alive_max_count(1);

  server.Post(".*", [&responder](const httplib::Request& req, httplib::Response& res) {
    const std::string type = req.get_header_value("Content-Type");
    if (!type.starts_with("application/ocsp-request")) {
      res.status = 415;
      return;
    }
    const ByteView body(reinterpret_cast<const std::uint8_t*>(req.body.data()), req.body.size());
    const HandleResult r = responder.handle(body);
    if (r.aborted) {
      abort_connection(req);
      res.status = 500;
      return;
    }
    res.status = r.http_status;
    res.set_content(std::string(r.response.begin(), r.response.end()), "application/ocsp-response");
  });
  auto not_allowed = [](const httplib::Request&, httplib::Response& res) {
    res.status = 405;
    res.set_header("Allow", "POST");
  };
  server.Get(".*", not_allowed);
  server.Put(".*", not_allowed);
  server.Delete(".*", not_allowed);

  if (port == 0) {
    port = server.bind_to_any_port(host);
    if (port < 0) throw Error(Errc::bind_failure, "cannot bind " + bind_address);
  } else if (!server.bind_to_port(host, port)) {
    throw Error(Errc::bind_failure, "cannot bind " + bind_address);
  }
  svc->host_ = host;
  svc->port_ = port;
  svc->thread_ = std::thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();
  return svc;
}

}  // namespace ocsplab
