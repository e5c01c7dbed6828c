#pragma once

#include <memory>
#include <string>
#include <thread>

#include "ocsplab/responder.hpp"

namespace httplib {
class Server;
}

namespace ocsplab {

/// Serves a Responder over HTTP POST (application/ocsp-request in,
/// application/ocsp-response out) on a background thread.
class HttpService {
 public:
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  int port() const { return port_; }
  const std::string& host() const { return host_; }
  std::string url() const;
  void stop();
  /// Blocks until stop() is called from another thread.
  void wait();

 private:
  friend std::unique_ptr<HttpService> serve_http(Responder& responder, const std::string& bind_address);
  HttpService() = default;

  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_;
  int port_ = 0;
};

/// bind_address is "host:port"; port 0 picks a free port. Throws BindFailure.
std::unique_ptr<HttpService> serve_http(Responder& responder, const std::string& bind_address);

}  // namespace ocsplab
