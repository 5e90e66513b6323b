#pragma once

#include <memory>
#include <string>
#include <thread>

#include "agrifield/gateway.hpp"

namespace httplib {
class Server;
}

namespace agrifield::gateway {

/// Installs the /api/v1 routes on `server`:
///   POST /api/v1/readings  -> 201 (object or array of readings)
///   GET  /api/v1/state     -> 200
///   GET  /api/v1/history?metric=&limit=  -> 200, 404 unknown metric
///   POST /api/v1/pump {mode, on}         -> 200
///   POST /api/v1/recommend {crop, soil?} -> 200, 404 unknown crop, 412 no NPK
/// Malformed bodies get 400 with {"error", "field"}.
void register_routes(httplib::Server& server, Gateway& gateway);

/// Owns an HTTP server thread bound to a local port.
class HttpService {
 public:
  explicit HttpService(Gateway& gateway);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds `host:port` (port 0 picks a free one) and starts serving.
  /// Returns the bound port; throws IoError when the port is taken.
  int start(const std::string& host, int port);
  void stop();

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace agrifield::gateway
