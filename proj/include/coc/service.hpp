#pragma once

#include <memory>
#include <string>
#include <thread>

#include <json.hpp>

#include "coc/session.hpp"

namespace httplib {
class Server;
}

namespace coc {

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;

  nlohmann::json json() const { return nlohmann::json::parse(body); }
};

// Transport-independent request handling; the HTTP server and the tests
// both go through `handle`.
class Api {
 public:
  explicit Api(Session& session) : session_(session) {}

  ApiResponse handle(const std::string& method, const std::string& path, const std::string& body,
                     const std::string& content_type = "application/json") const;

 private:
  nlohmann::json route(const std::string& method, const std::string& path, const std::string& body,
                       const std::string& content_type, ApiResponse& raw) const;

  Session& session_;
};

class ApiServer {
 public:
  explicit ApiServer(Session& session);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // port 0 picks a free port; returns the bound port.
  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void start();   // listen on a background thread
  void stop();

 private:
  Api api_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

// COC_PORT, or 8080 when unset.
int port_from_env();

}  // namespace coc
