#pragma once

#include <memory>
#include <string>
#include <utility>

#include "protodown/service.hpp"

namespace httplib {
class Server;
}

namespace protodown::server {

/// "host:port", ":port" or "port". Defaults to 127.0.0.1:8080.
std::pair<std::string, int> parse_addr(const std::string& addr);

int http_status(const Error& e);
service::json error_body(const Error& e);

/// REST front end over a SessionStore.
class Server {
 public:
  explicit Server(std::shared_ptr<service::SessionStore> store);
  ~Server();

  /// Binds and serves until stop(); returns false when binding fails.
  bool listen(const std::string& host, int port);
  /// Binds to a free port and returns it; serve with listen_after_bind().
  int bind_any(const std::string& host);
  bool listen_after_bind();
  void stop();
  bool running() const;

 private:
  std::shared_ptr<service::SessionStore> store_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace protodown::server
