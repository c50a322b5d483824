#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "protodown/error.hpp"

namespace protodown::transport {

enum class BodyEncoding { form, json };

/// POST with named fields. Form requests send the fields url-encoded; JSON
/// requests send them as one object (list-valued fields split on '\n').
struct Request {
  std::string path;
  std::vector<std::pair<std::string, std::string>> fields;
  BodyEncoding encoding = BodyEncoding::form;
  std::vector<std::string> list_fields;    // JSON only
  std::vector<std::string> number_fields;  // JSON only
};

struct Response {
  int status = 200;
  std::string body;
};

/// Fixture key: path plus the sorted "name=value" field list.
std::string fixture_key(const Request& request);

class Transport {
 public:
  virtual ~Transport() = default;
  /// Returns a 2xx response or throws TransportError.
  virtual Response post(const Request& request) = 0;
};

/// Replays recorded responses from a JSON fixture:
/// {"responses": [{"path": ..., "fields": {...}, "status": 200,
///                 "body": <string or JSON>, "timeout": false}]}
class FixtureTransport : public Transport {
 public:
  static std::shared_ptr<FixtureTransport> from_file(const std::string& path);
  static std::shared_ptr<FixtureTransport> from_json_text(const std::string& text);

  Response post(const Request& request) override;
  std::size_t calls() const;

 private:
  struct Entry {
    int status = 200;
    std::string body;
    bool timeout = false;
  };
  std::map<std::string, Entry> entries_;
  mutable std::mutex mutex_;
  std::size_t calls_ = 0;
};

/// HTTP(S) client with a request timeout, >= 1 s spacing between calls and
/// one retry on transient failure (connection error, 429, 5xx).
class HttpTransport : public Transport {
 public:
  HttpTransport(std::string base_url, double timeout_s = 30.0, std::chrono::milliseconds spacing = std::chrono::seconds(1));
  Response post(const Request& request) override;

 private:
  Response post_once(const Request& request);

  std::string base_url_;
  double timeout_s_;
  std::chrono::milliseconds spacing_;
  std::mutex mutex_;
  std::chrono::steady_clock::time_point last_call_{};
};

std::string url_encode(std::string_view s);

}  // namespace protodown::transport
