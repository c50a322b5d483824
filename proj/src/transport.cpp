#include "protodown/transport.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace protodown::transport {

using nlohmann::json;

std::string fixture_key(const Request& request) {
  std::vector<std::string> parts;
  for (const auto& [name, value] : request.fields) parts.push_back(name + "=" + value);
  std::sort(parts.begin(), parts.end());
  std::string key = request.path;
  for (const auto& p : parts) key += "\x1f" + p;
  return key;
}

std::string url_encode(std::string_view s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 15];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::shared_ptr<FixtureTransport> FixtureTransport::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open fixture file: " + path, path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::shared_ptr<FixtureTransport> FixtureTransport::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid fixture JSON: ") + e.what());
  }
  auto out = std::make_shared<FixtureTransport>();
  for (const auto& item : doc.at("responses")) {
    Request req;
    req.path = item.at("path").get<std::string>();
    for (const auto& [name, value] : item.at("fields").items()) {
      req.fields.emplace_back(name, value.is_string() ? value.get<std::string>() : value.dump());
    }
    Entry e;
    e.status = item.value("status", 200);
    e.timeout = item.value("timeout", false);
    if (item.contains("body")) {
      const auto& body = item.at("body");
      e.body = body.is_string() ? body.get<std::string>() : body.dump();
    }
    out->entries_[fixture_key(req)] = std::move(e);
  }
  return out;
}

Response FixtureTransport::post(const Request& request) {
  std::lock_guard lock(mutex_);
  ++calls_;
  auto it = entries_.find(fixture_key(request));
  if (it == entries_.end()) {
    throw TransportError(TransportFailure::no_fixture, "no recorded response for " + request.path);
  }
  if (it->second.timeout) throw TransportError(TransportFailure::timeout, "request timed out: " + request.path);
  if (it->second.status < 200 || it->second.status >= 300) {
    throw TransportError(TransportFailure::http_status,
                         "HTTP " + std::to_string(it->second.status) + " from " + request.path, it->second.status);
  }
  return {it->second.status, it->second.body};
}

std::size_t FixtureTransport::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

// ---------------------------------------------------------------------------

HttpTransport::HttpTransport(std::string base_url, double timeout_s, std::chrono::milliseconds spacing)
    : base_url_(std::move(base_url)), timeout_s_(timeout_s), spacing_(spacing) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

Response HttpTransport::post_once(const Request& request) {
  {
    std::lock_guard lock(mutex_);
    const auto now = std::chrono::steady_clock::now();
    const auto ready = last_call_ + spacing_;
    if (now < ready) std::this_thread::sleep_for(ready - now);
    last_call_ = std::chrono::steady_clock::now();
  }

  // base may carry a path prefix: scheme://host[:port]/prefix
  std::string origin = base_url_;
  std::string prefix;
  if (auto scheme = origin.find("://"); scheme != std::string::npos) {
    if (auto slash = origin.find('/', scheme + 3); slash != std::string::npos) {
      prefix = origin.substr(slash);
      origin.resize(slash);
    }
  }
  httplib::Client client(origin);
  const auto sec = static_cast<time_t>(timeout_s_);
  const auto usec = static_cast<time_t>((timeout_s_ - static_cast<double>(sec)) * 1e6);
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);
  client.set_follow_location(true);

  std::string body;
  std::string content_type;
  if (request.encoding == BodyEncoding::form) {
    for (const auto& [name, value] : request.fields) {
      if (!body.empty()) body += '&';
      body += url_encode(name) + '=' + url_encode(value);
    }
    content_type = "application/x-www-form-urlencoded";
  } else {
    json obj = json::object();
    for (const auto& [name, value] : request.fields) {
      if (std::find(request.list_fields.begin(), request.list_fields.end(), name) != request.list_fields.end()) {
        json list = json::array();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item)) {
          if (!item.empty()) list.push_back(item);
        }
        obj[name] = list;
      } else if (std::find(request.number_fields.begin(), request.number_fields.end(), name) !=
                 request.number_fields.end()) {
        obj[name] = json::parse(value);
      } else {
        obj[name] = value;
      }
    }
    body = obj.dump();
    content_type = "application/json";
  }

  auto res = client.Post(prefix + request.path, body, content_type);
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::Write || err == httplib::Error::ConnectionTimeout) {
      throw TransportError(TransportFailure::timeout, "request timed out: " + request.path);
    }
    throw TransportError(TransportFailure::connection, "connection failed: " + httplib::to_string(err));
  }
  if (res->status < 200 || res->status >= 300) {
    throw TransportError(TransportFailure::http_status, "HTTP " + std::to_string(res->status) + " from " + request.path,
                         res->status);
  }
  return {res->status, res->body};
}

Response HttpTransport::post(const Request& request) {
  try {
    return post_once(request);
  } catch (const TransportError& e) {
    const bool transient = e.failure() == TransportFailure::connection ||
                           (e.failure() == TransportFailure::http_status && (e.status() == 429 || e.status() >= 500));
    if (!transient) throw;
  }
  return post_once(request);
}

}  // namespace protodown::transport
