#include "protodown/server.hpp"

#include <httplib.h>

namespace protodown::server {

using service::json;

std::pair<std::string, int> parse_addr(const std::string& addr) {
  std::string host = "127.0.0.1";
  std::string port = addr;
  if (auto colon = addr.rfind(':'); colon != std::string::npos) {
    if (colon > 0) host = addr.substr(0, colon);
    port = addr.substr(colon + 1);
  }
  if (port.empty()) return {host, 8080};
  try {
    std::size_t used = 0;
    const int p = std::stoi(port, &used);
    if (used != port.size() || p < 0 || p > 65535) throw std::out_of_range("port");
    return {host, p};
  } catch (const std::exception&) {
    throw ConfigError("invalid listen address: " + addr, addr);
  }
}

int http_status(const Error& e) {
  switch (e.code()) {
    case ErrorCode::not_found: return 404;
    case ErrorCode::state: return 409;
    case ErrorCode::unsupported: return 400;
    case ErrorCode::format:
    case ErrorCode::syntax:
    case ErrorCode::validation:
    case ErrorCode::config:
    case ErrorCode::design:
    case ErrorCode::alignment: return 400;
    case ErrorCode::precondition:
    case ErrorCode::degenerate_data:
    case ErrorCode::normalization:
    case ErrorCode::imputation: return 422;
    case ErrorCode::transport: {
      const auto* t = dynamic_cast<const TransportError*>(&e);
      return t && t->failure() == TransportFailure::timeout ? 504 : 502;
    }
  }
  return 500;
}

json error_body(const Error& e) { return {{"code", to_string(e.code())}, {"message", e.what()}, {"detail", e.detail()}}; }

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_json(res, http_status(e), error_body(e));
    } catch (const std::exception& e) {
      send_json(res, 500, {{"code", "internal"}, {"message", e.what()}, {"detail", ""}});
    }
  };
}

service::Query query_of(const httplib::Request& req, std::initializer_list<const char*> skip = {}) {
  service::Query q;
  for (const auto& [k, v] : req.params) {
    bool skipped = false;
    for (const char* s : skip) skipped = skipped || k == s;
    if (!skipped) q[k] = v;
  }
  return q;
}

}  // namespace

Server::Server(std::shared_ptr<service::SessionStore> store)
    : store_(std::move(store)), http_(std::make_unique<httplib::Server>()) {
  auto& srv = *http_;
  auto store_ref = store_;
  srv.set_payload_max_length(store_->options().max_upload_bytes + (std::size_t(1) << 20));

  srv.Get("/health", guarded([](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, {{"status", "ok"}, {"engine_version", service::engine_version()}});
          }));

  srv.Post("/sessions", guarded([store_ref](const httplib::Request& req, httplib::Response& res) {
             if (!req.is_multipart_form_data()) throw ValidationError("expected multipart/form-data upload");
             if (!req.has_file("file")) throw ValidationError("missing 'file' part", "file");
             service::Inputs in;
             in.main = req.get_file_value("file").content;
             if (req.has_file("report")) in.report = req.get_file_value("report").content;
             if (req.has_file("config")) {
               in.config = serialize::ingest_config_from(serialize::parse(req.get_file_value("config").content));
             }
             auto s = store_ref->create(std::move(in));
             send_json(res, 201, {{"session_id", s->id()}, {"summary", s->summary()}});
           }));

  srv.Get("/sessions/:id", guarded([store_ref](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, store_ref->get(req.path_params.at("id"))->describe());
          }));

  srv.Put("/sessions/:id/:section", guarded([store_ref](const httplib::Request& req, httplib::Response& res) {
            auto s = store_ref->get(req.path_params.at("id"));
            const auto section = service::parse_section(req.path_params.at("section"));
            const auto body = serialize::parse(req.body.empty() ? "{}" : req.body);
            send_json(res, 200, s->update(section, body).to_json());
          }));

  srv.Get("/sessions/:id/payload/:artifact", guarded([store_ref](const httplib::Request& req, httplib::Response& res) {
            auto s = store_ref->get(req.path_params.at("id"));
            res.status = 200;
            res.set_content(s->payload(req.path_params.at("artifact"), query_of(req)), "application/json");
          }));

  srv.Get("/sessions/:id/export/:artifact", guarded([store_ref](const httplib::Request& req, httplib::Response& res) {
            auto s = store_ref->get(req.path_params.at("id"));
            if (!req.has_param("format")) throw ValidationError("missing 'format' query parameter", "format");
            auto out = s->export_artifact(req.path_params.at("artifact"), req.get_param_value("format"),
                                          query_of(req, {"format"}));
            res.status = 200;
            res.set_header("Content-Disposition", "attachment; filename=\"" + out.filename + "\"");
            res.set_content(std::move(out.body), out.media_type);
          }));

  srv.Delete("/sessions/:id", guarded([store_ref](const httplib::Request& req, httplib::Response& res) {
               store_ref->remove(req.path_params.at("id"));
               res.status = 204;
             }));
}

Server::~Server() { stop(); }

bool Server::listen(const std::string& host, int port) { return http_->listen(host, port); }

int Server::bind_any(const std::string& host) { return http_->bind_to_any_port(host); }

bool Server::listen_after_bind() { return http_->listen_after_bind(); }

void Server::stop() {
  if (http_) http_->stop();
}

bool Server::running() const { return http_->is_running(); }

}  // namespace protodown::server
