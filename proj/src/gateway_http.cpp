#include "agrifield/gateway_http.hpp"

#include <charconv>
#include <limits>

#include "httplib.h"

#include "agrifield/errors.hpp"

namespace agrifield::gateway {
namespace {

using nlohmann::json;

constexpr const char* kJson = "application/json";

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void reply_error(httplib::Response& res, int status, const std::string& message,
                 const std::string& field = {}) {
  json body{{"error", message}};
  if (!field.empty()) body["field"] = field;
  reply(res, status, body);
}

/// Runs `fn`, translating library errors into status codes.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    reply_error(res, 400, e.what(), e.field());
  } catch (const json::exception& e) {
    reply_error(res, 400, std::string("malformed body: ") + e.what());
  } catch (const NotFoundError& e) {
    reply_error(res, 404, e.what());
  } catch (const PreconditionError& e) {
    reply_error(res, 412, e.what());
  } catch (const std::exception& e) {
    reply_error(res, 500, e.what());
  }
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded()) throw ValidationError("body", "not valid JSON");
  return body;
}

NutrientProfile soil_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("soil", "must be an object with n, p, k");
  NutrientProfile p;
  for (auto [name, slot] : {std::pair{"n", &p.n}, std::pair{"p", &p.p}, std::pair{"k", &p.k}}) {
    auto it = j.find(name);
    if (it == j.end() || !it->is_number()) throw ValidationError(std::string("soil.") + name, "must be a number");
    *slot = it->get<double>();
    if (*slot < 0.0) throw ValidationError(std::string("soil.") + name, "must be non-negative");
  }
  return p;
}

}  // namespace

void register_routes(httplib::Server& server, Gateway& gateway) {
  server.Post("/api/v1/readings", [&gateway](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      // Validate the whole batch before ingesting any of it.
      std::vector<TelemetryRecord> records;
      if (body.is_array()) {
        for (const auto& item : body) records.push_back(record_from_json(item));
      } else {
        records.push_back(record_from_json(body));
      }
      json acks = json::array();
      for (auto& r : records) acks.push_back(gateway.ingest(std::move(r)));
      reply(res, 201, {{"accepted", records.size()}, {"sequence", acks}});
    });
  });

  server.Get("/api/v1/state", [&gateway](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { reply(res, 200, to_json(gateway.get_state())); });
  });

  server.Get("/api/v1/history", [&gateway](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (!req.has_param("metric")) throw ValidationError("metric", "query parameter is required");
      std::size_t limit = std::numeric_limits<std::size_t>::max();
      if (req.has_param("limit")) {
        const std::string s = req.get_param_value("limit");
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), limit);
        if (ec != std::errc{} || ptr != s.data() + s.size())
          throw ValidationError("limit", "must be a non-negative integer");
      }
      json items = json::array();
      for (const auto& r : gateway.get_history(req.get_param_value("metric"), limit))
        items.push_back(to_json(r));
      reply(res, 200, {{"metric", req.get_param_value("metric")}, {"records", items}});
    });
  });

  server.Post("/api/v1/pump", [&gateway](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      if (!body.is_object()) throw ValidationError("body", "must be an object");
      auto mode = body.find("mode");
      if (mode == body.end() || !mode->is_string()) throw ValidationError("mode", "must be a string");
      bool on = false;
      if (auto it = body.find("on"); it != body.end()) {
        if (!it->is_boolean()) throw ValidationError("on", "must be a boolean");
        on = it->get<bool>();
      } else if (mode->get<std::string>() == "manual") {
        throw ValidationError("on", "is required in manual mode");
      }
      gateway.set_pump(mode->get<std::string>(), on);
      reply(res, 200, {{"mode", mode->get<std::string>()}, {"on", on}, {"queued", true}});
    });
  });

  server.Post("/api/v1/recommend", [&gateway](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      if (!body.is_object()) throw ValidationError("body", "must be an object");
      auto crop = body.find("crop");
      if (crop == body.end() || !crop->is_string()) throw ValidationError("crop", "must be a string");
      std::optional<NutrientProfile> soil;
      if (auto it = body.find("soil"); it != body.end() && !it->is_null()) soil = soil_from_json(*it);
      reply(res, 200, to_json(gateway.recommend(crop->get<std::string>(), soil)));
    });
  });
}

HttpService::HttpService(Gateway& gateway) : server_(std::make_unique<httplib::Server>()) {
  // SO_REUSEPORT (the library default) would let a second server share a busy port.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });
  register_routes(*server_, gateway);
}

HttpService::~HttpService() { stop(); }

int HttpService::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void HttpService::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace agrifield::gateway
