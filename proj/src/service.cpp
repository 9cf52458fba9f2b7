#include "lpbf/service.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

#include "lpbf/records_io.hpp"

namespace lpbf {

namespace {

using ojson = nlohmann::ordered_json;

HttpResponse error_response(int status, const std::string& message, ojson extra = ojson::object()) {
  extra["error"] = message;
  return {status, extra.dump()};
}

struct BadRequest {
  std::string message;
};

std::optional<double> number_field(const nlohmann::json& params, const char* key) {
  if (!params.contains(key) || params[key].is_null()) return std::nullopt;
  if (!params[key].is_number()) throw BadRequest{std::string("params.") + key + " must be a number"};
  return params[key].get<double>();
}

}  // namespace

PredictionService::PredictionService(std::shared_ptr<const TrainIndex> index, Lexicon lexicon, int k)
    : index_(std::move(index)), lexicon_(std::move(lexicon)), k_(k) {
  if (!index_ || index_->size() == 0) throw Error(ErrorCode::EmptyTrainingSet, "service needs a non-empty index");
  if (k_ < 1 || k_ % 2 == 0) throw Error(ErrorCode::InvalidK, "k must be a positive odd integer");
}

HttpResponse PredictionService::predict(std::string_view body) const {
  nlohmann::json request;
  try {
    request = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    return error_response(400, std::string("malformed JSON: ") + e.what());
  }
  if (!request.is_object()) return error_response(400, "request body must be a JSON object");
  bool has_prompt = request.contains("prompt");
  bool has_params = request.contains("params");
  if (has_prompt == has_params) return error_response(400, "send exactly one of 'prompt' or 'params'");

  ParseResult parsed;
  try {
    if (has_prompt) {
      if (!request["prompt"].is_string()) return error_response(400, "'prompt' must be a string");
      parsed = parse_prompt(request["prompt"].get<std::string>(), lexicon_);
    } else {
      const auto& p = request["params"];
      if (!p.is_object()) return error_response(400, "'params' must be an object");
      for (const auto& [key, value] : p.items()) {
        static const char* kKeys[] = {"material", "power_w", "velocity_mm_s", "beam_diameter_um",
                                      "hatch_spacing_um", "layer_height_um"};
        if (std::find_if(std::begin(kKeys), std::end(kKeys), [&](const char* k) { return key == k; }) ==
            std::end(kKeys)) {
          return error_response(400, "unknown params key '" + key + "'");
        }
      }
      if (p.contains("material") && !p["material"].is_null()) {
        if (!p["material"].is_string()) return error_response(400, "params.material must be a string");
        auto raw = p["material"].get<std::string>();
        if (!trim(raw).empty()) {
          parsed.params.material = lexicon_.materials.canonicalize(raw);
          parsed.confidence[0] = Confidence::Exact;
        }
      }
      const char* keys[] = {"power_w", "velocity_mm_s", "beam_diameter_um", "hatch_spacing_um",
                            "layer_height_um"};
      std::optional<double>* slots[] = {&parsed.params.power, &parsed.params.velocity,
                                        &parsed.params.beam_diameter, &parsed.params.hatch_spacing,
                                        &parsed.params.layer_height};
      for (std::size_t i = 0; i < 5; ++i) {
        *slots[i] = number_field(p, keys[i]);
        if (*slots[i]) parsed.confidence[i + 1] = Confidence::Exact;
      }
    }
  } catch (const BadRequest& e) {
    return error_response(400, e.message);
  }

  ojson extra;
  extra["parsed"] = to_json(parsed);
  if (parsed.all_missing()) return error_response(422, "no process parameters recognized", extra);
  try {
    validate(parsed.params, false);
    auto prediction = lpbf::predict(parsed.params, *index_, k_);
    auto response = to_json(prediction);
    response["parsed"] = extra["parsed"];
    return {200, response.dump()};
  } catch (const Error& e) {
    extra["code"] = std::string(to_string(e.code()));
    return error_response(422, e.what(), extra);
  }
}

Address parse_address(std::string_view text) {
  Address addr;
  auto colon = text.rfind(':');
  std::string_view port_text = text;
  if (colon != std::string_view::npos) {
    if (colon > 0) addr.host = std::string(text.substr(0, colon));
    port_text = text.substr(colon + 1);
  }
  auto port = parse_number(port_text);
  if (!port || *port < 0 || *port > 65535 || *port != static_cast<int>(*port)) {
    throw Error(ErrorCode::ConfigInvalid, "bad address '" + std::string(text) + "'");
  }
  addr.port = static_cast<int>(*port);
  return addr;
}

struct HttpServer::Impl {
  std::shared_ptr<const PredictionService> service;
  httplib::Server server;
};

HttpServer::HttpServer(std::shared_ptr<const PredictionService> service) : impl_(std::make_unique<Impl>()) {
  impl_->service = std::move(service);
  auto* svc = impl_->service.get();
  // httplib's default sets SO_REUSEPORT, which lets a second server share a
  // busy port silently.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  impl_->server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });
  impl_->server.Post("/predict", [svc](const httplib::Request& req, httplib::Response& res) {
    auto out = svc->predict(req.body);
    res.status = out.status;
    res.set_content(out.body, "application/json");
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const Address& address) {
  int port = address.port;
  if (port == 0) {
    port = impl_->server.bind_to_any_port(address.host);
  } else if (!impl_->server.bind_to_port(address.host, port)) {
    port = -1;
  }
  if (port < 0) {
    throw Error(ErrorCode::BindFailure,
                "cannot bind " + address.host + ":" + std::to_string(address.port));
  }
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace lpbf
