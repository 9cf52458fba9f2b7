#pragma once

#include <memory>
#include <string>

#include "lpbf/param_parser.hpp"
#include "lpbf/predictor.hpp"

namespace lpbf {

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
};

// Request handling without the transport. Holds the index and lexicon
// read-only, so one instance serves concurrent requests.
class PredictionService {
 public:
  PredictionService(std::shared_ptr<const TrainIndex> index, Lexicon lexicon, int k = kDefaultK);

  // Body is {"prompt": "..."} or {"params": {material, power_w, ...}}.
  // 400 for malformed JSON or shape, 422 when nothing could be parsed or the
  // parameters are out of range.
  HttpResponse predict(std::string_view body) const;

 private:
  std::shared_ptr<const TrainIndex> index_;
  Lexicon lexicon_;
  int k_;
};

// "host:port" or ":port"; port 0 asks the OS for a free one.
struct Address {
  std::string host = "127.0.0.1";
  int port = 8080;
};
Address parse_address(std::string_view text);

// POST /predict and GET /health over HTTP.
class HttpServer {
 public:
  explicit HttpServer(std::shared_ptr<const PredictionService> service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Throws BindFailure. Returns the bound port.
  int bind(const Address& address);
  // Blocks until stop().
  void listen();
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace lpbf
