#include <doctest.h>

#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "lpbf/service.hpp"

using namespace lpbf;
using nlohmann::json;

namespace {

std::shared_ptr<const TrainIndex> small_index() {
  std::vector<Record> train;
  auto add = [&](std::string id, double power, DefectLabels labels) {
    Record r;
    r.id = std::move(id);
    r.params = {"SS316L", power, 800.0, 80.0, 100.0, 30.0};
    r.labels = labels;
    r.split = Split::Train;
    train.push_back(r);
  };
  add("a", 100, DefectLabels(false, true, false));
  add("b", 200, DefectLabels());
  add("c", 300, DefectLabels(true, false, false));
  return std::make_shared<const TrainIndex>(build_index(train));
}

PredictionService make_service() { return PredictionService(small_index(), Lexicon::builtin(), 1); }

}  // namespace

TEST_CASE("structured exact match") {
  auto svc = make_service();
  auto r = svc.predict(R"({"params": {"material": "316L", "power_w": 300, "velocity_mm_s": 800,
      "beam_diameter_um": 80, "hatch_spacing_um": 100, "layer_height_um": 30}})");
  CHECK(r.status == 200);
  auto j = json::parse(r.body);
  CHECK(j["method"] == "ExactMatch");
  CHECK(j["labels"]["keyhole"] == true);
  CHECK(j["labels"]["none"] == false);
  CHECK(j["neighbors"][0]["id"] == "c");
  CHECK(j["parsed"]["params"]["material"] == "SS316L");
}

TEST_CASE("prompt requests") {
  auto svc = make_service();
  auto r = svc.predict(R"({"prompt": "SS316L at 120 W and 800 mm/s"})");
  CHECK(r.status == 200);
  auto j = json::parse(r.body);
  CHECK(j["method"] == "Knn");
  CHECK(j["neighbors"][0]["id"] == "a");
  CHECK(j["parsed"]["confidence"]["power"] == "Exact");

  auto hello = svc.predict(R"({"prompt": "hello"})");
  CHECK(hello.status == 422);
  auto h = json::parse(hello.body);
  CHECK(h.contains("error"));
  CHECK(h["parsed"]["unmatched_spans"][0]["text"] == "hello");
  CHECK(h["parsed"]["confidence"]["material"] == "Missing");
}

TEST_CASE("malformed requests") {
  auto svc = make_service();
  for (const char* body : {"", "{", "[1,2]", "{}", R"({"prompt": "x", "params": {}})",
                           R"({"prompt": 5})", R"({"params": []})", R"({"params": {"power": 100}})",
                           R"({"params": {"power_w": "100"}})"}) {
    CAPTURE(body);
    CHECK(svc.predict(body).status == 400);
  }
  CHECK(svc.predict(R"({"params": {}})").status == 422);
  CHECK(svc.predict(R"({"params": {"power_w": -3}})").status == 422);
}

TEST_CASE("service construction") {
  CHECK_THROWS_AS(PredictionService(small_index(), Lexicon::builtin(), 2), Error);
}

TEST_CASE("parse_address") {
  auto a = parse_address(":0");
  CHECK(a.host == "127.0.0.1");
  CHECK(a.port == 0);
  auto b = parse_address("0.0.0.0:9000");
  CHECK(b.host == "0.0.0.0");
  CHECK(b.port == 9000);
  CHECK_THROWS_AS(parse_address("host:port"), Error);
  CHECK_THROWS_AS(parse_address(":70000"), Error);
}

TEST_CASE("http round trip with concurrent clients") {
  auto service = std::make_shared<const PredictionService>(make_service());
  HttpServer server(service);
  int port = server.bind({"127.0.0.1", 0});
  CHECK(port > 0);
  std::thread t([&] { server.listen(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(health->body == "ok");

  std::vector<std::thread> clients;
  std::atomic<int> ok{0};
  for (int i = 0; i < 8; ++i) {
    clients.emplace_back([&, i] {
      httplib::Client c("127.0.0.1", port);
      for (int n = 0; n < 10; ++n) {
        auto res = c.Post("/predict", R"({"prompt": "SS316L at )" + std::to_string(100 + i * 25) + R"( W"})",
                          "application/json");
        if (res && res->status == 200) ++ok;
      }
    });
  }
  for (auto& c : clients) c.join();
  CHECK(ok == 80);

  auto bad = client.Post("/predict", "nope", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);

  HttpServer second(service);
  CHECK_THROWS_AS(second.bind({"127.0.0.1", port}), Error);

  server.stop();
  t.join();
}
