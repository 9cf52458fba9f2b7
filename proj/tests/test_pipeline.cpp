#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lpbf/pipeline.hpp"
#include "lpbf/records_io.hpp"

using namespace lpbf;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = std::string(LPBF_SOURCE_DIR) + "/tests/fixtures";

fs::path fresh_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("lpbf_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ErrorCode config_code(const std::string& text) {
  try {
    parse_config(text, kFixtures);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::BindFailure;  // sentinel: nothing thrown
}

struct CliResult {
  int exit_code;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  std::string cmd = std::string(LPBF_CLI_PATH) + " " + args + " 2>&1";
  CliResult r{0, {}};
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  std::array<char, 4096> buf;
  while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

TEST_CASE("fixture config loads") {
  auto cfg = load_config(kFixtures + "/pipeline.json");
  REQUIRE(cfg.sources.size() == 2);
  CHECK(fs::path(cfg.sources[0].path).is_absolute() == fs::path(kFixtures).is_absolute());
  CHECK(cfg.sources[0].schema.unit_map.at("velocity") == Unit::m_per_s);
  CHECK(cfg.grid.cardinality() == 9);
  CHECK(cfg.split.seed == 42);
  CHECK(cfg.k == 5);

  auto overridden = load_config(kFixtures + "/pipeline.json", {7, 3, "/tmp/elsewhere"});
  CHECK(overridden.split.seed == 7);
  CHECK(overridden.k == 3);
  CHECK(overridden.output_dir == "/tmp/elsewhere");
}

TEST_CASE("config rejects bad input") {
  const auto base = nlohmann::json::parse(slurp(kFixtures + "/pipeline.json"));
  CHECK(config_code(base.dump()) == ErrorCode::BindFailure);
  auto broken = [&](auto mutate) {
    auto j = base;
    mutate(j);
    return config_code(j.dump());
  };
  CHECK(config_code("not json") == ErrorCode::ConfigInvalid);
  CHECK(broken([](auto& j) { j["colour"] = 1; }) == ErrorCode::ConfigInvalid);
  CHECK(broken([](auto& j) { j["sources"] = nlohmann::json::array(); }) == ErrorCode::ConfigInvalid);
  CHECK(broken([](auto& j) { j["k"] = 4; }) == ErrorCode::ConfigInvalid);
  CHECK(broken([](auto& j) { j["split"]["train"] = 0.9; }) == ErrorCode::ConfigInvalid);
  CHECK(broken([](auto& j) { j["sources"][0]["path"] = "missing.csv"; }) == ErrorCode::ConfigInvalid);
  CHECK(broken([](auto& j) { j["sources"][0]["columns"].erase("depth"); }) == ErrorCode::ConfigInvalid);
  CHECK(broken([](auto& j) { j["sources"][0]["units"]["velocity"] = "furlong"; }) == ErrorCode::ConfigInvalid);
  CHECK(broken([](auto& j) { j["augment"]["hatch_values"] = {-5}; }) == ErrorCode::ConfigInvalid);
  CHECK(broken([](auto& j) { j["criteria"]["lof_limit"] = 0; }) == ErrorCode::ConfigInvalid);
  CHECK(broken([](auto& j) { j["eval_split"] = "train"; }) == ErrorCode::ConfigInvalid);
  CHECK(broken([](auto& j) { j["templates"] = "nope.tsv"; }) == ErrorCode::ConfigInvalid);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), Error);
}

TEST_CASE("stages need their predecessors") {
  auto dir = fresh_dir("order");
  Pipeline p(load_config(kFixtures + "/pipeline.json", {{}, {}, dir.string()}));
  try {
    p.split();
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "split");
    CHECK(e.code() == ErrorCode::FileUnreadable);
  }
}

TEST_CASE("full pipeline on the fixture") {
  auto dir = fresh_dir("full");
  Pipeline p(load_config(kFixtures + "/pipeline.json", {{}, {}, dir.string()}));
  p.run_all();

  auto ingested = read_records((dir / "ingest.records.jsonl").string());
  CHECK(ingested.size() == 238);
  auto report = nlohmann::json::parse(slurp(dir / "ingest.report.json"));
  CHECK(report[0]["rows_rejected"] == 2);

  auto augmented = read_records((dir / "augment.records.jsonl").string());
  CHECK(augmented.size() == 238 + 198 * 9);

  auto split = read_records((dir / "split.records.jsonl").string());
  std::size_t baseline_lines = 0, prompt_lines = 0, expected_prompts = 0;
  for (const auto& r : split) {
    CHECK(r.split != Split::Unassigned);
    expected_prompts += r.split == Split::Train ? 75 : r.split == Split::Test ? 15 : 10;
  }
  for (const char* s : {"train", "test", "validation"}) {
    std::ifstream b(dir / (std::string("baseline.") + s + ".jsonl"));
    std::ifstream q(dir / (std::string("prompt.") + s + ".jsonl"));
    std::string line;
    while (std::getline(b, line)) ++baseline_lines;
    while (std::getline(q, line)) {
      ++prompt_lines;
      if (prompt_lines % 997 == 0) CHECK(nlohmann::json::parse(line)["split"] == s);
    }
  }
  CHECK(baseline_lines == split.size());
  CHECK(prompt_lines == expected_prompts);

  auto eval = nlohmann::json::parse(slurp(dir / "eval.report.json"));
  CHECK(eval["n_examples"].get<std::size_t>() > 0);
  CHECK(fs::exists(dir / "index.json"));
  CHECK(fs::exists(dir / "pca.csv"));
}

TEST_CASE("cli exits") {
  auto usage = run_cli("frobnicate");
  CHECK(usage.exit_code == 1);

  auto no_config = run_cli("ingest");
  CHECK(no_config.exit_code == 1);
  CHECK(no_config.out.find("\"error\":\"ConfigInvalid\"") != std::string::npos);

  auto dir = fresh_dir("cli");
  auto stage = run_cli("--config " + kFixtures + "/pipeline.json --out " + dir.string() + " split");
  CHECK(stage.exit_code == 2);
  CHECK(stage.out.find("\"stage\":\"split\"") != std::string::npos);

  auto ok = run_cli("--config " + kFixtures + "/pipeline.json --out " + dir.string() + " ingest");
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("ingest.records.jsonl") != std::string::npos);

  auto parsed = run_cli("parse --baseline 'SS316L [SEP] 200 W [SEP] 800 mm/s [SEP]  [SEP]  [SEP] '");
  CHECK(parsed.exit_code == 0);
  auto j = nlohmann::json::parse(parsed.out);
  CHECK(j["params"]["power_w"] == 200.0);

  auto oracle = run_cli("predict --material SS316L --power 200 --velocity 800 --hatch-spacing 0 "
                        "--layer-height 0 --width 150 --depth 100 --length 300");
  CHECK(oracle.exit_code == 0);
  auto o = nlohmann::json::parse(oracle.out);
  CHECK(o["method"] == "Oracle");
  CHECK(o["labels"]["keyhole"] == true);
}
