// lpbf: dataset pipeline, parameter parsing, reference prediction and the
// inference service.
//
// Exit status: 0 success, 1 configuration or usage error, 2 stage error.

#include <csignal>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lpbf/pipeline.hpp"
#include "lpbf/records_io.hpp"
#include "lpbf/service.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitStage = 2;

int report_error(const std::string& stage, lpbf::ErrorCode code, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = std::string(lpbf::to_string(code));
  j["stage"] = stage;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
  return code == lpbf::ErrorCode::ConfigInvalid ? kExitConfig : kExitStage;
}

lpbf::HttpServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"L-PBF defect-regime dataset toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> k;
  std::optional<std::string> out;
  std::string addr = "127.0.0.1:8080";
  app.add_option("--config", config_path, "pipeline config (JSON)");
  app.add_option("--seed", seed, "split seed (overrides config)");
  app.add_option("--k", k, "neighbors for k-NN, odd (overrides config)");
  app.add_option("--out", out, "output directory (overrides config)");
  app.add_option("--addr", addr, "serve address, host:port (port 0 picks a free one)");

  struct StageCommand {
    const char* name;
    const char* help;
    std::vector<std::string> (lpbf::Pipeline::*run)();
  };
  const StageCommand stages[] = {
      {"ingest", "read source tables into records", &lpbf::Pipeline::ingest},
      {"label", "label geometry records from melt pool criteria", &lpbf::Pipeline::label},
      {"augment", "lack-of-fusion grid augmentation", &lpbf::Pipeline::augment},
      {"split", "seeded train/test/validation split per source", &lpbf::Pipeline::split},
      {"gen-baseline", "write [SEP] corpus files per split", &lpbf::Pipeline::gen_baseline},
      {"gen-prompt", "write prompt corpus files per split", &lpbf::Pipeline::gen_prompt},
      {"eval", "build the k-NN index and evaluate the held-out split", &lpbf::Pipeline::eval},
      {"pca", "2-component PCA of the feature space", &lpbf::Pipeline::pca},
      {"run", "every stage from ingest to pca", &lpbf::Pipeline::run_all},
  };
  std::map<CLI::App*, const StageCommand*> stage_apps;
  for (const auto& s : stages) stage_apps[app.add_subcommand(s.name, s.help)] = &s;

  auto* parse_cmd = app.add_subcommand("parse", "parse a prompt or Baseline text into parameters");
  std::optional<std::string> prompt_text, baseline_text;
  parse_cmd->add_option("--prompt", prompt_text, "natural-language prompt");
  parse_cmd->add_option("--baseline", baseline_text, "[SEP]-delimited text");

  auto* predict_cmd = app.add_subcommand("predict", "predict defect labels");
  std::optional<std::string> index_path;
  std::optional<std::string> material;
  std::optional<double> power, velocity, beam, hatch, layer, width, depth, length;
  predict_cmd->add_option("--prompt", prompt_text, "natural-language prompt");
  predict_cmd->add_option("--baseline", baseline_text, "[SEP]-delimited text");
  predict_cmd->add_option("--index", index_path, "index snapshot (default <out>/index.json)");
  predict_cmd->add_option("--material", material);
  predict_cmd->add_option("--power", power, "W");
  predict_cmd->add_option("--velocity", velocity, "mm/s");
  predict_cmd->add_option("--beam-diameter", beam, "um");
  predict_cmd->add_option("--hatch-spacing", hatch, "um");
  predict_cmd->add_option("--layer-height", layer, "um");
  predict_cmd->add_option("--width", width, "melt pool width, um (criteria oracle)");
  predict_cmd->add_option("--depth", depth, "melt pool depth, um (criteria oracle)");
  predict_cmd->add_option("--length", length, "melt pool length, um (criteria oracle)");

  auto* serve_cmd = app.add_subcommand("serve", "serve POST /predict and GET /health");
  serve_cmd->add_option("--index", index_path, "index snapshot (default <out>/index.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitConfig;
  }

  lpbf::ConfigOverrides overrides{seed, k, out};
  auto load_pipeline = [&]() -> lpbf::Pipeline {
    if (config_path.empty()) throw lpbf::Error(lpbf::ErrorCode::ConfigInvalid, "--config is required");
    return lpbf::Pipeline(lpbf::load_config(config_path, overrides));
  };

  std::string stage_name = "cli";
  try {
    for (auto* sub : app.get_subcommands()) {
      stage_name = sub->get_name();
      if (auto it = stage_apps.find(sub); it != stage_apps.end()) {
        auto pipeline = load_pipeline();
        for (const auto& file : (pipeline.*(it->second->run))()) std::cout << file << '\n';
        return 0;
      }
    }

    auto parse_text = [&](const lpbf::Lexicon& lex) -> std::optional<lpbf::ParseResult> {
      if (prompt_text) return lpbf::parse_prompt(*prompt_text, lex);
      if (baseline_text) return lpbf::parse_baseline(*baseline_text, lex);
      return std::nullopt;
    };

    if (parse_cmd->parsed()) {
      auto lex = config_path.empty() ? lpbf::Lexicon::builtin() : load_pipeline().lexicon();
      auto parsed = parse_text(lex);
      if (!parsed) throw lpbf::Error(lpbf::ErrorCode::ConfigInvalid, "parse needs --prompt or --baseline");
      std::cout << lpbf::to_json(*parsed).dump(2) << '\n';
      return 0;
    }

    // Index and lexicon for predict/serve: config output dir, --out, or ./out.
    auto open_index = [&](lpbf::Lexicon& lex) {
      if (!config_path.empty()) {
        auto pipeline = load_pipeline();
        lex = pipeline.lexicon();
        if (index_path) return lpbf::TrainIndex::load(*index_path);
        return pipeline.load_index();
      }
      lex = lpbf::Lexicon::builtin();
      std::string path = index_path ? *index_path
                                    : (std::filesystem::path(out.value_or("out")) / "index.json").string();
      return lpbf::TrainIndex::load(path);
    };

    if (predict_cmd->parsed()) {
      int use_k = k.value_or(lpbf::kDefaultK);
      lpbf::Lexicon lex;
      nlohmann::ordered_json response;
      lpbf::ParseResult parsed;
      if (auto p = parse_text(config_path.empty() ? lpbf::Lexicon::builtin() : load_pipeline().lexicon())) {
        parsed = *p;
      } else {
        if (material) parsed.params.material = lpbf::canonicalize_material(*material);
        parsed.params.power = power;
        parsed.params.velocity = velocity;
        parsed.params.beam_diameter = beam;
        parsed.params.hatch_spacing = hatch;
        parsed.params.layer_height = layer;
      }
      lpbf::validate(parsed.params, false);
      lpbf::Prediction prediction;
      if (width || depth) {
        if (!width || !depth) throw lpbf::Error(lpbf::ErrorCode::MissingDims, "--width and --depth go together");
        lpbf::CriteriaConfig criteria;
        if (!config_path.empty()) criteria = load_pipeline().config().criteria;
        prediction = lpbf::predict_with_dims(parsed.params, {*width, *depth, length}, criteria);
      } else {
        auto index = open_index(lex);
        if (!config_path.empty() && !k) use_k = load_pipeline().config().k;
        prediction = lpbf::predict(parsed.params, index, use_k);
      }
      response = lpbf::to_json(prediction);
      if (prompt_text || baseline_text) response["parsed"] = lpbf::to_json(parsed);
      std::cout << response.dump(2) << '\n';
      return 0;
    }

    if (serve_cmd->parsed()) {
      lpbf::Lexicon lex;
      auto index = std::make_shared<const lpbf::TrainIndex>(open_index(lex));
      int use_k = k.value_or(config_path.empty() ? lpbf::kDefaultK : load_pipeline().config().k);
      auto service = std::make_shared<const lpbf::PredictionService>(index, lex, use_k);
      lpbf::HttpServer server(service);
      int port = server.bind(lpbf::parse_address(addr));
      g_server = &server;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      std::cerr << "listening on port " << port << '\n';
      server.listen();
      g_server = nullptr;
      return 0;
    }
  } catch (const lpbf::StageError& e) {
    return report_error(e.stage(), e.code(), e.what());
  } catch (const lpbf::Error& e) {
    return report_error(stage_name, e.code(), e.what());
  } catch (const std::exception& e) {
    return report_error(stage_name, lpbf::ErrorCode::IoError, e.what());
  }
  return kExitConfig;
}
