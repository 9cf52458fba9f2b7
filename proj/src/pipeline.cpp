#include "lpbf/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lpbf/evaluator.hpp"
#include "lpbf/records_io.hpp"

namespace lpbf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& message) {
  throw Error(ErrorCode::ConfigInvalid, message);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) config_error(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) config_error("unknown key '" + key + "' in " + where);
  }
}

std::string resolve(const std::string& base_dir, const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) path = fs::path(base_dir) / path;
  return path.lexically_normal().string();
}

std::string existing(const std::string& base_dir, const std::string& p, const std::string& what) {
  auto full = resolve(base_dir, p);
  if (!fs::exists(full)) config_error(what + " not found: " + full);
  return full;
}

Unit unit_from(const std::string& text) {
  auto u = parse_unit(text);
  if (!u || *u == Unit::dimensionless) config_error("unknown unit '" + text + "'");
  return *u;
}

SourceSpec parse_source_spec(const json& j, const std::string& base_dir) {
  check_keys(j, {"path", "name", "kind", "record_source", "delimiter", "columns", "units"}, "source");
  SourceSpec spec;
  spec.path = existing(base_dir, j.at("path").get<std::string>(), "source file");
  auto kind = j.at("kind").get<std::string>();
  if (kind == "ClassificationTable") {
    spec.schema.kind = TableKind::ClassificationTable;
  } else if (kind == "GeometryTable") {
    spec.schema.kind = TableKind::GeometryTable;
  } else {
    config_error("unknown source kind '" + kind + "'");
  }
  spec.schema.name = j.contains("name") ? j["name"].get<std::string>()
                                        : fs::path(spec.path).stem().string();
  if (j.contains("record_source")) {
    spec.schema.record_source = parse_source(j["record_source"].get<std::string>());
  }
  if (j.contains("delimiter")) {
    auto d = j["delimiter"].get<std::string>();
    if (d.size() != 1) config_error("delimiter must be one character");
    spec.schema.delimiter = d[0];
  }
  for (const auto& [field, column] : j.at("columns").items()) {
    spec.schema.column_map[field] = column.get<std::string>();
  }
  if (j.contains("units")) {
    for (const auto& [field, unit] : j["units"].items()) {
      spec.schema.unit_map[field] = unit_from(unit.get<std::string>());
    }
  }
  validate(spec.schema);
  return spec;
}

std::vector<double> number_list(const json& j) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(v.get<double>());
  return out;
}

}  // namespace

PipelineConfig parse_config(std::string_view text, const std::string& base_dir,
                            const ConfigOverrides& overrides) {
  PipelineConfig cfg;
  try {
    auto j = json::parse(text);
    check_keys(j, {"sources", "criteria", "augment", "split", "templates", "materials", "lexicon",
                   "output_dir", "k", "eval_split", "pca_include_material"},
               "config");
    for (const auto& s : j.at("sources")) cfg.sources.push_back(parse_source_spec(s, base_dir));
    if (cfg.sources.empty()) config_error("config lists no sources");

    if (j.contains("criteria")) {
      const auto& c = j["criteria"];
      check_keys(c, {"keyhole_ratio_threshold", "lof_limit", "balling_ratio_threshold", "unknown_policy"},
                 "criteria");
      cfg.criteria.keyhole_ratio_threshold = c.value("keyhole_ratio_threshold", cfg.criteria.keyhole_ratio_threshold);
      cfg.criteria.lof_limit = c.value("lof_limit", cfg.criteria.lof_limit);
      cfg.criteria.balling_ratio_threshold = c.value("balling_ratio_threshold", cfg.criteria.balling_ratio_threshold);
      auto policy = c.value("unknown_policy", std::string("TreatAsNoDefect"));
      if (policy == "TreatAsNoDefect") {
        cfg.criteria.unknown_policy = UnknownPolicy::TreatAsNoDefect;
      } else if (policy == "Reject") {
        cfg.criteria.unknown_policy = UnknownPolicy::Reject;
      } else {
        config_error("unknown unknown_policy '" + policy + "'");
      }
    }
    validate(cfg.criteria);

    if (j.contains("augment")) {
      const auto& a = j["augment"];
      check_keys(a, {"enabled", "sources", "mode", "hatch_values", "layer_values", "uniform"}, "augment");
      cfg.augment_enabled = a.value("enabled", true);
      if (a.contains("sources")) {
        cfg.augment_sources.clear();
        for (const auto& s : a["sources"]) cfg.augment_sources.insert(parse_source(s.get<std::string>()));
      }
      auto mode = a.value("mode", std::string("Cartesian"));
      GridMode grid_mode = GridMode::Cartesian;
      if (mode == "Paired") {
        grid_mode = GridMode::Paired;
      } else if (mode != "Cartesian") {
        config_error("unknown grid mode '" + mode + "'");
      }
      if (a.contains("uniform")) {
        const auto& u = a["uniform"];
        check_keys(u, {"start", "step", "count"}, "augment.uniform");
        cfg.grid = AugmentGrid::uniform(u.at("start").get<double>(), u.at("step").get<double>(),
                                        u.at("count").get<std::size_t>(), grid_mode);
      }
      if (a.contains("hatch_values")) cfg.grid.hatch_values = number_list(a["hatch_values"]);
      if (a.contains("layer_values")) cfg.grid.layer_values = number_list(a["layer_values"]);
      cfg.grid.mode = grid_mode;
    }
    validate(cfg.grid);

    if (j.contains("split")) {
      const auto& s = j["split"];
      check_keys(s, {"train", "test", "validation", "seed"}, "split");
      cfg.split.train_fraction = s.value("train", cfg.split.train_fraction);
      cfg.split.test_fraction = s.value("test", cfg.split.test_fraction);
      cfg.split.validation_fraction = s.value("validation", cfg.split.validation_fraction);
      cfg.split.seed = s.value("seed", cfg.split.seed);
    }
    if (j.contains("templates")) cfg.templates_path = existing(base_dir, j["templates"].get<std::string>(), "template file");
    if (j.contains("materials")) cfg.materials_path = existing(base_dir, j["materials"].get<std::string>(), "material table");
    if (j.contains("lexicon")) cfg.lexicon_path = existing(base_dir, j["lexicon"].get<std::string>(), "lexicon file");
    if (j.contains("output_dir")) cfg.output_dir = resolve(base_dir, j["output_dir"].get<std::string>());
    else cfg.output_dir = resolve(base_dir, cfg.output_dir);
    cfg.k = j.value("k", cfg.k);
    if (j.contains("eval_split")) cfg.eval_split = parse_split(j["eval_split"].get<std::string>());
    cfg.pca_include_material = j.value("pca_include_material", false);
  } catch (const json::exception& e) {
    config_error(std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    config_error(std::string(to_string(e.code())) + ": " + e.what());
  }
  if (overrides.seed) cfg.split.seed = *overrides.seed;
  if (overrides.k) cfg.k = *overrides.k;
  if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;
  if (cfg.k < 1 || cfg.k % 2 == 0) config_error("k must be a positive odd integer");
  try {
    validate(cfg.split);
  } catch (const Error& e) {
    config_error(e.what());
  }
  if (cfg.eval_split == Split::Unassigned || cfg.eval_split == Split::Train) {
    config_error("eval_split must be test or validation");
  }
  return cfg;
}

PipelineConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) config_error("cannot read config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  auto base = fs::path(path).parent_path().string();
  return parse_config(buf.str(), base.empty() ? "." : base, overrides);
}

// ---------------------------------------------------------------------------

namespace {

Lexicon make_lexicon(const PipelineConfig& cfg) {
  Lexicon lex = Lexicon::builtin();
  if (cfg.materials_path) lex.materials = MaterialTable::load(*cfg.materials_path);
  if (cfg.lexicon_path) {
    std::ifstream in(*cfg.lexicon_path);
    std::stringstream buf;
    buf << in.rdbuf();
    lex.keywords = Lexicon::parse_keywords(buf.str());
  }
  return lex;
}

std::vector<Record> require_records(const std::string& path, const char* producer) {
  if (!fs::exists(path)) {
    throw Error(ErrorCode::FileUnreadable, "missing " + path + "; run '" + producer + "' first");
  }
  return read_records(path);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << text;
  if (!out.flush()) throw Error(ErrorCode::IoError, "write failed for " + path);
}

constexpr Split kSplits[] = {Split::Train, Split::Test, Split::Validation};

}  // namespace

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)), lexicon_(make_lexicon(config_)) {}

std::string Pipeline::path(const std::string& file) const {
  return (fs::path(config_.output_dir) / file).string();
}

template <typename Fn>
std::vector<std::string> Pipeline::stage(const char* name, Fn&& fn) {
  try {
    fs::create_directories(config_.output_dir);
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  } catch (const fs::filesystem_error& e) {
    throw StageError(name, Error(ErrorCode::IoError, e.what()));
  }
}

std::vector<PromptTemplate> Pipeline::templates() const {
  return config_.templates_path ? load_templates(*config_.templates_path) : builtin_templates();
}

std::vector<std::string> Pipeline::ingest() {
  return stage("ingest", [&] {
    std::vector<Record> all;
    nlohmann::ordered_json report = nlohmann::ordered_json::array();
    for (const auto& src : config_.sources) {
      auto result = ingest_table(src.path, src.schema, lexicon_.materials);
      nlohmann::ordered_json r;
      r["source"] = src.schema.name;
      r["path"] = fs::path(src.path).filename().string();
      r["rows_read"] = result.report.rows_read;
      r["rows_accepted"] = result.report.rows_accepted;
      r["rows_rejected"] = result.report.rows_rejected;
      r["rejection_reasons"] = nlohmann::ordered_json::array();
      for (const auto& [row, reason] : result.report.rejection_reasons) {
        r["rejection_reasons"].push_back({{"row", row}, {"reason", reason}});
      }
      report.push_back(r);
      for (auto& rec : result.records) all.push_back(std::move(rec));
    }
    std::sort(all.begin(), all.end(), [](const Record& a, const Record& b) { return a.id < b.id; });
    write_records(all, path("ingest.records.jsonl"));
    write_text(path("ingest.report.json"), report.dump(2) + "\n");
    return std::vector<std::string>{path("ingest.records.jsonl"), path("ingest.report.json")};
  });
}

std::vector<std::string> Pipeline::label() {
  return stage("label", [&] {
    auto records = require_records(path("ingest.records.jsonl"), "ingest");
    records = label_geometry_records(std::move(records), config_.criteria);
    write_records(records, path("label.records.jsonl"));
    return std::vector<std::string>{path("label.records.jsonl")};
  });
}

std::vector<std::string> Pipeline::augment() {
  return stage("augment", [&] {
    auto records = require_records(path("label.records.jsonl"), "label");
    std::vector<Record> out;
    for (const auto& rec : records) {
      out.push_back(rec);
      if (!config_.augment_enabled || !config_.augment_sources.contains(rec.source) || !rec.dims) continue;
      for (auto& derived : augment_lof(rec, config_.grid, config_.criteria)) out.push_back(std::move(derived));
    }
    std::sort(out.begin(), out.end(), [](const Record& a, const Record& b) { return a.id < b.id; });
    write_records(out, path("augment.records.jsonl"));
    return std::vector<std::string>{path("augment.records.jsonl")};
  });
}

std::vector<std::string> Pipeline::split() {
  return stage("split", [&] {
    auto records = require_records(path("augment.records.jsonl"), "augment");
    auto result = split_records(group_by_source(std::move(records)), config_.split);
    write_records(result, path("split.records.jsonl"));
    return std::vector<std::string>{path("split.records.jsonl")};
  });
}

std::vector<std::string> Pipeline::gen_baseline() {
  return stage("gen-baseline", [&] {
    auto records = require_records(path("split.records.jsonl"), "split");
    std::vector<std::string> written;
    for (Split s : kSplits) {
      std::vector<CorpusExample> examples;
      for (const auto& r : records) {
        if (r.split == s) examples.push_back(render_baseline(r));
      }
      if (examples.empty()) continue;
      auto file = path("baseline." + std::string(to_string(s)) + ".jsonl");
      write_corpus(std::move(examples), file, CorpusFormat::Baseline);
      written.push_back(file);
    }
    return written;
  });
}

std::vector<std::string> Pipeline::gen_prompt() {
  return stage("gen-prompt", [&] {
    auto records = require_records(path("split.records.jsonl"), "split");
    auto tpl = templates();
    std::vector<std::string> written;
    for (Split s : kSplits) {
      std::vector<CorpusExample> examples;
      for (const auto& r : records) {
        if (r.split != s) continue;
        for (auto& ex : render_prompts(r, tpl)) examples.push_back(std::move(ex));
      }
      if (examples.empty()) continue;
      auto file = path("prompt." + std::string(to_string(s)) + ".jsonl");
      write_corpus(std::move(examples), file, CorpusFormat::Prompt);
      written.push_back(file);
    }
    return written;
  });
}

std::vector<std::string> Pipeline::eval() {
  return stage("eval", [&] {
    auto records = require_records(path("split.records.jsonl"), "split");
    std::vector<Record> train;
    std::vector<const Record*> held_out;
    for (const auto& r : records) {
      if (r.split == Split::Train) train.push_back(r);
      if (r.split == config_.eval_split) held_out.push_back(&r);
    }
    auto index = TrainIndex::build(train);
    index.save(path("index.json"));
    if (held_out.empty()) {
      throw Error(ErrorCode::EmptyInput, "no records in the " + std::string(to_string(config_.eval_split)) + " split");
    }
    std::vector<DefectLabels> predictions, truths;
    std::size_t exact_hits = 0;
    for (const auto* r : held_out) {
      auto p = predict(r->params, index, config_.k);
      exact_hits += p.method == PredictionMethod::ExactMatch ? 1 : 0;
      predictions.push_back(p.labels);
      truths.push_back(*r->labels);
    }
    auto report = nlohmann::ordered_json::parse(to_json(evaluate(predictions, truths)));
    report["split"] = std::string(to_string(config_.eval_split));
    report["k"] = config_.k;
    report["exact_match_predictions"] = exact_hits;
    write_text(path("eval.report.json"), report.dump(2) + "\n");
    return std::vector<std::string>{path("index.json"), path("eval.report.json")};
  });
}

std::vector<std::string> Pipeline::pca() {
  return stage("pca", [&] {
    auto records = require_records(path("split.records.jsonl"), "split");
    auto proj = pca_project(records, config_.pca_include_material);
    export_projection(proj, path("pca.csv"), path("pca.svg"));
    return std::vector<std::string>{path("pca.csv"), path("pca.svg")};
  });
}

std::vector<std::string> Pipeline::run_all() {
  std::vector<std::string> all;
  for (auto fn : {&Pipeline::ingest, &Pipeline::label, &Pipeline::augment, &Pipeline::split,
                  &Pipeline::gen_baseline, &Pipeline::gen_prompt, &Pipeline::eval, &Pipeline::pca}) {
    auto files = (this->*fn)();
    all.insert(all.end(), files.begin(), files.end());
  }
  return all;
}

TrainIndex Pipeline::load_index() const {
  if (fs::exists(path("index.json"))) return TrainIndex::load(path("index.json"));
  auto records = require_records(path("split.records.jsonl"), "split");
  std::vector<Record> train;
  for (auto& r : records) {
    if (r.split == Split::Train) train.push_back(std::move(r));
  }
  return TrainIndex::build(train);
}

}  // namespace lpbf
