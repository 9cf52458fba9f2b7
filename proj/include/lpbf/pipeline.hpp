#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lpbf/augment_split.hpp"
#include "lpbf/corpus.hpp"
#include "lpbf/criteria.hpp"
#include "lpbf/ingest.hpp"
#include "lpbf/param_parser.hpp"
#include "lpbf/predictor.hpp"

namespace lpbf {

struct SourceSpec {
  std::string path;
  SourceSchema schema;
};

struct PipelineConfig {
  std::vector<SourceSpec> sources;
  CriteriaConfig criteria;
  bool augment_enabled = true;
  std::set<Source> augment_sources = {Source::GeometryTable, Source::Simulation};
  AugmentGrid grid = AugmentGrid::default_grid();
  SplitSpec split;
  std::optional<std::string> templates_path;  // builtin set when absent
  std::optional<std::string> materials_path;
  std::optional<std::string> lexicon_path;
  std::string output_dir = "out";
  int k = kDefaultK;
  Split eval_split = Split::Validation;
  bool pca_include_material = false;
};

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> k;
  std::optional<std::string> output_dir;
};

// JSON document; relative paths resolve against the config file's
// directory. Throws ConfigInvalid (unknown keys, bad values, missing files).
PipelineConfig parse_config(std::string_view text, const std::string& base_dir,
                            const ConfigOverrides& overrides = {});
PipelineConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});

// Thrown by a stage with the stage name attached.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.code(), cause.what()), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Each stage reads its predecessor's file under output_dir and writes its
// own stage-named files. Returns the paths written.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  const PipelineConfig& config() const { return config_; }
  std::string path(const std::string& file) const;

  std::vector<std::string> ingest();
  std::vector<std::string> label();
  std::vector<std::string> augment();
  std::vector<std::string> split();
  std::vector<std::string> gen_baseline();
  std::vector<std::string> gen_prompt();
  std::vector<std::string> eval();
  std::vector<std::string> pca();
  // ingest through eval, then pca.
  std::vector<std::string> run_all();

  const Lexicon& lexicon() const { return lexicon_; }
  // Loads index.json when present, otherwise builds from train split records.
  TrainIndex load_index() const;

 private:
  template <typename Fn>
  std::vector<std::string> stage(const char* name, Fn&& fn);
  std::vector<PromptTemplate> templates() const;

  PipelineConfig config_;
  Lexicon lexicon_;
};

}  // namespace lpbf
