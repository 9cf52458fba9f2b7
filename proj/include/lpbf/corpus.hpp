#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lpbf/core.hpp"

namespace lpbf {

struct PromptTemplate {
  int id = 0;
  std::string text;
  Split split = Split::Unassigned;
};

struct CorpusExample {
  std::string text;
  std::array<bool, DefectLabels::kCount> labels{};
  Split split = Split::Unassigned;
  std::string record_id;
  std::optional<int> template_id;

  bool operator==(const CorpusExample&) const = default;
};

enum class CorpusFormat { Baseline, Prompt };

// `{material} [SEP] {power} W [SEP] {velocity} mm/s [SEP] {beam_diameter} um
// [SEP] {hatch_spacing} um [SEP] {layer_height} um`, a missing value leaving
// its whole slot empty.
std::string baseline_text(const ProcessParameters& params);

// Throws MissingLabels / MissingSplit.
CorpusExample render_baseline(const Record& record);

// The six placeholder names, in Baseline order.
const std::array<std::string_view, 6>& placeholder_names();

// Substitutes `{name}` with value and unit; missing values become "unknown".
std::string fill_template(std::string_view text, const ProcessParameters& params);

// `id<TAB>text` per line; blank lines and '#' comments skipped. Templates are
// split by id rank with the record split policy (75/15/10 for 100).
std::vector<PromptTemplate> parse_templates(std::string_view text);
std::vector<PromptTemplate> load_templates(const std::string& path);
// The 100 templates shipped in data/templates.tsv.
const std::vector<PromptTemplate>& builtin_templates();
std::string_view builtin_templates_text();

// One example per template in the record's split.
std::vector<CorpusExample> render_prompts(const Record& record,
                                          const std::vector<PromptTemplate>& templates);

// Newline-delimited JSON, sorted by (record_id, template_id). Throws
// EmptyInput / IoError.
void write_corpus(std::vector<CorpusExample> examples, const std::string& path,
                  CorpusFormat format);
std::string corpus_line(const CorpusExample& example);
std::vector<CorpusExample> read_corpus(const std::string& path);

}  // namespace lpbf
