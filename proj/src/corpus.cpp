#include "lpbf/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "embedded_data.hpp"
#include "lpbf/augment_split.hpp"

namespace lpbf {

namespace {

constexpr std::string_view kSep = " [SEP] ";

std::string slot(const std::optional<double>& v, std::string_view unit) {
  if (!v) return "";
  return format_number(*v) + " " + std::string(unit);
}

void require_labels_and_split(const Record& record) {
  if (!record.labels) {
    throw Error(ErrorCode::MissingLabels, "record " + record.id + " has no labels");
  }
  if (record.split == Split::Unassigned) {
    throw Error(ErrorCode::MissingSplit, "record " + record.id + " has no split");
  }
}

std::optional<std::string> placeholder_value(std::string_view name,
                                             const ProcessParameters& p) {
  auto with_unit = [](const std::optional<double>& v,
                      std::string_view unit) -> std::optional<std::string> {
    if (!v) return std::string("unknown");
    return format_number(*v) + " " + std::string(unit);
  };
  if (name == "material") return p.material.empty() ? "unknown" : p.material;
  if (name == "power") return with_unit(p.power, "W");
  if (name == "velocity") return with_unit(p.velocity, "mm/s");
  if (name == "beam_diameter") return with_unit(p.beam_diameter, "um");
  if (name == "hatch_spacing") return with_unit(p.hatch_spacing, "um");
  if (name == "layer_height") return with_unit(p.layer_height, "um");
  return std::nullopt;
}

// Placeholder names used by a template, in order of appearance.
std::vector<std::string> placeholders_in(std::string_view text) {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string_view::npos) {
    auto close = text.find('}', pos);
    if (close == std::string_view::npos) {
      throw Error(ErrorCode::MalformedTemplate, "unterminated placeholder");
    }
    names.emplace_back(text.substr(pos + 1, close - pos - 1));
    pos = close + 1;
  }
  return names;
}

}  // namespace

std::string baseline_text(const ProcessParameters& p) {
  std::string out = p.material;
  out += kSep;
  out += slot(p.power, "W");
  out += kSep;
  out += slot(p.velocity, "mm/s");
  out += kSep;
  out += slot(p.beam_diameter, "um");
  out += kSep;
  out += slot(p.hatch_spacing, "um");
  out += kSep;
  out += slot(p.layer_height, "um");
  return out;
}

CorpusExample render_baseline(const Record& record) {
  require_labels_and_split(record);
  CorpusExample ex;
  ex.text = baseline_text(record.params);
  ex.labels = record.labels->to_vector();
  ex.split = record.split;
  ex.record_id = record.id;
  return ex;
}

const std::array<std::string_view, 6>& placeholder_names() {
  static constexpr std::array<std::string_view, 6> kNames = {
      "material", "power", "velocity", "beam_diameter", "hatch_spacing", "layer_height"};
  return kNames;
}

std::string fill_template(std::string_view text, const ProcessParameters& params) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto open = text.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, open - pos));
    auto close = text.find('}', open);
    if (close == std::string_view::npos) {
      throw Error(ErrorCode::MalformedTemplate, "unterminated placeholder");
    }
    auto name = text.substr(open + 1, close - open - 1);
    auto value = placeholder_value(name, params);
    if (!value) {
      throw Error(ErrorCode::BadPlaceholder, "unknown placeholder {" + std::string(name) + "}");
    }
    out += *value;
    pos = close + 1;
  }
  return out;
}

std::vector<PromptTemplate> parse_templates(std::string_view text) {
  std::vector<PromptTemplate> templates;
  std::set<int> ids;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || trim(line).front() == '#') continue;
    auto tab = line.find('\t');
    auto where = "template line " + std::to_string(line_no);
    if (tab == std::string::npos) {
      throw Error(ErrorCode::MalformedTemplate, where + ": expected id<TAB>text");
    }
    auto id = parse_number(trim(std::string_view(line).substr(0, tab)));
    if (!id || *id != static_cast<int>(*id)) {
      throw Error(ErrorCode::MalformedTemplate, where + ": bad id");
    }
    PromptTemplate t;
    t.id = static_cast<int>(*id);
    t.text = line.substr(tab + 1);
    if (!ids.insert(t.id).second) {
      throw Error(ErrorCode::DuplicateId, where + ": duplicate template id " + std::to_string(t.id));
    }
    std::set<std::string> used;
    for (const auto& name : placeholders_in(t.text)) {
      const auto& names = placeholder_names();
      if (std::find(names.begin(), names.end(), name) == names.end()) {
        throw Error(ErrorCode::BadPlaceholder, where + ": unknown placeholder {" + name + "}");
      }
      used.insert(name);
    }
    for (const char* required : {"material", "power", "velocity"}) {
      if (!used.contains(required)) {
        throw Error(ErrorCode::BadPlaceholder,
                    where + ": missing required placeholder {" + required + "}");
      }
    }
    templates.push_back(std::move(t));
  }
  std::sort(templates.begin(), templates.end(),
            [](const PromptTemplate& a, const PromptTemplate& b) { return a.id < b.id; });
  SplitCounts counts = split_counts(templates.size(), SplitSpec{});
  for (std::size_t i = 0; i < templates.size(); ++i) {
    templates[i].split = i < counts.train                 ? Split::Train
                         : i < counts.train + counts.test ? Split::Test
                                                          : Split::Validation;
  }
  return templates;
}

std::vector<PromptTemplate> load_templates(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_templates(buf.str());
}

std::string_view builtin_templates_text() { return embedded::kTemplatesTsv; }

const std::vector<PromptTemplate>& builtin_templates() {
  static const std::vector<PromptTemplate> templates = parse_templates(embedded::kTemplatesTsv);
  return templates;
}

std::vector<CorpusExample> render_prompts(const Record& record,
                                          const std::vector<PromptTemplate>& templates) {
  require_labels_and_split(record);
  std::vector<CorpusExample> out;
  for (const auto& t : templates) {
    if (t.split != record.split) continue;
    CorpusExample ex;
    ex.text = fill_template(t.text, record.params);
    ex.labels = record.labels->to_vector();
    ex.split = record.split;
    ex.record_id = record.id;
    ex.template_id = t.id;
    out.push_back(std::move(ex));
  }
  return out;
}

std::string corpus_line(const CorpusExample& ex) {
  nlohmann::ordered_json j;
  j["text"] = ex.text;
  j["labels"] = nlohmann::ordered_json::array();
  for (bool b : ex.labels) j["labels"].push_back(b ? 1 : 0);
  j["split"] = std::string(to_string(ex.split));
  j["record_id"] = ex.record_id;
  if (ex.template_id) j["template_id"] = *ex.template_id;
  return j.dump();
}

void write_corpus(std::vector<CorpusExample> examples, const std::string& path,
                  CorpusFormat format) {
  if (examples.empty()) throw Error(ErrorCode::EmptyInput, "refusing to write empty corpus " + path);
  for (const auto& ex : examples) {
    if (format == CorpusFormat::Prompt && !ex.template_id) {
      throw Error(ErrorCode::InvalidParameters, "prompt corpus example without template id");
    }
  }
  std::stable_sort(examples.begin(), examples.end(),
                   [](const CorpusExample& a, const CorpusExample& b) {
                     if (a.record_id != b.record_id) return a.record_id < b.record_id;
                     return a.template_id.value_or(-1) < b.template_id.value_or(-1);
                   });
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  for (const auto& ex : examples) out << corpus_line(ex) << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

std::vector<CorpusExample> read_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot read " + path);
  std::vector<CorpusExample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    CorpusExample ex;
    ex.text = j.at("text").get<std::string>();
    const auto& labels = j.at("labels");
    if (labels.size() != DefectLabels::kCount) {
      throw Error(ErrorCode::InvalidParameters, "label vector must have 4 entries");
    }
    for (std::size_t i = 0; i < DefectLabels::kCount; ++i) ex.labels[i] = labels[i].get<int>() != 0;
    ex.split = parse_split(j.at("split").get<std::string>());
    ex.record_id = j.at("record_id").get<std::string>();
    if (j.contains("template_id")) ex.template_id = j["template_id"].get<int>();
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace lpbf
