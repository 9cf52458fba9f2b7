#include "lpbf/core.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "embedded_data.hpp"

namespace lpbf {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IncompatibleUnits: return "IncompatibleUnits";
    case ErrorCode::UnknownUnit: return "UnknownUnit";
    case ErrorCode::EmptyMaterial: return "EmptyMaterial";
    case ErrorCode::InvalidParameters: return "InvalidParameters";
    case ErrorCode::NonPositiveDimension: return "NonPositiveDimension";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IndeterminateCriterion: return "IndeterminateCriterion";
    case ErrorCode::FileUnreadable: return "FileUnreadable";
    case ErrorCode::HeaderMismatch: return "HeaderMismatch";
    case ErrorCode::MalformedNumber: return "MalformedNumber";
    case ErrorCode::MissingDims: return "MissingDims";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::InvalidSplitSpec: return "InvalidSplitSpec";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::MissingLabels: return "MissingLabels";
    case ErrorCode::MissingSplit: return "MissingSplit";
    case ErrorCode::BadPlaceholder: return "BadPlaceholder";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::MalformedTemplate: return "MalformedTemplate";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SeparatorCountMismatch: return "SeparatorCountMismatch";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::DegenerateFeatures: return "DegenerateFeatures";
    case ErrorCode::MalformedSnapshot: return "MalformedSnapshot";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::BindFailure: return "BindFailure";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------

Dimension dimension_of(Unit unit) {
  switch (unit) {
    case Unit::W:
    case Unit::kW:
      return Dimension::Power;
    case Unit::mm_per_s:
    case Unit::m_per_s:
      return Dimension::Speed;
    case Unit::um:
    case Unit::mm:
      return Dimension::Length;
    case Unit::dimensionless:
      return Dimension::None;
  }
  return Dimension::None;
}

std::string_view unit_symbol(Unit unit) {
  switch (unit) {
    case Unit::W: return "W";
    case Unit::kW: return "kW";
    case Unit::mm_per_s: return "mm/s";
    case Unit::m_per_s: return "m/s";
    case Unit::um: return "um";
    case Unit::mm: return "mm";
    case Unit::dimensionless: return "";
  }
  return "";
}

std::optional<Unit> parse_unit(std::string_view text) {
  static const std::pair<std::string_view, Unit> kSpellings[] = {
      {"W", Unit::W},           {"w", Unit::W},
      {"watt", Unit::W},        {"watts", Unit::W},
      {"kW", Unit::kW},         {"kw", Unit::kW},
      {"mm/s", Unit::mm_per_s}, {"mm/sec", Unit::mm_per_s},
      {"m/s", Unit::m_per_s},   {"m/sec", Unit::m_per_s},
      {"um", Unit::um},         {"\xC2\xB5m", Unit::um},
      {"\xCE\xBCm", Unit::um},  {"micron", Unit::um},
      {"microns", Unit::um},    {"micrometer", Unit::um},
      {"micrometers", Unit::um}, {"micrometre", Unit::um},
      {"micrometres", Unit::um}, {"mm", Unit::mm},
      {"", Unit::dimensionless},
  };
  for (const auto& [spelling, unit] : kSpellings) {
    if (spelling == text) return unit;
  }
  return std::nullopt;
}

Unit canonical_unit(Dimension dim) {
  switch (dim) {
    case Dimension::Power: return Unit::W;
    case Dimension::Speed: return Unit::mm_per_s;
    case Dimension::Length: return Unit::um;
    case Dimension::None: return Unit::dimensionless;
  }
  return Unit::dimensionless;
}

namespace {

// Factor from `unit` to the canonical unit of its dimension.
double to_canonical_factor(Unit unit) {
  switch (unit) {
    case Unit::kW: return 1000.0;
    case Unit::m_per_s: return 1000.0;
    case Unit::mm: return 1000.0;
    default: return 1.0;
  }
}

// value * 10^exp10 applied to the shortest decimal form of value, so that
// 1.09 m/s becomes exactly 1090 mm/s rather than 1090.0000000000002.
double scale_decimal(double value, int exp10) {
  if (value == 0.0 || !std::isfinite(value)) return value;
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific);
  std::string text(buf, res.ptr);
  auto e = text.find('e');
  int exponent = std::stoi(text.substr(e + 1)) + exp10;
  text = text.substr(0, e + 1) + std::to_string(exponent);
  double out = 0.0;
  std::from_chars(text.data(), text.data() + text.size(), out);
  return out;
}

}  // namespace

Quantity normalize_quantity(const Quantity& q, Unit target) {
  if (dimension_of(q.unit) != dimension_of(target)) {
    throw Error(ErrorCode::IncompatibleUnits,
                "cannot convert '" + std::string(unit_symbol(q.unit)) +
                    "' to '" + std::string(unit_symbol(target)) + "'");
  }
  if (q.unit == target) return q;
  double from = to_canonical_factor(q.unit);
  double to = to_canonical_factor(target);
  return {scale_decimal(q.value, from > to ? 3 : -3), target};
}

// ---------------------------------------------------------------------------

void validate(const ProcessParameters& p, bool require_material) {
  if (require_material && trim(p.material).empty()) {
    throw Error(ErrorCode::EmptyMaterial, "material is empty");
  }
  auto check = [](const std::optional<double>& v, const char* name,
                  bool strictly_positive) {
    if (!v) return;
    bool ok = std::isfinite(*v) && (strictly_positive ? *v > 0 : *v >= 0);
    if (!ok) {
      throw Error(ErrorCode::InvalidParameters,
                  std::string(name) + " out of range: " + format_number(*v));
    }
  };
  check(p.power, "power", true);
  check(p.velocity, "velocity", true);
  check(p.beam_diameter, "beam_diameter", false);
  check(p.hatch_spacing, "hatch_spacing", false);
  check(p.layer_height, "layer_height", false);
}

void validate(const MeltPoolDims& d) {
  auto bad = [](double v) { return !std::isfinite(v) || v <= 0; };
  if (bad(d.width) || bad(d.depth) || (d.length && bad(*d.length))) {
    throw Error(ErrorCode::NonPositiveDimension,
                "melt pool dimensions must be positive (width=" +
                    format_number(d.width) + ", depth=" +
                    format_number(d.depth) + ")");
  }
}

DefectLabels DefectLabels::from_vector(const std::array<bool, kCount>& v) {
  DefectLabels out(v[0], v[1], v[2]);
  if (out.none() != v[3]) {
    throw Error(ErrorCode::InvalidParameters,
                "label vector violates none == !(keyhole|lof|balling)");
  }
  return out;
}

std::string_view to_string(Source s) {
  switch (s) {
    case Source::ClassificationTable: return "ClassificationTable";
    case Source::GeometryTable: return "GeometryTable";
    case Source::Simulation: return "Simulation";
    case Source::Augmented: return "Augmented";
  }
  return "";
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Unassigned: return "unassigned";
    case Split::Train: return "train";
    case Split::Test: return "test";
    case Split::Validation: return "validation";
  }
  return "";
}

Source parse_source(std::string_view s) {
  for (Source v : {Source::ClassificationTable, Source::GeometryTable,
                   Source::Simulation, Source::Augmented}) {
    if (to_string(v) == s) return v;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown source kind: " + std::string(s));
}

Split parse_split(std::string_view s) {
  std::string lower = to_lower(s);
  for (Split v : {Split::Unassigned, Split::Train, Split::Test,
                  Split::Validation}) {
    if (to_string(v) == lower) return v;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown split: " + std::string(s));
}

// ---------------------------------------------------------------------------

namespace {

std::string lookup_key(std::string_view raw) {
  std::string key;
  for (unsigned char c : raw) {
    if (std::isalnum(c)) key.push_back(static_cast<char>(std::tolower(c)));
  }
  return key;
}

std::string title_case(std::string_view raw) {
  std::string out;
  bool at_word_start = true;
  for (char ch : raw) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
      at_word_start = true;
      continue;
    }
    char lower = static_cast<char>(std::tolower(c));
    out.push_back(at_word_start ? static_cast<char>(std::toupper(c)) : lower);
    at_word_start = false;
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

}  // namespace

MaterialTable MaterialTable::parse(std::string_view text) {
  MaterialTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      constexpr std::string_view kVersion = "# version:";
      if (view.substr(0, kVersion.size()) == kVersion) {
        auto v = parse_number(trim(view.substr(kVersion.size())));
        if (v) table.version_ = static_cast<int>(*v);
      }
      continue;
    }
    auto tab = view.find('\t');
    if (tab == std::string_view::npos) {
      throw Error(ErrorCode::InvalidConfig,
                  "material table line " + std::to_string(line_no) +
                      ": expected alias<TAB>canonical");
    }
    table.add(trim(view.substr(0, tab)), trim(view.substr(tab + 1)));
  }
  return table;
}

MaterialTable MaterialTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const MaterialTable& MaterialTable::builtin() {
  static const MaterialTable table = parse(embedded::kMaterialsTsv);
  return table;
}

void MaterialTable::add(std::string_view alias, std::string_view canonical) {
  std::string canon(canonical);
  for (std::string_view spelling : {alias, canonical}) {
    std::string key = lookup_key(spelling);
    if (key.empty()) continue;
    auto [it, inserted] = by_key_.emplace(key, canon);
    if (!inserted && it->second != canon) {
      throw Error(ErrorCode::InvalidConfig,
                  "alias '" + std::string(spelling) + "' maps to both " +
                      it->second + " and " + canon);
    }
    std::pair<std::string, std::string> entry{std::string(spelling), canon};
    if (std::find(spellings_.begin(), spellings_.end(), entry) ==
        spellings_.end()) {
      spellings_.push_back(std::move(entry));
    }
  }
}

std::optional<std::string> MaterialTable::lookup(std::string_view raw) const {
  auto it = by_key_.find(lookup_key(raw));
  if (it == by_key_.end()) return std::nullopt;
  return it->second;
}

std::string MaterialTable::canonicalize(std::string_view raw) const {
  std::string_view trimmed = trim(raw);
  if (trimmed.empty()) {
    throw Error(ErrorCode::EmptyMaterial, "material is empty");
  }
  if (auto hit = lookup(trimmed)) return *hit;
  return title_case(trimmed);
}

std::vector<std::string> MaterialTable::canonical_ids() const {
  std::vector<std::string> ids;
  for (const auto& [key, canon] : by_key_) ids.push_back(canon);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::string canonicalize_material(std::string_view raw) {
  return MaterialTable::builtin().canonicalize(raw);
}

// ---------------------------------------------------------------------------

std::string format_number(double value) {
  if (value == 0.0) return "0";  // also folds -0
  char buf[64];
  auto fmt = std::fabs(value) < 1e7 ? std::chars_format::fixed
                                    : std::chars_format::general;
  auto res = std::to_chars(buf, buf + sizeof buf, value, fmt);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_number(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

std::string_view trim(std::string_view s) {
  auto is_space = [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace lpbf
