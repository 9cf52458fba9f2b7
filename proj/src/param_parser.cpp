#include "lpbf/param_parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "embedded_data.hpp"

namespace lpbf {

std::string_view to_string(Field f) {
  switch (f) {
    case Field::Material: return "material";
    case Field::Power: return "power";
    case Field::Velocity: return "velocity";
    case Field::BeamDiameter: return "beam_diameter";
    case Field::HatchSpacing: return "hatch_spacing";
    case Field::LayerHeight: return "layer_height";
  }
  return "";
}

std::string_view to_string(Confidence c) {
  switch (c) {
    case Confidence::Exact: return "Exact";
    case Confidence::Inferred: return "Inferred";
    case Confidence::Missing: return "Missing";
  }
  return "";
}

bool ParseResult::all_missing() const {
  return std::all_of(confidence.begin(), confidence.end(),
                     [](Confidence c) { return c == Confidence::Missing; });
}

namespace {

std::optional<double>& numeric_slot(ProcessParameters& p, Field f) {
  switch (f) {
    case Field::Power: return p.power;
    case Field::Velocity: return p.velocity;
    case Field::BeamDiameter: return p.beam_diameter;
    case Field::HatchSpacing: return p.hatch_spacing;
    default: return p.layer_height;
  }
}

Dimension field_dimension(Field f) {
  switch (f) {
    case Field::Power: return Dimension::Power;
    case Field::Velocity: return Dimension::Speed;
    default: return Dimension::Length;
  }
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Occurrences of `needle` in `haystack` (both lowercase) on word boundaries.
template <typename Fn>
void for_each_word_match(std::string_view haystack, std::string_view needle, Fn&& fn) {
  if (needle.empty()) return;
  std::size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
    std::size_t end = pos + needle.size();
    bool left_ok = pos == 0 || !is_word_char(haystack[pos - 1]) || !is_word_char(needle.front());
    bool right_ok =
        end == haystack.size() || !is_word_char(haystack[end]) || !is_word_char(needle.back());
    if (left_ok && right_ok) fn(pos, end);
    ++pos;
  }
}

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct QuantityToken {
  Span span;
  double value = 0.0;
  std::optional<Unit> unit;
  bool bound = false;
};

struct KeywordToken {
  Span span;
  Field field;
};

bool unit_char(unsigned char c) { return std::isalpha(c) || c == '/' || c >= 0x80; }

std::vector<QuantityToken> scan_quantities(std::string_view text, const Span& masked) {
  std::vector<QuantityToken> out;
  std::size_t i = 0;
  while (i < text.size()) {
    auto c = static_cast<unsigned char>(text[i]);
    bool starts = std::isdigit(c) && (i == 0 || (!is_word_char(text[i - 1]) && text[i - 1] != '.'));
    if (!starts) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    if (j + 1 < text.size() && text[j] == '.' && std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
      ++j;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    }
    QuantityToken q;
    q.span = {i, j};
    std::from_chars(text.data() + i, text.data() + j, q.value);
    std::size_t k = j;
    while (k < text.size() && text[k] == ' ') ++k;
    std::size_t u = k;
    while (u < text.size() && unit_char(static_cast<unsigned char>(text[u]))) ++u;
    // A trailing '/' belongs to punctuation, not the unit.
    std::size_t unit_end = u;
    while (unit_end > k && text[unit_end - 1] == '/') --unit_end;
    if (unit_end > k) {
      auto unit = parse_unit(text.substr(k, unit_end - k));
      bool boundary = unit_end == text.size() || !is_word_char(text[unit_end]);
      if (unit && *unit != Unit::dimensionless && boundary) {
        q.unit = unit;
        q.span.end = unit_end;
      }
    }
    i = q.span.end;
    bool inside_material = q.span.begin >= masked.begin && q.span.begin < masked.end;
    if (!inside_material) out.push_back(q);
  }
  return out;
}

// True when `between` holds at most `max_words` words and no sentence break.
bool short_gap(std::string_view between, int max_words) {
  int words = 0;
  bool in_word = false;
  for (char ch : between) {
    if (ch == '.' || ch == '?' || ch == '!' || ch == ';') return false;
    if (is_word_char(ch)) {
      if (!in_word && ++words > max_words) return false;
      in_word = true;
    } else {
      in_word = false;
    }
  }
  return true;
}

bool only_spaces(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t'; });
}

constexpr int kKeywordWindowWords = 3;

}  // namespace

// ---------------------------------------------------------------------------

std::vector<std::pair<Field, std::string>> Lexicon::parse_keywords(std::string_view text) {
  std::vector<std::pair<Field, std::string>> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto tab = view.find('\t');
    if (tab == std::string_view::npos) {
      throw Error(ErrorCode::InvalidConfig, "lexicon line needs field<TAB>phrase: " + line);
    }
    auto name = trim(view.substr(0, tab));
    auto phrase = to_lower(trim(view.substr(tab + 1)));
    std::optional<Field> field;
    for (Field f : {Field::BeamDiameter, Field::HatchSpacing, Field::LayerHeight}) {
      if (to_string(f) == name) field = f;
    }
    if (!field || phrase.empty()) {
      throw Error(ErrorCode::InvalidConfig, "bad lexicon entry: " + line);
    }
    out.emplace_back(*field, phrase);
  }
  return out;
}

Lexicon Lexicon::load(const std::string& materials_path, const std::string& keywords_path) {
  std::ifstream in(keywords_path);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot read " + keywords_path);
  std::stringstream buf;
  buf << in.rdbuf();
  return {MaterialTable::load(materials_path), parse_keywords(buf.str())};
}

const Lexicon& Lexicon::builtin() {
  static const Lexicon lexicon{MaterialTable::builtin(), parse_keywords(embedded::kLexiconTsv)};
  return lexicon;
}

// ---------------------------------------------------------------------------

ParseResult parse_baseline(std::string_view text, const Lexicon& lexicon) {
  constexpr std::string_view kSep = "[SEP]";
  std::vector<std::string_view> slots;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(kSep, start);
    if (pos == std::string_view::npos) {
      slots.push_back(text.substr(start));
      break;
    }
    slots.push_back(text.substr(start, pos - start));
    start = pos + kSep.size();
  }
  if (slots.size() != 6) {
    throw Error(ErrorCode::SeparatorCountMismatch,
                "expected 5 [SEP] separators, found " + std::to_string(slots.size() - 1));
  }

  ParseResult result;
  std::string_view material = trim(slots[0]);
  if (!material.empty()) {
    result.params.material = lexicon.materials.canonicalize(material);
    result.confidence[0] = Confidence::Exact;
  }
  for (std::size_t i = 1; i < 6; ++i) {
    auto field = static_cast<Field>(i);
    std::string_view slot = trim(slots[i]);
    if (slot.empty()) continue;
    double value = 0.0;
    auto res = std::from_chars(slot.data(), slot.data() + slot.size(), value);
    if (res.ec != std::errc() || !std::isfinite(value)) {
      throw Error(ErrorCode::MalformedNumber,
                  std::string(to_string(field)) + " slot is not a number: '" + std::string(slot) + "'");
    }
    std::string_view unit_text = trim(slot.substr(res.ptr - slot.data()));
    auto unit = parse_unit(unit_text);
    if (!unit) {
      throw Error(ErrorCode::MalformedNumber,
                  std::string(to_string(field)) + " slot has unknown unit '" + std::string(unit_text) + "'");
    }
    Unit target = canonical_unit(field_dimension(field));
    Confidence conf = Confidence::Exact;
    if (*unit == Unit::dimensionless) {
      unit = target;
      conf = Confidence::Inferred;
    }
    numeric_slot(result.params, field) = normalize_quantity({value, *unit}, target).value;
    result.confidence[i] = conf;
  }
  return result;
}

ParseResult parse_prompt(std::string_view text, const Lexicon& lexicon) {
  ParseResult result;
  std::string lower = to_lower(text);

  // Material: longest alias, earliest on ties.
  Span material_span{text.size(), text.size()};
  std::string material;
  for (const auto& [spelling, canonical] : lexicon.materials.spellings()) {
    std::string needle = to_lower(spelling);
    for_each_word_match(lower, needle, [&](std::size_t b, std::size_t e) {
      std::size_t best_len = material_span.end - material_span.begin;
      bool better = (e - b) > best_len || ((e - b) == best_len && b < material_span.begin);
      if (material.empty() || better) {
        material_span = {b, e};
        material = canonical;
      }
    });
  }

  std::vector<KeywordToken> keywords;
  for (const auto& [field, phrase] : lexicon.keywords) {
    for_each_word_match(lower, phrase, [&](std::size_t b, std::size_t e) {
      if (b < material_span.end && e > material_span.begin) return;
      keywords.push_back({{b, e}, field});
    });
  }
  std::sort(keywords.begin(), keywords.end(), [](const KeywordToken& a, const KeywordToken& b) {
    if (a.span.begin != b.span.begin) return a.span.begin < b.span.begin;
    return a.span.end > b.span.end;
  });
  {
    std::vector<KeywordToken> kept;
    for (const auto& kw : keywords) {
      if (!kept.empty() && kw.span.begin < kept.back().span.end) continue;
      kept.push_back(kw);
    }
    keywords = std::move(kept);
  }

  auto quantities = scan_quantities(text, material_span);
  auto bind = [&](Field field, QuantityToken& q, Confidence conf) -> bool {
    auto& slot = numeric_slot(result.params, field);
    if (slot) return false;
    Unit target = canonical_unit(field_dimension(field));
    Unit unit = q.unit.value_or(target);
    slot = normalize_quantity({q.value, unit}, target).value;
    result.confidence[static_cast<std::size_t>(field)] = conf;
    q.bound = true;
    return true;
  };

  // 1. Unit-anchored power and velocity.
  for (auto& q : quantities) {
    if (!q.unit) continue;
    Dimension dim = dimension_of(*q.unit);
    if (dim == Dimension::Power) bind(Field::Power, q, Confidence::Exact);
    if (dim == Dimension::Speed) bind(Field::Velocity, q, Confidence::Exact);
  }

  // 2. Keyword-anchored lengths. A length quantity directly in front of a
  // keyword belongs to it before any look-ahead from an earlier keyword.
  auto is_length = [](const QuantityToken& q) {
    return q.unit && dimension_of(*q.unit) == Dimension::Length;
  };
  std::vector<std::optional<std::size_t>> prefix(keywords.size());
  std::vector<bool> prefix_claimed(quantities.size(), false);
  for (std::size_t k = 0; k < keywords.size(); ++k) {
    // Last quantity ending at or before the keyword.
    auto it = std::partition_point(quantities.begin(), quantities.end(), [&](const QuantityToken& q) {
      return q.span.end <= keywords[k].span.begin;
    });
    if (it == quantities.begin()) continue;
    std::size_t qi = static_cast<std::size_t>(std::prev(it) - quantities.begin());
    const auto& q = quantities[qi];
    if (q.bound || !is_length(q)) continue;
    if (!only_spaces(std::string_view(text).substr(q.span.end, keywords[k].span.begin - q.span.end))) continue;
    prefix[k] = qi;
    prefix_claimed[qi] = true;
  }
  for (std::size_t k = 0; k < keywords.size(); ++k) {
    const auto& kw = keywords[k];
    std::optional<std::size_t> chosen = prefix[k];
    if (!chosen) {
      auto it = std::partition_point(quantities.begin(), quantities.end(), [&](const QuantityToken& q) {
        return q.span.begin < kw.span.end;
      });
      if (it != quantities.end()) {
        std::size_t qi = static_cast<std::size_t>(it - quantities.begin());
        const auto& q = *it;
        bool next_keyword_first = k + 1 < keywords.size() && keywords[k + 1].span.begin < q.span.begin;
        bool material_between = material_span.begin >= kw.span.end && material_span.begin < q.span.begin;
        bool unit_fits = !q.unit || is_length(q);
        if (!q.bound && !prefix_claimed[qi] && unit_fits && !next_keyword_first && !material_between &&
            short_gap(std::string_view(text).substr(kw.span.end, q.span.begin - kw.span.end),
                      kKeywordWindowWords)) {
          chosen = qi;
        }
      }
    }
    if (!chosen) continue;
    auto& q = quantities[*chosen];
    bind(kw.field, q, q.unit ? Confidence::Exact : Confidence::Inferred);
  }

  // 3. Material.
  if (!material.empty()) {
    result.params.material = material;
    result.confidence[0] = Confidence::Exact;
  }

  if (result.all_missing()) {
    result.unmatched_spans.emplace_back(0, std::string(text));
    return result;
  }
  for (const auto& q : quantities) {
    if (q.bound) continue;
    result.unmatched_spans.emplace_back(q.span.begin,
                                        std::string(text.substr(q.span.begin, q.span.end - q.span.begin)));
  }
  return result;
}

}  // namespace lpbf
