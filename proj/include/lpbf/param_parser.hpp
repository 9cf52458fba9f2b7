#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "lpbf/core.hpp"

namespace lpbf {

enum class Field { Material, Power, Velocity, BeamDiameter, HatchSpacing, LayerHeight };
constexpr std::size_t kFieldCount = 6;
std::string_view to_string(Field f);

enum class Confidence { Exact, Inferred, Missing };
std::string_view to_string(Confidence c);

struct ParseResult {
  ProcessParameters params;
  std::array<Confidence, kFieldCount> confidence{
      Confidence::Missing, Confidence::Missing, Confidence::Missing,
      Confidence::Missing, Confidence::Missing, Confidence::Missing};
  std::vector<std::pair<std::size_t, std::string>> unmatched_spans;

  Confidence of(Field f) const { return confidence[static_cast<std::size_t>(f)]; }
  bool all_missing() const;
};

// Material aliases plus the keyword phrases that anchor length fields.
struct Lexicon {
  MaterialTable materials;
  std::vector<std::pair<Field, std::string>> keywords;

  // `field<TAB>phrase` lines for beam_diameter / hatch_spacing / layer_height.
  static std::vector<std::pair<Field, std::string>> parse_keywords(std::string_view text);
  static Lexicon load(const std::string& materials_path, const std::string& keywords_path);
  static const Lexicon& builtin();
};

// Positional inverse of baseline_text. Throws SeparatorCountMismatch,
// MalformedNumber, IncompatibleUnits.
ParseResult parse_baseline(std::string_view text, const Lexicon& lexicon = Lexicon::builtin());

// Rule-based extraction from free text:
//   1. a number directly followed by a power unit binds power, by a speed
//      unit binds velocity;
//   2. a length quantity directly in front of a keyword ("100 um beam
//      diameter") or a number at most three words after one ("hatch spacing
//      of 80 um") binds that keyword's field, bare numbers taken as um;
//   3. the longest material alias anywhere binds material.
// The first binding per field wins; later candidates and unbound numbers are
// reported in unmatched_spans. Never throws on text content.
ParseResult parse_prompt(std::string_view text, const Lexicon& lexicon = Lexicon::builtin());

}  // namespace lpbf
