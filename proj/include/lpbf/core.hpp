#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lpbf {

enum class ErrorCode {
  IncompatibleUnits,
  UnknownUnit,
  EmptyMaterial,
  InvalidParameters,
  NonPositiveDimension,
  InvalidConfig,
  IndeterminateCriterion,
  FileUnreadable,
  HeaderMismatch,
  MalformedNumber,
  MissingDims,
  InvalidGrid,
  InvalidSplitSpec,
  EmptyGroup,
  MissingLabels,
  MissingSplit,
  BadPlaceholder,
  DuplicateId,
  MalformedTemplate,
  IoError,
  SeparatorCountMismatch,
  EmptyTrainingSet,
  InvalidK,
  LengthMismatch,
  EmptyInput,
  TooFewPoints,
  DegenerateFeatures,
  MalformedSnapshot,
  ConfigInvalid,
  BindFailure,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// ---------------------------------------------------------------------------
// Quantities and units
// ---------------------------------------------------------------------------

enum class Unit { W, kW, mm_per_s, m_per_s, um, mm, dimensionless };

enum class Dimension { Power, Speed, Length, None };

Dimension dimension_of(Unit unit);
std::string_view unit_symbol(Unit unit);

// Accepts the symbols produced by unit_symbol plus common spellings
// ("µm", "microns", "m/sec", ...).
std::optional<Unit> parse_unit(std::string_view text);

struct Quantity {
  double value = 0.0;
  Unit unit = Unit::dimensionless;

  bool operator==(const Quantity&) const = default;
};

// Throws IncompatibleUnits when the two units measure different dimensions.
Quantity normalize_quantity(const Quantity& q, Unit target);

// Canonical units used by every downstream computation: W, mm/s, um.
Unit canonical_unit(Dimension dim);

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

// One L-PBF build condition. Numeric fields are in canonical units
// (W, mm/s, um). An empty material means "not given"; records always carry a
// canonical material, parse results may not.
struct ProcessParameters {
  std::string material;
  std::optional<double> power;          // W
  std::optional<double> velocity;       // mm/s
  std::optional<double> beam_diameter;  // um
  std::optional<double> hatch_spacing;  // um
  std::optional<double> layer_height;   // um

  bool operator==(const ProcessParameters&) const = default;

  bool fully_specified() const {
    return !material.empty() && power && velocity && beam_diameter &&
           hatch_spacing && layer_height;
  }
};

// Throws InvalidParameters on a broken invariant. `require_material` is off
// for partially parsed queries.
void validate(const ProcessParameters& p, bool require_material = true);

struct MeltPoolDims {
  double width = 0.0;  // um
  double depth = 0.0;  // um
  std::optional<double> length;

  bool operator==(const MeltPoolDims&) const = default;
};

// Throws NonPositiveDimension.
void validate(const MeltPoolDims& d);

// Multi-label defect vector. `none` is always derived from the other three.
class DefectLabels {
 public:
  static constexpr std::size_t kCount = 4;
  static constexpr std::array<std::string_view, kCount> kNames = {
      "keyhole", "lack_of_fusion", "balling", "none"};

  DefectLabels() = default;
  DefectLabels(bool keyhole, bool lack_of_fusion, bool balling)
      : keyhole_(keyhole), lack_of_fusion_(lack_of_fusion), balling_(balling) {}

  static DefectLabels none_only() { return {}; }

  // Rejects vectors whose `none` flag disagrees with the defect flags.
  static DefectLabels from_vector(const std::array<bool, kCount>& v);

  bool keyhole() const { return keyhole_; }
  bool lack_of_fusion() const { return lack_of_fusion_; }
  bool balling() const { return balling_; }
  bool none() const { return !(keyhole_ || lack_of_fusion_ || balling_); }

  // Ordered [keyhole, lack_of_fusion, balling, none].
  std::array<bool, kCount> to_vector() const {
    return {keyhole_, lack_of_fusion_, balling_, none()};
  }
  bool operator[](std::size_t i) const { return to_vector()[i]; }

  bool operator==(const DefectLabels&) const = default;

 private:
  bool keyhole_ = false;
  bool lack_of_fusion_ = false;
  bool balling_ = false;
};

enum class Source { ClassificationTable, GeometryTable, Simulation, Augmented };
enum class Split { Unassigned, Train, Test, Validation };

std::string_view to_string(Source s);
std::string_view to_string(Split s);
Source parse_source(std::string_view s);
Split parse_split(std::string_view s);

struct Record {
  std::string id;
  ProcessParameters params;
  std::optional<MeltPoolDims> dims;
  std::optional<DefectLabels> labels;
  Source source = Source::GeometryTable;
  Split split = Split::Unassigned;
  // Source file the record (or its augmentation parent) came from; this is
  // the split group.
  std::string group;
  std::optional<std::string> parent_id;

  bool operator==(const Record&) const = default;
};

// ---------------------------------------------------------------------------
// Materials
// ---------------------------------------------------------------------------

// Alias table mapping spelling variants to canonical material ids. Lookup
// keys ignore case, whitespace and punctuation.
class MaterialTable {
 public:
  MaterialTable() = default;

  // Tab-separated `alias<TAB>canonical` lines; '#' starts a comment.
  static MaterialTable parse(std::string_view text);
  static MaterialTable load(const std::string& path);
  // The table shipped in data/materials.tsv.
  static const MaterialTable& builtin();

  void add(std::string_view alias, std::string_view canonical);

  std::optional<std::string> lookup(std::string_view raw) const;

  // Throws EmptyMaterial on blank input. Unknown materials are trimmed,
  // whitespace-collapsed and title-cased.
  std::string canonicalize(std::string_view raw) const;

  // Surface spellings (aliases and canonical ids) for free-text matching.
  const std::vector<std::pair<std::string, std::string>>& spellings() const {
    return spellings_;
  }

  std::vector<std::string> canonical_ids() const;

  int version() const { return version_; }

 private:
  std::unordered_map<std::string, std::string> by_key_;
  std::vector<std::pair<std::string, std::string>> spellings_;
  int version_ = 0;
};

std::string canonicalize_material(std::string_view raw);

// ---------------------------------------------------------------------------
// Text helpers shared by the renderers and parsers
// ---------------------------------------------------------------------------

// Shortest decimal that round-trips; fixed notation below 1e7.
std::string format_number(double value);

// Strict full-string parse of a decimal number; nullopt on any junk.
std::optional<double> parse_number(std::string_view text);

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);

}  // namespace lpbf
