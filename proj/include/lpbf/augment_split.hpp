#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lpbf/core.hpp"
#include "lpbf/criteria.hpp"

namespace lpbf {

enum class GridMode { Cartesian, Paired };

struct AugmentGrid {
  std::vector<double> hatch_values;  // um
  std::vector<double> layer_values;  // um
  GridMode mode = GridMode::Cartesian;

  // 20 values 0, 50, ..., 950 um on both axes, Cartesian.
  static AugmentGrid default_grid();
  // `count` values start, start + step, ...
  static AugmentGrid uniform(double start, double step, std::size_t count,
                             GridMode mode = GridMode::Cartesian);

  std::size_t cardinality() const;
};

// Throws InvalidGrid.
void validate(const AugmentGrid& grid);

// One derived record per grid point, hatch-major for Cartesian grids. The
// parent is not modified or included.
std::vector<Record> augment_lof(const Record& record, const AugmentGrid& grid,
                                const CriteriaConfig& cfg);

struct SplitSpec {
  double train_fraction = 0.75;
  double test_fraction = 0.15;
  double validation_fraction = 0.10;
  std::uint64_t seed = 42;
};

// Throws InvalidSplitSpec.
void validate(const SplitSpec& spec);

struct SplitCounts {
  std::size_t train = 0;
  std::size_t test = 0;
  std::size_t validation = 0;

  bool operator==(const SplitCounts&) const = default;
};

// Floors of each fraction, leftover handed out one at a time to train, test,
// then validation.
SplitCounts split_counts(std::size_t n, const SplitSpec& spec);

using RecordGroups = std::map<std::string, std::vector<Record>>;

RecordGroups group_by_source(std::vector<Record> records);

// Within each group independently: order by id, seeded Fisher-Yates, then
// contiguous train/test/validation runs per split_counts. The group's seed is
// derived from (spec.seed, group key), so groups do not influence each
// other. Output is ordered by id.
std::vector<Record> split_records(const RecordGroups& groups, const SplitSpec& spec);

}  // namespace lpbf
