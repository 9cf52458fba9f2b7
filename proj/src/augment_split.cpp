#include "lpbf/augment_split.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace lpbf {

AugmentGrid AugmentGrid::default_grid() { return uniform(0.0, 50.0, 20); }

AugmentGrid AugmentGrid::uniform(double start, double step, std::size_t count,
                                 GridMode mode) {
  AugmentGrid grid;
  grid.mode = mode;
  for (std::size_t i = 0; i < count; ++i) {
    double v = start + step * static_cast<double>(i);
    grid.hatch_values.push_back(v);
    grid.layer_values.push_back(v);
  }
  return grid;
}

std::size_t AugmentGrid::cardinality() const {
  return mode == GridMode::Cartesian ? hatch_values.size() * layer_values.size()
                                     : hatch_values.size();
}

void validate(const AugmentGrid& grid) {
  auto check_axis = [](const std::vector<double>& values, const char* name) {
    if (values.empty()) {
      throw Error(ErrorCode::InvalidGrid, std::string(name) + " values are empty");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i]) || values[i] < 0) {
        throw Error(ErrorCode::InvalidGrid, std::string(name) + " values must be >= 0");
      }
      if (i > 0 && !(values[i] > values[i - 1])) {
        throw Error(ErrorCode::InvalidGrid,
                    std::string(name) + " values must be strictly increasing");
      }
    }
  };
  check_axis(grid.hatch_values, "hatch");
  check_axis(grid.layer_values, "layer");
  if (grid.mode == GridMode::Paired &&
      grid.hatch_values.size() != grid.layer_values.size()) {
    throw Error(ErrorCode::InvalidGrid, "paired grid needs equal-length axes");
  }
}

std::vector<Record> augment_lof(const Record& record, const AugmentGrid& grid,
                                const CriteriaConfig& cfg) {
  validate(grid);
  if (!record.dims) {
    throw Error(ErrorCode::MissingDims, "record " + record.id + " has no melt pool dims");
  }
  std::vector<Record> out;
  out.reserve(grid.cardinality());
  auto emit = [&](double hatch, double layer) {
    Record derived = record;
    derived.params.hatch_spacing = hatch;
    derived.params.layer_height = layer;
    derived.source = Source::Augmented;
    derived.split = Split::Unassigned;
    derived.parent_id = record.id;
    derived.id = record.id + "/h" + format_number(hatch) + "/t" + format_number(layer);
    derived.labels = classify(derived.params, *derived.dims, cfg);
    out.push_back(std::move(derived));
  };
  if (grid.mode == GridMode::Cartesian) {
    for (double h : grid.hatch_values) {
      for (double t : grid.layer_values) emit(h, t);
    }
  } else {
    for (std::size_t i = 0; i < grid.hatch_values.size(); ++i) {
      emit(grid.hatch_values[i], grid.layer_values[i]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

void validate(const SplitSpec& spec) {
  double fractions[] = {spec.train_fraction, spec.test_fraction,
                        spec.validation_fraction};
  for (double f : fractions) {
    if (!std::isfinite(f) || f <= 0) {
      throw Error(ErrorCode::InvalidSplitSpec, "split fractions must be positive");
    }
  }
  double sum = fractions[0] + fractions[1] + fractions[2];
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidSplitSpec, "split fractions must sum to 1");
  }
}

SplitCounts split_counts(std::size_t n, const SplitSpec& spec) {
  validate(spec);
  // Nudge before flooring so 0.15 * 20 = 2.9999999999999996 still floors
  // to 3.
  auto floor_of = [n](double f) {
    return static_cast<std::size_t>(std::floor(f * static_cast<double>(n) + 1e-9));
  };
  SplitCounts c{floor_of(spec.train_fraction), floor_of(spec.test_fraction),
                floor_of(spec.validation_fraction)};
  std::size_t* slots[] = {&c.train, &c.test, &c.validation};
  std::size_t assigned = c.train + c.test + c.validation;
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++*slots[i % 3];
  return c;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  // Largest multiple of bound representable; reject above it.
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                        std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace

RecordGroups group_by_source(std::vector<Record> records) {
  RecordGroups groups;
  for (auto& rec : records) groups[rec.group].push_back(std::move(rec));
  return groups;
}

std::vector<Record> split_records(const RecordGroups& groups, const SplitSpec& spec) {
  validate(spec);
  std::vector<Record> out;
  for (const auto& [key, members] : groups) {
    if (members.empty()) {
      throw Error(ErrorCode::EmptyGroup, "split group '" + key + "' is empty");
    }
    std::vector<Record> shuffled = members;
    std::sort(shuffled.begin(), shuffled.end(),
              [](const Record& a, const Record& b) { return a.id < b.id; });
    std::mt19937_64 rng(splitmix64(spec.seed ^ splitmix64(fnv1a(key))));
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::size_t j = bounded(rng, i);
      std::swap(shuffled[i - 1], shuffled[j]);
    }
    SplitCounts counts = split_counts(shuffled.size(), spec);
    for (std::size_t i = 0; i < shuffled.size(); ++i) {
      if (i < counts.train) {
        shuffled[i].split = Split::Train;
      } else if (i < counts.train + counts.test) {
        shuffled[i].split = Split::Test;
      } else {
        shuffled[i].split = Split::Validation;
      }
    }
    for (auto& rec : shuffled) out.push_back(std::move(rec));
  }
  std::sort(out.begin(), out.end(),
            [](const Record& a, const Record& b) { return a.id < b.id; });
  return out;
}

}  // namespace lpbf
