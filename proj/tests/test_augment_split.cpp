#include <doctest.h>

#include <algorithm>
#include <set>

#include "lpbf/augment_split.hpp"

using namespace lpbf;

namespace {

Record geometry_record(std::string id, double width, double depth) {
  Record r;
  r.id = std::move(id);
  r.params = {"SS316L", 200.0, 800.0, 80.0, 100.0, 30.0};
  r.dims = MeltPoolDims{width, depth, 300.0};
  r.labels = classify(r.params, *r.dims);
  r.group = "geo";
  return r;
}

std::vector<Record> numbered(const std::string& group, std::size_t n) {
  std::vector<Record> out;
  for (std::size_t i = 0; i < n; ++i) {
    Record r = geometry_record(group + ":" + std::to_string(1000 + i), 150, 70);
    r.group = group;
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("default grid yields 400 records per parent") {
  auto grid = AugmentGrid::default_grid();
  CHECK(grid.hatch_values.size() == 20);
  CHECK(grid.hatch_values.back() == 950.0);
  CHECK(grid.cardinality() == 400);
  Record parent = geometry_record("geo:1", 150, 70);
  Record copy = parent;
  auto derived = augment_lof(parent, grid, {});
  CHECK(derived.size() == 400);
  CHECK(parent == copy);

  std::set<std::string> ids;
  for (const auto& d : derived) {
    ids.insert(d.id);
    CHECK(d.parent_id == parent.id);
    CHECK(d.source == Source::Augmented);
    CHECK(d.group == parent.group);
    CHECK(d.params.power == parent.params.power);
    CHECK(d.dims == parent.dims);
    CHECK(d.labels->keyhole() == parent.labels->keyhole());
    CHECK(d.labels->balling() == parent.labels->balling());
  }
  CHECK(ids.size() == 400);
}

TEST_CASE("augmented lack-of-fusion set matches brute force") {
  const double w = 150, dp = 70;
  auto grid = AugmentGrid::default_grid();
  auto derived = augment_lof(geometry_record("geo:1", w, dp), grid, {});
  std::set<std::pair<double, double>> expected, got;
  for (double h : grid.hatch_values) {
    for (double t : grid.layer_values) {
      if ((h / w) * (h / w) + (t / dp) * (t / dp) > 1.0) expected.insert({h, t});
    }
  }
  for (const auto& d : derived) {
    if (d.labels->lack_of_fusion()) got.insert({*d.params.hatch_spacing, *d.params.layer_height});
  }
  CHECK(got == expected);
  CHECK(!expected.empty());
}

TEST_CASE("paired and uniform grids") {
  auto paired = AugmentGrid::uniform(0, 10, 5, GridMode::Paired);
  CHECK(paired.cardinality() == 5);
  auto derived = augment_lof(geometry_record("geo:1", 150, 70), paired, {});
  REQUIRE(derived.size() == 5);
  CHECK(derived[3].params.hatch_spacing == 30.0);
  CHECK(derived[3].params.layer_height == 30.0);

  AugmentGrid bad{{10, 20}, {10}, GridMode::Paired};
  CHECK_THROWS_AS(validate(bad), Error);
  AugmentGrid negative{{-1}, {10}, GridMode::Cartesian};
  CHECK_THROWS_AS(validate(negative), Error);
  AugmentGrid empty{{}, {10}, GridMode::Cartesian};
  CHECK_THROWS_AS(validate(empty), Error);
}

TEST_CASE("augment needs dims") {
  Record r = geometry_record("geo:1", 150, 70);
  r.dims.reset();
  CHECK_THROWS_AS(augment_lof(r, AugmentGrid::default_grid(), {}), Error);
}

TEST_CASE("split counts") {
  SplitSpec spec;
  CHECK(split_counts(20, spec) == SplitCounts{15, 3, 2});
  CHECK(split_counts(1, spec) == SplitCounts{1, 0, 0});
  CHECK(split_counts(2, spec) == SplitCounts{2, 0, 0});
  CHECK(split_counts(1000, spec) == SplitCounts{750, 150, 100});
  CHECK(split_counts(100, spec) == SplitCounts{75, 15, 10});
  for (std::size_t n = 0; n < 500; ++n) {
    auto c = split_counts(n, spec);
    CHECK(c.train + c.test + c.validation == n);
    CHECK(c.train >= static_cast<std::size_t>(0.75 * n - 1e-9));
  }
}

TEST_CASE("split spec validation") {
  CHECK_THROWS_AS(validate(SplitSpec{0.5, 0.2, 0.2, 1}), Error);
  CHECK_THROWS_AS(validate(SplitSpec{1.1, -0.1, 0.0, 1}), Error);
  CHECK_NOTHROW(validate(SplitSpec{0.8, 0.1, 0.1, 1}));
}

TEST_CASE("split assigns every record exactly once") {
  RecordGroups groups;
  groups["a"] = numbered("a", 20);
  groups["b"] = numbered("b", 7);
  auto out = split_records(groups, {});
  CHECK(out.size() == 27);
  CHECK(std::is_sorted(out.begin(), out.end(),
                       [](const Record& x, const Record& y) { return x.id < y.id; }));
  std::size_t train = 0, test = 0, val = 0;
  for (const auto& r : out) {
    if (r.group != "a") continue;
    train += r.split == Split::Train;
    test += r.split == Split::Test;
    val += r.split == Split::Validation;
  }
  CHECK(train == 15);
  CHECK(test == 3);
  CHECK(val == 2);
  for (const auto& r : out) CHECK(r.split != Split::Unassigned);
}

TEST_CASE("split is deterministic and insensitive to input order") {
  RecordGroups groups;
  groups["a"] = numbered("a", 40);
  auto first = split_records(groups, {});
  std::reverse(groups["a"].begin(), groups["a"].end());
  auto second = split_records(groups, {});
  CHECK(first == second);

  SplitSpec other;
  other.seed = 43;
  CHECK(split_records(groups, other) != first);
}

TEST_CASE("adding a group leaves existing assignments alone") {
  RecordGroups groups;
  groups["a"] = numbered("a", 30);
  auto before = split_records(groups, {});
  groups["b"] = numbered("b", 12);
  auto after = split_records(groups, {});
  std::vector<Record> only_a;
  for (const auto& r : after) {
    if (r.group == "a") only_a.push_back(r);
  }
  CHECK(only_a == before);
}

TEST_CASE("empty group is an error") {
  RecordGroups groups;
  groups["a"] = {};
  CHECK_THROWS_AS(split_records(groups, {}), Error);
}

TEST_CASE("group_by_source") {
  auto a = numbered("a", 2);
  auto b = numbered("b", 3);
  a.insert(a.end(), b.begin(), b.end());
  auto g = group_by_source(a);
  CHECK(g.size() == 2);
  CHECK(g["b"].size() == 3);
}
