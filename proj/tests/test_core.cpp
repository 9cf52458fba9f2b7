#include <doctest.h>

#include <random>

#include "lpbf/core.hpp"

using namespace lpbf;

TEST_CASE("normalize_quantity scales metric prefixes exactly") {
  CHECK(normalize_quantity({1.0, Unit::mm}, Unit::um) == Quantity{1000.0, Unit::um});
  CHECK(normalize_quantity({2.0, Unit::m_per_s}, Unit::mm_per_s) == Quantity{2000.0, Unit::mm_per_s});
  CHECK(normalize_quantity({0.2, Unit::kW}, Unit::W).value == 200.0);
  CHECK(normalize_quantity({1.09, Unit::m_per_s}, Unit::mm_per_s).value == 1090.0);
  CHECK(normalize_quantity({250.0, Unit::um}, Unit::mm).value == 0.25);
  CHECK(normalize_quantity({7.5, Unit::W}, Unit::W).value == 7.5);
}

TEST_CASE("normalize_quantity rejects dimension mismatch") {
  try {
    normalize_quantity({100.0, Unit::W}, Unit::um);
    FAIL("expected IncompatibleUnits");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IncompatibleUnits);
  }
  CHECK_THROWS_AS(normalize_quantity({1.0, Unit::mm_per_s}, Unit::kW), Error);
}

TEST_CASE("unit conversions compose to identity") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(1e-3, 1e5);
  const std::pair<Unit, Unit> pairs[] = {
      {Unit::mm, Unit::um}, {Unit::m_per_s, Unit::mm_per_s}, {Unit::kW, Unit::W}};
  for (int i = 0; i < 5000; ++i) {
    double v = dist(rng);
    for (auto [a, b] : pairs) {
      for (auto [from, to] : {std::pair{a, b}, std::pair{b, a}}) {
        double back = normalize_quantity(normalize_quantity({v, from}, to), from).value;
        CHECK(std::fabs(back - v) <= 1e-12 * v);
      }
    }
  }
}

TEST_CASE("parse_unit accepts common spellings") {
  CHECK(parse_unit("\xC2\xB5m") == Unit::um);
  CHECK(parse_unit("microns") == Unit::um);
  CHECK(parse_unit("m/sec") == Unit::m_per_s);
  CHECK(parse_unit("kW") == Unit::kW);
  CHECK_FALSE(parse_unit("furlong"));
}

TEST_CASE("canonicalize_material") {
  CHECK(canonicalize_material("ti-6al-4v") == "Ti-6Al-4V");
  CHECK(canonicalize_material("Stainless Steel 316L") == "SS316L");
  CHECK(canonicalize_material("  316l  ") == "SS316L");
  CHECK(canonicalize_material("inconel 718") == "IN718");
  CHECK(canonicalize_material("mystery   alloy x9") == "Mystery Alloy X9");

  try {
    canonicalize_material("   ");
    FAIL("expected EmptyMaterial");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyMaterial);
  }
}

TEST_CASE("canonicalize_material is idempotent") {
  const auto& table = MaterialTable::builtin();
  for (const auto& [spelling, canonical] : table.spellings()) {
    std::string once = table.canonicalize(spelling);
    CHECK(once == canonical);
    CHECK(table.canonicalize(once) == once);
  }
  for (const char* raw : {"weird-alloy 12", "NEW STEEL", "a  b   c"}) {
    std::string once = canonicalize_material(raw);
    CHECK(canonicalize_material(once) == once);
  }
}

TEST_CASE("material table rejects conflicting aliases") {
  CHECK_THROWS_AS(MaterialTable::parse("A1\tX\nA1\tY\n"), Error);
  auto t = MaterialTable::parse("# version: 3\nfoo bar\tFB\n");
  CHECK(t.version() == 3);
  CHECK(t.canonicalize("FOO-BAR") == "FB");
}

TEST_CASE("DefectLabels keeps none derived") {
  CHECK(DefectLabels().none());
  DefectLabels both(true, true, false);
  CHECK_FALSE(both.none());
  CHECK(both.to_vector() == std::array<bool, 4>{true, true, false, false});
  CHECK_THROWS_AS(DefectLabels::from_vector({true, false, false, true}), Error);
  CHECK_THROWS_AS(DefectLabels::from_vector({false, false, false, false}), Error);
}

TEST_CASE("parameter and dimension validation") {
  ProcessParameters p{"Ti-6Al-4V", 200.0, 500.0, std::nullopt, 0.0, 0.0};
  CHECK_NOTHROW(validate(p));
  p.power = 0.0;
  CHECK_THROWS_AS(validate(p), Error);
  p.power = 200.0;
  p.hatch_spacing = -1.0;
  CHECK_THROWS_AS(validate(p), Error);
  CHECK_THROWS_AS(validate(ProcessParameters{}), Error);
  CHECK_NOTHROW(validate(ProcessParameters{}, false));

  CHECK_THROWS_AS(validate(MeltPoolDims{0.0, 10.0, {}}), Error);
  CHECK_THROWS_AS(validate(MeltPoolDims{10.0, 10.0, -1.0}), Error);
}

TEST_CASE("format_number is shortest fixed decimal") {
  CHECK(format_number(200.0) == "200");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.51) == "1.51");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(1234567.25) == "1234567.25");
  CHECK(format_number(0.000125) == "0.000125");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(0.0, 1e7);
  for (int i = 0; i < 2000; ++i) {
    double v = dist(rng);
    auto text = format_number(v);
    CHECK(text.find('e') == std::string::npos);
    CHECK(parse_number(text) == v);
  }
}
