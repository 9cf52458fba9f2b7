#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lpbf/criteria.hpp"

using namespace lpbf;

namespace {

ProcessParameters params_with(std::optional<double> hatch, std::optional<double> layer) {
  return {"Ti-6Al-4V", 200.0, 500.0, std::nullopt, hatch, layer};
}

}  // namespace

TEST_CASE("keyhole criterion") {
  auto boundary = keyhole_criterion({150, 100, {}});
  CHECK(boundary.value == Verdict::Defect);
  CHECK(boundary.ratio == 1.5);

  auto avoided = keyhole_criterion({151, 100, {}});
  CHECK(avoided.value == Verdict::NoDefect);
  CHECK(*avoided.ratio == doctest::Approx(1.51).epsilon(1e-15));

  auto square = keyhole_criterion({100, 100, {}});
  CHECK(square.value == Verdict::Defect);
  CHECK(square.ratio == 1.0);

  CHECK_THROWS_AS(keyhole_criterion({0, 100, {}}), Error);
}

TEST_CASE("lack of fusion criterion") {
  auto zero = lof_criterion(params_with(0.0, 0.0), {100, 50, {}});
  CHECK(zero.value == Verdict::NoDefect);
  CHECK(zero.ratio == 0.0);

  auto flagged = lof_criterion(params_with(80.0, 40.0), {100, 50, {}});
  CHECK(flagged.value == Verdict::Defect);
  CHECK(*flagged.ratio == doctest::Approx(1.28).epsilon(1e-12));

  auto equality = lof_criterion(params_with(100.0, 0.0), {100, 50, {}});
  CHECK(equality.value == Verdict::NoDefect);
  CHECK(equality.ratio == 1.0);

  // (5/13)^2 + (12/13)^2 rounds above 1 in doubles; the verdict must not.
  CHECK(lof_criterion(params_with(5.0, 12.0), {13, 13, {}}).value == Verdict::NoDefect);
  CHECK(lof_criterion(params_with(12.0, 10.0), {13, 26, {}}).value == Verdict::NoDefect);

  auto unknown = lof_criterion(params_with(80.0, std::nullopt), {100, 50, {}});
  CHECK(unknown.value == Verdict::Unknown);
  CHECK_FALSE(unknown.ratio);
}

TEST_CASE("balling criterion") {
  auto ok = balling_criterion({100, 50, 300.0});
  CHECK(ok.value == Verdict::NoDefect);
  CHECK(ok.ratio == 3.0);
  auto balled = balling_criterion({100, 50, 400.0});
  CHECK(balled.value == Verdict::Defect);
  CHECK(balled.ratio == 4.0);
  CHECK(balling_criterion({100, 50, {}}) == CriterionOutcome{});
  CHECK(balling_criterion({1.0, 1.0, std::numbers::pi}).value == Verdict::Defect);
}

TEST_CASE("classify") {
  auto all = classify(params_with(80.0, 80.0), {100, 100, 400.0});
  CHECK(all == DefectLabels(true, true, true));
  CHECK_FALSE(all.none());

  // Layer 40 over depth 100 contributes only 0.16, so the sum is 0.8.
  auto shallow_layer = classify(params_with(80.0, 40.0), {100, 100, 400.0});
  CHECK(shallow_layer == DefectLabels(true, false, true));
  CHECK(*lof_criterion(params_with(80.0, 40.0), {100, 100, {}}).ratio == doctest::Approx(0.8));

  auto clean = classify(params_with(0.0, 0.0), {200, 100, 300.0});
  CHECK(clean.none());

  auto collapsed = classify(params_with(0.0, 0.0), {200, 100, {}});
  CHECK(collapsed.none());

  CriteriaConfig reject;
  reject.unknown_policy = UnknownPolicy::Reject;
  try {
    classify(params_with(0.0, 0.0), {200, 100, {}}, reject);
    FAIL("expected IndeterminateCriterion");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IndeterminateCriterion);
  }
  CHECK_THROWS_AS(classify(params_with(0.0, 0.0), {200, -1, 300.0}), Error);

  CriteriaConfig bad;
  bad.balling_ratio_threshold = 0;
  CHECK_THROWS_AS(classify(params_with(0.0, 0.0), {200, 100, 300.0}, bad), Error);
}

TEST_CASE("balling threshold is configurable") {
  CriteriaConfig cfg;
  cfg.balling_ratio_threshold = 5.0;
  CHECK(balling_criterion({100, 50, 400.0}, cfg).value == Verdict::NoDefect);
}

TEST_CASE("monotonicity in hatch spacing and depth") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dim(10, 300), gap(0, 400);
  for (int i = 0; i < 2000; ++i) {
    MeltPoolDims d{dim(rng), dim(rng), {}};
    double h = gap(rng), t = gap(rng);
    bool before = lof_criterion(params_with(h, t), d).value == Verdict::Defect;
    bool after = lof_criterion(params_with(h + gap(rng), t), d).value == Verdict::Defect;
    CHECK((!before || after));

    bool kh_before = keyhole_criterion(d).value == Verdict::Defect;
    MeltPoolDims deeper = d;
    deeper.depth += dim(rng);
    bool kh_after = keyhole_criterion(deeper).value == Verdict::Defect;
    CHECK((!kh_before || kh_after));
  }
}

TEST_CASE("scale invariance") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> small(1, 40);
  // Powers of two keep every ratio bit-identical, boundaries included.
  for (double c : {0.25, 0.5, 2.0, 8.0, 1024.0}) {
    for (int i = 0; i < 500; ++i) {
      MeltPoolDims d{double(small(rng)), double(small(rng)), double(small(rng))};
      auto p = params_with(double(small(rng) - 1), double(small(rng) - 1));
      MeltPoolDims ds{d.width * c, d.depth * c, *d.length * c};
      auto ps = params_with(*p.hatch_spacing * c, *p.layer_height * c);
      CHECK(classify(p, d) == classify(ps, ds));
    }
  }
  // Arbitrary factors away from the thresholds.
  std::uniform_real_distribution<double> factor(0.01, 100.0);
  std::uniform_real_distribution<double> dim(10, 300);
  for (int i = 0; i < 2000; ++i) {
    MeltPoolDims d{dim(rng), dim(rng), dim(rng) * 3};
    auto p = params_with(dim(rng) / 2, dim(rng) / 4);
    double kr = d.width / d.depth;
    double lr = std::pow(*p.hatch_spacing / d.width, 2) + std::pow(*p.layer_height / d.depth, 2);
    double br = *d.length / d.width;
    if (std::fabs(kr - 1.5) < 1e-6 || std::fabs(lr - 1) < 1e-6 || std::fabs(br - std::numbers::pi) < 1e-6) continue;
    double c = factor(rng);
    MeltPoolDims ds{d.width * c, d.depth * c, *d.length * c};
    auto ps = params_with(*p.hatch_spacing * c, *p.layer_height * c);
    CHECK(classify(p, d) == classify(ps, ds));
  }
}

TEST_CASE("integer grid agrees with an exact oracle") {
  // Integer cross-multiplication: no rounding anywhere.
  auto oracle = [](int w, int d, int l, int h, int t) {
    bool keyhole = 2 * w <= 3 * d;
    long long lhs = 1LL * h * h * d * d + 1LL * t * t * w * w;
    bool lof = lhs > 1LL * w * w * d * d;
    bool balling = double(l) >= std::numbers::pi * w;
    return DefectLabels(keyhole, lof, balling);
  };
  std::size_t disagreements = 0;
  for (int w = 1; w <= 40; w += 3)
    for (int d = 1; d <= 40; d += 3)
      for (int l = 1; l <= 120; l += 7)
        for (int h = 0; h <= 40; h += 4)
          for (int t = 0; t <= 40; t += 4)
            disagreements += classify(params_with(h, t), {double(w), double(d), double(l)}) != oracle(w, d, l, h, t);
  CHECK(disagreements == 0);
}
