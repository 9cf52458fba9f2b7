#pragma once

#include <numbers>
#include <optional>

#include "lpbf/core.hpp"

namespace lpbf {

enum class UnknownPolicy { TreatAsNoDefect, Reject };

struct CriteriaConfig {
  double keyhole_ratio_threshold = 1.5;
  double lof_limit = 1.0;
  double balling_ratio_threshold = std::numbers::pi;
  UnknownPolicy unknown_policy = UnknownPolicy::TreatAsNoDefect;
};

// Throws InvalidConfig unless all thresholds are positive and finite.
void validate(const CriteriaConfig& cfg);

enum class Verdict { Defect, NoDefect, Unknown };

struct CriterionOutcome {
  Verdict value = Verdict::Unknown;
  std::optional<double> ratio;  // left-hand side; absent iff Unknown

  bool operator==(const CriterionOutcome&) const = default;
};

// Keyhole is avoided only when width/depth is strictly above the threshold,
// so a ratio equal to the threshold flags the defect.
CriterionOutcome keyhole_criterion(const MeltPoolDims& dims,
                                   const CriteriaConfig& cfg = {});

// (hatch/width)^2 + (layer/depth)^2 above the limit flags lack of fusion;
// equality is still full melting. Unknown without hatch or layer.
CriterionOutcome lof_criterion(const ProcessParameters& params,
                               const MeltPoolDims& dims,
                               const CriteriaConfig& cfg = {});

// length/width at or above the threshold flags balling. Unknown without
// length.
CriterionOutcome balling_criterion(const MeltPoolDims& dims,
                                   const CriteriaConfig& cfg = {});

// Throws IndeterminateCriterion when a criterion is Unknown under
// UnknownPolicy::Reject.
DefectLabels classify(const ProcessParameters& params, const MeltPoolDims& dims,
                      const CriteriaConfig& cfg = {});

}  // namespace lpbf
