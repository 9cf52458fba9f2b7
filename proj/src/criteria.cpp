#include "lpbf/criteria.hpp"

#include <cmath>
#include <string>

namespace lpbf {

void validate(const CriteriaConfig& cfg) {
  auto ok = [](double v) { return std::isfinite(v) && v > 0; };
  if (!ok(cfg.keyhole_ratio_threshold) || !ok(cfg.lof_limit) ||
      !ok(cfg.balling_ratio_threshold)) {
    throw Error(ErrorCode::InvalidConfig, "criteria thresholds must be > 0");
  }
}

CriterionOutcome keyhole_criterion(const MeltPoolDims& dims,
                                   const CriteriaConfig& cfg) {
  validate(dims);
  double ratio = dims.width / dims.depth;
  bool avoided = dims.width > cfg.keyhole_ratio_threshold * dims.depth;
  return {avoided ? Verdict::NoDefect : Verdict::Defect, ratio};
}

CriterionOutcome lof_criterion(const ProcessParameters& params,
                               const MeltPoolDims& dims,
                               const CriteriaConfig& cfg) {
  validate(dims);
  if (!params.hatch_spacing || !params.layer_height) return {};
  double h = *params.hatch_spacing / dims.width;
  double t = *params.layer_height / dims.depth;
  double ratio = h * h + t * t;
  // Decided on the cross-multiplied form: with integer-valued inputs it is
  // exact, so 3-4-5 style equalities do not tip over on rounding.
  double hd = *params.hatch_spacing * dims.depth;
  double tw = *params.layer_height * dims.width;
  double wd = dims.width * dims.depth;
  bool avoided = hd * hd + tw * tw <= cfg.lof_limit * (wd * wd);
  return {avoided ? Verdict::NoDefect : Verdict::Defect, ratio};
}

CriterionOutcome balling_criterion(const MeltPoolDims& dims,
                                   const CriteriaConfig& cfg) {
  validate(dims);
  if (!dims.length) return {};
  double ratio = *dims.length / dims.width;
  bool avoided = *dims.length < cfg.balling_ratio_threshold * dims.width;
  return {avoided ? Verdict::NoDefect : Verdict::Defect, ratio};
}

namespace {

bool collapse(const CriterionOutcome& outcome, const char* name,
              UnknownPolicy policy) {
  if (outcome.value == Verdict::Unknown) {
    if (policy == UnknownPolicy::Reject) {
      throw Error(ErrorCode::IndeterminateCriterion,
                  std::string(name) + " criterion is indeterminate: missing operand");
    }
    return false;
  }
  return outcome.value == Verdict::Defect;
}

}  // namespace

DefectLabels classify(const ProcessParameters& params, const MeltPoolDims& dims,
                      const CriteriaConfig& cfg) {
  validate(cfg);
  bool keyhole = collapse(keyhole_criterion(dims, cfg), "keyhole", cfg.unknown_policy);
  bool lof = collapse(lof_criterion(params, dims, cfg), "lack_of_fusion",
                      cfg.unknown_policy);
  bool balling = collapse(balling_criterion(dims, cfg), "balling", cfg.unknown_policy);
  return {keyhole, lof, balling};
}

}  // namespace lpbf
