#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lpbf/core.hpp"
#include "lpbf/criteria.hpp"

namespace lpbf {

// power, velocity, beam_diameter, hatch_spacing, layer_height
constexpr std::size_t kFeatureCount = 5;
using FeatureVector = std::array<double, kFeatureCount>;
using RawFeatures = std::array<std::optional<double>, kFeatureCount>;

RawFeatures raw_features(const ProcessParameters& p);

struct IndexEntry {
  std::string record_id;
  std::string material;
  RawFeatures raw;
  FeatureVector z{};  // imputed features sit at 0
  DefectLabels labels;
};

// Immutable after construction. Entries are ordered by record id, so the
// index (and every prediction) is independent of input order.
class TrainIndex {
 public:
  static constexpr double kStdFloor = 1e-12;

  // Throws EmptyTrainingSet, MissingLabels.
  static TrainIndex build(const std::vector<Record>& train_records);

  const std::vector<IndexEntry>& entries() const { return entries_; }
  const FeatureVector& mean() const { return mean_; }
  const FeatureVector& stddev() const { return stddev_; }
  const std::map<std::string, std::vector<std::size_t>>& partitions() const { return partitions_; }
  std::size_t size() const { return entries_.size(); }

  // Missing features map to 0 (the train mean).
  FeatureVector standardize(const RawFeatures& raw) const;

  // Versioned JSON snapshot; see README for the layout.
  std::string to_json() const;
  static TrainIndex from_json(std::string_view text);
  void save(const std::string& path) const;
  static TrainIndex load(const std::string& path);

 private:
  static TrainIndex from_entries(std::vector<IndexEntry> entries);

  std::vector<IndexEntry> entries_;
  FeatureVector mean_{};
  FeatureVector stddev_{};
  std::map<std::string, std::vector<std::size_t>> partitions_;
};

inline TrainIndex build_index(const std::vector<Record>& train_records) {
  return TrainIndex::build(train_records);
}

enum class PredictionMethod { ExactMatch, Knn, Oracle };
std::string_view to_string(PredictionMethod m);

struct Prediction {
  DefectLabels labels;
  PredictionMethod method = PredictionMethod::Knn;
  std::vector<std::pair<std::string, double>> neighbors;  // (record id, distance)
  std::optional<std::array<double, DefectLabels::kCount>> votes;
};

constexpr int kDefaultK = 5;

// Exact match on every present field first (material canonicalized, numbers
// within 1e-9 relative), otherwise k-NN in z-space restricted to the query's
// material partition when it holds at least k entries. Each defect flag is a
// strict majority vote; `none` is derived. Throws InvalidK unless k is odd
// and positive.
Prediction predict(const ProcessParameters& params, const TrainIndex& index, int k = kDefaultK);

// Delegates to the criteria.
Prediction predict_with_dims(const ProcessParameters& params, const MeltPoolDims& dims,
                             const CriteriaConfig& cfg = {});

}  // namespace lpbf
