#include "lpbf/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace lpbf {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "power", "velocity", "beam_diameter", "hatch_spacing", "layer_height"};

constexpr int kSnapshotVersion = 1;

bool nearly_equal(double a, double b) {
  return std::fabs(a - b) <= 1e-9 * std::max(std::fabs(a), std::fabs(b));
}

}  // namespace

std::string_view to_string(PredictionMethod m) {
  switch (m) {
    case PredictionMethod::ExactMatch: return "ExactMatch";
    case PredictionMethod::Knn: return "Knn";
    case PredictionMethod::Oracle: return "Oracle";
  }
  return "";
}

RawFeatures raw_features(const ProcessParameters& p) {
  return {p.power, p.velocity, p.beam_diameter, p.hatch_spacing, p.layer_height};
}

TrainIndex TrainIndex::build(const std::vector<Record>& train_records) {
  if (train_records.empty()) {
    throw Error(ErrorCode::EmptyTrainingSet, "cannot build an index from zero records");
  }
  std::vector<IndexEntry> entries;
  entries.reserve(train_records.size());
  for (const auto& rec : train_records) {
    if (!rec.labels) {
      throw Error(ErrorCode::MissingLabels, "training record " + rec.id + " has no labels");
    }
    entries.push_back({rec.id, rec.params.material, raw_features(rec.params), {}, *rec.labels});
  }
  return from_entries(std::move(entries));
}

TrainIndex TrainIndex::from_entries(std::vector<IndexEntry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const IndexEntry& a, const IndexEntry& b) { return a.record_id < b.record_id; });
  TrainIndex index;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& e : entries) {
      if (e.raw[f]) {
        sum += *e.raw[f];
        ++n;
      }
    }
    double mean = n ? sum / static_cast<double>(n) : 0.0;
    double ss = 0.0;
    for (const auto& e : entries) {
      if (e.raw[f]) ss += (*e.raw[f] - mean) * (*e.raw[f] - mean);
    }
    double sd = n ? std::sqrt(ss / static_cast<double>(n)) : 0.0;
    index.mean_[f] = mean;
    index.stddev_[f] = sd < kStdFloor ? 1.0 : sd;
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    entries[i].z = index.standardize(entries[i].raw);
    index.partitions_[entries[i].material].push_back(i);
  }
  index.entries_ = std::move(entries);
  return index;
}

FeatureVector TrainIndex::standardize(const RawFeatures& raw) const {
  FeatureVector z{};
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    z[f] = raw[f] ? (*raw[f] - mean_[f]) / stddev_[f] : 0.0;
  }
  return z;
}

std::string TrainIndex::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "lpbf-train-index";
  j["version"] = kSnapshotVersion;
  j["features"] = kFeatureNames;
  j["mean"] = mean_;
  j["stddev"] = stddev_;
  auto& arr = j["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : entries_) {
    nlohmann::ordered_json entry;
    entry["id"] = e.record_id;
    entry["material"] = e.material;
    auto& raw = entry["raw"] = nlohmann::ordered_json::array();
    for (const auto& v : e.raw) raw.push_back(v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json());
    auto& labels = entry["labels"] = nlohmann::ordered_json::array();
    for (bool b : e.labels.to_vector()) labels.push_back(b ? 1 : 0);
    arr.push_back(std::move(entry));
  }
  return j.dump();
}

TrainIndex TrainIndex::from_json(std::string_view text) {
  try {
    auto j = nlohmann::json::parse(text);
    if (j.at("format") != "lpbf-train-index" || j.at("version") != kSnapshotVersion) {
      throw Error(ErrorCode::MalformedSnapshot, "unsupported index snapshot format/version");
    }
    std::vector<IndexEntry> entries;
    for (const auto& entry : j.at("entries")) {
      IndexEntry e;
      e.record_id = entry.at("id").get<std::string>();
      e.material = entry.at("material").get<std::string>();
      const auto& raw = entry.at("raw");
      if (raw.size() != kFeatureCount) throw Error(ErrorCode::MalformedSnapshot, "bad feature count");
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        if (!raw[f].is_null()) e.raw[f] = raw[f].get<double>();
      }
      std::array<bool, DefectLabels::kCount> labels{};
      const auto& lv = entry.at("labels");
      if (lv.size() != DefectLabels::kCount) throw Error(ErrorCode::MalformedSnapshot, "bad label vector");
      for (std::size_t i = 0; i < DefectLabels::kCount; ++i) labels[i] = lv[i].get<int>() != 0;
      e.labels = DefectLabels::from_vector(labels);
      entries.push_back(std::move(e));
    }
    if (entries.empty()) throw Error(ErrorCode::EmptyTrainingSet, "snapshot has no entries");
    return from_entries(std::move(entries));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedSnapshot, std::string("index snapshot: ") + e.what());
  }
}

void TrainIndex::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << to_json() << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

TrainIndex TrainIndex::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

// ---------------------------------------------------------------------------

Prediction predict(const ProcessParameters& params, const TrainIndex& index, int k) {
  if (k < 1 || k % 2 == 0) {
    throw Error(ErrorCode::InvalidK, "k must be a positive odd integer, got " + std::to_string(k));
  }
  if (index.size() == 0) throw Error(ErrorCode::EmptyTrainingSet, "index is empty");

  std::string material = params.material.empty() ? "" : canonicalize_material(params.material);
  RawFeatures query = raw_features(params);
  bool any_numeric = std::any_of(query.begin(), query.end(), [](const auto& v) { return v.has_value(); });

  if (any_numeric) {
    for (const auto& e : index.entries()) {
      if (!material.empty() && e.material != material) continue;
      bool match = true;
      for (std::size_t f = 0; f < kFeatureCount && match; ++f) {
        if (!query[f]) continue;
        match = e.raw[f] && nearly_equal(*query[f], *e.raw[f]);
      }
      if (match) {
        Prediction p;
        p.labels = e.labels;
        p.method = PredictionMethod::ExactMatch;
        p.neighbors.emplace_back(e.record_id, 0.0);
        return p;
      }
    }
  }

  FeatureVector z = index.standardize(query);
  std::vector<std::size_t> candidates;
  auto part = index.partitions().find(material);
  if (!material.empty() && part != index.partitions().end() &&
      part->second.size() >= static_cast<std::size_t>(k)) {
    candidates = part->second;
  } else {
    candidates.resize(index.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i] = i;
  }

  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(candidates.size());
  for (std::size_t i : candidates) {
    const auto& ez = index.entries()[i].z;
    double d2 = 0.0;
    for (std::size_t f = 0; f < kFeatureCount; ++f) d2 += (ez[f] - z[f]) * (ez[f] - z[f]);
    scored.emplace_back(d2, i);
  }
  std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
  // Entries are id-ordered, so ties on distance break by record id.
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end());

  Prediction p;
  p.method = PredictionMethod::Knn;
  std::array<std::size_t, DefectLabels::kCount> counts{};
  for (std::size_t n = 0; n < take; ++n) {
    const auto& e = index.entries()[scored[n].second];
    p.neighbors.emplace_back(e.record_id, std::sqrt(scored[n].first));
    auto v = e.labels.to_vector();
    for (std::size_t l = 0; l < DefectLabels::kCount; ++l) counts[l] += v[l] ? 1 : 0;
  }
  std::array<double, DefectLabels::kCount> votes{};
  for (std::size_t l = 0; l < DefectLabels::kCount; ++l) {
    votes[l] = static_cast<double>(counts[l]) / static_cast<double>(take);
  }
  p.votes = votes;
  auto majority = [&](std::size_t l) { return 2 * counts[l] > take; };
  p.labels = DefectLabels(majority(0), majority(1), majority(2));
  return p;
}

Prediction predict_with_dims(const ProcessParameters& params, const MeltPoolDims& dims,
                             const CriteriaConfig& cfg) {
  Prediction p;
  p.labels = classify(params, dims, cfg);
  p.method = PredictionMethod::Oracle;
  return p;
}

}  // namespace lpbf
