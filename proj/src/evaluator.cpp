#include "lpbf/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "lpbf/predictor.hpp"

namespace lpbf {

EvalReport evaluate(const std::vector<DefectLabels>& predictions,
                    const std::vector<DefectLabels>& truths) {
  if (predictions.size() != truths.size()) {
    throw Error(ErrorCode::LengthMismatch, "predictions and truths differ in length");
  }
  if (predictions.empty()) throw Error(ErrorCode::EmptyInput, "nothing to evaluate");

  EvalReport report;
  report.n_examples = predictions.size();
  std::size_t exact = 0;
  std::size_t flag_errors = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    auto p = predictions[i].to_vector();
    auto t = truths[i].to_vector();
    bool all_match = true;
    for (std::size_t l = 0; l < DefectLabels::kCount; ++l) {
      auto& m = report.per_label[l];
      if (p[l] && t[l]) ++m.tp;
      if (p[l] && !t[l]) ++m.fp;
      if (!p[l] && t[l]) ++m.fn;
      if (!p[l] && !t[l]) ++m.tn;
      if (p[l] != t[l]) {
        all_match = false;
        ++flag_errors;
      }
    }
    exact += all_match ? 1 : 0;
  }
  double n = static_cast<double>(report.n_examples);
  report.subset_accuracy = static_cast<double>(exact) / n;
  report.hamming_loss = static_cast<double>(flag_errors) / (n * DefectLabels::kCount);
  auto ratio = [](std::size_t a, std::size_t b) {
    return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
  };
  for (auto& m : report.per_label) {
    m.support = m.tp + m.fn;
    m.precision = ratio(m.tp, m.tp + m.fp);
    m.recall = ratio(m.tp, m.tp + m.fn);
    m.f1 = (m.precision + m.recall) > 0
               ? 2 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
  }
  return report;
}

std::string to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["metric_note"] =
      "subset_accuracy is exact match over [keyhole, lack_of_fusion, balling, none]; "
      "hamming_loss and per-label scores are reported alongside";
  j["n_examples"] = report.n_examples;
  j["subset_accuracy"] = report.subset_accuracy;
  j["hamming_loss"] = report.hamming_loss;
  auto& per_label = j["per_label"];
  auto& confusion = j["confusion"];
  for (std::size_t l = 0; l < DefectLabels::kCount; ++l) {
    const auto& m = report.per_label[l];
    std::string name(DefectLabels::kNames[l]);
    per_label[name] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
                       {"support", m.support}};
    confusion[name] = {{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn}};
  }
  return j.dump(2);
}

// ---------------------------------------------------------------------------

SymmetricEigen jacobi_eigen(std::vector<double> a, std::size_t n) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  auto at = [n](std::vector<double>& m, std::size_t r, std::size_t c) -> double& { return m[r * n + c]; };

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += at(a, p, q) * at(a, p, q);
    }
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = at(a, p, q);
        if (std::fabs(apq) < 1e-300) continue;
        double theta = (at(a, q, q) - at(a, p, p)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          double akp = at(a, k, p);
          double akq = at(a, k, q);
          at(a, k, p) = c * akp - s * akq;
          at(a, k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = at(a, p, k);
          double aqk = at(a, q, k);
          at(a, p, k) = c * apk - s * aqk;
          at(a, q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double vkp = at(v, k, p);
          double vkq = at(v, k, q);
          at(v, k, p) = c * vkp - s * vkq;
          at(v, k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a[x * n + x] > a[y * n + y]; });
  SymmetricEigen out;
  out.n = n;
  out.values.resize(n);
  out.vectors.resize(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a[order[j] * n + order[j]];
    for (std::size_t i = 0; i < n; ++i) out.vectors[i * n + j] = v[i * n + order[j]];
  }
  return out;
}

PcaProjection pca_project(const std::vector<std::vector<double>>& features,
                          const std::vector<DefectLabels>& labels) {
  std::size_t rows = features.size();
  if (rows < 3) throw Error(ErrorCode::TooFewPoints, "PCA needs at least 3 points");
  std::size_t dim = features.front().size();
  if (dim < 2) throw Error(ErrorCode::TooFewPoints, "PCA needs at least 2 features");
  for (const auto& row : features) {
    if (row.size() != dim) throw Error(ErrorCode::LengthMismatch, "ragged feature matrix");
  }
  if (labels.size() != rows) throw Error(ErrorCode::LengthMismatch, "labels do not match points");
  bool all_same = std::all_of(features.begin(), features.end(),
                              [&](const auto& row) { return row == features.front(); });
  if (all_same) throw Error(ErrorCode::DegenerateFeatures, "all points are identical");

  double n = static_cast<double>(rows);
  std::vector<std::vector<double>> z(rows, std::vector<double>(dim, 0.0));
  for (std::size_t f = 0; f < dim; ++f) {
    double mean = 0.0;
    for (const auto& row : features) mean += row[f];
    mean /= n;
    double ss = 0.0;
    for (const auto& row : features) ss += (row[f] - mean) * (row[f] - mean);
    double sd = std::sqrt(ss / n);
    for (std::size_t r = 0; r < rows; ++r) {
      z[r][f] = sd < TrainIndex::kStdFloor * std::max(1.0, std::fabs(mean))
                    ? 0.0
                    : (features[r][f] - mean) / sd;
    }
  }

  std::vector<double> cov(dim * dim, 0.0);
  for (const auto& row : z) {
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = i; j < dim; ++j) cov[i * dim + j] += row[i] * row[j];
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i; j < dim; ++j) {
      cov[i * dim + j] /= n;
      cov[j * dim + i] = cov[i * dim + j];
    }
  }

  auto eig = jacobi_eigen(cov, dim);
  PcaProjection proj;
  proj.all_variances = eig.values;
  for (std::size_t c = 0; c < 2; ++c) {
    std::vector<double> comp(dim);
    for (std::size_t i = 0; i < dim; ++i) comp[i] = eig.vectors[i * dim + c];
    std::size_t arg = 0;
    for (std::size_t i = 1; i < dim; ++i) {
      if (std::fabs(comp[i]) > std::fabs(comp[arg])) arg = i;
    }
    if (comp[arg] < 0) {
      for (auto& x : comp) x = -x;
    }
    proj.components[c] = std::move(comp);
    // Clamp round-off below zero.
    proj.explained_variance[c] = std::max(0.0, eig.values[c]);
  }
  for (std::size_t r = 0; r < rows; ++r) {
    double x = 0.0, y = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      x += z[r][i] * proj.components[0][i];
      y += z[r][i] * proj.components[1][i];
    }
    proj.points.push_back({x, y, labels[r]});
  }
  return proj;
}

PcaProjection pca_project(const std::vector<Record>& records, bool include_material) {
  std::vector<std::string> materials;
  if (include_material) {
    for (const auto& r : records) materials.push_back(r.params.material);
    std::sort(materials.begin(), materials.end());
    materials.erase(std::unique(materials.begin(), materials.end()), materials.end());
  }
  std::array<double, kFeatureCount> means{};
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& r : records) {
      if (auto v = raw_features(r.params)[f]) {
        sum += *v;
        ++count;
      }
    }
    means[f] = count ? sum / static_cast<double>(count) : 0.0;
  }
  std::vector<std::vector<double>> rows;
  std::vector<DefectLabels> labels;
  for (const auto& r : records) {
    if (!r.labels) throw Error(ErrorCode::MissingLabels, "record " + r.id + " has no labels");
    auto raw = raw_features(r.params);
    std::vector<double> row;
    for (std::size_t f = 0; f < kFeatureCount; ++f) row.push_back(raw[f].value_or(means[f]));
    for (const auto& m : materials) row.push_back(r.params.material == m ? 1.0 : 0.0);
    rows.push_back(std::move(row));
    labels.push_back(*r.labels);
  }
  return pca_project(rows, labels);
}

void export_projection(const PcaProjection& proj, const std::string& csv_path,
                       const std::string& svg_path) {
  std::ofstream csv(csv_path, std::ios::binary | std::ios::trunc);
  if (!csv) throw Error(ErrorCode::IoError, "cannot write " + csv_path);
  csv << "x,y,keyhole,lof,balling,none\n";
  for (const auto& p : proj.points) {
    csv << format_number(p.x) << ',' << format_number(p.y);
    for (bool b : p.labels.to_vector()) csv << ',' << (b ? 1 : 0);
    csv << '\n';
  }
  if (!csv.flush()) throw Error(ErrorCode::IoError, "write failed for " + csv_path);

  std::ofstream svg(svg_path, std::ios::binary | std::ios::trunc);
  if (!svg) throw Error(ErrorCode::IoError, "cannot write " + svg_path);
  constexpr double kSize = 480.0;
  constexpr double kMargin = 40.0;
  double min_x = 0, max_x = 1, min_y = 0, max_y = 1;
  if (!proj.points.empty()) {
    min_x = max_x = proj.points.front().x;
    min_y = max_y = proj.points.front().y;
    for (const auto& p : proj.points) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
  }
  double span_x = max_x - min_x > 0 ? max_x - min_x : 1.0;
  double span_y = max_y - min_y > 0 ? max_y - min_y : 1.0;
  static constexpr const char* kColors[] = {"#d62728", "#1f77b4", "#2ca02c", "#7f7f7f"};
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize + 2 * kMargin
      << "\" height=\"" << kSize + 2 * kMargin << "\">\n";
  svg << "<text x=\"" << kMargin << "\" y=\"20\" font-size=\"12\">feature PC1 vs feature PC2 "
      << "(red keyhole, blue lack of fusion, green balling, grey none)</text>\n";
  for (const auto& p : proj.points) {
    auto v = p.labels.to_vector();
    std::size_t dominant = 3;
    for (std::size_t l = 0; l < 3; ++l) {
      if (v[l]) {
        dominant = l;
        break;
      }
    }
    double cx = kMargin + (p.x - min_x) / span_x * kSize;
    double cy = kMargin + kSize - (p.y - min_y) / span_y * kSize;
    svg << "<circle cx=\"" << format_number(cx) << "\" cy=\"" << format_number(cy)
        << "\" r=\"2\" fill=\"" << kColors[dominant] << "\"/>\n";
  }
  svg << "</svg>\n";
  if (!svg.flush()) throw Error(ErrorCode::IoError, "write failed for " + svg_path);
}

}  // namespace lpbf
