#pragma once

#include <array>
#include <string>
#include <vector>

#include "lpbf/core.hpp"

namespace lpbf {

struct LabelMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // true positives + false negatives
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

struct EvalReport {
  double subset_accuracy = 0.0;
  double hamming_loss = 0.0;
  std::array<LabelMetrics, DefectLabels::kCount> per_label{};
  std::size_t n_examples = 0;
};

// Subset (exact-match) accuracy is the headline number; ratios with a zero
// denominator are reported as 0. Throws EmptyInput, LengthMismatch.
EvalReport evaluate(const std::vector<DefectLabels>& predictions,
                    const std::vector<DefectLabels>& truths);

std::string to_json(const EvalReport& report);

// Symmetric eigendecomposition by cyclic Jacobi rotations. Eigenvalues
// descending; eigenvectors are the columns of `vectors` (row-major n x n).
struct SymmetricEigen {
  std::vector<double> values;
  std::vector<double> vectors;
  std::size_t n = 0;
};
SymmetricEigen jacobi_eigen(std::vector<double> matrix, std::size_t n);

struct PcaProjection {
  std::array<std::vector<double>, 2> components;  // over standardized features
  std::array<double, 2> explained_variance{};
  std::vector<double> all_variances;  // full spectrum, descending
  struct Point {
    double x = 0.0;
    double y = 0.0;
    DefectLabels labels;
  };
  std::vector<Point> points;
};

// Rows are points. Features are z-scored (population variance; constant
// columns contribute zeros), the covariance is decomposed, and each component
// is signed so its largest-magnitude coordinate is positive. Throws
// TooFewPoints (< 3 rows or < 2 columns), DegenerateFeatures (all rows equal).
PcaProjection pca_project(const std::vector<std::vector<double>>& features,
                          const std::vector<DefectLabels>& labels);

// Five numeric process features (missing values imputed at the column mean)
// optionally followed by one-hot material columns. Records need labels.
PcaProjection pca_project(const std::vector<Record>& records, bool include_material = false);

// Writes `x,y,keyhole,lof,balling,none` rows to csv_path and an SVG scatter
// colored by dominant label to svg_path. Throws IoError.
void export_projection(const PcaProjection& proj, const std::string& csv_path,
                       const std::string& svg_path);

}  // namespace lpbf
