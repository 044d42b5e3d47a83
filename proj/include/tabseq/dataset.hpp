#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "tabseq/permutation.hpp"

namespace tabseq {

// Tabular dataset: n samples x m features plus integer class labels.
// class_names is sorted lexicographically; labels index into it.
struct Dataset {
  Eigen::MatrixXd values;
  std::vector<std::string> feature_names;
  std::vector<int> labels;
  std::vector<std::string> class_names;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  std::vector<int> class_counts() const;
};

struct SplitSpec {
  double train_fraction = 0.70;
  double val_fraction = 0.15;
  double test_fraction = 0.15;
  std::uint64_t seed = 0;
};

struct SplitResult {
  Dataset train, val, test;
};

enum class ScalerMode { minmax01, zscore };

// Per-feature affine transform fitted on the training split only.
// scaled = (x - offset) * scale; constant features get scale = 0.
struct ScalerParams {
  ScalerMode mode = ScalerMode::minmax01;
  Eigen::VectorXd offset;
  Eigen::VectorXd scale;
  bool fitted = false;
};

struct LoadReport {
  std::size_t rows_dropped = 0;  // rows with missing or non-finite cells
};

// Reads an RFC-4180 CSV with a header row. The target column becomes the
// label; drop_columns are removed; every remaining cell must be numeric.
// Rows containing missing values are dropped and counted in `report`.
Dataset load_csv(const std::string& path, const std::string& target_column,
                 const std::vector<std::string>& drop_columns = {},
                 LoadReport* report = nullptr);

// Deterministic per-class split. Split sizes use largest-remainder rounding
// (ties go to the later split); classes with fewer than 3 samples are
// assigned best-effort with a warning.
SplitResult stratified_split(const Dataset& d, const SplitSpec& s);

ScalerParams fit_scaler(const Dataset& train, ScalerMode mode);

// Applies a fitted scaler. In minmax01 mode the result is clamped to
// [-0.5, 1.5] so out-of-range validation/test values stay bounded; training
// values land in [0, 1] and are unaffected.
Dataset apply_scaler(const Dataset& d, const ScalerParams& p);

// Column j of the result is column perm.order[j] of the input.
Dataset apply_permutation(const Dataset& d, const Permutation& perm);

}  // namespace tabseq
