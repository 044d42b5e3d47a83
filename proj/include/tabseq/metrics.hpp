#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace tabseq {

struct MetricReport {
  double accuracy = 0.0;
  double auc = 0.0;
  Eigen::MatrixXi confusion;  // C x C, rows = true class
  std::vector<double> precision, recall;

  std::string summary(const std::vector<std::string>& class_names) const;
};

// Fraction of exact matches. Throws on empty input.
double accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred);

// Mann-Whitney AUC with 0.5 tie credit, computed via sorted average ranks in
// O(n log n). Throws std::invalid_argument when only one class is present.
double roc_auc_binary(const std::vector<int>& y_true, const std::vector<double>& scores);

// Unweighted mean of one-vs-rest binary AUCs over classes present in
// y_true; absent classes are skipped with a warning.
double roc_auc_macro(const std::vector<int>& y_true, const Eigen::MatrixXd& prob);

Eigen::MatrixXi confusion_matrix(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                                 int num_classes);

// Thresholds (binary: prob of class 1 at 0.5) or argmaxes probabilities,
// then fills the full report.
MetricReport evaluate_classification(const std::vector<int>& y_true, const Eigen::MatrixXd& prob,
                                     int num_classes);

}  // namespace tabseq
