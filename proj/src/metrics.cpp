#include "tabseq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tabseq {

double accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  if (y_true.empty()) throw std::invalid_argument("accuracy: empty input");
  if (y_true.size() != y_pred.size()) throw std::invalid_argument("accuracy: length mismatch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i)
    if (y_true[i] == y_pred[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(y_true.size());
}

double roc_auc_binary(const std::vector<int>& y_true, const std::vector<double>& scores) {
  if (y_true.size() != scores.size())
    throw std::invalid_argument("roc_auc_binary: length mismatch");
  const std::size_t n = y_true.size();
  std::size_t n_pos = 0;
  for (int y : y_true) n_pos += (y != 0);
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("roc_auc_binary: only one class present, AUC undefined");

  // Mann-Whitney via average ranks; ties share the mean rank, which yields
  // the 0.5-credit convention exactly.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (std::size_t t = i; t <= j; ++t)
      if (y_true[idx[t]] != 0) pos_rank_sum += avg_rank;
    i = j + 1;
  }
  const double u = pos_rank_sum - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double roc_auc_macro(const std::vector<int>& y_true, const Eigen::MatrixXd& prob) {
  if (static_cast<Eigen::Index>(y_true.size()) != prob.rows())
    throw std::invalid_argument("roc_auc_macro: length mismatch");
  const int num_classes = static_cast<int>(prob.cols());
  int present = 0;
  for (int c = 0; c < num_classes; ++c)
    if (std::find(y_true.begin(), y_true.end(), c) != y_true.end()) ++present;
  if (present < 2) throw std::invalid_argument("roc_auc_macro: fewer than two classes present");

  double sum = 0.0;
  int used = 0;
  for (int c = 0; c < num_classes; ++c) {
    std::vector<int> ovr(y_true.size());
    bool any = false;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
      ovr[i] = y_true[i] == c ? 1 : 0;
      any = any || ovr[i];
    }
    if (!any) {
      std::cerr << "[tabseq] roc_auc_macro: class " << c << " absent from y_true, skipped\n";
      continue;
    }
    std::vector<double> scores(y_true.size());
    for (std::size_t i = 0; i < y_true.size(); ++i)
      scores[i] = prob(static_cast<Eigen::Index>(i), c);
    sum += roc_auc_binary(ovr, scores);
    ++used;
  }
  return sum / static_cast<double>(used);
}

Eigen::MatrixXi confusion_matrix(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                                 int num_classes) {
  if (y_true.size() != y_pred.size())
    throw std::invalid_argument("confusion_matrix: length mismatch");
  Eigen::MatrixXi cm = Eigen::MatrixXi::Zero(num_classes, num_classes);
  for (std::size_t i = 0; i < y_true.size(); ++i) cm(y_true[i], y_pred[i]) += 1;
  return cm;
}

MetricReport evaluate_classification(const std::vector<int>& y_true, const Eigen::MatrixXd& prob,
                                     int num_classes) {
  if (y_true.empty()) throw std::invalid_argument("evaluate_classification: empty input");
  const bool binary = num_classes == 2;
  if (binary && prob.cols() != 1)
    throw std::invalid_argument("evaluate_classification: binary expects one probability column");

  std::vector<int> y_pred(y_true.size());
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const Eigen::Index r = static_cast<Eigen::Index>(i);
    if (binary) {
      y_pred[i] = prob(r, 0) >= 0.5 ? 1 : 0;
    } else {
      Eigen::Index best;
      prob.row(r).maxCoeff(&best);
      y_pred[i] = static_cast<int>(best);
    }
  }

  MetricReport report;
  report.accuracy = accuracy(y_true, y_pred);
  if (binary) {
    std::vector<double> scores(y_true.size());
    for (std::size_t i = 0; i < y_true.size(); ++i) scores[i] = prob(static_cast<Eigen::Index>(i), 0);
    report.auc = roc_auc_binary(y_true, scores);
  } else {
    report.auc = roc_auc_macro(y_true, prob);
  }
  report.confusion = confusion_matrix(y_true, y_pred, num_classes);
  report.precision.assign(static_cast<std::size_t>(num_classes), 0.0);
  report.recall.assign(static_cast<std::size_t>(num_classes), 0.0);
  for (int c = 0; c < num_classes; ++c) {
    const double tp = report.confusion(c, c);
    const double col = report.confusion.col(c).sum();
    const double row = report.confusion.row(c).sum();
    report.precision[static_cast<std::size_t>(c)] = col > 0 ? tp / col : 0.0;
    report.recall[static_cast<std::size_t>(c)] = row > 0 ? tp / row : 0.0;
  }
  return report;
}

std::string MetricReport::summary(const std::vector<std::string>& class_names) const {
  std::ostringstream os;
  os << "accuracy: " << accuracy << "\n";
  os << "auc:      " << auc << "\n";
  os << "confusion (rows = true):\n";
  for (Eigen::Index r = 0; r < confusion.rows(); ++r) {
    os << "  " << (r < static_cast<Eigen::Index>(class_names.size())
                       ? class_names[static_cast<std::size_t>(r)]
                       : std::to_string(r));
    for (Eigen::Index c = 0; c < confusion.cols(); ++c) os << "\t" << confusion(r, c);
    os << "\n";
  }
  for (std::size_t c = 0; c < precision.size(); ++c) {
    os << "  class " << (c < class_names.size() ? class_names[c] : std::to_string(c))
       << ": precision " << precision[c] << ", recall " << recall[c] << "\n";
  }
  return os.str();
}

}  // namespace tabseq
