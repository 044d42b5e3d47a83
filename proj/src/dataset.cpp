#include "tabseq/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "tabseq/errors.hpp"

namespace tabseq {

namespace {

// RFC-4180 tokenizer. Quoted fields may contain commas, escaped quotes and
// newlines; records end at an unquoted newline.
std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool any_char = false;

  auto end_field = [&] {
    record.push_back(field);
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
    any_char = false;
  };

  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        any_char = true;
        break;
      case ',':
        end_field();
        any_char = true;
        break;
      case '\r':
        break;
      case '\n':
        if (any_char || !field.empty() || !record.empty()) end_record();
        break;
      default:
        field.push_back(c);
        any_char = true;
        break;
    }
  }
  if (in_quotes) throw DataError("csv: unterminated quoted field");
  if (any_char || !field.empty() || !record.empty()) end_record();
  return records;
}

bool is_missing_token(const std::string& s) {
  if (s.empty()) return true;
  std::string lower;
  for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return lower == "na" || lower == "nan" || lower == "null";
}

// Returns false for missing/non-finite cells, throws on non-numeric text.
bool parse_cell(const std::string& s, const std::string& column, std::size_t row, double* out) {
  if (is_missing_token(s)) return false;
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  while (end && *end != '\0' && std::isspace(static_cast<unsigned char>(*end))) ++end;
  if (end == begin || (end && *end != '\0'))
    throw DataError("csv: non-numeric value '" + s + "' in column '" + column + "' at data row " +
                    std::to_string(row + 1));
  if (!std::isfinite(v)) return false;
  *out = v;
  return true;
}

// Largest-remainder apportionment of n items over fractions; remainder
// seats go to the largest fractional part, ties to the later split.
std::vector<Eigen::Index> largest_remainder_counts(Eigen::Index n,
                                                   const std::vector<double>& fractions) {
  const std::size_t parts = fractions.size();
  std::vector<Eigen::Index> counts(parts);
  std::vector<double> remainders(parts);
  Eigen::Index assigned = 0;
  for (std::size_t i = 0; i < parts; ++i) {
    double exact = static_cast<double>(n) * fractions[i];
    counts[i] = static_cast<Eigen::Index>(std::floor(exact));
    remainders[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::vector<std::size_t> idx(parts);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (remainders[a] != remainders[b]) return remainders[a] > remainders[b];
    return a > b;
  });
  for (Eigen::Index seat = 0; seat < n - assigned; ++seat)
    counts[idx[static_cast<std::size_t>(seat) % parts]] += 1;
  return counts;
}

Dataset take_rows(const Dataset& d, const std::vector<Eigen::Index>& rows) {
  Dataset out;
  out.feature_names = d.feature_names;
  out.class_names = d.class_names;
  out.values.resize(static_cast<Eigen::Index>(rows.size()), d.cols());
  out.labels.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.values.row(static_cast<Eigen::Index>(i)) = d.values.row(rows[i]);
    out.labels[i] = d.labels[static_cast<std::size_t>(rows[i])];
  }
  return out;
}

}  // namespace

std::vector<int> Dataset::class_counts() const {
  std::vector<int> counts(class_names.size(), 0);
  for (int l : labels) counts[static_cast<std::size_t>(l)] += 1;
  return counts;
}

Dataset load_csv(const std::string& path, const std::string& target_column,
                 const std::vector<std::string>& drop_columns, LoadReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");

  auto records = parse_csv(in);
  if (records.empty()) throw DataError("csv '" + path + "' is empty");

  const std::vector<std::string>& header = records.front();
  const std::size_t width = header.size();

  std::set<std::string> drops(drop_columns.begin(), drop_columns.end());
  std::size_t target_idx = width;
  std::vector<std::size_t> feature_idx;
  std::vector<std::string> feature_names;
  for (std::size_t j = 0; j < width; ++j) {
    if (header[j] == target_column) {
      if (target_idx != width) throw DataError("duplicate target column '" + target_column + "'");
      target_idx = j;
    } else if (!drops.count(header[j])) {
      feature_idx.push_back(j);
      feature_names.push_back(header[j]);
    }
  }
  if (target_idx == width)
    throw DataError("target column '" + target_column + "' not found in '" + path + "'");
  if (feature_names.empty()) throw DataError("no feature columns left in '" + path + "'");
  {
    std::set<std::string> uniq(feature_names.begin(), feature_names.end());
    if (uniq.size() != feature_names.size())
      throw DataError("duplicate feature names in '" + path + "'");
  }

  const std::size_t m = feature_idx.size();
  std::vector<std::vector<double>> rows;
  std::vector<std::string> row_targets;
  std::size_t dropped = 0;

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != width)
      throw DataError("csv row " + std::to_string(r) + " has " + std::to_string(rec.size()) +
                      " fields, expected " + std::to_string(width));
    std::vector<double> row(m);
    bool missing = is_missing_token(rec[target_idx]);
    for (std::size_t j = 0; j < m && !missing; ++j)
      missing = !parse_cell(rec[feature_idx[j]], feature_names[j], r - 1, &row[j]);
    if (missing) {
      ++dropped;
      continue;
    }
    rows.push_back(std::move(row));
    row_targets.push_back(rec[target_idx]);
  }
  if (report) report->rows_dropped = dropped;
  if (dropped > 0)
    std::cerr << "[tabseq] dropped " << dropped << " rows with missing values from '" << path
              << "'\n";
  if (rows.empty()) throw DataError("no usable rows in '" + path + "'");

  Dataset d;
  d.feature_names = std::move(feature_names);
  std::set<std::string> classes(row_targets.begin(), row_targets.end());
  d.class_names.assign(classes.begin(), classes.end());
  std::map<std::string, int> class_index;
  for (std::size_t c = 0; c < d.class_names.size(); ++c)
    class_index[d.class_names[c]] = static_cast<int>(c);

  d.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m));
  d.labels.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j)
      d.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    d.labels[i] = class_index[row_targets[i]];
  }
  return d;
}

SplitResult stratified_split(const Dataset& d, const SplitSpec& s) {
  const std::vector<double> fractions = {s.train_fraction, s.val_fraction, s.test_fraction};
  double sum = 0.0;
  for (double f : fractions) {
    if (f <= 0.0) throw DataError("split fractions must be positive");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw DataError("split fractions must sum to 1");

  const int num_classes = static_cast<int>(d.class_names.size());
  std::vector<std::vector<Eigen::Index>> by_class(static_cast<std::size_t>(num_classes));
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    by_class[static_cast<std::size_t>(d.labels[static_cast<std::size_t>(i)])].push_back(i);

  std::mt19937_64 rng(s.seed);
  std::vector<Eigen::Index> train_rows, val_rows, test_rows;
  for (int c = 0; c < num_classes; ++c) {
    auto& members = by_class[static_cast<std::size_t>(c)];
    std::shuffle(members.begin(), members.end(), rng);
    const Eigen::Index nc = static_cast<Eigen::Index>(members.size());
    auto counts = largest_remainder_counts(nc, fractions);
    if (nc < 3) {
      std::cerr << "[tabseq] class '" << d.class_names[static_cast<std::size_t>(c)] << "' has only "
                << nc << " samples; best-effort split\n";
    } else {
      // every split gets at least one sample of this class
      for (std::size_t p = 0; p < counts.size(); ++p) {
        while (counts[p] == 0) {
          std::size_t donor = static_cast<std::size_t>(
              std::max_element(counts.begin(), counts.end()) - counts.begin());
          counts[donor] -= 1;
          counts[p] += 1;
        }
      }
    }
    std::size_t pos = 0;
    for (Eigen::Index i = 0; i < counts[0]; ++i) train_rows.push_back(members[pos++]);
    for (Eigen::Index i = 0; i < counts[1]; ++i) val_rows.push_back(members[pos++]);
    for (Eigen::Index i = 0; i < counts[2]; ++i) test_rows.push_back(members[pos++]);
  }

  return SplitResult{take_rows(d, train_rows), take_rows(d, val_rows), take_rows(d, test_rows)};
}

ScalerParams fit_scaler(const Dataset& train, ScalerMode mode) {
  if (train.rows() == 0) throw DataError("fit_scaler: empty training split");
  const Eigen::Index m = train.cols();
  ScalerParams p;
  p.mode = mode;
  p.offset.resize(m);
  p.scale.resize(m);
  if (mode == ScalerMode::minmax01) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double lo = train.values.col(j).minCoeff();
      const double hi = train.values.col(j).maxCoeff();
      p.offset(j) = lo;
      p.scale(j) = hi > lo ? 1.0 / (hi - lo) : 0.0;
    }
  } else {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double mean = train.values.col(j).mean();
      const double var = (train.values.col(j).array() - mean).square().mean();
      p.offset(j) = mean;
      p.scale(j) = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
    }
  }
  p.fitted = true;
  return p;
}

Dataset apply_scaler(const Dataset& d, const ScalerParams& p) {
  if (!p.fitted) throw DataError("apply_scaler: scaler not fitted");
  if (d.cols() != p.offset.size())
    throw DataError("apply_scaler: feature count mismatch");
  Dataset out = d;
  out.values = (d.values.rowwise() - p.offset.transpose()).array().rowwise() *
               p.scale.transpose().array();
  if (p.mode == ScalerMode::minmax01)
    out.values = out.values.cwiseMax(-0.5).cwiseMin(1.5);
  return out;
}

Dataset apply_permutation(const Dataset& d, const Permutation& perm) {
  if (perm.size() != static_cast<int>(d.cols()))
    throw std::invalid_argument("apply_permutation: length mismatch");
  if (!is_bijection(perm.order))
    throw std::invalid_argument("apply_permutation: not a bijection");
  Dataset out = d;
  for (int j = 0; j < perm.size(); ++j) {
    const int src = perm.order[static_cast<std::size_t>(j)];
    out.values.col(j) = d.values.col(src);
    out.feature_names[static_cast<std::size_t>(j)] =
        d.feature_names[static_cast<std::size_t>(src)];
  }
  return out;
}

}  // namespace tabseq
