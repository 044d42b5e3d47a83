#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "tabseq/dataset.hpp"
#include "tabseq/errors.hpp"

using namespace tabseq;

namespace {

std::string wdbc_path() { return std::string(TABSEQ_SOURCE_DIR) + "/data/wdbc.csv"; }

std::string write_temp_csv(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

// independent largest-remainder oracle: floor allocations, leftover seats to
// the largest fractional part, ties to the later split
std::vector<long> lr_oracle(long n, double f0, double f1, double f2) {
  const double fr[3] = {f0, f1, f2};
  std::vector<long> counts(3);
  double rem[3];
  long assigned = 0;
  for (int i = 0; i < 3; ++i) {
    counts[i] = static_cast<long>(std::floor(n * fr[i]));
    rem[i] = n * fr[i] - counts[i];
    assigned += counts[i];
  }
  for (long seat = 0; seat < n - assigned; ++seat) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (rem[i] >= rem[best]) best = i;  // >= pushes ties to the later split
    counts[best] += 1;
    rem[best] = -1.0;
  }
  return counts;
}

}  // namespace

TEST_CASE("load_csv reads the WDBC dataset") {
  LoadReport report;
  Dataset d = load_csv(wdbc_path(), "diagnosis", {"id"}, &report);
  CHECK(d.rows() == 569);
  CHECK(d.cols() == 30);
  CHECK(report.rows_dropped == 0);
  REQUIRE(d.class_names.size() == 2);
  CHECK(d.class_names[0] == "B");
  CHECK(d.class_names[1] == "M");
  const auto counts = d.class_counts();
  CHECK(counts[0] == 357);
  CHECK(counts[1] == 212);
  CHECK(d.values.allFinite());
}

TEST_CASE("load_csv minimal one-row one-feature file") {
  const auto path = write_temp_csv("tabseq_min.csv", "x,y\n1.5,a\n");
  Dataset d = load_csv(path, "y");
  CHECK(d.rows() == 1);
  CHECK(d.cols() == 1);
  CHECK(d.values(0, 0) == 1.5);
  CHECK(d.class_names == std::vector<std::string>{"a"});
}

TEST_CASE("load_csv error paths") {
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", "y"), DataError);

  const auto no_target = write_temp_csv("tabseq_nt.csv", "x,y\n1,2\n");
  CHECK_THROWS_AS(load_csv(no_target, "z"), DataError);

  const auto bad_cell = write_temp_csv("tabseq_bad.csv", "x,y\nhello,a\n");
  CHECK_THROWS_AS(load_csv(bad_cell, "y"), DataError);

  const auto all_missing = write_temp_csv("tabseq_gap.csv", "x,y\n,a\n,b\n");
  CHECK_THROWS_AS(load_csv(all_missing, "y"), DataError);
}

TEST_CASE("load_csv drops rows with missing values and reports the count") {
  const auto path =
      write_temp_csv("tabseq_miss.csv", "x,z,y\n1,2,a\n,3,b\n4,NaN,a\n5,6,b\n");
  LoadReport report;
  Dataset d = load_csv(path, "y", {}, &report);
  CHECK(d.rows() == 2);
  CHECK(report.rows_dropped == 2);
  CHECK(d.values(0, 0) == 1.0);
  CHECK(d.values(1, 1) == 6.0);
}

TEST_CASE("load_csv handles quoted fields") {
  const auto path = write_temp_csv("tabseq_quote.csv",
                                   "\"a,b\",y\n\"1.25\",\"label, one\"\n2.5,plain\n");
  Dataset d = load_csv(path, "y");
  CHECK(d.feature_names == std::vector<std::string>{"a,b"});
  CHECK(d.rows() == 2);
  CHECK(d.class_names == std::vector<std::string>{"label, one", "plain"});
}

TEST_CASE("stratified_split sizes follow largest-remainder rounding") {
  Dataset d = load_csv(wdbc_path(), "diagnosis", {"id"});
  SplitSpec spec;
  spec.seed = 7;
  SplitResult split = stratified_split(d, spec);

  // frozen expectation, recomputed by the per-class oracle below
  CHECK(split.train.rows() == 398);
  CHECK(split.val.rows() == 85);
  CHECK(split.test.rows() == 86);

  const auto b = lr_oracle(357, 0.70, 0.15, 0.15);
  const auto m = lr_oracle(212, 0.70, 0.15, 0.15);
  CHECK(split.train.rows() == b[0] + m[0]);
  CHECK(split.val.rows() == b[1] + m[1]);
  CHECK(split.test.rows() == b[2] + m[2]);

  // per-class proportions preserved within one sample of the target
  const auto train_counts = split.train.class_counts();
  CHECK(std::abs(train_counts[0] - 0.70 * 357) < 1.0);
  CHECK(std::abs(train_counts[1] - 0.70 * 212) < 1.0);
}

TEST_CASE("stratified_split exact fractions on a single class") {
  Dataset d;
  d.values = Eigen::MatrixXd::Random(10, 2);
  d.feature_names = {"a", "b"};
  d.labels.assign(10, 0);
  d.class_names = {"only"};
  SplitSpec spec{0.8, 0.1, 0.1, 3};
  SplitResult split = stratified_split(d, spec);
  CHECK(split.train.rows() == 8);
  CHECK(split.val.rows() == 1);
  CHECK(split.test.rows() == 1);
}

TEST_CASE("stratified_split is deterministic and partitions the rows") {
  Dataset d;
  d.values = Eigen::MatrixXd::Zero(57, 1);
  for (int i = 0; i < 57; ++i) d.values(i, 0) = i;  // row identity
  d.feature_names = {"x"};
  d.labels.resize(57);
  for (int i = 0; i < 57; ++i) d.labels[i] = i % 3;
  d.class_names = {"a", "b", "c"};

  SplitSpec spec;
  spec.seed = 11;
  SplitResult s1 = stratified_split(d, spec);
  SplitResult s2 = stratified_split(d, spec);
  CHECK(s1.train.values == s2.train.values);
  CHECK(s1.val.values == s2.val.values);
  CHECK(s1.test.values == s2.test.values);

  std::vector<int> seen(57, 0);
  for (const Dataset* part : {&s1.train, &s1.val, &s1.test})
    for (Eigen::Index i = 0; i < part->rows(); ++i)
      seen[static_cast<int>(part->values(i, 0))] += 1;
  for (int c : seen) CHECK(c == 1);

  // every class lands in every split
  for (const Dataset* part : {&s1.train, &s1.val, &s1.test})
    for (int count : part->class_counts()) CHECK(count >= 1);
}

TEST_CASE("stratified_split rejects bad fractions") {
  Dataset d;
  d.values = Eigen::MatrixXd::Zero(9, 1);
  d.feature_names = {"x"};
  d.labels.assign(9, 0);
  d.class_names = {"a"};
  CHECK_THROWS_AS(stratified_split(d, SplitSpec{0.5, 0.3, 0.1, 0}), DataError);
  CHECK_THROWS_AS(stratified_split(d, SplitSpec{0.5, 0.5, -0.1, 0}), DataError);
}

TEST_CASE("minmax01 scaler maps the training range to [0,1]") {
  Dataset d;
  d.values.resize(3, 2);
  d.values << 0, 3, 5, 3, 10, 3;
  d.feature_names = {"x", "constant"};
  d.labels = {0, 0, 0};
  d.class_names = {"a"};

  ScalerParams p = fit_scaler(d, ScalerMode::minmax01);
  Dataset scaled = apply_scaler(d, p);
  CHECK(scaled.values(0, 0) == doctest::Approx(0.0));
  CHECK(scaled.values(1, 0) == doctest::Approx(0.5));
  CHECK(scaled.values(2, 0) == doctest::Approx(1.0));
  // constant column collapses to 0
  CHECK(scaled.values.col(1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("minmax01 clamps out-of-range values to [-0.5, 1.5]") {
  Dataset train;
  train.values.resize(2, 1);
  train.values << 0, 1;
  train.feature_names = {"x"};
  train.labels = {0, 0};
  train.class_names = {"a"};
  ScalerParams p = fit_scaler(train, ScalerMode::minmax01);

  Dataset test = train;
  test.values.resize(2, 1);
  test.values << -100, 100;
  test.labels = {0, 0};
  Dataset scaled = apply_scaler(test, p);
  CHECK(scaled.values(0, 0) == -0.5);
  CHECK(scaled.values(1, 0) == 1.5);
}

TEST_CASE("zscore scaler uses population stddev") {
  Dataset d;
  d.values.resize(3, 1);
  d.values << 1, 2, 3;
  d.feature_names = {"x"};
  d.labels = {0, 0, 0};
  d.class_names = {"a"};
  ScalerParams p = fit_scaler(d, ScalerMode::zscore);
  Dataset scaled = apply_scaler(d, p);
  // mean 2, population stddev sqrt(2/3)
  CHECK(scaled.values(0, 0) == doctest::Approx(-1.224744871).epsilon(1e-8));
  CHECK(scaled.values(1, 0) == doctest::Approx(0.0));
  CHECK(scaled.values(2, 0) == doctest::Approx(1.224744871).epsilon(1e-8));
}

TEST_CASE("apply_scaler requires a fitted scaler") {
  Dataset d;
  d.values = Eigen::MatrixXd::Zero(1, 1);
  d.feature_names = {"x"};
  d.labels = {0};
  d.class_names = {"a"};
  CHECK_THROWS_AS(apply_scaler(d, ScalerParams{}), DataError);
}

TEST_CASE("apply_permutation moves columns and names together") {
  Dataset d;
  d.values.resize(2, 3);
  d.values << 1, 2, 3, 4, 5, 6;
  d.feature_names = {"a", "b", "c"};
  d.labels = {0, 0};
  d.class_names = {"x"};

  Dataset same = apply_permutation(d, identity_permutation(3));
  CHECK(same.values == d.values);
  CHECK(same.feature_names == d.feature_names);

  Permutation p;
  p.order = {2, 0, 1};
  Dataset moved = apply_permutation(d, p);
  CHECK(moved.feature_names == std::vector<std::string>{"c", "a", "b"});
  CHECK(moved.values(0, 0) == 3);
  CHECK(moved.values(0, 1) == 1);
  CHECK(moved.values(1, 2) == 5);

  Permutation bad;
  bad.order = {0, 0, 1};
  CHECK_THROWS_AS(apply_permutation(d, bad), std::invalid_argument);
  Permutation short_p;
  short_p.order = {1, 0};
  CHECK_THROWS_AS(apply_permutation(d, short_p), std::invalid_argument);
}

TEST_CASE("apply/invert round-trips random datasets bit-exactly") {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const int m = 1 + static_cast<int>(rng() % 9);
    Dataset d;
    d.values.resize(n, m);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) d.values(i, j) = u(rng);
    for (int j = 0; j < m; ++j) d.feature_names.push_back("f" + std::to_string(j));
    d.labels.assign(n, 0);
    d.class_names = {"c"};

    Permutation p = identity_permutation(m);
    std::shuffle(p.order.begin(), p.order.end(), rng);

    Dataset back = apply_permutation(apply_permutation(d, p), invert_permutation(p));
    CHECK(back.values == d.values);
    CHECK(back.feature_names == d.feature_names);
  }
}
