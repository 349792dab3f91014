#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "robustcf/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <filesystem>
#include <set>

using namespace robustcf;

namespace {

std::filesystem::path write_temp_csv(const std::string& name, const std::string& contents) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream file(path);
  file << contents;
  return path;
}

struct TempFile {
  std::filesystem::path path;
  ~TempFile() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("csv loading: three rows, two features") {
  TempFile csv{write_temp_csv("robustcf_ok.csv",
                              "f1,f2,label\n"
                              "1.0,2.0,0\n"
                              "3.5,4.5,1\n"
                              "0.5,0.25,0\n")};
  const Dataset data = load_dataset(csv.path);
  CHECK(data.size() == 3);
  CHECK(data.dimension() == 2);
  CHECK(data.feature_names == std::vector<std::string>{"f1", "f2"});
  CHECK(data.labels == std::vector<Label>{0, 1, 0});
  CHECK(data.points[1][0] == doctest::Approx(3.5));
}

TEST_CASE("csv loading: bad label value is rejected") {
  TempFile csv{write_temp_csv("robustcf_badlabel.csv", "f1,label\n1.0,2\n2.0,1\n")};
  CHECK_THROWS_WITH_AS(load_dataset(csv.path),
                       doctest::Contains("label must be 0 or 1"), std::runtime_error);
}

TEST_CASE("csv loading: non-numeric cell reports row and column") {
  TempFile csv{write_temp_csv("robustcf_nonnum.csv", "f1,f2,label\n1.0,abc,0\n2.0,3.0,1\n")};
  CHECK_THROWS_WITH_AS(load_dataset(csv.path), doctest::Contains("row 1, column 1"),
                       std::runtime_error);
}

TEST_CASE("csv loading: empty and undersized files are rejected") {
  TempFile empty{write_temp_csv("robustcf_empty.csv", "")};
  CHECK_THROWS_AS(load_dataset(empty.path), std::runtime_error);
  TempFile one_row{write_temp_csv("robustcf_one.csv", "f1,label\n0.5,1\n")};
  CHECK_THROWS_AS(load_dataset(one_row.path), std::runtime_error);
  CHECK_THROWS_AS(load_dataset("/nonexistent/robustcf.csv"), std::runtime_error);
}

TEST_CASE("min-max scaling maps each feature onto [0,1]") {
  Dataset data;
  data.feature_names = {"f"};
  for (double v : {2.0, 4.0, 6.0}) {
    Vector x(1);
    x << v;
    data.points.push_back(x);
    data.labels.push_back(0);
  }
  data.labels.back() = 1;
  const Dataset scaled = minmax_scale(data);
  CHECK(scaled.points[0][0] == doctest::Approx(0.0));
  CHECK(scaled.points[1][0] == doctest::Approx(0.5));
  CHECK(scaled.points[2][0] == doctest::Approx(1.0));
  REQUIRE(scaled.scaling.has_value());
}

TEST_CASE("constant features scale to zero and are flagged") {
  Dataset data;
  data.feature_names = {"c", "f"};
  for (double v : {1.0, 3.0}) {
    Vector x(2);
    x << 5.0, v;
    data.points.push_back(x);
    data.labels.push_back(v > 2.0 ? 1 : 0);
  }
  const ScalingParams params = fit_minmax(data);
  CHECK(params.constant_features() == std::vector<Eigen::Index>{0});
  const Dataset scaled = apply_minmax(data, params);
  CHECK(scaled.points[0][0] == 0.0);
  CHECK(scaled.points[1][0] == 0.0);
}

TEST_CASE("unscale inverts the scaling map") {
  Dataset data;
  data.feature_names = {"a", "b"};
  Vector p1(2), p2(2), p3(2);
  p1 << -3.0, 10.0;
  p2 << 7.5, 12.5;
  p3 << 1.25, 11.0;
  data.points = {p1, p2, p3};
  data.labels = {0, 1, 0};
  const ScalingParams params = fit_minmax(data);
  const Dataset scaled = apply_minmax(data, params);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Vector roundtrip = unscale(scaled.points[i], params);
    for (Eigen::Index d = 0; d < roundtrip.size(); ++d) {
      REQUIRE(roundtrip[d] == doctest::Approx(data.points[i][d]).epsilon(1e-12));
    }
  }
}

TEST_CASE("scaling preserves per-feature ordering") {
  Dataset data;
  data.feature_names = {"f"};
  for (double v : {9.0, -2.0, 3.0, 7.0, 0.0}) {
    Vector x(1);
    x << v;
    data.points.push_back(x);
    data.labels.push_back(v > 2.0 ? 1 : 0);
  }
  const Dataset scaled = minmax_scale(data);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data.size(); ++j) {
      REQUIRE((data.points[i][0] < data.points[j][0]) ==
              (scaled.points[i][0] < scaled.points[j][0]));
    }
  }
}

TEST_CASE("train/test split partitions the dataset") {
  const Dataset data = synthetic_dataset(SyntheticKind::Ball, 100, 0);
  const auto [train, test] = train_test_split(data, {0.25, 0});
  CHECK(train.size() == 75);
  CHECK(test.size() == 25);

  // every point appears exactly once across the two splits
  std::multiset<double> expected, actual;
  for (const Vector& x : data.points) expected.insert(x[0] + 1000.0 * x[1]);
  for (const Vector& x : train.points) actual.insert(x[0] + 1000.0 * x[1]);
  for (const Vector& x : test.points) actual.insert(x[0] + 1000.0 * x[1]);
  CHECK(expected == actual);
}

TEST_CASE("split is deterministic under the seed") {
  const Dataset data = synthetic_dataset(SyntheticKind::Ball, 60, 1);
  const auto [train_a, test_a] = train_test_split(data, {0.25, 9});
  const auto [train_b, test_b] = train_test_split(data, {0.25, 9});
  REQUIRE(train_a.size() == train_b.size());
  for (std::size_t i = 0; i < train_a.size(); ++i) {
    REQUIRE(train_a.points[i] == train_b.points[i]);
    REQUIRE(train_a.labels[i] == train_b.labels[i]);
  }
}

TEST_CASE("split rounding: three examples at fraction one half") {
  Dataset data;
  data.feature_names = {"f"};
  for (double v : {0.1, 0.5, 0.9}) {
    Vector x(1);
    x << v;
    data.points.push_back(x);
    data.labels.push_back(v > 0.4 ? 1 : 0);
  }
  const auto [train, test] = train_test_split(data, {0.5, 0});
  CHECK(train.size() == 2);
  CHECK(test.size() == 1);
  CHECK_THROWS_AS(train_test_split(data, {1.5, 0}), std::invalid_argument);
}

TEST_CASE("synthetic labels match the generating classifier") {
  for (SyntheticKind kind : {SyntheticKind::Ball, SyntheticKind::Diamond, SyntheticKind::Cube}) {
    const Dataset data = synthetic_dataset(kind, 200, 5);
    const AnalyticClassifier classifier = synthetic_classifier(kind);
    for (std::size_t i = 0; i < data.size(); ++i) {
      REQUIRE(data.labels[i] == classifier.classify(data.points[i]));
    }
    const auto ones = std::count(data.labels.begin(), data.labels.end(), 1);
    REQUIRE(ones > 0);
    REQUIRE(ones < static_cast<long>(data.size()));
  }
}

TEST_CASE("synthetic datasets are deterministic and bounded") {
  const Dataset a = synthetic_dataset(SyntheticKind::TwoGaussians, 50, 12);
  const Dataset b = synthetic_dataset(SyntheticKind::TwoGaussians, 50, 12);
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a.points[i] == b.points[i]);
    REQUIRE(a.points[i].minCoeff() >= 0.0);
    REQUIRE(a.points[i].maxCoeff() <= 1.0);
  }
  CHECK_THROWS_AS(synthetic_dataset(SyntheticKind::Ball, 5, 0), std::invalid_argument);
}

TEST_CASE("labeled box sampling covers both classes for the unit ball") {
  const auto ball = AnalyticClassifier::ball(Vector::Zero(2), 1.0);
  Vector lo(2), hi(2);
  lo << -2.0, -2.0;
  hi << 2.0, 2.0;
  const Dataset data = sample_labeled(ball, lo, hi, 200, 3);
  const auto ones = std::count(data.labels.begin(), data.labels.end(), 1);
  CHECK(ones > 10);
  CHECK(ones < 190);
  for (std::size_t i = 0; i < data.size(); ++i) {
    REQUIRE(data.labels[i] == ball.classify(data.points[i]));
  }
}
