#include "robustcf/dataset.hpp"

#include "robustcf/log.hpp"
#include "robustcf/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace robustcf {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t column) {
  std::size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(cell, &consumed);
  } catch (const std::exception&) {
    throw std::runtime_error("load_dataset: row " + std::to_string(row) + ", column " +
                             std::to_string(column) + ": cannot parse '" + cell +
                             "' as a number");
  }
  // allow trailing whitespace only
  for (std::size_t i = consumed; i < cell.size(); ++i) {
    if (!std::isspace(static_cast<unsigned char>(cell[i]))) {
      throw std::runtime_error("load_dataset: row " + std::to_string(row) + ", column " +
                               std::to_string(column) + ": trailing garbage in '" + cell + "'");
    }
  }
  return value;
}

}  // namespace

std::vector<Eigen::Index> ScalingParams::constant_features() const {
  std::vector<Eigen::Index> indices;
  for (Eigen::Index i = 0; i < min.size(); ++i) {
    if (max[i] == min[i]) indices.push_back(i);
  }
  return indices;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) {
    throw std::runtime_error("load_dataset: cannot open '" + path.string() + "'");
  }
  std::string line;
  if (!std::getline(file, line)) {
    throw std::runtime_error("load_dataset: '" + path.string() + "' is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_line(line);
  if (header.size() < 2) {
    throw std::runtime_error("load_dataset: header needs at least one feature column "
                             "and the label column");
  }

  Dataset dataset;
  dataset.feature_names.assign(header.begin(), header.end() - 1);
  const std::size_t columns = header.size();

  std::size_t row = 1;  // header was row 0
  while (std::getline(file, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      ++row;
      continue;
    }
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != columns) {
      throw std::runtime_error("load_dataset: row " + std::to_string(row) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(columns));
    }
    Vector x(static_cast<Eigen::Index>(columns - 1));
    for (std::size_t c = 0; c + 1 < columns; ++c) {
      const double value = parse_cell(cells[c], row, c);
      if (!std::isfinite(value)) {
        throw std::runtime_error("load_dataset: row " + std::to_string(row) + ", column " +
                                 std::to_string(c) + ": non-finite value");
      }
      x[static_cast<Eigen::Index>(c)] = value;
    }
    const double label_value = parse_cell(cells[columns - 1], row, columns - 1);
    if (label_value != 0.0 && label_value != 1.0) {
      throw std::runtime_error("load_dataset: row " + std::to_string(row) +
                               ": label must be 0 or 1, got '" + cells[columns - 1] + "'");
    }
    dataset.points.push_back(std::move(x));
    dataset.labels.push_back(label_value == 1.0 ? 1 : 0);
    ++row;
  }

  if (dataset.points.size() < 2) {
    throw std::runtime_error("load_dataset: need at least 2 data rows, got " +
                             std::to_string(dataset.points.size()));
  }
  dataset.provenance = path.string();
  return dataset;
}

ScalingParams fit_minmax(const Dataset& dataset) {
  if (dataset.points.empty()) {
    throw std::invalid_argument("fit_minmax: empty dataset");
  }
  ScalingParams params{dataset.points.front(), dataset.points.front()};
  for (const Vector& x : dataset.points) {
    params.min = params.min.cwiseMin(x);
    params.max = params.max.cwiseMax(x);
  }
  return params;
}

Dataset apply_minmax(const Dataset& dataset, const ScalingParams& params) {
  if (params.min.size() != dataset.dimension()) {
    throw std::invalid_argument("apply_minmax: parameter dimension mismatch");
  }
  for (Eigen::Index i : params.constant_features()) {
    log_warn("constant feature '" +
             (static_cast<std::size_t>(i) < dataset.feature_names.size()
                  ? dataset.feature_names[static_cast<std::size_t>(i)]
                  : std::to_string(i)) +
             "' maps to 0 under min-max scaling");
  }
  Dataset scaled = dataset;
  const Vector range = params.max - params.min;
  for (Vector& x : scaled.points) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      x[i] = range[i] == 0.0 ? 0.0 : (x[i] - params.min[i]) / range[i];
      x[i] = std::clamp(x[i], 0.0, 1.0);
    }
  }
  scaled.scaling = params;
  return scaled;
}

Dataset minmax_scale(const Dataset& dataset) {
  return apply_minmax(dataset, fit_minmax(dataset));
}

Vector unscale(const Vector& scaled, const ScalingParams& params) {
  if (scaled.size() != params.min.size()) {
    throw std::invalid_argument("unscale: dimension mismatch");
  }
  return params.min + scaled.cwiseProduct(params.max - params.min);
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& dataset, const SplitSpec& spec) {
  if (dataset.size() < 2) {
    throw std::invalid_argument("train_test_split: need at least 2 examples");
  }
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw std::invalid_argument("train_test_split: test fraction must be in (0,1)");
  }
  const std::size_t n = dataset.size();
  std::size_t test_count = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * spec.test_fraction));
  test_count = std::clamp<std::size_t>(test_count, 1, n - 1);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(spec.seed, 0x5e17));
  rng.shuffle(order);

  auto take = [&](std::size_t begin, std::size_t end, const char* tag) {
    Dataset part;
    part.feature_names = dataset.feature_names;
    part.scaling = dataset.scaling;
    part.provenance = dataset.provenance.empty() ? tag : dataset.provenance + ":" + tag;
    part.points.reserve(end - begin);
    part.labels.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      part.points.push_back(dataset.points[order[i]]);
      part.labels.push_back(dataset.labels[order[i]]);
    }
    return part;
  };

  Dataset test = take(0, test_count, "test");
  Dataset train = take(test_count, n, "train");
  return {std::move(train), std::move(test)};
}

std::string to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::Ball: return "ball";
    case SyntheticKind::Diamond: return "diamond";
    case SyntheticKind::Cube: return "cube";
    case SyntheticKind::TwoGaussians: return "two_gaussians";
  }
  return "unknown";
}

SyntheticKind synthetic_kind_from_string(const std::string& name) {
  if (name == "ball") return SyntheticKind::Ball;
  if (name == "diamond") return SyntheticKind::Diamond;
  if (name == "cube") return SyntheticKind::Cube;
  if (name == "two_gaussians") return SyntheticKind::TwoGaussians;
  throw std::invalid_argument("unknown synthetic dataset kind '" + name + "'");
}

AnalyticClassifier synthetic_classifier(SyntheticKind kind) {
  Vector center(2);
  center << 0.5, 0.5;
  switch (kind) {
    case SyntheticKind::Ball: return AnalyticClassifier::ball(center, 0.3);
    case SyntheticKind::Diamond: return AnalyticClassifier::diamond(center, 0.35);
    case SyntheticKind::Cube: return AnalyticClassifier::cube(center, 0.25);
    case SyntheticKind::TwoGaussians:
      throw std::invalid_argument("two_gaussians has no analytic classifier");
  }
  throw std::logic_error("synthetic_classifier: unknown kind");
}

Dataset synthetic_dataset(SyntheticKind kind, std::size_t n, std::uint64_t seed) {
  if (n < 10) {
    throw std::invalid_argument("synthetic_dataset: need n >= 10");
  }
  Dataset dataset;
  dataset.feature_names = {"x0", "x1"};
  dataset.points.reserve(n);
  dataset.labels.reserve(n);
  dataset.provenance = "synthetic:" + to_string(kind) + ":n=" + std::to_string(n) +
                       ":seed=" + std::to_string(seed);
  ScalingParams identity;
  identity.min = Vector::Zero(2);
  identity.max = Vector::Ones(2);
  dataset.scaling = identity;

  Rng rng(derive_seed(seed, 0xda7a));
  if (kind == SyntheticKind::TwoGaussians) {
    const double spread = 0.12;
    Vector centers[2];
    centers[0] = Vector(2);
    centers[0] << 0.3, 0.3;
    centers[1] = Vector(2);
    centers[1] << 0.7, 0.7;
    for (std::size_t i = 0; i < n; ++i) {
      const Label label = static_cast<Label>(i % 2);
      Vector x(2);
      x[0] = std::clamp(centers[label][0] + spread * rng.normal(), 0.0, 1.0);
      x[1] = std::clamp(centers[label][1] + spread * rng.normal(), 0.0, 1.0);
      dataset.points.push_back(std::move(x));
      dataset.labels.push_back(label);
    }
    return dataset;
  }

  const AnalyticClassifier classifier = synthetic_classifier(kind);
  for (std::size_t i = 0; i < n; ++i) {
    Vector x(2);
    x[0] = rng.uniform01();
    x[1] = rng.uniform01();
    dataset.labels.push_back(classifier.classify(x));
    dataset.points.push_back(std::move(x));
  }
  return dataset;
}

Dataset sample_labeled(const Classifier& classifier, const Vector& lo, const Vector& hi,
                       std::size_t n, std::uint64_t seed) {
  if (lo.size() != hi.size() || lo.size() != classifier.dimension()) {
    throw std::invalid_argument("sample_labeled: bound dimensions must match the classifier");
  }
  Dataset dataset;
  dataset.provenance = "sampled:n=" + std::to_string(n) + ":seed=" + std::to_string(seed);
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    dataset.feature_names.push_back("x" + std::to_string(i));
  }
  Rng rng(derive_seed(seed, 0xb0c5));
  dataset.points.reserve(n);
  dataset.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vector x(lo.size());
    for (Eigen::Index d = 0; d < lo.size(); ++d) {
      x[d] = rng.uniform(lo[d], hi[d]);
    }
    dataset.labels.push_back(classifier.classify(x));
    dataset.points.push_back(std::move(x));
  }
  return dataset;
}

}  // namespace robustcf
