#pragma once

#include "robustcf/classifier.hpp"
#include "robustcf/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace robustcf {

// Per-feature parameters of the min-max map v -> (v - min) / (max - min).
struct ScalingParams {
  Vector min;
  Vector max;

  // Indices of features with max == min; those map to 0.0.
  std::vector<Eigen::Index> constant_features() const;
};

struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<Vector> points;
  std::vector<Label> labels;
  std::optional<ScalingParams> scaling;  // present once values are in [0,1]
  std::string provenance;

  std::size_t size() const { return points.size(); }
  Eigen::Index dimension() const { return points.empty() ? 0 : points.front().size(); }
};

// CSV with a header row; all cells numeric, last column is the label (0 or 1).
// Parse failures report the offending row and column.
Dataset load_dataset(const std::filesystem::path& path);

ScalingParams fit_minmax(const Dataset& dataset);

// Applies the map and clips into [0,1] (out-of-range values only occur when
// the params were fitted on a different split). Warns once per constant feature.
Dataset apply_minmax(const Dataset& dataset, const ScalingParams& params);

// fit_minmax + apply_minmax on the same data.
Dataset minmax_scale(const Dataset& dataset);

// Inverse map back to raw feature space; constant features return their min.
Vector unscale(const Vector& scaled, const ScalingParams& params);

struct SplitSpec {
  double test_fraction = 0.25;
  std::uint64_t seed = 0;
};

// Disjoint, exhaustive, deterministic under seed. The test side gets
// floor(n * fraction) examples, clamped so both sides stay non-empty.
std::pair<Dataset, Dataset> train_test_split(const Dataset& dataset, const SplitSpec& spec = {});

enum class SyntheticKind { Ball, Diamond, Cube, TwoGaussians };

SyntheticKind synthetic_kind_from_string(const std::string& name);
std::string to_string(SyntheticKind kind);

// Two-dimensional datasets in [0,1]^2. The geometric kinds draw uniform points
// labeled by the matching analytic classifier (radius chosen so both classes
// appear); two_gaussians draws from two blobs labeled by component.
Dataset synthetic_dataset(SyntheticKind kind, std::size_t n, std::uint64_t seed);

// The analytic classifier that labels a geometric synthetic dataset.
AnalyticClassifier synthetic_classifier(SyntheticKind kind);

// Uniform samples in the box [lo, hi], labeled by the classifier.
Dataset sample_labeled(const Classifier& classifier, const Vector& lo, const Vector& hi,
                       std::size_t n, std::uint64_t seed);

}  // namespace robustcf
