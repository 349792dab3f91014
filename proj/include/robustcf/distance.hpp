#pragma once

#include "robustcf/types.hpp"

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace robustcf {

enum class MetricKind { Manhattan, Euclidean, Chebyshev };

std::string to_string(MetricKind kind);

// Point metric. Weighted variants scale each per-coordinate difference by
// w_i >= 0 before aggregating, which keeps all three kinds proper metrics.
struct Metric {
  MetricKind kind = MetricKind::Euclidean;
  Vector weights;  // empty = unweighted

  static Metric manhattan() { return {MetricKind::Manhattan, {}}; }
  static Metric euclidean() { return {MetricKind::Euclidean, {}}; }
  static Metric chebyshev() { return {MetricKind::Chebyshev, {}}; }

  // Validates the weight vector: length k, all entries >= 0, at least one > 0.
  static Metric weighted(MetricKind kind, Vector weights);
};

template <typename DerivedA, typename DerivedB>
double distance(const Metric& metric, const Eigen::MatrixBase<DerivedA>& a,
                const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("distance: dimension mismatch (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  }
  Eigen::ArrayXd diff = (a - b).cwiseAbs().array();
  if (metric.weights.size() != 0) {
    if (metric.weights.size() != diff.size()) {
      throw std::invalid_argument("distance: weight length " +
                                  std::to_string(metric.weights.size()) +
                                  " does not match dimension " + std::to_string(diff.size()));
    }
    diff *= metric.weights.array();
  }
  switch (metric.kind) {
    case MetricKind::Manhattan:
      return diff.sum();
    case MetricKind::Euclidean:
      return std::sqrt((diff * diff).sum());
    case MetricKind::Chebyshev:
      return diff.maxCoeff();
  }
  throw std::logic_error("distance: unknown metric kind");
}

// min_{p in set} d(point, p); set must be non-empty.
double min_distance_to(const Metric& metric, const Vector& point, const PointSet& set);

// Symmetric average of directed min-distances:
//   1/(2|S1|) * sum_{c1} min_{c2} d(c1,c2) + 1/(2|S2|) * sum_{c2} min_{c1} d(c2,c1)
double set_distance_sum(const Metric& metric, const PointSet& s1, const PointSet& s2);

// Half-sum of the two directed max-of-min distances.
double set_distance_max(const Metric& metric, const PointSet& s1, const PointSet& s2);

// 1 - cos(angle(u, v)), in [0, 2]. Throws if either vector has zero norm.
double cosine_distance(const Vector& u, const Vector& v);

}  // namespace robustcf
