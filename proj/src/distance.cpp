#include "robustcf/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace robustcf {

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::Manhattan: return "manhattan";
    case MetricKind::Euclidean: return "euclidean";
    case MetricKind::Chebyshev: return "chebyshev";
  }
  return "unknown";
}

Metric Metric::weighted(MetricKind kind, Vector weights) {
  if (weights.size() == 0) {
    throw std::invalid_argument("Metric::weighted: empty weight vector");
  }
  if ((weights.array() < 0.0).any()) {
    throw std::invalid_argument("Metric::weighted: negative weight");
  }
  if (!(weights.array() > 0.0).any()) {
    throw std::invalid_argument("Metric::weighted: all weights are zero");
  }
  return Metric{kind, std::move(weights)};
}

double min_distance_to(const Metric& metric, const Vector& point, const PointSet& set) {
  if (set.empty()) {
    throw std::invalid_argument("min_distance_to: empty point set");
  }
  double best = std::numeric_limits<double>::infinity();
  for (const Vector& other : set) {
    best = std::min(best, distance(metric, point, other));
  }
  return best;
}

double set_distance_sum(const Metric& metric, const PointSet& s1, const PointSet& s2) {
  if (s1.empty() || s2.empty()) {
    throw std::invalid_argument("set_distance_sum: empty point set");
  }
  double forward = 0.0;
  for (const Vector& c1 : s1) forward += min_distance_to(metric, c1, s2);
  double backward = 0.0;
  for (const Vector& c2 : s2) backward += min_distance_to(metric, c2, s1);
  return 0.5 * forward / static_cast<double>(s1.size()) +
         0.5 * backward / static_cast<double>(s2.size());
}

double set_distance_max(const Metric& metric, const PointSet& s1, const PointSet& s2) {
  if (s1.empty() || s2.empty()) {
    throw std::invalid_argument("set_distance_max: empty point set");
  }
  double forward = 0.0;
  for (const Vector& c1 : s1) forward = std::max(forward, min_distance_to(metric, c1, s2));
  double backward = 0.0;
  for (const Vector& c2 : s2) backward = std::max(backward, min_distance_to(metric, c2, s1));
  return 0.5 * (forward + backward);
}

double cosine_distance(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("cosine_distance: dimension mismatch");
  }
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) {
    throw std::invalid_argument("cosine_distance: zero-length vector");
  }
  const double cosine = std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
  return 1.0 - cosine;
}

}  // namespace robustcf
