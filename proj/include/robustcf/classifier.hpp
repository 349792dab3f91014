#pragma once

#include "robustcf/distance.hpp"
#include "robustcf/types.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace robustcf {

class Classifier {
 public:
  virtual ~Classifier() = default;

  // Total and deterministic; throws std::invalid_argument on dimension mismatch.
  virtual Label classify(const Vector& x) const = 0;
  virtual Eigen::Index dimension() const = 0;

 protected:
  void check_dimension(const Vector& x) const;
};

enum class Shape { Ball, Diamond, Cube, Halfspace };

std::string to_string(Shape shape);

// Closed-form decision regions. Ball/diamond/cube assign inside_label to
// points within metric distance r of the center (Euclidean, Manhattan and
// Chebyshev respectively, boundary inclusive); halfspace assigns inside_label
// where normal . x <= offset.
class AnalyticClassifier final : public Classifier {
 public:
  static AnalyticClassifier ball(Vector center, double radius, Label inside = 1,
                                 Label outside = 0);
  static AnalyticClassifier diamond(Vector center, double radius, Label inside = 1,
                                    Label outside = 0);
  static AnalyticClassifier cube(Vector center, double radius, Label inside = 1,
                                 Label outside = 0);
  static AnalyticClassifier halfspace(Vector normal, double offset, Label inside = 1,
                                      Label outside = 0);

  Label classify(const Vector& x) const override;
  Eigen::Index dimension() const override;

  Shape shape() const { return shape_; }
  double radius() const { return radius_; }
  const Vector& center() const { return center_; }

  // Distance from x to the decision boundary under the shape's native metric
  // (Euclidean for halfspace). Zero exactly on the boundary.
  double boundary_distance(const Vector& x) const;

 private:
  AnalyticClassifier(Shape shape, Vector center, double radius, Label inside, Label outside);

  Shape shape_;
  Vector center_;  // halfspace: the normal
  double radius_;  // halfspace: the offset
  Label inside_;
  Label outside_;
};

// Finite domain: the Cartesian product of per-axis sorted value grids, with a
// dense label table. Small enough domains make exhaustive search tractable.
class GridClassifier final : public Classifier {
 public:
  GridClassifier(std::vector<std::vector<double>> axes, std::vector<Label> labels);

  // Labels every grid point with source.classify.
  static GridClassifier sample(const Classifier& source, std::vector<std::vector<double>> axes);

  static std::vector<double> linspace(double lo, double hi, std::size_t count);

  // x must be a grid point (coordinates matched within a small tolerance).
  Label classify(const Vector& x) const override;
  Eigen::Index dimension() const override;

  std::size_t point_count() const { return labels_.size(); }
  Vector point(std::size_t flat_index) const;
  Label label_at(std::size_t flat_index) const { return labels_[flat_index]; }
  std::optional<std::size_t> locate(const Vector& x) const;
  bool single_class() const;
  const std::vector<std::vector<double>>& axes() const { return axes_; }

 private:
  std::vector<std::vector<double>> axes_;
  std::vector<std::size_t> strides_;
  std::vector<Label> labels_;
};

// Minimum distance from x to any differently-labeled grid point, by full
// enumeration. +infinity when the grid is single-class.
double cfd_bruteforce(const GridClassifier& classifier, const Metric& metric, const Vector& x);

// Exact counterfactual distance for analytic classifiers: |r - d(center, x)|
// under the native metric (point-to-plane distance for halfspaces).
double cfd_analytic(const AnalyticClassifier& classifier, const Vector& x);

}  // namespace robustcf
