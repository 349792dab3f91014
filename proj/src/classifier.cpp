#include "robustcf/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace robustcf {

namespace {
// Tolerance for matching a coordinate against a grid axis value.
constexpr double kGridSnap = 1e-9;
}  // namespace

void Classifier::check_dimension(const Vector& x) const {
  if (x.size() != dimension()) {
    throw std::invalid_argument("classify: input dimension " + std::to_string(x.size()) +
                                " does not match classifier dimension " +
                                std::to_string(dimension()));
  }
}

std::string to_string(Shape shape) {
  switch (shape) {
    case Shape::Ball: return "ball";
    case Shape::Diamond: return "diamond";
    case Shape::Cube: return "cube";
    case Shape::Halfspace: return "halfspace";
  }
  return "unknown";
}

AnalyticClassifier::AnalyticClassifier(Shape shape, Vector center, double radius, Label inside,
                                       Label outside)
    : shape_(shape), center_(std::move(center)), radius_(radius), inside_(inside),
      outside_(outside) {
  if (center_.size() == 0) {
    throw std::invalid_argument("AnalyticClassifier: empty center");
  }
  if (shape_ != Shape::Halfspace && radius_ <= 0.0) {
    throw std::invalid_argument("AnalyticClassifier: radius must be positive");
  }
  if (shape_ == Shape::Halfspace && center_.norm() == 0.0) {
    throw std::invalid_argument("AnalyticClassifier: zero halfspace normal");
  }
}

AnalyticClassifier AnalyticClassifier::ball(Vector center, double radius, Label inside,
                                            Label outside) {
  return {Shape::Ball, std::move(center), radius, inside, outside};
}

AnalyticClassifier AnalyticClassifier::diamond(Vector center, double radius, Label inside,
                                               Label outside) {
  return {Shape::Diamond, std::move(center), radius, inside, outside};
}

AnalyticClassifier AnalyticClassifier::cube(Vector center, double radius, Label inside,
                                            Label outside) {
  return {Shape::Cube, std::move(center), radius, inside, outside};
}

AnalyticClassifier AnalyticClassifier::halfspace(Vector normal, double offset, Label inside,
                                                 Label outside) {
  return {Shape::Halfspace, std::move(normal), offset, inside, outside};
}

Eigen::Index AnalyticClassifier::dimension() const { return center_.size(); }

Label AnalyticClassifier::classify(const Vector& x) const {
  check_dimension(x);
  switch (shape_) {
    case Shape::Ball:
      return (x - center_).norm() <= radius_ ? inside_ : outside_;
    case Shape::Diamond:
      return (x - center_).lpNorm<1>() <= radius_ ? inside_ : outside_;
    case Shape::Cube:
      return (x - center_).lpNorm<Eigen::Infinity>() <= radius_ ? inside_ : outside_;
    case Shape::Halfspace:
      return center_.dot(x) <= radius_ ? inside_ : outside_;
  }
  throw std::logic_error("classify: unknown shape");
}

double AnalyticClassifier::boundary_distance(const Vector& x) const {
  check_dimension(x);
  switch (shape_) {
    case Shape::Ball:
      return std::abs(radius_ - (x - center_).norm());
    case Shape::Diamond:
      return std::abs(radius_ - (x - center_).lpNorm<1>());
    case Shape::Cube:
      return std::abs(radius_ - (x - center_).lpNorm<Eigen::Infinity>());
    case Shape::Halfspace:
      return std::abs(center_.dot(x) - radius_) / center_.norm();
  }
  throw std::logic_error("boundary_distance: unknown shape");
}

GridClassifier::GridClassifier(std::vector<std::vector<double>> axes, std::vector<Label> labels)
    : axes_(std::move(axes)), labels_(std::move(labels)) {
  if (axes_.empty()) {
    throw std::invalid_argument("GridClassifier: no axes");
  }
  std::size_t count = 1;
  for (const auto& axis : axes_) {
    if (axis.empty()) {
      throw std::invalid_argument("GridClassifier: empty axis");
    }
    if (!std::is_sorted(axis.begin(), axis.end())) {
      throw std::invalid_argument("GridClassifier: axis values must be sorted");
    }
    count *= axis.size();
  }
  if (labels_.size() != count) {
    throw std::invalid_argument("GridClassifier: label table size " +
                                std::to_string(labels_.size()) + " does not match grid size " +
                                std::to_string(count));
  }
  strides_.assign(axes_.size(), 1);
  for (std::size_t d = axes_.size(); d-- > 1;) {
    strides_[d - 1] = strides_[d] * axes_[d].size();
  }
}

GridClassifier GridClassifier::sample(const Classifier& source,
                                      std::vector<std::vector<double>> axes) {
  std::size_t count = 1;
  for (const auto& axis : axes) count *= std::max<std::size_t>(axis.size(), 1);
  GridClassifier grid(std::move(axes), std::vector<Label>(count, 0));
  for (std::size_t i = 0; i < grid.point_count(); ++i) {
    grid.labels_[i] = source.classify(grid.point(i));
  }
  return grid;
}

std::vector<double> GridClassifier::linspace(double lo, double hi, std::size_t count) {
  if (count < 2) {
    throw std::invalid_argument("linspace: need at least two points");
  }
  std::vector<double> values(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = lo + step * static_cast<double>(i);
  }
  values.back() = hi;
  return values;
}

Eigen::Index GridClassifier::dimension() const {
  return static_cast<Eigen::Index>(axes_.size());
}

Vector GridClassifier::point(std::size_t flat_index) const {
  Vector x(axes_.size());
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    const std::size_t i = (flat_index / strides_[d]) % axes_[d].size();
    x[static_cast<Eigen::Index>(d)] = axes_[d][i];
  }
  return x;
}

std::optional<std::size_t> GridClassifier::locate(const Vector& x) const {
  if (x.size() != dimension()) return std::nullopt;
  std::size_t flat = 0;
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    const auto& axis = axes_[d];
    const double value = x[static_cast<Eigen::Index>(d)];
    auto it = std::lower_bound(axis.begin(), axis.end(), value - kGridSnap);
    if (it == axis.end() || std::abs(*it - value) > kGridSnap) return std::nullopt;
    flat += static_cast<std::size_t>(it - axis.begin()) * strides_[d];
  }
  return flat;
}

Label GridClassifier::classify(const Vector& x) const {
  check_dimension(x);
  const auto flat = locate(x);
  if (!flat) {
    throw std::invalid_argument("GridClassifier::classify: point is not on the grid");
  }
  return labels_[*flat];
}

bool GridClassifier::single_class() const {
  return std::adjacent_find(labels_.begin(), labels_.end(),
                            [](Label a, Label b) { return a != b; }) == labels_.end();
}

double cfd_bruteforce(const GridClassifier& classifier, const Metric& metric, const Vector& x) {
  const Label own = classifier.classify(x);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < classifier.point_count(); ++i) {
    if (classifier.label_at(i) == own) continue;
    best = std::min(best, distance(metric, x, classifier.point(i)));
  }
  return best;
}

double cfd_analytic(const AnalyticClassifier& classifier, const Vector& x) {
  return classifier.boundary_distance(x);
}

}  // namespace robustcf
