#include "robustcf/verify.hpp"

#include "robustcf/explain.hpp"
#include "robustcf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace robustcf {

namespace {

constexpr std::size_t kMaxExamples = 8;

struct GridView {
  std::vector<Vector> points;
  std::vector<Label> labels;
  std::vector<double> cfd;

  double dist(const Metric& metric, std::size_t i, std::size_t j) const {
    return distance(metric, points[i], points[j]);
  }
};

GridView snapshot(const GridClassifier& classifier, const Metric& metric) {
  GridView view;
  const std::size_t n = classifier.point_count();
  view.points.reserve(n);
  view.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    view.points.push_back(classifier.point(i));
    view.labels.push_back(classifier.label_at(i));
  }
  view.cfd.assign(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (view.labels[i] == view.labels[j]) continue;
      view.cfd[i] = std::min(view.cfd[i], view.dist(metric, i, j));
    }
  }
  return view;
}

void record_example(VerificationReport& report, PairViolation violation) {
  if (report.examples.size() < kMaxExamples) {
    report.examples.push_back(violation);
  }
}

struct SafeMember {
  std::uint32_t index;
  double margin;
};

}  // namespace

GridExplainFn exhaustive_grid_explainer(const GridClassifier& classifier, const Metric& metric,
                                        double epsilon) {
  return [&classifier, metric, epsilon](std::size_t index) {
    const CounterfactualSet set =
        exhaustive_explain(classifier, metric, classifier.point(index), epsilon);
    std::vector<std::uint32_t> members;
    members.reserve(set.size());
    for (const Counterfactual& cf : set.counterfactuals) {
      members.push_back(static_cast<std::uint32_t>(*cf.source_index));
    }
    std::sort(members.begin(), members.end());
    return members;
  };
}

GridExplainFn drop_closest_counterfactual(const GridClassifier& classifier, const Metric& metric,
                                          double epsilon) {
  return [&classifier, metric, epsilon](std::size_t index) {
    const CounterfactualSet set =
        exhaustive_explain(classifier, metric, classifier.point(index), epsilon);
    std::vector<std::uint32_t> members;
    for (std::size_t i = 1; i < set.size(); ++i) {  // skip the closest
      members.push_back(static_cast<std::uint32_t>(*set.counterfactuals[i].source_index));
    }
    std::sort(members.begin(), members.end());
    return members;
  };
}

VerificationReport verify_theory(const GridClassifier& classifier, const Metric& metric,
                                 const VerificationConfig& config,
                                 const GridExplainFn& explainer) {
  const std::size_t n = classifier.point_count();
  if (n > config.max_points) {
    throw std::invalid_argument(
        "verify_theory: grid has " + std::to_string(n) + " points, the exhaustive checks are "
        "capped at " + std::to_string(config.max_points) + "; use a coarser grid");
  }
  if (config.epsilon < 0.0) {
    throw std::invalid_argument("verify_theory: epsilon must be >= 0");
  }

  const GridExplainFn explain_fn =
      explainer ? explainer : exhaustive_grid_explainer(classifier, metric, config.epsilon);

  VerificationReport report;
  report.points = n;
  const GridView grid = snapshot(classifier, metric);

  std::vector<std::vector<std::uint32_t>> sets(n);
  std::vector<std::vector<bool>> membership(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    sets[i] = explain_fn(i);
    for (std::uint32_t c : sets[i]) membership[i][c] = true;
  }

  // Strong counterfactuals per point, and explanation members ordered by
  // decreasing safety margin so the persistence scan can stop early.
  std::vector<std::vector<std::uint32_t>> strong(n);
  std::vector<std::vector<SafeMember>> safe(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isfinite(grid.cfd[i])) {
      for (std::size_t j = 0; j < n; ++j) {
        if (grid.labels[i] == grid.labels[j]) continue;
        if (grid.dist(metric, i, j) <= grid.cfd[i] + config.strong_tolerance) {
          strong[i].push_back(static_cast<std::uint32_t>(j));
        }
      }
    }
    safe[i].reserve(sets[i].size());
    for (std::uint32_t c : sets[i]) {
      const double margin = grid.cfd[i] + config.epsilon - grid.dist(metric, i, c);
      if (margin > 0.0) safe[i].push_back({c, margin});
    }
    std::sort(safe[i].begin(), safe[i].end(),
              [](const SafeMember& a, const SafeMember& b) { return a.margin > b.margin; });
  }

  const double half_eps = 0.5 * config.epsilon;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || grid.labels[i] != grid.labels[j]) continue;
      ++report.same_class_pairs;
      const double d = grid.dist(metric, i, j);

      // Lipschitz-type bound on cfd (vacuous on single-class grids).
      if (std::isfinite(grid.cfd[i]) && std::isfinite(grid.cfd[j])) {
        ++report.lipschitz_checked;
        if (grid.cfd[i] > d + grid.cfd[j] + config.lipschitz_slack) {
          ++report.lipschitz_violations;
          record_example(report, {i, j, 0, grid.cfd[i], d + grid.cfd[j]});
        }
      }

      // Strong counterfactuals survive moves shorter than eps/2.
      if (d < half_eps) {
        for (std::uint32_t c : strong[i]) {
          ++report.strong_preservation_checked;
          if (!membership[j][c]) {
            ++report.strong_preservation_violations;
            record_example(report, {i, j, c, d, half_eps});
          }
        }
      }

      // delta-safe counterfactuals survive moves shorter than delta/2. Margins
      // never exceed epsilon, so pairs further apart than eps/2 are vacuous.
      if (d < half_eps + config.strong_tolerance) {
        for (const SafeMember& m : safe[i]) {
          if (d >= 0.5 * m.margin) break;  // margins are descending
          ++report.safety_persistence_checked;
          if (!membership[j][m.index]) {
            ++report.safety_persistence_violations;
            record_example(report, {i, j, m.index, d, 0.5 * m.margin});
          }
        }
      }
    }
  }

  // Empirical robustness constant over sampled same-class pairs with
  // 0 < d(x1,x2) < epsilon.
  Rng rng(derive_seed(config.seed, 0x7e57));
  std::size_t attempts = 0;
  double worst = 0.0;
  while (report.empirical_pairs < config.pair_budget && attempts < config.pair_budget * 50) {
    ++attempts;
    const auto i = static_cast<std::size_t>(rng.below(n));
    const auto j = static_cast<std::size_t>(rng.below(n));
    if (i == j || grid.labels[i] != grid.labels[j]) continue;
    const double d = grid.dist(metric, i, j);
    if (d <= 0.0 || d >= config.epsilon) continue;
    if (sets[i].empty() || sets[j].empty()) continue;
    PointSet s1, s2;
    for (std::uint32_t c : sets[i]) s1.push_back(grid.points[c]);
    for (std::uint32_t c : sets[j]) s2.push_back(grid.points[c]);
    worst = std::max(worst, set_distance_max(metric, s1, s2) / d);
    ++report.empirical_pairs;
  }
  report.empirical_k = worst;
  report.empirical_k_within_bound = worst <= config.k;
  return report;
}

}  // namespace robustcf
