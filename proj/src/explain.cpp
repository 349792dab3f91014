#include "robustcf/explain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace robustcf {

void ExplainerConfig::validate() const {
  if (gamma <= 0.0) throw std::invalid_argument("ExplainerConfig: gamma must be positive");
  if (epsilon < 0.0) throw std::invalid_argument("ExplainerConfig: epsilon must be >= 0");
  if (max_counterfactuals < 1) {
    throw std::invalid_argument("ExplainerConfig: max_counterfactuals must be >= 1");
  }
  if (step2 == Step2Mode::NumberBased) {
    if (alpha < 1.0) throw std::invalid_argument("ExplainerConfig: number-based alpha must be >= 1");
  } else if (alpha < 0.0) {
    throw std::invalid_argument("ExplainerConfig: distance-based alpha must be >= 0");
  }
  if (step3 == Step3Mode::AngleBased) {
    if (beta < 0.0 || beta > 2.0) {
      throw std::invalid_argument("ExplainerConfig: angle-based beta must be in [0,2]");
    }
  } else if (beta < 0.0 || beta > 1.0) {
    throw std::invalid_argument("ExplainerConfig: distance-based beta must be in [0,1]");
  }
}

PointSet CounterfactualSet::points() const {
  PointSet set;
  set.reserve(counterfactuals.size());
  for (const Counterfactual& cf : counterfactuals) set.push_back(cf.point);
  return set;
}

std::vector<Candidate> order_candidates(const Dataset& dataset, const Classifier& classifier,
                                        const Metric& metric, const Vector& x,
                                        CandidateSource source) {
  if (dataset.size() == 0) {
    throw std::invalid_argument("order_candidates: empty dataset");
  }
  if (dataset.dimension() != x.size()) {
    throw std::invalid_argument("order_candidates: dataset dimension mismatch");
  }
  const Label reference_label = classifier.classify(x);
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Label label = source == CandidateSource::Prediction
                            ? classifier.classify(dataset.points[i])
                            : dataset.labels[i];
    if (label == reference_label) continue;
    candidates.push_back({dataset.points[i], distance(metric, x, dataset.points[i]), i});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.distance < b.distance; });
  return candidates;
}

std::vector<Candidate> distance_filter(std::vector<Candidate> candidates, Step2Mode mode,
                                       double alpha) {
  if (candidates.empty()) return candidates;
  if (mode == Step2Mode::NumberBased) {
    const auto keep = static_cast<std::size_t>(alpha);
    if (candidates.size() > keep) candidates.resize(keep);
    return candidates;
  }
  const double threshold = (1.0 + alpha) * candidates.front().distance;
  auto past = std::find_if(candidates.begin(), candidates.end(),
                           [&](const Candidate& c) { return c.distance > threshold; });
  candidates.erase(past, candidates.end());
  return candidates;
}

std::vector<Candidate> diversity_filter(const std::vector<Candidate>& candidates, const Vector& x,
                                        Step3Mode mode, double beta, const Metric& metric,
                                        double min_candidate_distance,
                                        std::vector<std::string>* warnings) {
  std::vector<Candidate> kept;
  if (candidates.empty()) return kept;
  if (mode == Step3Mode::DistanceBased && min_candidate_distance <= 0.0) {
    throw std::invalid_argument("diversity_filter: distance mode needs a positive minimum "
                                "candidate distance");
  }
  const double pair_threshold = (1.0 + beta) * min_candidate_distance;

  std::vector<Vector> directions;  // angle mode only
  for (const Candidate& candidate : candidates) {
    if (mode == Step3Mode::AngleBased) {
      Vector direction = candidate.point - x;
      if (direction.norm() == 0.0) {
        if (warnings != nullptr) {
          warnings->push_back("diversity filter: candidate " +
                              std::to_string(candidate.source_index) +
                              " coincides with the input and was rejected");
        }
        continue;
      }
      bool diverse = true;
      for (const Vector& other : directions) {
        const double cd = cosine_distance(direction, other);
        // A duplicate direction never counts as diverse, even at beta = 0.
        if (cd < beta || cd <= 0.0) {
          diverse = false;
          break;
        }
      }
      if (diverse) {
        kept.push_back(candidate);
        directions.push_back(std::move(direction));
      }
    } else {
      bool diverse = true;
      for (const Candidate& other : kept) {
        if (distance(metric, candidate.point, other.point) < pair_threshold) {
          diverse = false;
          break;
        }
      }
      if (diverse) {
        kept.push_back(candidate);
      }
    }
  }
  return kept;
}

BisectionResult binary_search_cf(const Classifier& classifier, const Metric& metric,
                                 const Vector& x, const Vector& c, double gamma) {
  if (gamma <= 0.0) {
    throw std::invalid_argument("binary_search_cf: gamma must be positive");
  }
  const Label reference_label = classifier.classify(x);
  if (classifier.classify(c) == reference_label) {
    throw std::invalid_argument("binary_search_cf: endpoints have the same label");
  }

  BisectionResult result{c, x, {}};
  result.stats.initial_distance = distance(metric, x, c);

  Vector near = x;  // keeps the reference label
  Vector far = c;   // keeps the counterfactual label
  while (distance(metric, near, far) > gamma) {
    const Vector midpoint = 0.5 * (near + far);
    ++result.stats.iterations;
    ++result.stats.classifier_queries;
    if (classifier.classify(midpoint) == reference_label) {
      near = midpoint;
    } else {
      far = midpoint;
    }
  }
  result.counterfactual = std::move(far);
  result.witness = std::move(near);
  return result;
}

double safety_margin(const Metric& metric, const Vector& x, const Vector& c, double epsilon,
                     double cfd_value) {
  if (!std::isfinite(cfd_value)) {
    throw std::invalid_argument("safety_margin: cfd must be finite");
  }
  return cfd_value + epsilon - distance(metric, x, c);
}

CounterfactualSet explain(const Classifier& classifier, const Dataset& dataset, const Vector& x,
                          const ExplainerConfig& config) {
  config.validate();
  CounterfactualSet result;
  result.reference = x;
  result.reference_label = classifier.classify(x);

  const std::vector<Candidate> ordered =
      order_candidates(dataset, classifier, config.metric, x, config.candidate_source);
  if (ordered.empty()) {
    result.status = ExplainStatus::NoCounterfactualExists;
    return result;
  }
  const double min_candidate_distance = ordered.front().distance;

  std::vector<Candidate> narrowed = distance_filter(ordered, config.step2, config.alpha);
  std::vector<Candidate> survivors =
      diversity_filter(narrowed, x, config.step3, config.beta, config.metric,
                       min_candidate_distance, &result.warnings);
  if (survivors.empty()) {
    result.status = ExplainStatus::NoCounterfactualExists;
    return result;
  }

  for (const Candidate& survivor : survivors) {
    Counterfactual cf;
    cf.source_index = survivor.source_index;
    if (config.minimise) {
      BisectionResult refined =
          binary_search_cf(classifier, config.metric, x, survivor.point, config.gamma);
      cf.point = std::move(refined.counterfactual);
      cf.distance = distance(config.metric, x, cf.point);
      cf.bisection = refined.stats;
    } else {
      cf.point = survivor.point;
      cf.distance = survivor.distance;
    }
    result.counterfactuals.push_back(std::move(cf));
  }

  // Bisection can reorder by distance; restore ascending order before capping.
  std::stable_sort(result.counterfactuals.begin(), result.counterfactuals.end(),
                   [](const Counterfactual& a, const Counterfactual& b) {
                     return a.distance < b.distance;
                   });
  if (result.counterfactuals.size() > config.max_counterfactuals) {
    result.counterfactuals.resize(config.max_counterfactuals);
  }

  for (const Counterfactual& cf : result.counterfactuals) {
    if (classifier.classify(cf.point) == result.reference_label) {
      throw std::logic_error("explain: produced an invalid counterfactual (step 4)");
    }
  }
  return result;
}

CounterfactualSet exhaustive_explain(const GridClassifier& classifier, const Metric& metric,
                                     const Vector& x, double epsilon) {
  if (epsilon < 0.0) {
    throw std::invalid_argument("exhaustive_explain: epsilon must be >= 0");
  }
  CounterfactualSet result;
  result.reference = x;
  result.reference_label = classifier.classify(x);

  const double cfd = cfd_bruteforce(classifier, metric, x);
  if (!std::isfinite(cfd)) {
    result.status = ExplainStatus::NoCounterfactualExists;
    result.warnings.push_back("no counterfactual exists: the grid is single-class");
    return result;
  }

  const double threshold = cfd + epsilon + kExhaustiveSlack;
  for (std::size_t i = 0; i < classifier.point_count(); ++i) {
    if (classifier.label_at(i) == result.reference_label) continue;
    Vector candidate = classifier.point(i);
    const double d = distance(metric, x, candidate);
    if (d > threshold) continue;
    Counterfactual cf;
    cf.point = std::move(candidate);
    cf.distance = d;
    cf.safety_margin = cfd + epsilon - d;
    cf.source_index = i;
    result.counterfactuals.push_back(std::move(cf));
  }
  std::stable_sort(result.counterfactuals.begin(), result.counterfactuals.end(),
                   [](const Counterfactual& a, const Counterfactual& b) {
                     return a.distance < b.distance;
                   });
  return result;
}

}  // namespace robustcf
