#pragma once

#include "robustcf/classifier.hpp"
#include "robustcf/dataset.hpp"
#include "robustcf/distance.hpp"
#include "robustcf/types.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace robustcf {

enum class Step2Mode { NumberBased, DistanceBased };
enum class Step3Mode { AngleBased, DistanceBased };

// Whether counterfactual candidates are dataset points whose *predicted* label
// differs from the input's, or points whose stored dataset label differs.
// Prediction-based candidacy guarantees validity of un-minimised outputs.
enum class CandidateSource { Prediction, DatasetLabel };

struct ExplainerConfig {
  Metric metric;
  Step2Mode step2 = Step2Mode::NumberBased;
  double alpha = 50.0;  // candidate count (number mode) or relative tolerance (distance mode)
  Step3Mode step3 = Step3Mode::AngleBased;
  double beta = 0.5;
  double gamma = 0.1;    // bisection accuracy
  double epsilon = 0.1;  // tolerance for exhaustive sets and safety margins
  std::size_t max_counterfactuals = 5;
  bool minimise = true;
  CandidateSource candidate_source = CandidateSource::Prediction;

  void validate() const;

  // 50 below 1000 examples, 1000 otherwise.
  static double default_alpha_for(std::size_t dataset_size) {
    return dataset_size < 1000 ? 50.0 : 1000.0;
  }
};

struct Candidate {
  Vector point;
  double distance;           // to the reference input
  std::size_t source_index;  // row in the candidate dataset
};

struct BisectionStats {
  int iterations = 0;
  double initial_distance = 0.0;
  int classifier_queries = 0;
};

struct BisectionResult {
  Vector counterfactual;  // c-side iterate; always has the counterfactual class
  Vector witness;         // final x-side iterate; within gamma of the counterfactual
  BisectionStats stats;
};

enum class ExplainStatus { Ok, NoCounterfactualExists };

struct Counterfactual {
  Vector point;
  double distance = 0.0;
  std::optional<double> safety_margin;  // set when epsilon and cfd are known
  std::optional<BisectionStats> bisection;
  std::optional<std::size_t> source_index;
};

struct CounterfactualSet {
  Vector reference;
  Label reference_label = 0;
  std::vector<Counterfactual> counterfactuals;  // ascending by distance
  ExplainStatus status = ExplainStatus::Ok;
  std::vector<std::string> warnings;

  bool empty() const { return counterfactuals.empty(); }
  std::size_t size() const { return counterfactuals.size(); }
  PointSet points() const;
};

// Step 1: dataset points with a different (predicted or stored) label, sorted
// ascending by distance to x; ties keep dataset order.
std::vector<Candidate> order_candidates(const Dataset& dataset, const Classifier& classifier,
                                        const Metric& metric, const Vector& x,
                                        CandidateSource source = CandidateSource::Prediction);

// Step 2: keep the alpha closest (number mode), or everything within
// (1 + alpha) times the minimum candidate distance (distance mode).
std::vector<Candidate> distance_filter(std::vector<Candidate> candidates, Step2Mode mode,
                                       double alpha);

// Step 3: greedy pass over candidates still sorted by distance; the closest is
// always kept, later ones only if sufficiently different from every kept one
// (cosine distance of the direction vectors >= beta, or pairwise metric
// distance >= (1 + beta) * min_candidate_distance). Candidates that coincide
// with x cannot define a direction and are rejected with a warning.
std::vector<Candidate> diversity_filter(const std::vector<Candidate>& candidates, const Vector& x,
                                        Step3Mode mode, double beta, const Metric& metric,
                                        double min_candidate_distance,
                                        std::vector<std::string>* warnings = nullptr);

// Step 4: repeated halving of the segment [x, c] keeping x-side/c-side labels
// fixed, until the bracket is shorter than gamma. Requires different labels.
BisectionResult binary_search_cf(const Classifier& classifier, const Metric& metric,
                                 const Vector& x, const Vector& c, double gamma);

// Full pipeline: steps 1-4 (step 4 only when config.minimise), then truncation
// to the max_counterfactuals closest survivors.
CounterfactualSet explain(const Classifier& classifier, const Dataset& dataset, const Vector& x,
                          const ExplainerConfig& config);

// delta = cfd(x) + epsilon - d(x, c); negative when c lies outside the
// epsilon-approximate set.
double safety_margin(const Metric& metric, const Vector& x, const Vector& c, double epsilon,
                     double cfd_value);

// All grid points whose label differs from x's and whose distance is at most
// cfd(x) + epsilon, uncapped, sorted ascending by distance, each annotated
// with its safety margin.
CounterfactualSet exhaustive_explain(const GridClassifier& classifier, const Metric& metric,
                                     const Vector& x, double epsilon);

// Membership slack for the exhaustive threshold, shared by the verification
// checks so borderline rounding cannot flip set membership.
inline constexpr double kExhaustiveSlack = 1e-9;

}  // namespace robustcf
