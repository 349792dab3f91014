#pragma once

#include "robustcf/classifier.hpp"
#include "robustcf/dataset.hpp"
#include "robustcf/distance.hpp"
#include "robustcf/explain.hpp"
#include "robustcf/rng.hpp"
#include "robustcf/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace robustcf {

// Mean distance from the input to the explanation set. Lower means cheaper
// recourse.
double k_distance(const Metric& metric, const Vector& x, const PointSet& set);

// Mean pairwise distance within the set; 0 for fewer than two points (the
// degenerate case is visible through the recorded set sizes).
double k_diversity(const Metric& metric, const PointSet& set);

// Draws x + N(0, sigma^2 I) clipped to [0,1]^k until the sample keeps x's
// class; nullopt once max_retries draws were rejected.
std::optional<Vector> perturb_same_class(const Classifier& classifier, const Vector& x,
                                         double sigma, Rng& rng, int max_retries = 100);

struct TrialRecord {
  int repetition = 0;
  bool ok = false;
  std::string failure;
  double k_distance = 0.0;
  double k_diversity = 0.0;
  double set_distance_sum = 0.0;
  double set_distance_max = 0.0;
  std::size_t counterfactuals = 0;
  double wall_time_ms = 0.0;
};

struct InputRecord {
  std::size_t input_id = 0;
  bool ok = false;
  std::string failure;
  double k_distance = 0.0;
  double k_diversity = 0.0;
  std::size_t counterfactuals = 0;
  double wall_time_ms = 0.0;
  std::vector<TrialRecord> trials;
};

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  std::size_t count = 0;
};

struct MethodReport {
  std::string method;
  std::vector<InputRecord> inputs;
  std::size_t failed_inputs = 0;
  std::size_t failed_trials = 0;
  // pooled over all successful trials: k_distance, k_diversity,
  // set_distance_sum, set_distance_max and (optionally) wall_time_ms
  std::map<std::string, Aggregate> aggregates;

  // mean of a trial metric per input id, successful trials only
  std::map<std::size_t, double> per_input_mean(const std::string& metric_name) const;
};

struct RobustnessReport {
  std::string dataset;
  std::string metric_label = "l2";
  double sigma = 0.05;
  int repetitions = 3;
  std::uint64_t seed = 0;
  std::string aggregation = "pooled_trials";
  bool include_timing = true;
  std::vector<MethodReport> methods;
};

struct MethodSpec {
  std::string name;
  std::function<CounterfactualSet(const Vector&)> explain;
};

struct ProtocolConfig {
  Metric metric;  // evaluation metric for all report values
  std::string metric_label = "l2";
  double sigma = 0.05;
  int repetitions = 3;
  int max_retries = 100;
  std::uint64_t seed = 0;
  bool include_timing = true;
};

// For every input: explain it, then `repetitions` times draw a same-class
// perturbation, explain that, and record the quality metrics of the perturbed
// explanation plus both set distances to the base explanation. Perturbation
// streams depend only on (seed, input id, repetition), never on the method, so
// all methods see identical perturbed inputs.
RobustnessReport robustness_protocol(const Classifier& classifier,
                                     const std::vector<std::pair<std::size_t, Vector>>& inputs,
                                     const std::vector<MethodSpec>& methods,
                                     const ProtocolConfig& config);

// Samples `input_count` rows from the test split and runs the protocol for the
// configured pipeline against the singleton-nearest baseline, both searching
// candidates in `train`.
RobustnessReport run_protocol(const Classifier& classifier, const Dataset& train,
                              const Dataset& test, const ExplainerConfig& explainer,
                              std::size_t input_count, const ProtocolConfig& config);

// Stand-in for single-counterfactual methods: the nearest candidate, bisected
// toward the input.
CounterfactualSet singleton_nearest_explain(const Classifier& classifier, const Dataset& dataset,
                                            const Vector& x, const Metric& metric, double gamma);

nlohmann::json report_to_json(const RobustnessReport& report);

// Aggregate table, columns: method,dataset,metric,mean,std (after one
// schema-version comment line).
std::string report_to_csv(const RobustnessReport& report);

void write_report(const RobustnessReport& report, const std::filesystem::path& json_path,
                  const std::filesystem::path& csv_path);

// Explanation output as shipped by the CLI; deterministic for identical sets.
nlohmann::json explanation_to_json(const CounterfactualSet& set,
                                   const std::string& metric_label);

}  // namespace robustcf
