#include "robustcf/evaluate.hpp"

#include "robustcf/log.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace robustcf {

using nlohmann::json;

double k_distance(const Metric& metric, const Vector& x, const PointSet& set) {
  if (set.empty()) {
    throw std::invalid_argument("k_distance: empty explanation set");
  }
  double total = 0.0;
  for (const Vector& point : set) total += distance(metric, x, point);
  return total / static_cast<double>(set.size());
}

double k_diversity(const Metric& metric, const PointSet& set) {
  if (set.size() < 2) return 0.0;
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i + 1 < set.size(); ++i) {
    for (std::size_t j = i + 1; j < set.size(); ++j) {
      total += distance(metric, set[i], set[j]);
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

std::optional<Vector> perturb_same_class(const Classifier& classifier, const Vector& x,
                                         double sigma, Rng& rng, int max_retries) {
  if (sigma <= 0.0) {
    throw std::invalid_argument("perturb_same_class: sigma must be positive");
  }
  const Label own = classifier.classify(x);
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    Vector candidate(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      candidate[i] = std::clamp(x[i] + sigma * rng.normal(), 0.0, 1.0);
    }
    if (classifier.classify(candidate) == own) return candidate;
  }
  return std::nullopt;
}

std::map<std::size_t, double> MethodReport::per_input_mean(const std::string& metric_name) const {
  std::map<std::size_t, double> means;
  for (const InputRecord& input : inputs) {
    double total = 0.0;
    std::size_t count = 0;
    for (const TrialRecord& trial : input.trials) {
      if (!trial.ok) continue;
      double value = 0.0;
      if (metric_name == "k_distance") value = trial.k_distance;
      else if (metric_name == "k_diversity") value = trial.k_diversity;
      else if (metric_name == "set_distance_sum") value = trial.set_distance_sum;
      else if (metric_name == "set_distance_max") value = trial.set_distance_max;
      else if (metric_name == "wall_time_ms") value = trial.wall_time_ms;
      else throw std::invalid_argument("per_input_mean: unknown metric '" + metric_name + "'");
      total += value;
      ++count;
    }
    if (count > 0) means[input.input_id] = total / static_cast<double>(count);
  }
  return means;
}

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

Aggregate aggregate_of(const std::vector<double>& values) {
  Aggregate agg;
  agg.count = values.size();
  if (values.empty()) return agg;
  agg.mean = std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(values.size());
  double variance = 0.0;
  for (double v : values) variance += (v - agg.mean) * (v - agg.mean);
  agg.stddev = std::sqrt(variance / static_cast<double>(values.size()));
  return agg;
}

void finalize_aggregates(MethodReport& report, bool include_timing) {
  std::map<std::string, std::vector<double>> pooled;
  for (const InputRecord& input : report.inputs) {
    for (const TrialRecord& trial : input.trials) {
      if (!trial.ok) continue;
      pooled["k_distance"].push_back(trial.k_distance);
      pooled["k_diversity"].push_back(trial.k_diversity);
      pooled["set_distance_sum"].push_back(trial.set_distance_sum);
      pooled["set_distance_max"].push_back(trial.set_distance_max);
      if (include_timing) pooled["wall_time_ms"].push_back(trial.wall_time_ms);
    }
  }
  for (auto& [name, values] : pooled) {
    report.aggregates[name] = aggregate_of(values);
  }
}

}  // namespace

RobustnessReport robustness_protocol(const Classifier& classifier,
                                     const std::vector<std::pair<std::size_t, Vector>>& inputs,
                                     const std::vector<MethodSpec>& methods,
                                     const ProtocolConfig& config) {
  if (config.repetitions < 0) {
    throw std::invalid_argument("robustness_protocol: repetitions must be >= 0");
  }
  RobustnessReport report;
  report.metric_label = config.metric_label;
  report.sigma = config.sigma;
  report.repetitions = config.repetitions;
  report.seed = config.seed;
  report.include_timing = config.include_timing;

  // Perturbations are shared across methods: derive them once per (input, rep).
  std::vector<std::vector<std::optional<Vector>>> perturbed(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    perturbed[i].resize(static_cast<std::size_t>(config.repetitions));
    for (int rep = 0; rep < config.repetitions; ++rep) {
      Rng rng(derive_seed(config.seed, inputs[i].first, static_cast<std::uint64_t>(rep) + 1));
      perturbed[i][static_cast<std::size_t>(rep)] = perturb_same_class(
          classifier, inputs[i].second, config.sigma, rng, config.max_retries);
    }
  }

  for (const MethodSpec& method : methods) {
    MethodReport method_report;
    method_report.method = method.name;

    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const auto& [input_id, x] = inputs[i];
      InputRecord record;
      record.input_id = input_id;

      const auto base_start = std::chrono::steady_clock::now();
      CounterfactualSet base = method.explain(x);
      record.wall_time_ms = elapsed_ms(base_start);

      if (base.empty()) {
        record.ok = false;
        record.failure = "no counterfactuals for base input";
        ++method_report.failed_inputs;
        method_report.failed_trials += static_cast<std::size_t>(config.repetitions);
        method_report.inputs.push_back(std::move(record));
        continue;
      }
      const PointSet base_points = base.points();
      record.ok = true;
      record.k_distance = k_distance(config.metric, x, base_points);
      record.k_diversity = k_diversity(config.metric, base_points);
      record.counterfactuals = base_points.size();

      for (int rep = 0; rep < config.repetitions; ++rep) {
        TrialRecord trial;
        trial.repetition = rep;
        const auto& maybe_x2 = perturbed[i][static_cast<std::size_t>(rep)];
        if (!maybe_x2) {
          trial.failure = "perturbation retries exhausted";
          ++method_report.failed_trials;
          record.trials.push_back(std::move(trial));
          continue;
        }
        const Vector& x2 = *maybe_x2;
        const auto trial_start = std::chrono::steady_clock::now();
        CounterfactualSet perturbed_set = method.explain(x2);
        trial.wall_time_ms = elapsed_ms(trial_start);
        if (perturbed_set.empty()) {
          trial.failure = "no counterfactuals for perturbed input";
          ++method_report.failed_trials;
          record.trials.push_back(std::move(trial));
          continue;
        }
        const PointSet perturbed_points = perturbed_set.points();
        trial.ok = true;
        trial.k_distance = k_distance(config.metric, x2, perturbed_points);
        trial.k_diversity = k_diversity(config.metric, perturbed_points);
        trial.set_distance_sum = set_distance_sum(config.metric, base_points, perturbed_points);
        trial.set_distance_max = set_distance_max(config.metric, base_points, perturbed_points);
        trial.counterfactuals = perturbed_points.size();
        record.trials.push_back(std::move(trial));
      }
      method_report.inputs.push_back(std::move(record));
    }

    finalize_aggregates(method_report, config.include_timing);
    report.methods.push_back(std::move(method_report));
  }
  return report;
}

CounterfactualSet singleton_nearest_explain(const Classifier& classifier, const Dataset& dataset,
                                            const Vector& x, const Metric& metric, double gamma) {
  CounterfactualSet result;
  result.reference = x;
  result.reference_label = classifier.classify(x);
  const std::vector<Candidate> ordered = order_candidates(dataset, classifier, metric, x);
  if (ordered.empty()) {
    result.status = ExplainStatus::NoCounterfactualExists;
    return result;
  }
  const Candidate& nearest = ordered.front();
  BisectionResult refined = binary_search_cf(classifier, metric, x, nearest.point, gamma);
  Counterfactual cf;
  cf.point = std::move(refined.counterfactual);
  cf.distance = distance(metric, x, cf.point);
  cf.bisection = refined.stats;
  cf.source_index = nearest.source_index;
  result.counterfactuals.push_back(std::move(cf));
  return result;
}

RobustnessReport run_protocol(const Classifier& classifier, const Dataset& train,
                              const Dataset& test, const ExplainerConfig& explainer,
                              std::size_t input_count, const ProtocolConfig& config) {
  if (test.size() == 0) {
    throw std::invalid_argument("run_protocol: empty test split");
  }
  std::vector<std::size_t> indices(test.size());
  std::iota(indices.begin(), indices.end(), 0);
  Rng rng(derive_seed(config.seed, 0x17b07));
  rng.shuffle(indices);
  if (indices.size() > input_count) indices.resize(input_count);
  std::sort(indices.begin(), indices.end());

  std::vector<std::pair<std::size_t, Vector>> inputs;
  inputs.reserve(indices.size());
  for (std::size_t index : indices) inputs.emplace_back(index, test.points[index]);

  const std::vector<MethodSpec> methods = {
      {"diverse_set",
       [&classifier, &train, explainer](const Vector& x) {
         return explain(classifier, train, x, explainer);
       }},
      {"singleton_nearest",
       [&classifier, &train, explainer](const Vector& x) {
         return singleton_nearest_explain(classifier, train, x, explainer.metric,
                                          explainer.gamma);
       }},
  };

  RobustnessReport report = robustness_protocol(classifier, inputs, methods, config);
  report.dataset = test.provenance.empty() ? "dataset" : test.provenance;
  return report;
}

json report_to_json(const RobustnessReport& report) {
  json doc;
  doc["schema_version"] = 1;
  doc["dataset"] = report.dataset;
  doc["metric"] = report.metric_label;
  doc["sigma"] = report.sigma;
  doc["repetitions"] = report.repetitions;
  doc["seed"] = report.seed;
  doc["aggregation"] = report.aggregation;

  json methods = json::array();
  for (const MethodReport& method : report.methods) {
    json m;
    m["method"] = method.method;
    m["failed_inputs"] = method.failed_inputs;
    m["failed_trials"] = method.failed_trials;
    json aggregates;
    for (const auto& [name, agg] : method.aggregates) {
      aggregates[name] = {{"mean", agg.mean}, {"std", agg.stddev}, {"count", agg.count}};
    }
    m["aggregates"] = std::move(aggregates);

    json inputs = json::array();
    for (const InputRecord& input : method.inputs) {
      json in;
      in["input_id"] = input.input_id;
      in["ok"] = input.ok;
      if (!input.ok) in["failure"] = input.failure;
      if (input.ok) {
        in["k_distance"] = input.k_distance;
        in["k_diversity"] = input.k_diversity;
        in["counterfactuals"] = input.counterfactuals;
        if (report.include_timing) in["wall_time_ms"] = input.wall_time_ms;
      }
      json trials = json::array();
      for (const TrialRecord& trial : input.trials) {
        json t;
        t["repetition"] = trial.repetition;
        t["ok"] = trial.ok;
        if (!trial.ok) {
          t["failure"] = trial.failure;
        } else {
          t["k_distance"] = trial.k_distance;
          t["k_diversity"] = trial.k_diversity;
          t["set_distance_sum"] = trial.set_distance_sum;
          t["set_distance_max"] = trial.set_distance_max;
          t["counterfactuals"] = trial.counterfactuals;
          if (report.include_timing) t["wall_time_ms"] = trial.wall_time_ms;
        }
        trials.push_back(std::move(t));
      }
      in["trials"] = std::move(trials);
      inputs.push_back(std::move(in));
    }
    m["inputs"] = std::move(inputs);
    methods.push_back(std::move(m));
  }
  doc["methods"] = std::move(methods);
  return doc;
}

std::string report_to_csv(const RobustnessReport& report) {
  std::ostringstream out;
  out << "# robustcf aggregate report, schema_version=1\n";
  out << "method,dataset,metric,mean,std\n";
  out.precision(17);
  for (const MethodReport& method : report.methods) {
    for (const auto& [name, agg] : method.aggregates) {
      out << method.method << "," << report.dataset << "," << name << "," << agg.mean << ","
          << agg.stddev << "\n";
    }
  }
  return out.str();
}

json explanation_to_json(const CounterfactualSet& set, const std::string& metric_label) {
  json doc;
  doc["schema_version"] = 1;
  doc["metric"] = metric_label;
  doc["reference"] =
      std::vector<double>(set.reference.data(), set.reference.data() + set.reference.size());
  doc["reference_label"] = set.reference_label;
  doc["status"] = set.status == ExplainStatus::Ok ? "ok" : "no_counterfactual_exists";
  doc["warnings"] = set.warnings;
  json items = json::array();
  for (const Counterfactual& cf : set.counterfactuals) {
    json item;
    item["point"] = std::vector<double>(cf.point.data(), cf.point.data() + cf.point.size());
    item["distance"] = cf.distance;
    if (cf.safety_margin) item["safety_margin"] = *cf.safety_margin;
    if (cf.source_index) item["source_index"] = *cf.source_index;
    if (cf.bisection) {
      item["bisection"] = {{"iterations", cf.bisection->iterations},
                           {"initial_distance", cf.bisection->initial_distance},
                           {"classifier_queries", cf.bisection->classifier_queries}};
    }
    items.push_back(std::move(item));
  }
  doc["counterfactuals"] = std::move(items);
  return doc;
}

void write_report(const RobustnessReport& report, const std::filesystem::path& json_path,
                  const std::filesystem::path& csv_path) {
  {
    std::ofstream file(json_path);
    if (!file) {
      throw std::runtime_error("write_report: cannot open '" + json_path.string() + "'");
    }
    file << report_to_json(report).dump(2) << "\n";
  }
  {
    std::ofstream file(csv_path);
    if (!file) {
      throw std::runtime_error("write_report: cannot open '" + csv_path.string() + "'");
    }
    file << report_to_csv(report);
  }
  log_info("wrote report to " + json_path.string() + " and " + csv_path.string());
}

}  // namespace robustcf
