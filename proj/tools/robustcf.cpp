// Command-line front end: generate counterfactual explanations, run the
// perturbation benchmark, verify set-distance robustness properties on finite
// grids, and emit the antipodal-input demo data.

#include "robustcf/dataset.hpp"
#include "robustcf/evaluate.hpp"
#include "robustcf/explain.hpp"
#include "robustcf/log.hpp"
#include "robustcf/mlp.hpp"
#include "robustcf/verify.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace robustcf;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

Metric make_metric(const std::string& name) {
  if (name == "l1") return Metric::manhattan();
  if (name == "l2") return Metric::euclidean();
  if (name == "linf") return Metric::chebyshev();
  throw CLI::ValidationError("--metric", "expected one of l1, l2, linf");
}

struct ExplainerFlags {
  std::string metric = "l2";
  std::string step2 = "number";
  double alpha = -1.0;  // negative: derive from dataset size
  std::string step3 = "angle";
  double beta = 0.5;
  double gamma = 0.1;
  double eps = 0.1;
  std::size_t max_cf = 5;
  bool no_minimise = false;

  void attach(CLI::App& cmd) {
    cmd.add_option("--metric", metric, "Distance metric: l1, l2 or linf")
        ->check(CLI::IsMember({"l1", "l2", "linf"}))
        ->capture_default_str();
    cmd.add_option("--step2", step2, "Candidate cutoff mode: number or distance")
        ->check(CLI::IsMember({"number", "distance"}))
        ->capture_default_str();
    cmd.add_option("--alpha", alpha,
                   "Cutoff parameter: candidate count (number mode) or relative tolerance "
                   "(distance mode); default 50 below 1000 examples, 1000 otherwise");
    cmd.add_option("--step3", step3, "Diversity mode: angle or distance")
        ->check(CLI::IsMember({"angle", "distance"}))
        ->capture_default_str();
    cmd.add_option("--beta", beta, "Diversity threshold")->capture_default_str();
    cmd.add_option("--gamma", gamma, "Bisection accuracy")->capture_default_str();
    cmd.add_option("--eps", eps, "Approximation tolerance for safety margins")
        ->capture_default_str();
    cmd.add_option("--max-cf", max_cf, "Maximum counterfactuals returned")
        ->capture_default_str();
    cmd.add_flag("--no-minimise", no_minimise, "Skip the bisection step");
  }

  ExplainerConfig build(std::size_t dataset_size) const {
    ExplainerConfig config;
    config.metric = make_metric(metric);
    config.step2 = step2 == "number" ? Step2Mode::NumberBased : Step2Mode::DistanceBased;
    config.alpha = alpha >= 0.0 ? alpha : ExplainerConfig::default_alpha_for(dataset_size);
    config.step3 = step3 == "angle" ? Step3Mode::AngleBased : Step3Mode::DistanceBased;
    config.beta = beta;
    config.gamma = gamma;
    config.epsilon = eps;
    config.max_counterfactuals = max_cf;
    config.minimise = !no_minimise;
    config.validate();
    return config;
  }
};

// --dataset accepts a CSV path or "synth:<kind>:<n>".
Dataset resolve_dataset(const std::string& spec, std::uint64_t seed) {
  if (spec.rfind("synth:", 0) == 0) {
    std::stringstream stream(spec.substr(6));
    std::string kind_name, count_text;
    if (!std::getline(stream, kind_name, ':') || !std::getline(stream, count_text)) {
      throw std::runtime_error("dataset spec '" + spec + "' must look like synth:<kind>:<n>");
    }
    return synthetic_dataset(synthetic_kind_from_string(kind_name),
                             static_cast<std::size_t>(std::stoul(count_text)), seed);
  }
  return load_dataset(spec);
}

bool dataset_is_synthetic(const std::string& spec) { return spec.rfind("synth:", 0) == 0; }

struct ResolvedModel {
  std::unique_ptr<Classifier> classifier;
  std::optional<AnalyticClassifier> analytic;  // set when the model is analytic
};

// --model accepts a weight file (*.json), "mlp" (train on the dataset), or an
// analytic spec: ball:<r>, diamond:<r>, cube:<r> (centered at 0.5^k) or
// halfspace:<axis>:<offset>.
ResolvedModel resolve_model(const std::string& spec, const Dataset& train_data,
                            std::uint64_t seed, int epochs, int batch_size) {
  ResolvedModel model;
  if (spec.size() > 5 && spec.substr(spec.size() - 5) == ".json") {
    model.classifier = std::make_unique<MlpClassifier>(MlpClassifier::load(spec));
    return model;
  }
  if (spec == "mlp") {
    TrainOptions options;
    options.seed = seed;
    options.epochs = epochs;
    options.batch_size = batch_size;
    TrainResult result = train_mlp(train_data, options);
    log_info("trained mlp, training accuracy " + std::to_string(result.train_accuracy));
    model.classifier = std::make_unique<MlpClassifier>(std::move(result.model));
    return model;
  }

  std::stringstream stream(spec);
  std::string shape_name;
  std::getline(stream, shape_name, ':');
  std::string arg1, arg2;
  std::getline(stream, arg1, ':');
  std::getline(stream, arg2, ':');
  const Eigen::Index k = train_data.dimension();
  if (shape_name == "halfspace") {
    if (arg1.empty() || arg2.empty()) {
      throw std::runtime_error("model spec '" + spec + "' must look like halfspace:<axis>:<offset>");
    }
    Vector normal = Vector::Zero(k);
    const auto axis = static_cast<Eigen::Index>(std::stol(arg1));
    if (axis < 0 || axis >= k) {
      throw std::runtime_error("halfspace axis out of range for dimension " + std::to_string(k));
    }
    normal[axis] = 1.0;
    model.analytic = AnalyticClassifier::halfspace(normal, std::stod(arg2));
  } else {
    if (arg1.empty()) {
      throw std::runtime_error("model spec '" + spec + "' must look like <shape>:<radius>");
    }
    const double radius = std::stod(arg1);
    const Vector center = Vector::Constant(k, 0.5);
    if (shape_name == "ball") {
      model.analytic = AnalyticClassifier::ball(center, radius);
    } else if (shape_name == "diamond") {
      model.analytic = AnalyticClassifier::diamond(center, radius);
    } else if (shape_name == "cube") {
      model.analytic = AnalyticClassifier::cube(center, radius);
    } else {
      throw std::runtime_error("unknown model spec '" + spec + "'");
    }
  }
  model.classifier = std::make_unique<AnalyticClassifier>(*model.analytic);
  return model;
}

// Exact cfd when the analytic shape's native metric matches the chosen one.
std::optional<double> exact_cfd(const ResolvedModel& model, const Metric& metric,
                                const Vector& x) {
  if (!model.analytic || metric.weights.size() != 0) return std::nullopt;
  const Shape shape = model.analytic->shape();
  const MetricKind kind = metric.kind;
  const bool native = (shape == Shape::Ball && kind == MetricKind::Euclidean) ||
                      (shape == Shape::Diamond && kind == MetricKind::Manhattan) ||
                      (shape == Shape::Cube && kind == MetricKind::Chebyshev) ||
                      (shape == Shape::Halfspace && kind == MetricKind::Euclidean);
  if (!native) return std::nullopt;
  return cfd_analytic(*model.analytic, x);
}

std::string explanation_to_csv(const CounterfactualSet& set) {
  std::ostringstream out;
  out.precision(17);
  out << "# robustcf explanation, schema_version=1\n";
  out << "index,distance,safety_margin";
  for (Eigen::Index i = 0; i < set.reference.size(); ++i) out << ",x" << i;
  out << "\n";
  std::size_t index = 0;
  for (const Counterfactual& cf : set.counterfactuals) {
    out << index++ << "," << cf.distance << ",";
    if (cf.safety_margin) out << *cf.safety_margin;
    for (Eigen::Index i = 0; i < cf.point.size(); ++i) out << "," << cf.point[i];
    out << "\n";
  }
  return out.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  file << text;
}

// ---------------------------------------------------------------------------

struct ExplainArgs {
  std::string dataset;
  std::string model;
  std::size_t input_index = 0;
  std::uint64_t seed = 0;
  int epochs = 100;
  int batch_size = 8;
  std::string out;
  std::string format = "json";
  std::string save_model;
  ExplainerFlags flags;
};

int run_explain(const ExplainArgs& args) {
  Dataset data = resolve_dataset(args.dataset, args.seed);
  if (!dataset_is_synthetic(args.dataset)) data = minmax_scale(data);

  const ResolvedModel model =
      resolve_model(args.model, data, args.seed, args.epochs, args.batch_size);
  if (!args.save_model.empty()) {
    if (const auto* mlp = dynamic_cast<const MlpClassifier*>(model.classifier.get())) {
      mlp->save(args.save_model);
    } else {
      log_warn("--save-model ignored: the model is not an mlp");
    }
  }

  if (args.input_index >= data.size()) {
    throw std::runtime_error("--input-index " + std::to_string(args.input_index) +
                             " out of range, dataset has " + std::to_string(data.size()) +
                             " rows");
  }
  const Vector& x = data.points[args.input_index];
  const ExplainerConfig config = args.flags.build(data.size());

  CounterfactualSet set = explain(*model.classifier, data, x, config);
  if (const auto cfd = exact_cfd(model, config.metric, x)) {
    for (Counterfactual& cf : set.counterfactuals) {
      cf.safety_margin = safety_margin(config.metric, x, cf.point, config.epsilon, *cfd);
    }
  }

  const std::string text = args.format == "csv"
                               ? explanation_to_csv(set)
                               : explanation_to_json(set, args.flags.metric).dump(2) + "\n";
  if (args.out.empty()) {
    std::cout << text;
  } else {
    write_text(args.out, text);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string dataset;
  std::string model;
  std::size_t inputs = 20;
  int reps = 3;
  double sigma = 0.05;
  double test_fraction = 0.25;
  std::uint64_t seed = 0;
  int epochs = 100;
  int batch_size = 8;
  std::string out = "report";
  std::string timing = "real";
  std::string save_model;
  ExplainerFlags flags;
};

int run_evaluate(const EvaluateArgs& args) {
  Dataset data = resolve_dataset(args.dataset, args.seed);
  auto [train, test] = train_test_split(data, {args.test_fraction, args.seed});
  if (!dataset_is_synthetic(args.dataset)) {
    // scale with training-split parameters only
    const ScalingParams params = fit_minmax(train);
    train = apply_minmax(train, params);
    test = apply_minmax(test, params);
  }

  const ResolvedModel model =
      resolve_model(args.model, train, args.seed, args.epochs, args.batch_size);
  if (!args.save_model.empty()) {
    if (const auto* mlp = dynamic_cast<const MlpClassifier*>(model.classifier.get())) {
      mlp->save(args.save_model);
    }
  }

  const ExplainerConfig config = args.flags.build(train.size());
  ProtocolConfig protocol;
  protocol.metric = config.metric;
  protocol.metric_label = args.flags.metric;
  protocol.sigma = args.sigma;
  protocol.repetitions = args.reps;
  protocol.seed = args.seed;
  protocol.include_timing = args.timing == "real";

  RobustnessReport report =
      run_protocol(*model.classifier, train, test, config, args.inputs, protocol);
  write_report(report, args.out + ".json", args.out + ".csv");

  std::cout << "evaluated " << report.methods.front().inputs.size() << " inputs, "
            << args.reps << " repetitions\n";
  for (const MethodReport& method : report.methods) {
    std::cout << method.method << ": ";
    if (method.aggregates.count("set_distance_max") != 0) {
      const Aggregate& agg = method.aggregates.at("set_distance_max");
      std::cout << "set_distance_max " << agg.mean << " +- " << agg.stddev;
    } else {
      std::cout << "no successful trials";
    }
    std::cout << " (failed trials: " << method.failed_trials << ")\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string scenario = "halfspace";
  std::size_t grid = 21;
  double eps = 0.2;
  double k = 1.0;
  std::string metric = "l2";
  std::size_t pairs = 200;
  std::uint64_t seed = 0;
  bool inject_fault = false;
};

int run_verify(const VerifyArgs& args) {
  std::optional<AnalyticClassifier> source;
  Vector center = Vector::Constant(2, 0.5);
  if (args.scenario == "halfspace") {
    Vector normal(2);
    normal << 1.0, 0.0;
    source = AnalyticClassifier::halfspace(normal, 0.6);
  } else if (args.scenario == "ball") {
    source = AnalyticClassifier::ball(center, 0.3);
  } else if (args.scenario == "diamond") {
    source = AnalyticClassifier::diamond(center, 0.35);
  } else {
    throw std::runtime_error("unknown scenario '" + args.scenario + "'");
  }

  const GridClassifier grid = GridClassifier::sample(
      *source, {GridClassifier::linspace(0, 1, args.grid),
                GridClassifier::linspace(0, 1, args.grid)});
  const Metric metric = make_metric(args.metric);

  VerificationConfig config;
  config.epsilon = args.eps;
  config.k = args.k;
  config.pair_budget = args.pairs;
  config.seed = args.seed;

  GridExplainFn explainer;
  if (args.inject_fault) {
    explainer = drop_closest_counterfactual(grid, metric, args.eps);
    log_warn("fault injection active: dropping the closest counterfactual from every set");
  }

  const VerificationReport report = verify_theory(grid, metric, config, explainer);
  std::cout << "scenario: " << args.scenario << ", grid " << args.grid << "x" << args.grid
            << ", eps " << args.eps << ", metric " << args.metric << "\n";
  std::cout << "same-class pairs: " << report.same_class_pairs << "\n";
  std::cout << "cfd lipschitz checks: " << report.lipschitz_checked
            << ", violations: " << report.lipschitz_violations << "\n";
  std::cout << "strong-counterfactual preservation checks: " << report.strong_preservation_checked
            << ", violations: " << report.strong_preservation_violations << "\n";
  std::cout << "safety persistence checks: " << report.safety_persistence_checked
            << ", violations: " << report.safety_persistence_violations << "\n";
  std::cout << "empirical robustness constant over " << report.empirical_pairs
            << " sampled pairs: " << report.empirical_k << "\n";
  std::cout << "violations: " << report.total_violations() << "\n";
  for (const PairViolation& example : report.examples) {
    std::cerr << "counterexample: x1=" << example.x1 << " x2=" << example.x2
              << " cf=" << example.counterfactual << " lhs=" << example.lhs
              << " rhs=" << example.rhs << "\n";
  }
  return report.ok() ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------

struct DemoArgs {
  double r = 1.0;
  double gap = 0.01;
  double gamma = 0.001;
  std::size_t n = 2000;
  std::uint64_t seed = 0;
  std::string out = "demo";
};

void append_point_rows(std::ostream& out, const std::string& role, const PointSet& points) {
  out.precision(17);
  for (const Vector& p : points) {
    out << role;
    for (Eigen::Index i = 0; i < p.size(); ++i) out << "," << p[i];
    out << "\n";
  }
}

int run_demo(const DemoArgs& args) {
  if (args.r <= 0.0 || args.gap <= 0.0) {
    throw std::runtime_error("demo needs positive --r and --gap");
  }
  const auto ball = AnalyticClassifier::ball(Vector::Zero(2), args.r);
  const Metric metric = Metric::euclidean();

  Vector x1(2), x2(2);
  x1 << args.gap / 2.0, 0.0;
  x2 = -x1;

  // nearest-boundary singleton explanations: bisect along the ray through each
  // input away from the center
  auto singleton_for = [&](const Vector& x) {
    const Vector far = x * (2.0 * args.r / x.norm());
    return binary_search_cf(ball, metric, x, far, args.gamma).counterfactual;
  };
  const Vector c1 = singleton_for(x1);
  const Vector c2 = singleton_for(x2);
  const double singleton_sdm = set_distance_max(metric, {c1}, {c2});

  // the diverse pipeline on a sampled dataset, same pair of inputs
  const Vector lo = Vector::Constant(2, -2.0 * args.r);
  const Vector hi = Vector::Constant(2, 2.0 * args.r);
  const Dataset data = sample_labeled(ball, lo, hi, args.n, args.seed);
  ExplainerConfig config;
  config.metric = metric;
  config.alpha = ExplainerConfig::default_alpha_for(data.size());
  const CounterfactualSet set1 = explain(ball, data, x1, config);
  const CounterfactualSet set2 = explain(ball, data, x2, config);
  if (set1.empty() || set2.empty()) {
    throw std::runtime_error("demo: the pipeline returned no counterfactuals");
  }
  const double pipeline_sdm = set_distance_max(metric, set1.points(), set2.points());

  std::ostringstream points;
  points << "# robustcf demo points, schema_version=1\n";
  points << "role,x0,x1\n";
  append_point_rows(points, "input_x1", {x1});
  append_point_rows(points, "input_x2", {x2});
  append_point_rows(points, "singleton_cf_x1", {c1});
  append_point_rows(points, "singleton_cf_x2", {c2});
  append_point_rows(points, "pipeline_cf_x1", set1.points());
  append_point_rows(points, "pipeline_cf_x2", set2.points());
  write_text(args.out + "_points.csv", points.str());

  std::ostringstream summary;
  summary.precision(17);
  summary << "# robustcf demo summary, schema_version=1\n";
  summary << "quantity,value\n";
  summary << "r," << args.r << "\n";
  summary << "gap," << args.gap << "\n";
  summary << "gamma," << args.gamma << "\n";
  summary << "singleton_set_distance_max," << singleton_sdm << "\n";
  summary << "pipeline_set_distance_max," << pipeline_sdm << "\n";
  summary << "pipeline_counterfactuals_x1," << set1.size() << "\n";
  summary << "pipeline_counterfactuals_x2," << set2.size() << "\n";
  write_text(args.out + "_summary.csv", summary.str());

  std::cout << "singleton set_distance_max: " << singleton_sdm << " (2r = " << 2 * args.r
            << ")\n";
  std::cout << "pipeline set_distance_max: " << pipeline_sdm << "\n";
  std::cout << "wrote " << args.out << "_points.csv and " << args.out << "_summary.csv\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diverse, robust counterfactual explanations for tabular binary classifiers"};
  app.require_subcommand(1);

  ExplainArgs explain_args;
  CLI::App* cmd_explain =
      app.add_subcommand("explain", "Explain one input from a dataset as JSON");
  cmd_explain->add_option("--dataset", explain_args.dataset,
                          "CSV path or synth:<kind>:<n>")->required();
  cmd_explain->add_option("--model", explain_args.model,
                          "Weights file (*.json), 'mlp', or analytic spec such as ball:0.3")
      ->required();
  cmd_explain->add_option("--input-index", explain_args.input_index, "Dataset row to explain")
      ->capture_default_str();
  cmd_explain->add_option("--seed", explain_args.seed, "Master seed")->capture_default_str();
  cmd_explain->add_option("--epochs", explain_args.epochs, "Training epochs for --model mlp")
      ->capture_default_str();
  cmd_explain->add_option("--batch-size", explain_args.batch_size,
                          "Training batch size for --model mlp")
      ->capture_default_str();
  cmd_explain->add_option("--out", explain_args.out, "Output file (default: stdout)");
  cmd_explain->add_option("--format", explain_args.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  cmd_explain->add_option("--save-model", explain_args.save_model,
                          "Write trained mlp weights to this file");
  explain_args.flags.attach(*cmd_explain);

  EvaluateArgs evaluate_args;
  CLI::App* cmd_evaluate = app.add_subcommand(
      "evaluate", "Run the perturbation benchmark: pipeline vs singleton-nearest baseline");
  cmd_evaluate->add_option("--dataset", evaluate_args.dataset, "CSV path or synth:<kind>:<n>")
      ->required();
  cmd_evaluate->add_option("--model", evaluate_args.model,
                           "Weights file (*.json), 'mlp', or analytic spec")->required();
  cmd_evaluate->add_option("--inputs", evaluate_args.inputs, "Test inputs to explain")
      ->capture_default_str();
  cmd_evaluate->add_option("--reps", evaluate_args.reps, "Perturbations per input")
      ->capture_default_str();
  cmd_evaluate->add_option("--sigma", evaluate_args.sigma, "Gaussian perturbation scale")
      ->capture_default_str();
  cmd_evaluate->add_option("--test-fraction", evaluate_args.test_fraction,
                           "Held-out fraction for the test split")
      ->capture_default_str();
  cmd_evaluate->add_option("--seed", evaluate_args.seed, "Master seed")->capture_default_str();
  cmd_evaluate->add_option("--epochs", evaluate_args.epochs, "Training epochs for --model mlp")
      ->capture_default_str();
  cmd_evaluate->add_option("--batch-size", evaluate_args.batch_size,
                           "Training batch size for --model mlp")
      ->capture_default_str();
  cmd_evaluate->add_option("--out", evaluate_args.out, "Output prefix for .json/.csv")
      ->capture_default_str();
  cmd_evaluate->add_option("--timing", evaluate_args.timing,
                           "real: record wall times; omit: drop them for byte-identical reruns")
      ->check(CLI::IsMember({"real", "omit"}))
      ->capture_default_str();
  cmd_evaluate->add_option("--save-model", evaluate_args.save_model,
                           "Write trained mlp weights to this file");
  evaluate_args.flags.attach(*cmd_evaluate);

  VerifyArgs verify_args;
  CLI::App* cmd_verify = app.add_subcommand(
      "verify", "Exhaustively check the robustness guarantees on a grid scenario");
  cmd_verify->add_option("--scenario", verify_args.scenario, "halfspace, ball or diamond")
      ->check(CLI::IsMember({"halfspace", "ball", "diamond"}))
      ->capture_default_str();
  cmd_verify->add_option("--grid", verify_args.grid, "Grid points per axis")
      ->capture_default_str();
  cmd_verify->add_option("--eps", verify_args.eps, "Approximation tolerance")
      ->capture_default_str();
  cmd_verify->add_option("--k", verify_args.k, "Robustness constant to compare against")
      ->capture_default_str();
  cmd_verify->add_option("--metric", verify_args.metric, "Distance metric")
      ->check(CLI::IsMember({"l1", "l2", "linf"}))
      ->capture_default_str();
  cmd_verify->add_option("--pairs", verify_args.pairs, "Sampled pairs for the empirical constant")
      ->capture_default_str();
  cmd_verify->add_option("--seed", verify_args.seed, "Master seed")->capture_default_str();
  cmd_verify->add_flag("--inject-fault", verify_args.inject_fault,
                       "Drop one strong counterfactual per set; the checks must then fail");

  DemoArgs demo_args;
  CLI::App* cmd_demo = app.add_subcommand(
      "demo", "Emit the antipodal-input counterexample data for the ball classifier");
  cmd_demo->add_option("--r", demo_args.r, "Ball radius")->capture_default_str();
  cmd_demo->add_option("--gap", demo_args.gap, "Distance between the two inputs")
      ->capture_default_str();
  cmd_demo->add_option("--gamma", demo_args.gamma, "Bisection accuracy for the singletons")
      ->capture_default_str();
  cmd_demo->add_option("--n", demo_args.n, "Sampled dataset size")->capture_default_str();
  cmd_demo->add_option("--seed", demo_args.seed, "Master seed")->capture_default_str();
  cmd_demo->add_option("--out", demo_args.out, "Output prefix")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (cmd_explain->parsed()) return run_explain(explain_args);
    if (cmd_evaluate->parsed()) return run_evaluate(evaluate_args);
    if (cmd_verify->parsed()) return run_verify(verify_args);
    if (cmd_demo->parsed()) return run_demo(demo_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
