#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "robustcf/evaluate.hpp"
#include "robustcf/mlp.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

using namespace robustcf;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("k-distance is the mean distance from the input") {
  const Metric metric = Metric::euclidean();
  CHECK(k_distance(metric, vec2(0, 0), {vec2(1, 0), vec2(0, 2)}) == doctest::Approx(1.5));
  CHECK(k_distance(metric, vec2(0, 0), {vec2(0, 0)}) == doctest::Approx(0.0));
  CHECK(k_distance(metric, vec2(0, 0), {vec2(3, 4)}) == doctest::Approx(5.0));
  CHECK_THROWS_AS(k_distance(metric, vec2(0, 0), {}), std::invalid_argument);
}

TEST_CASE("k-diversity is the mean pairwise distance") {
  CHECK(k_diversity(Metric::euclidean(), {vec2(0, 0), vec2(3, 4)}) == doctest::Approx(5.0));
  CHECK(k_diversity(Metric::manhattan(), {vec2(0, 0), vec2(1, 0), vec2(0, 1)}) ==
        doctest::Approx(4.0 / 3.0));
  CHECK(k_diversity(Metric::euclidean(), {vec2(1, 1), vec2(1, 1)}) == doctest::Approx(0.0));
  // fewer than two points is the degenerate case
  CHECK(k_diversity(Metric::euclidean(), {vec2(1, 1)}) == 0.0);
}

TEST_CASE("k-diversity is permutation invariant") {
  Rng rng(31);
  PointSet set;
  for (int i = 0; i < 6; ++i) set.push_back(vec2(rng.uniform01(), rng.uniform01()));
  const double reference = k_diversity(Metric::euclidean(), set);
  for (int trial = 0; trial < 10; ++trial) {
    rng.shuffle(set);
    REQUIRE(k_diversity(Metric::euclidean(), set) == doctest::Approx(reference).epsilon(1e-12));
  }
}

TEST_CASE("k-distance dominates cfd on grids") {
  const auto ball = AnalyticClassifier::ball(vec2(0.5, 0.5), 0.3);
  const auto axes = std::vector<std::vector<double>>{GridClassifier::linspace(0, 1, 15),
                                                     GridClassifier::linspace(0, 1, 15)};
  const GridClassifier grid = GridClassifier::sample(ball, axes);
  const Metric metric = Metric::euclidean();
  Rng rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    const Vector x = grid.point(rng.below(grid.point_count()));
    const CounterfactualSet set = exhaustive_explain(grid, metric, x, 0.1);
    if (set.empty()) continue;
    const double cfd = cfd_bruteforce(grid, metric, x);
    REQUIRE(k_distance(metric, x, set.points()) >= cfd - 1e-12);
  }
}

TEST_CASE("singleton sets compare fairly: sum equals max equals point distance") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const PointSet s1 = {vec2(rng.uniform01(), rng.uniform01())};
    const PointSet s2 = {vec2(rng.uniform01(), rng.uniform01())};
    const double point = distance(Metric::euclidean(), s1[0], s2[0]);
    REQUIRE(set_distance_sum(Metric::euclidean(), s1, s2) ==
            doctest::Approx(point).epsilon(1e-12));
    REQUIRE(set_distance_max(Metric::euclidean(), s1, s2) ==
            doctest::Approx(point).epsilon(1e-12));
  }
}

TEST_CASE("same-class perturbation sampling") {
  const auto ball = AnalyticClassifier::ball(vec2(0.5, 0.5), 0.3);

  SUBCASE("tiny sigma reproduces the input's class trivially") {
    Rng rng(1);
    const Vector x = vec2(0.5, 0.5);
    const auto sample = perturb_same_class(ball, x, 1e-12, rng);
    REQUIRE(sample.has_value());
    CHECK(((*sample) - x).norm() < 1e-9);
  }
  SUBCASE("deep inside the class almost every first draw is accepted") {
    const Vector x = vec2(0.5, 0.5);  // 0.3 from the boundary, sigma 0.05
    int first_draw_hits = 0;
    for (int seed = 0; seed < 1000; ++seed) {
      Rng rng(derive_seed(99, seed));
      const auto sample = perturb_same_class(ball, x, 0.05, rng, 1);
      if (sample) ++first_draw_hits;
    }
    CHECK(first_draw_hits >= 950);
  }
  SUBCASE("near the boundary retries happen but the class is preserved") {
    const Vector x = vec2(0.5 + 0.3 - 0.005, 0.5);  // sigma/10 from the boundary
    int retried = 0;
    for (int seed = 0; seed < 200; ++seed) {
      Rng rng(derive_seed(7, seed));
      Rng probe = rng;  // same stream; count rejections manually
      const auto sample = perturb_same_class(ball, x, 0.05, rng, 100);
      REQUIRE(sample.has_value());
      REQUIRE(ball.classify(*sample) == ball.classify(x));
      Vector first(2);
      first[0] = std::clamp(x[0] + 0.05 * probe.normal(), 0.0, 1.0);
      first[1] = std::clamp(x[1] + 0.05 * probe.normal(), 0.0, 1.0);
      if (ball.classify(first) != ball.classify(x)) ++retried;
    }
    CHECK(retried > 20);  // roughly half the mass is outside
  }
  SUBCASE("exhausted retries return nullopt") {
    // a needle the sampler cannot hit from far away
    const auto needle = AnalyticClassifier::ball(vec2(0.5, 0.5), 1e-9);
    Rng rng(3);
    CHECK(!perturb_same_class(needle, vec2(0.5, 0.5), 0.2, rng, 50).has_value());
  }
}

namespace {

// protocol scaffolding shared by the remaining cases
struct ProtocolFixture {
  AnalyticClassifier ball = AnalyticClassifier::ball(vec2(0.5, 0.5), 0.3);
  Dataset train;
  std::vector<std::pair<std::size_t, Vector>> inputs;
  ProtocolConfig config;

  ProtocolFixture() {
    train = synthetic_dataset(SyntheticKind::Ball, 300, 4);
    inputs = {{0, vec2(0.5, 0.5)}, {1, vec2(0.45, 0.55)}, {2, vec2(0.6, 0.5)}};
    config.metric = Metric::euclidean();
    config.seed = 11;
  }

  MethodSpec pipeline() const {
    ExplainerConfig explainer;
    explainer.metric = Metric::euclidean();
    return {"diverse_set", [this, explainer](const Vector& x) {
              return explain(ball, train, x, explainer);
            }};
  }
};

}  // namespace

TEST_CASE("protocol with zero repetitions reports base explanations only") {
  ProtocolFixture fixture;
  fixture.config.repetitions = 0;
  const RobustnessReport report =
      robustness_protocol(fixture.ball, fixture.inputs, {fixture.pipeline()}, fixture.config);
  REQUIRE(report.methods.size() == 1);
  const MethodReport& method = report.methods[0];
  REQUIRE(method.inputs.size() == 3);
  for (const InputRecord& input : method.inputs) {
    CHECK(input.ok);
    CHECK(input.trials.empty());
    CHECK(input.counterfactuals >= 1);
  }
  CHECK(method.aggregates.empty());
}

TEST_CASE("a constant method has zero set distances") {
  ProtocolFixture fixture;
  const PointSet frozen = {vec2(0.9, 0.5), vec2(0.5, 0.9)};
  MethodSpec constant{"constant", [&](const Vector& x) {
                        CounterfactualSet set;
                        set.reference = x;
                        set.reference_label = 1;
                        for (const Vector& p : frozen) {
                          Counterfactual cf;
                          cf.point = p;
                          cf.distance = distance(Metric::euclidean(), x, p);
                          set.counterfactuals.push_back(cf);
                        }
                        return set;
                      }};
  const RobustnessReport report =
      robustness_protocol(fixture.ball, fixture.inputs, {constant}, fixture.config);
  const MethodReport& method = report.methods[0];
  CHECK(method.aggregates.at("set_distance_sum").mean == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(method.aggregates.at("set_distance_max").mean == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(method.aggregates.at("set_distance_max").count == 9);
}

TEST_CASE("protocol aggregates are recomputable from the trial records") {
  ProtocolFixture fixture;
  const RobustnessReport report =
      robustness_protocol(fixture.ball, fixture.inputs, {fixture.pipeline()}, fixture.config);
  const MethodReport& method = report.methods[0];
  double total = 0.0;
  std::size_t count = 0;
  for (const InputRecord& input : method.inputs) {
    for (const TrialRecord& trial : input.trials) {
      if (!trial.ok) continue;
      total += trial.set_distance_max;
      ++count;
    }
  }
  REQUIRE(count > 0);
  CHECK(method.aggregates.at("set_distance_max").count == count);
  CHECK(method.aggregates.at("set_distance_max").mean ==
        doctest::Approx(total / static_cast<double>(count)).epsilon(1e-12));
}

TEST_CASE("protocol reruns are identical for a fixed seed") {
  ProtocolFixture fixture;
  fixture.config.include_timing = false;
  const RobustnessReport a =
      robustness_protocol(fixture.ball, fixture.inputs, {fixture.pipeline()}, fixture.config);
  const RobustnessReport b =
      robustness_protocol(fixture.ball, fixture.inputs, {fixture.pipeline()}, fixture.config);
  CHECK(report_to_json(a).dump() == report_to_json(b).dump());
  CHECK(report_to_csv(a) == report_to_csv(b));
}

TEST_CASE("failed explanations are recorded and excluded from aggregates") {
  ProtocolFixture fixture;
  MethodSpec failing{"failing", [&](const Vector& x) {
                       CounterfactualSet set;
                       set.reference = x;
                       set.status = ExplainStatus::NoCounterfactualExists;
                       return set;
                     }};
  const RobustnessReport report =
      robustness_protocol(fixture.ball, fixture.inputs, {failing}, fixture.config);
  const MethodReport& method = report.methods[0];
  CHECK(method.failed_inputs == 3);
  CHECK(method.failed_trials == 9);
  CHECK(method.aggregates.empty());
}

TEST_CASE("run_protocol compares the pipeline against the singleton baseline") {
  const Dataset data = synthetic_dataset(SyntheticKind::TwoGaussians, 240, 6);
  const auto [train, test] = train_test_split(data, {0.25, 6});
  TrainOptions options;
  options.seed = 6;
  options.epochs = 30;
  const TrainResult trained = train_mlp(train, options);

  ExplainerConfig explainer;
  explainer.metric = Metric::euclidean();
  explainer.alpha = ExplainerConfig::default_alpha_for(train.size());

  ProtocolConfig config;
  config.metric = Metric::euclidean();
  config.seed = 3;
  config.repetitions = 2;

  const RobustnessReport report =
      run_protocol(trained.model, train, test, explainer, 5, config);
  REQUIRE(report.methods.size() == 2);
  CHECK(report.methods[0].method == "diverse_set");
  CHECK(report.methods[1].method == "singleton_nearest");
  CHECK(report.methods[0].inputs.size() == 5);
  // the baseline returns singletons, so its k-diversity is identically zero
  if (report.methods[1].aggregates.count("k_diversity") != 0) {
    CHECK(report.methods[1].aggregates.at("k_diversity").mean ==
          doctest::Approx(0.0).epsilon(1e-12));
  }
  // per-input means exist for inputs with at least one successful trial
  const auto means = report.methods[0].per_input_mean("set_distance_max");
  CHECK(means.size() <= 5);
}

TEST_CASE("csv report has the documented column order") {
  ProtocolFixture fixture;
  const RobustnessReport report =
      robustness_protocol(fixture.ball, fixture.inputs, {fixture.pipeline()}, fixture.config);
  const std::string csv = report_to_csv(report);
  CHECK(csv.find("method,dataset,metric,mean,std\n") != std::string::npos);
  CHECK(csv.find("schema_version=1") != std::string::npos);
  CHECK(csv.find("diverse_set,") != std::string::npos);
}
