#pragma once

#include "robustcf/classifier.hpp"
#include "robustcf/distance.hpp"
#include "robustcf/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace robustcf {

struct VerificationConfig {
  double epsilon = 0.1;
  // robustness constant to test against in the (epsilon, k) check; only the
  // empirical minimum is reported, the check itself has no pass threshold
  double k = 1.0;
  std::size_t pair_budget = 200;  // sampled pairs for the empirical constant
  std::uint64_t seed = 0;
  std::size_t max_points = 10000;
  double strong_tolerance = 1e-12;  // distance slack when identifying strong counterfactuals
  double lipschitz_slack = 1e-9;
};

struct PairViolation {
  std::size_t x1 = 0;  // grid indices
  std::size_t x2 = 0;
  std::size_t counterfactual = 0;  // unused for the Lipschitz check
  double lhs = 0.0;
  double rhs = 0.0;
};

struct VerificationReport {
  std::size_t points = 0;
  std::size_t same_class_pairs = 0;

  std::size_t lipschitz_checked = 0;
  std::size_t lipschitz_violations = 0;

  std::size_t strong_preservation_checked = 0;
  std::size_t strong_preservation_violations = 0;

  std::size_t safety_persistence_checked = 0;
  std::size_t safety_persistence_violations = 0;

  double empirical_k = 0.0;  // max set_distance_max(E(x1),E(x2)) / d(x1,x2)
  std::size_t empirical_pairs = 0;
  bool empirical_k_within_bound = true;  // against config.k

  std::vector<PairViolation> examples;  // a few counterexamples per failed check

  std::size_t total_violations() const {
    return lipschitz_violations + strong_preservation_violations + safety_persistence_violations;
  }
  bool ok() const { return total_violations() == 0; }
};

// Explanation sets by grid index; lets tests substitute a corrupted explainer
// to prove the checker reports violations. Indices must be sorted ascending.
using GridExplainFn = std::function<std::vector<std::uint32_t>(std::size_t)>;

// Exhaustively checks, over all same-class grid pairs:
//   - the Lipschitz-type bound cfd(x1) <= d(x1,x2) + cfd(x2) + slack,
//   - preservation of strong counterfactuals under moves shorter than eps/2,
//   - persistence of delta-safe counterfactuals under moves shorter than delta/2,
// and reports the empirical robustness constant over sampled pairs.
// Refuses grids larger than config.max_points.
VerificationReport verify_theory(const GridClassifier& classifier, const Metric& metric,
                                 const VerificationConfig& config,
                                 const GridExplainFn& explainer = {});

// The membership rule of the exhaustive explainer as a GridExplainFn.
GridExplainFn exhaustive_grid_explainer(const GridClassifier& classifier, const Metric& metric,
                                        double epsilon);

// Control for fault-injection tests: the exhaustive sets with the closest
// (hence strong) counterfactual removed.
GridExplainFn drop_closest_counterfactual(const GridClassifier& classifier, const Metric& metric,
                                          double epsilon);

}  // namespace robustcf
