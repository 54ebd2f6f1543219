#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "atree/problem.hpp"

namespace atree {

/// Weighted errors closer than this are treated as ties during stump search.
inline constexpr double kStumpTieTolerance = 1e-12;

/// Axis-aligned threshold test: +1 iff polarity * (x[feature] - threshold) > 0.
struct DecisionStump {
  std::size_t feature_index = 0;
  double threshold = 0.0;
  int polarity = 1;

  int predict(FeatureRow x) const {
    return polarity * (x[feature_index] - threshold) > 0.0 ? 1 : -1;
  }
  friend bool operator==(const DecisionStump&, const DecisionStump&) = default;
};

struct StumpFit {
  DecisionStump stump;
  double error = 0.0;
};

/// Exhaustive stump search over a fixed set of rows. Rows are sorted once per
/// feature so repeated searches under changing weights (one per boosting
/// round) cost O(n * d).
///
/// Candidates per feature, in order: one threshold below the minimum, then the
/// midpoints between consecutive distinct values; polarity +1 before -1.
/// The first candidate whose error beats the incumbent by more than
/// kStumpTieTolerance wins, which yields lowest feature, then lowest
/// threshold, then +1 polarity among ties.
class StumpSearch {
 public:
  StumpSearch(std::span<const FeatureRow> rows, std::span<const int> labels);

  StumpFit best(std::span<const double> weights) const;

 private:
  struct Column {
    std::vector<std::size_t> order;  // row indices sorted by value
    double below_min = 0.0;
  };
  std::span<const FeatureRow> rows_;
  std::span<const int> labels_;
  std::vector<Column> columns_;
};

/// Below-minimum candidate threshold used by the search for a given minimum.
double threshold_below(double min_value);
/// Midpoint candidate between consecutive distinct values lo < hi, adjusted so
/// that lo falls on the "not greater" side and hi on the "greater" side.
double stump_midpoint(double lo, double hi);

/// WeakLearn: the stump minimizing weighted 0/1 error. A single-label problem
/// yields a constant stump on that label with error 0.
StumpFit train_stump(const BinaryProblem& problem);

struct BoostConfig {
  int max_rounds = 20;
  double gamma = 0.48;
  double min_weight_floor = 1e-10;

  void validate() const;
};

struct BoostRound {
  double alpha = 0.0;
  DecisionStump stump;
};

/// Discrete Adaboost ensemble H(x) = sum_t alpha_t * h_t(x).
struct BoostedClassifier {
  std::vector<BoostRound> rounds;
  std::vector<double> round_errors;
  bool exited_early = false;  // a round exceeded gamma and was discarded
  bool pure = false;          // trained on single-label data

  bool empty() const { return rounds.empty(); }
  std::size_t required_dimension() const;
};

/// alpha = 1/2 ln((1 - e) / e), with e clamped to [floor, 1 - floor].
double boost_alpha(double weighted_error, double floor);

/// Runs up to max_rounds rounds of discrete Adaboost on the problem's weights.
/// Stops at the first round whose error exceeds gamma (the round is dropped
/// and exited_early is set), or after a round with error below the floor.
BoostedClassifier adaboost_train(const BinaryProblem& problem, const BoostConfig& config);

double strong_score(const BoostedClassifier& model, FeatureRow x);
/// Numerically stable logistic of H(x), clamped strictly inside (0, 1).
double prob_positive(const BoostedClassifier& model, FeatureRow x);
double prob_negative(const BoostedClassifier& model, FeatureRow x);
double logistic(double h);

/// Training-error bound 2^T * prod_t sqrt(e_t (1 - e_t)). Diagnostic only.
double error_bound(const BoostedClassifier& model);

}  // namespace atree
