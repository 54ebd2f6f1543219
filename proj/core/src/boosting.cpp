#include "atree/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "atree/error.hpp"

namespace atree {

namespace {

constexpr double kProbFloor = 1e-16;

}  // namespace

double threshold_below(double min_value) {
  const double t = min_value - 1.0;
  return t < min_value ? t : std::nextafter(min_value, -std::numeric_limits<double>::infinity());
}

double stump_midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  // Rounding can land the midpoint on hi for adjacent doubles; lo itself then
  // separates the two values under the strict ">" rule.
  return mid < hi ? mid : lo;
}

StumpSearch::StumpSearch(std::span<const FeatureRow> rows, std::span<const int> labels)
    : rows_(rows), labels_(labels) {
  if (rows.size() != labels.size()) throw ValidationError("rows and labels differ in size");
  if (rows.empty()) throw ValidationError("stump search needs at least one sample");
  const std::size_t d = rows.front().size();
  columns_.resize(d);
  for (std::size_t f = 0; f < d; ++f) {
    auto& col = columns_[f];
    col.order.resize(rows.size());
    std::iota(col.order.begin(), col.order.end(), std::size_t{0});
    std::stable_sort(col.order.begin(), col.order.end(),
                     [&](std::size_t a, std::size_t b) { return rows[a][f] < rows[b][f]; });
    col.below_min = threshold_below(rows[col.order.front()][f]);
  }
}

StumpFit StumpSearch::best(std::span<const double> weights) const {
  double pos_total = 0.0;
  double neg_total = 0.0;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    (labels_[i] > 0 ? pos_total : neg_total) += weights[i];
  }

  StumpFit best;
  best.error = std::numeric_limits<double>::infinity();
  auto consider = [&](std::size_t f, double threshold, double pos_below, double neg_below) {
    // +1 polarity predicts +1 above the threshold.
    const double err_pos = pos_below + (neg_total - neg_below);
    const double err_neg = neg_below + (pos_total - pos_below);
    if (err_pos < best.error - kStumpTieTolerance) best = {{f, threshold, 1}, err_pos};
    if (err_neg < best.error - kStumpTieTolerance) best = {{f, threshold, -1}, err_neg};
  };

  for (std::size_t f = 0; f < columns_.size(); ++f) {
    const auto& order = columns_[f].order;
    consider(f, columns_[f].below_min, 0.0, 0.0);
    double pos_below = 0.0;
    double neg_below = 0.0;
    std::size_t k = 0;
    while (k < order.size()) {
      const double value = rows_[order[k]][f];
      while (k < order.size() && rows_[order[k]][f] == value) {
        const std::size_t i = order[k];
        (labels_[i] > 0 ? pos_below : neg_below) += weights[i];
        ++k;
      }
      if (k == order.size()) break;
      consider(f, stump_midpoint(value, rows_[order[k]][f]), pos_below, neg_below);
    }
  }
  best.error = std::clamp(best.error, 0.0, 1.0);
  return best;
}

StumpFit train_stump(const BinaryProblem& problem) {
  if (problem.size() == 0) throw ValidationError("train_stump needs at least one sample");
  if (!problem.has_both_labels()) {
    const int label = problem.labels.front();
    double min_value = problem.rows.front()[0];
    for (const auto& r : problem.rows) min_value = std::min(min_value, r[0]);
    return {{0, threshold_below(min_value), label}, 0.0};
  }
  StumpSearch search(problem.rows, problem.labels);
  return search.best(problem.weights);
}

void BoostConfig::validate() const {
  if (max_rounds < 1) throw ValidationError("boost.max_rounds must be positive");
  if (!(gamma > 0.0 && gamma <= 0.5)) throw ValidationError("boost.gamma must lie in (0, 0.5]");
  if (!(min_weight_floor > 0.0 && min_weight_floor < 0.5)) {
    throw ValidationError("boost.min_weight_floor must lie in (0, 0.5)");
  }
}

std::size_t BoostedClassifier::required_dimension() const {
  std::size_t d = 0;
  for (const auto& r : rounds) d = std::max(d, r.stump.feature_index + 1);
  return d;
}

double boost_alpha(double weighted_error, double floor) {
  const double e = std::clamp(weighted_error, floor, 1.0 - floor);
  return 0.5 * std::log((1.0 - e) / e);
}

BoostedClassifier adaboost_train(const BinaryProblem& problem, const BoostConfig& config) {
  config.validate();
  if (problem.size() == 0) throw ValidationError("adaboost_train needs at least one sample");

  BoostedClassifier model;
  if (!problem.has_both_labels()) {
    const StumpFit fit = train_stump(problem);
    model.rounds.push_back({boost_alpha(0.0, config.min_weight_floor), fit.stump});
    model.round_errors.push_back(0.0);
    model.pure = true;
    return model;
  }

  std::vector<double> w = problem.weights;
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0.0)) throw ValidationError("boosting weights must have positive sum");
  for (auto& v : w) v /= total;

  StumpSearch search(problem.rows, problem.labels);
  std::vector<int> predictions(problem.size());
  for (int t = 0; t < config.max_rounds; ++t) {
    const StumpFit fit = search.best(w);
    double error = 0.0;
    for (std::size_t i = 0; i < problem.size(); ++i) {
      predictions[i] = fit.stump.predict(problem.rows[i]);
      if (predictions[i] != problem.labels[i]) error += w[i];
    }
    if (error > config.gamma || error >= 0.5) {
      model.exited_early = true;
      break;
    }
    const double alpha = boost_alpha(error, config.min_weight_floor);
    model.rounds.push_back({alpha, fit.stump});
    model.round_errors.push_back(error);
    if (error < config.min_weight_floor) break;

    double sum = 0.0;
    for (std::size_t i = 0; i < problem.size(); ++i) {
      w[i] *= std::exp(-alpha * problem.labels[i] * predictions[i]);
      sum += w[i];
    }
    for (auto& v : w) v /= sum;
  }
  return model;
}

double strong_score(const BoostedClassifier& model, FeatureRow x) {
  double h = 0.0;
  for (const auto& r : model.rounds) {
    if (r.stump.feature_index >= x.size()) {
      throw ValidationError("feature vector has dimension " + std::to_string(x.size()) +
                            " but the model reads feature " +
                            std::to_string(r.stump.feature_index));
    }
    h += r.alpha * r.stump.predict(x);
  }
  return h;
}

double logistic(double h) {
  double p;
  if (h >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-h));
  } else {
    const double e = std::exp(h);
    p = e / (1.0 + e);
  }
  return std::clamp(p, kProbFloor, 1.0 - kProbFloor);
}

double prob_positive(const BoostedClassifier& model, FeatureRow x) {
  return logistic(strong_score(model, x));
}

double prob_negative(const BoostedClassifier& model, FeatureRow x) {
  return logistic(-strong_score(model, x));
}

double error_bound(const BoostedClassifier& model) {
  double bound = 1.0;
  for (double e : model.round_errors) bound *= 2.0 * std::sqrt(e * (1.0 - e));
  return bound;
}

}  // namespace atree
