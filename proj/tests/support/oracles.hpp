#pragma once

// Brute-force reference implementations. These deliberately avoid the sorted
// sweeps and cumulative sums used by the library: every candidate is scored
// by a direct pass over the samples.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <vector>

#include "atree/dataset.hpp"
#include "atree/random.hpp"

namespace atree::oracle {

struct StumpCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  int polarity = 1;
  double error = 0.0;
};

inline std::vector<double> distinct_sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

/// Every (feature, threshold, polarity) triple, scored directly.
inline StumpCandidate brute_force_stump(const std::vector<std::vector<double>>& x,
                                        const std::vector<int>& y,
                                        const std::vector<double>& w, double tie) {
  StumpCandidate best;
  best.error = std::numeric_limits<double>::infinity();
  const std::size_t d = x.front().size();
  for (std::size_t f = 0; f < d; ++f) {
    std::vector<double> col;
    for (const auto& r : x) col.push_back(r[f]);
    const auto values = distinct_sorted(col);
    std::vector<double> thresholds;
    double below = values.front() - 1.0;
    if (!(below < values.front())) below = std::nextafter(values.front(), -INFINITY);
    thresholds.push_back(below);
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      double mid = values[k] + (values[k + 1] - values[k]) / 2.0;
      if (!(mid < values[k + 1])) mid = values[k];
      thresholds.push_back(mid);
    }
    for (double t : thresholds) {
      for (int polarity : {1, -1}) {
        double err = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          const int pred = polarity * (x[i][f] - t) > 0.0 ? 1 : -1;
          if (pred != y[i]) err += w[i];
        }
        if (err < best.error - tie) best = {f, t, polarity, err};
      }
    }
  }
  return best;
}

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double objective = 0.0;
};

inline double weighted_entropy_term(const std::vector<double>& masses, double total) {
  double side = 0.0;
  for (double m : masses) side += m;
  if (side <= 0.0) return 0.0;
  double h = 0.0;
  for (double m : masses) {
    if (m > 0.0) h -= (m / side) * std::log(m / side);
  }
  return (side / total) * h;
}

/// Every (feature, midpoint) pair, x[f] < v goes left, scored directly.
inline std::optional<SplitCandidate> brute_force_split(
    const std::vector<std::vector<double>>& x, const std::vector<int>& y,
    const std::vector<double>& w, int num_classes, double tie) {
  std::set<int> present(y.begin(), y.end());
  if (present.size() < 2) return std::nullopt;
  double total = 0.0;
  for (double v : w) total += v;
  std::optional<SplitCandidate> best;
  const std::size_t d = x.front().size();
  for (std::size_t f = 0; f < d; ++f) {
    std::vector<double> col;
    for (const auto& r : x) col.push_back(r[f]);
    const auto values = distinct_sorted(col);
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      double v = values[k] + (values[k + 1] - values[k]) / 2.0;
      if (!(values[k] < v)) v = values[k + 1];
      std::vector<double> left(static_cast<std::size_t>(num_classes), 0.0);
      std::vector<double> right(static_cast<std::size_t>(num_classes), 0.0);
      for (std::size_t i = 0; i < x.size(); ++i) {
        (x[i][f] < v ? left : right)[static_cast<std::size_t>(y[i])] += w[i];
      }
      const double obj = weighted_entropy_term(left, total) + weighted_entropy_term(right, total);
      if (!best || obj < best->objective - tie) best = SplitCandidate{f, v, obj};
    }
  }
  return best;
}

/// Random weighted multi-class data; some features are quantized so that
/// repeated values and ties appear.
struct RandomTable {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  std::vector<double> w;
};

inline RandomTable random_table(Rng& rng, std::size_t n, std::size_t d, int classes,
                                bool binary_labels) {
  RandomTable t;
  std::vector<bool> quantized(d);
  for (std::size_t f = 0; f < d; ++f) quantized[f] = rng.uniform01() < 0.4;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(d);
    for (std::size_t f = 0; f < d; ++f) {
      const double v = rng.uniform(-3.0, 3.0);
      row[f] = quantized[f] ? std::round(v * 2.0) / 2.0 : v;
    }
    t.x.push_back(std::move(row));
    const int label = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
    t.y.push_back(binary_labels ? (label == 0 ? -1 : 1) : label);
    const double weight = 0.1 + rng.uniform01();
    t.w.push_back(weight);
    total += weight;
  }
  for (auto& v : t.w) v /= total;
  return t;
}

}  // namespace atree::oracle
