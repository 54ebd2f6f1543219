#pragma once

#include <cstddef>
#include <vector>

#include "atree/dataset.hpp"

namespace atree {

/// Binary-labeled view over rows owned elsewhere (normally a Dataset, which
/// must outlive the view). `ids` are stable sample identifiers used for
/// support-vector bookkeeping; `weights` are only read by boosting.
struct BinaryProblem {
  std::vector<FeatureRow> rows;
  std::vector<int> labels;  // +1 or -1
  std::vector<double> weights;
  std::vector<std::size_t> ids;

  std::size_t size() const { return rows.size(); }
  std::size_t dimension() const { return rows.empty() ? 0 : rows.front().size(); }
  bool has_both_labels() const;

  void add(FeatureRow row, int label, double weight, std::size_t id) {
    rows.push_back(row);
    labels.push_back(label);
    weights.push_back(weight);
    ids.push_back(id);
  }
};

/// One-vs-rest style view of a dataset: `positive_class` maps to +1, every
/// other class to -1. Weights are uniform and ids are dataset indices.
BinaryProblem one_vs_rest(const Dataset& data, int positive_class);

/// Rows of `positive` and `negative` classes only, as +1 / -1.
BinaryProblem one_vs_one(const Dataset& data, int positive, int negative);

}  // namespace atree
