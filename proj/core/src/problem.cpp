#include "atree/problem.hpp"

#include <algorithm>

namespace atree {

bool BinaryProblem::has_both_labels() const {
  const bool pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool neg = std::find(labels.begin(), labels.end(), -1) != labels.end();
  return pos && neg;
}

BinaryProblem one_vs_rest(const Dataset& data, int positive_class) {
  BinaryProblem p;
  const double w = 1.0 / static_cast<double>(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    p.add(data.row(i), data[i].label == positive_class ? 1 : -1, w, i);
  }
  return p;
}

BinaryProblem one_vs_one(const Dataset& data, int positive, int negative) {
  BinaryProblem p;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int y = data[i].label;
    if (y == positive) p.add(data.row(i), 1, 0.0, i);
    if (y == negative) p.add(data.row(i), -1, 0.0, i);
  }
  if (!p.weights.empty()) {
    const double w = 1.0 / static_cast<double>(p.size());
    std::fill(p.weights.begin(), p.weights.end(), w);
  }
  return p;
}

}  // namespace atree
