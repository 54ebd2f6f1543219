#include "atree/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "atree/error.hpp"

namespace atree {

namespace {

double mean_of(const std::vector<std::size_t>& values) {
  if (values.empty()) return 0.0;
  const double total = std::accumulate(values.begin(), values.end(), 0.0,
                                       [](double acc, std::size_t v) { return acc + static_cast<double>(v); });
  return total / static_cast<double>(values.size());
}

template <typename Model>
EvaluationRecord run_flat(const Model& model, const Dataset& test, const char* name) {
  EvaluationRecord rec;
  rec.method = name;
  rec.family = family_of(model.kernel);
  KernelEvalSession session(true);
  KernelEvalSession* s = rec.family == KernelFamily::nonlinear ? &session : nullptr;
  for (std::size_t i = 0; i < test.size(); ++i) {
    session.begin_instance();
    const auto p = predict(model, test.row(i), s);
    rec.predictions.push_back(p.label);
    rec.truth.push_back(test[i].label);
    rec.classifier_evaluations.push_back(p.classifier_evaluations);
    rec.kernel_computations.push_back(session.instance_computations());
    rec.kernel_requests.push_back(session.instance_requests());
  }
  return rec;
}

}  // namespace

double mean_per_class_accuracy(std::span<const int> predictions, std::span<const int> truth,
                               int num_classes) {
  if (predictions.size() != truth.size()) {
    throw ValidationError("predictions and truth differ in length");
  }
  if (num_classes < 1) throw ValidationError("num_classes must be positive");
  std::vector<std::size_t> hits(static_cast<std::size_t>(num_classes), 0);
  std::vector<std::size_t> totals(static_cast<std::size_t>(num_classes), 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= num_classes) throw ValidationError("truth label out of range");
    const auto k = static_cast<std::size_t>(truth[i]);
    ++totals[k];
    if (predictions[i] == truth[i]) ++hits[k];
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < totals.size(); ++k) {
    if (totals[k] == 0) {
      throw ValidationError("class " + std::to_string(k) + " has no test instances");
    }
    sum += static_cast<double>(hits[k]) / static_cast<double>(totals[k]);
  }
  return sum / static_cast<double>(num_classes);
}

double mean_per_class_accuracy(std::span<const int> predictions, std::span<const int> truth) {
  if (predictions.size() != truth.size()) {
    throw ValidationError("predictions and truth differ in length");
  }
  if (truth.empty()) throw ValidationError("no test instances");
  const int max_label = *std::max_element(truth.begin(), truth.end());
  std::vector<int> dense(static_cast<std::size_t>(max_label) + 1, -1);
  for (int y : truth) {
    if (y < 0) throw ValidationError("truth label out of range");
    dense[static_cast<std::size_t>(y)] = 0;
  }
  int next = 0;
  for (auto& d : dense) {
    if (d == 0) d = next++;
  }
  std::vector<int> t;
  std::vector<int> p;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    t.push_back(dense[static_cast<std::size_t>(truth[i])]);
    const int pred = predictions[i];
    p.push_back(pred >= 0 && pred <= max_label ? dense[static_cast<std::size_t>(pred)] : -1);
  }
  // Predictions of classes absent from truth map to -1 and count as misses.
  return mean_per_class_accuracy(p, t, next);
}

KernelFamily family_of(const KernelSpec& kernel) {
  return kernel.is_linear() ? KernelFamily::linear : KernelFamily::nonlinear;
}

const char* family_name(KernelFamily family) {
  return family == KernelFamily::linear ? "linear" : "nonlinear";
}

EvaluationRecord evaluate(const Atree& tree, const Dataset& test) {
  if (test.dimension() != tree.dimension) {
    throw ValidationError("test data has dimension " + std::to_string(test.dimension()) +
                          ", model expects " + std::to_string(tree.dimension));
  }
  EvaluationRecord rec;
  rec.method = "atree";
  rec.family = family_of(tree.config.kernel);
  KernelEvalSession session(true);
  KernelEvalSession* s = rec.family == KernelFamily::nonlinear ? &session : nullptr;
  for (std::size_t i = 0; i < test.size(); ++i) {
    session.begin_instance();
    const TreePrediction p = predict(tree, test.row(i), s);
    rec.predictions.push_back(p.label);
    rec.truth.push_back(test[i].label);
    rec.classifier_evaluations.push_back(p.trace.classifier_evaluations());
    rec.kernel_computations.push_back(session.instance_computations());
    rec.kernel_requests.push_back(session.instance_requests());
    std::vector<std::size_t> visited;
    for (const auto& step : p.trace.steps) visited.push_back(step.node);
    visited.push_back(p.trace.leaf);
    rec.visited_nodes.push_back(std::move(visited));
  }
  return rec;
}

EvaluationRecord evaluate(const OneVsAll& model, const Dataset& test) {
  return run_flat(model, test, "ova");
}

EvaluationRecord evaluate(const OneVsOne& model, const Dataset& test) {
  return run_flat(model, test, "ovo");
}

double mean_cost(const EvaluationRecord& record) {
  return record.family == KernelFamily::linear ? mean_of(record.classifier_evaluations)
                                               : mean_of(record.kernel_computations);
}

ComplexityReport complexity_report(const EvaluationRecord& method) {
  ComplexityReport r;
  r.accuracy = mean_per_class_accuracy(method.predictions, method.truth);
  r.mean_classifier_evaluations = mean_of(method.classifier_evaluations);
  r.mean_kernel_computations = mean_of(method.kernel_computations);
  r.mean_kernel_requests = mean_of(method.kernel_requests);
  r.per_instance_trace_lengths = method.classifier_evaluations;
  return r;
}

ComplexityReport complexity_report(const EvaluationRecord& method,
                                   const EvaluationRecord& reference) {
  if (method.family != reference.family) {
    throw ValidationError(std::string("kernel family mismatch: ") + family_name(method.family) +
                          " vs " + family_name(reference.family));
  }
  if (method.size() != reference.size() || method.truth != reference.truth) {
    throw ValidationError("method and reference were evaluated on different test sets");
  }
  ComplexityReport r = complexity_report(method);
  const double ref_cost = mean_cost(reference);
  if (!(ref_cost > 0.0)) throw ValidationError("reference method has zero test cost");
  r.relative_complexity = mean_cost(method) / ref_cost;
  return r;
}

}  // namespace atree
