#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atree/baselines.hpp"
#include "atree/dataset.hpp"
#include "atree/tree.hpp"

namespace atree {

/// Unweighted mean of per-class recall over classes 0..num_classes-1. Throws
/// ValidationError if a class has no true instance or the spans differ in size.
double mean_per_class_accuracy(std::span<const int> predictions, std::span<const int> truth,
                               int num_classes);
/// Same, over the classes that occur in `truth`.
double mean_per_class_accuracy(std::span<const int> predictions, std::span<const int> truth);

enum class KernelFamily { linear, nonlinear };
KernelFamily family_of(const KernelSpec& kernel);
const char* family_name(KernelFamily family);

/// Everything recorded while running one method over a test set.
struct EvaluationRecord {
  std::string method;
  KernelFamily family = KernelFamily::linear;
  std::vector<int> predictions;
  std::vector<int> truth;
  std::vector<std::size_t> classifier_evaluations;  // per instance
  std::vector<std::size_t> kernel_computations;     // per instance, union-cached
  std::vector<std::size_t> kernel_requests;         // per instance, summed over models
  std::vector<std::vector<std::size_t>> visited_nodes;  // tree methods only

  std::size_t size() const { return predictions.size(); }
};

EvaluationRecord evaluate(const Atree& tree, const Dataset& test);
EvaluationRecord evaluate(const OneVsAll& model, const Dataset& test);
EvaluationRecord evaluate(const OneVsOne& model, const Dataset& test);

struct ComplexityReport {
  double accuracy = 0.0;  // mean per-class
  double mean_classifier_evaluations = 0.0;
  double mean_kernel_computations = 0.0;
  double mean_kernel_requests = 0.0;
  std::optional<double> relative_complexity;  // set when a reference was given
  std::vector<std::size_t> per_instance_trace_lengths;
};

/// Test cost of one instance in the record's kernel family: classifier
/// evaluations for linear, union-cached kernel computations otherwise.
double mean_cost(const EvaluationRecord& record);

/// Normalizes `method` against a one-vs-all `reference` evaluated on the same
/// test set. Throws ValidationError on a kernel-family or size mismatch.
ComplexityReport complexity_report(const EvaluationRecord& method,
                                   const EvaluationRecord& reference);
/// Report without a reference; relative_complexity stays empty.
ComplexityReport complexity_report(const EvaluationRecord& method);

}  // namespace atree
