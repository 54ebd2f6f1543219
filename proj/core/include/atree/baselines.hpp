#pragma once

#include <cstddef>
#include <vector>

#include "atree/dataset.hpp"
#include "atree/kernel.hpp"
#include "atree/svm.hpp"

namespace atree {

/// One binary SVM per class (class vs rest); predicts the argmax decision
/// value, ties to the lowest class id.
struct OneVsAll {
  std::vector<SvmModel> models;
  KernelSpec kernel;
  int num_classes = 0;
};

/// One SVM per unordered class pair (i < j, i mapped to +1); predicts by
/// majority vote, ties to the lowest class id.
struct OneVsOne {
  struct Pair {
    int positive = 0;
    int negative = 0;
    SvmModel model;
  };
  std::vector<Pair> models;
  KernelSpec kernel;
  int num_classes = 0;
};

/// Throws ValidationError if some class has no training sample. With
/// `auto_c`, each model's C is picked by cross-validation.
OneVsAll train_one_vs_all(const Dataset& data, const KernelSpec& kernel,
                          const SvmConfig& config, bool auto_c = false);
OneVsOne train_one_vs_one(const Dataset& data, const KernelSpec& kernel,
                          const SvmConfig& config, bool auto_c = false);

struct BaselinePrediction {
  int label = 0;
  std::size_t classifier_evaluations = 0;
};

BaselinePrediction predict(const OneVsAll& model, FeatureRow x,
                           KernelEvalSession* session = nullptr);
BaselinePrediction predict(const OneVsOne& model, FeatureRow x,
                           KernelEvalSession* session = nullptr);

}  // namespace atree
