#include "atree/baselines.hpp"

#include <limits>

#include "atree/error.hpp"

namespace atree {

namespace {

void require_all_classes(const Dataset& data) {
  const auto counts = data.class_counts();
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) {
      throw ValidationError("class " + std::to_string(data.label_names()[k]) +
                            " has no training samples");
    }
  }
}

SvmModel fit(const BinaryProblem& problem, const KernelSpec& kernel, const SvmConfig& config,
             bool auto_c) {
  SvmConfig c = config;
  if (auto_c) c.c = select_c_by_cross_validation(problem, kernel, config);
  return train_svm(problem, kernel, c);
}

}  // namespace

OneVsAll train_one_vs_all(const Dataset& data, const KernelSpec& kernel,
                          const SvmConfig& config, bool auto_c) {
  require_all_classes(data);
  OneVsAll out;
  out.kernel = kernel;
  out.num_classes = data.num_classes();
  out.models.reserve(static_cast<std::size_t>(data.num_classes()));
  for (int k = 0; k < data.num_classes(); ++k) {
    out.models.push_back(fit(one_vs_rest(data, k), kernel, config, auto_c));
  }
  return out;
}

OneVsOne train_one_vs_one(const Dataset& data, const KernelSpec& kernel,
                          const SvmConfig& config, bool auto_c) {
  require_all_classes(data);
  OneVsOne out;
  out.kernel = kernel;
  out.num_classes = data.num_classes();
  for (int i = 0; i < data.num_classes(); ++i) {
    for (int j = i + 1; j < data.num_classes(); ++j) {
      out.models.push_back({i, j, fit(one_vs_one(data, i, j), kernel, config, auto_c)});
    }
  }
  return out;
}

BaselinePrediction predict(const OneVsAll& model, FeatureRow x, KernelEvalSession* session) {
  BaselinePrediction out;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < model.models.size(); ++k) {
    const double v = decision_value(model.models[k], x, session);
    ++out.classifier_evaluations;
    if (v > best) {
      best = v;
      out.label = static_cast<int>(k);
    }
  }
  return out;
}

BaselinePrediction predict(const OneVsOne& model, FeatureRow x, KernelEvalSession* session) {
  std::vector<int> votes(static_cast<std::size_t>(model.num_classes), 0);
  BaselinePrediction out;
  for (const auto& pair : model.models) {
    const int winner =
        sign_of(decision_value(pair.model, x, session)) > 0 ? pair.positive : pair.negative;
    ++votes[static_cast<std::size_t>(winner)];
    ++out.classifier_evaluations;
  }
  int best = -1;
  for (std::size_t k = 0; k < votes.size(); ++k) {
    if (votes[k] > best) {
      best = votes[k];
      out.label = static_cast<int>(k);
    }
  }
  return out;
}

}  // namespace atree
