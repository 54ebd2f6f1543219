#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "atree/kernel.hpp"
#include "atree/problem.hpp"

namespace atree {

struct SvmConfig {
  double c = 1.0;
  double tolerance = 1e-3;  // KKT violation (kernel) / projected-gradient range (linear)
  int max_passes = 200;
  std::uint64_t seed = 0;
  /// Scale of the constant feature the linear solver appends to absorb the
  /// bias. Larger values weaken the implicit bias penalty.
  double bias_scale = 10.0;
  /// Kernel row cache budget for the dual solver.
  std::size_t cache_megabytes = 64;

  void validate() const;
};

struct LinearSvmModel {
  std::vector<double> weights;
  double bias = 0.0;
};

struct KernelSvmModel {
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> dual_coefficients;  // label * dual weight, never 0
  double bias = 0.0;
  KernelSpec kernel;
  std::vector<std::size_t> sv_ids;
  double c = 1.0;  // regularization the model was trained with

  std::size_t num_support_vectors() const { return support_vectors.size(); }
};

using SvmModel = std::variant<LinearSvmModel, KernelSvmModel>;

/// Linear SVM with hinge loss, solved by dual coordinate descent over a
/// random permutation each pass while keeping the primal weight vector
/// explicit. The bias is learned as the weight of a constant feature
/// `bias_scale`. Stops when the projected-gradient range over a full pass
/// drops to `tolerance` or after `max_passes` passes.
LinearSvmModel train_linear_svm(const BinaryProblem& problem, const SvmConfig& config);

/// Kernel SVM dual solved by SMO: maximal-violating first index, second-order
/// choice of the partner, kernel rows served from an LRU cache. Stops when the
/// KKT violation gap is at most `tolerance` or after `max_passes * n` pair
/// updates. Only samples with nonzero dual weight are kept.
KernelSvmModel train_kernel_svm(const BinaryProblem& problem, const KernelSpec& kernel,
                                const SvmConfig& config);

/// Linear kernels produce a LinearSvmModel, all others a KernelSvmModel.
SvmModel train_svm(const BinaryProblem& problem, const KernelSpec& kernel,
                   const SvmConfig& config);

double decision_value(const LinearSvmModel& model, FeatureRow x);
/// With a session, every kernel evaluation goes through it (and its cache).
double decision_value(const KernelSvmModel& model, FeatureRow x,
                      KernelEvalSession* session = nullptr);
double decision_value(const SvmModel& model, FeatureRow x,
                      KernelEvalSession* session = nullptr);

/// sign(decision_value) with 0 mapped to +1.
inline int sign_of(double decision) { return decision >= 0.0 ? 1 : -1; }
int predict(const SvmModel& model, FeatureRow x);

std::size_t model_dimension(const SvmModel& model);
bool is_linear(const SvmModel& model);
/// Support vectors a prediction touches: 0 for linear models.
std::size_t support_vector_count(const SvmModel& model);

/// Keeps the `budget` support vectors with the largest |coefficient| (ties by
/// position) and refits the bias on the kept free support vectors.
KernelSvmModel truncate_svs(const KernelSvmModel& model, std::size_t budget);

/// C chosen by stratified k-fold cross-validation accuracy; ties go to the
/// smaller C.
double select_c_by_cross_validation(const BinaryProblem& problem, const KernelSpec& kernel,
                                    const SvmConfig& config, int folds = 5,
                                    std::span<const double> grid = {});

}  // namespace atree
