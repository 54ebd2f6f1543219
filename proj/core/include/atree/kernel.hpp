#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>

#include "atree/dataset.hpp"

namespace atree {

/// Added to the chi-square denominator so empty bins contribute 0, not 0/0.
inline constexpr double kChiSquareEpsilon = 1e-12;

struct KernelSpec {
  enum class Kind { linear, rbf, chi_square, histogram_intersection };

  Kind kind = Kind::linear;
  double gamma = 1.0;  // rbf and chi_square only

  static KernelSpec linear() { return {Kind::linear, 1.0}; }
  static KernelSpec rbf(double gamma) { return {Kind::rbf, gamma}; }
  static KernelSpec chi_square(double gamma) { return {Kind::chi_square, gamma}; }
  static KernelSpec histogram_intersection() { return {Kind::histogram_intersection, 1.0}; }

  bool is_linear() const { return kind == Kind::linear; }
  bool requires_nonnegative() const {
    return kind == Kind::chi_square || kind == Kind::histogram_intersection;
  }
  void validate() const;

  /// "linear", "rbf:<gamma>", "chi2:<gamma>" or "intersection".
  std::string to_string() const;
  static KernelSpec parse(const std::string& text);

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

double kernel_value(const KernelSpec& kernel, FeatureRow x, FeatureRow z);

/// Throws ValidationError if the kernel needs nonnegative inputs and `x` has a
/// negative coordinate.
void check_kernel_domain(const KernelSpec& kernel, FeatureRow x);

/// Counts kernel computations made while predicting, one test instance at a
/// time.
///
/// Support vectors are keyed by their global sample id. With caching on, a
/// (instance, sv_id) pair is computed at most once no matter how many models
/// on the instance's path share that support vector; `requests` counts every
/// lookup, `computations` only the evaluations actually performed. Call
/// begin_instance() before each test instance. Not thread-safe; use one
/// session per worker.
class KernelEvalSession {
 public:
  explicit KernelEvalSession(bool caching = true) : caching_(caching) {}

  void begin_instance();
  double evaluate(const KernelSpec& kernel, std::size_t sv_id, FeatureRow sv, FeatureRow x);

  bool caching() const { return caching_; }
  std::size_t instance_computations() const { return instance_computations_; }
  std::size_t instance_requests() const { return instance_requests_; }
  std::size_t total_computations() const { return total_computations_; }
  std::size_t total_requests() const { return total_requests_; }
  std::size_t instances() const { return instances_; }

 private:
  bool caching_;
  bool has_kernel_ = false;
  KernelSpec kernel_;
  std::unordered_map<std::size_t, double> cache_;
  std::size_t instance_computations_ = 0;
  std::size_t instance_requests_ = 0;
  std::size_t total_computations_ = 0;
  std::size_t total_requests_ = 0;
  std::size_t instances_ = 0;
};

}  // namespace atree
