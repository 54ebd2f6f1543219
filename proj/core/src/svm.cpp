#include "atree/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <numeric>
#include <unordered_map>

#include "atree/error.hpp"
#include "atree/random.hpp"

namespace atree {

namespace {

constexpr double kTau = 1e-12;

void check_problem(const BinaryProblem& problem, const char* who) {
  if (problem.size() == 0) throw ValidationError(std::string(who) + ": empty training set");
  for (int y : problem.labels) {
    if (y != 1 && y != -1) throw ValidationError(std::string(who) + ": labels must be +1/-1");
  }
  if (!problem.has_both_labels()) {
    throw ValidationError(std::string(who) + ": training data has a single label");
  }
  const std::size_t d = problem.dimension();
  for (const auto& r : problem.rows) {
    if (r.size() != d) throw ValidationError(std::string(who) + ": ragged feature rows");
  }
}

double dot(FeatureRow a, FeatureRow b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * b[j];
  return acc;
}

/// LRU cache of kernel matrix rows for the SMO solver.
class KernelRowCache {
 public:
  KernelRowCache(const BinaryProblem& problem, const KernelSpec& kernel, std::size_t megabytes)
      : problem_(problem), kernel_(kernel) {
    const std::size_t n = problem.size();
    const std::size_t row_bytes = std::max<std::size_t>(1, n * sizeof(double));
    capacity_ = std::max<std::size_t>(2, megabytes * 1024 * 1024 / row_bytes);
  }

  const std::vector<double>& row(std::size_t i) {
    if (auto it = rows_.find(i); it != rows_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.second);
      return it->second.first;
    }
    if (rows_.size() >= capacity_) {
      rows_.erase(lru_.back());
      lru_.pop_back();
    }
    std::vector<double> values(problem_.size());
    for (std::size_t t = 0; t < values.size(); ++t) {
      values[t] = kernel_value(kernel_, problem_.rows[i], problem_.rows[t]);
    }
    lru_.push_front(i);
    auto [it, inserted] = rows_.emplace(i, std::make_pair(std::move(values), lru_.begin()));
    return it->second.first;
  }

 private:
  const BinaryProblem& problem_;
  const KernelSpec& kernel_;
  std::size_t capacity_;
  std::list<std::size_t> lru_;
  std::unordered_map<std::size_t, std::pair<std::vector<double>, std::list<std::size_t>::iterator>>
      rows_;
};

}  // namespace

void SvmConfig::validate() const {
  if (!(c > 0.0 && std::isfinite(c))) throw ValidationError("svm.c must be positive");
  if (!(tolerance > 0.0 && tolerance <= 1e-2)) {
    throw ValidationError("svm.tolerance must lie in (0, 1e-2]");
  }
  if (max_passes < 1) throw ValidationError("svm.max_passes must be positive");
  if (!(bias_scale > 0.0 && std::isfinite(bias_scale))) {
    throw ValidationError("svm.bias_scale must be positive");
  }
}

LinearSvmModel train_linear_svm(const BinaryProblem& problem, const SvmConfig& config) {
  config.validate();
  check_problem(problem, "train_linear_svm");
  const std::size_t n = problem.size();
  const std::size_t d = problem.dimension();
  const double bias_feature = config.bias_scale;
  const double c = config.c;

  std::vector<double> w(d, 0.0);
  double w_bias = 0.0;
  std::vector<double> alpha(n, 0.0);
  std::vector<double> q_diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    q_diag[i] = dot(problem.rows[i], problem.rows[i]) + bias_feature * bias_feature;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(config.seed);

  for (int pass = 0; pass < config.max_passes; ++pass) {
    rng.shuffle(order.begin(), order.end());
    double worst = 0.0;
    for (std::size_t i : order) {
      const double y = problem.labels[i];
      const FeatureRow x = problem.rows[i];
      const double g = y * (dot(w, x) + w_bias * bias_feature) - 1.0;
      double pg = g;
      if (alpha[i] <= 0.0) pg = std::min(g, 0.0);
      else if (alpha[i] >= c) pg = std::max(g, 0.0);
      worst = std::max(worst, std::abs(pg));
      if (std::abs(pg) <= 1e-14) continue;
      const double updated = std::clamp(alpha[i] - g / q_diag[i], 0.0, c);
      const double step = (updated - alpha[i]) * y;
      alpha[i] = updated;
      for (std::size_t j = 0; j < d; ++j) w[j] += step * x[j];
      w_bias += step * bias_feature;
    }
    if (worst <= config.tolerance) break;
  }
  return {std::move(w), w_bias * bias_feature};
}

KernelSvmModel train_kernel_svm(const BinaryProblem& problem, const KernelSpec& kernel,
                                const SvmConfig& config) {
  config.validate();
  kernel.validate();
  check_problem(problem, "train_kernel_svm");
  for (const auto& r : problem.rows) check_kernel_domain(kernel, r);

  const std::size_t n = problem.size();
  const double c = config.c;
  const auto& y = problem.labels;
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  std::vector<double> k_diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    k_diag[i] = kernel_value(kernel, problem.rows[i], problem.rows[i]);
  }
  KernelRowCache cache(problem, kernel, config.cache_megabytes);

  auto in_up = [&](std::size_t t) { return y[t] > 0 ? alpha[t] < c : alpha[t] > 0.0; };
  auto in_low = [&](std::size_t t) { return y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < c; };

  const std::size_t max_iter =
      static_cast<std::size_t>(config.max_passes) * std::max<std::size_t>(n, 100);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    double g_max = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (in_up(t) && -y[t] * grad[t] > g_max) {
        g_max = -y[t] * grad[t];
        i = t;
      }
    }
    if (i == n) break;
    const std::vector<double>& k_i = cache.row(i);

    double g_max2 = -std::numeric_limits<double>::infinity();
    double best_obj = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double yg = y[t] * grad[t];
      g_max2 = std::max(g_max2, yg);
      const double b = g_max + yg;
      if (b > 0.0) {
        double a = k_diag[i] + k_diag[t] - 2.0 * k_i[t];
        if (a <= 0.0) a = kTau;
        const double obj = -(b * b) / a;
        if (obj < best_obj) {
          best_obj = obj;
          j = t;
        }
      }
    }
    if (g_max + g_max2 < config.tolerance || j == n) break;
    const std::vector<double>& k_j = cache.row(j);

    const double old_i = alpha[i];
    const double old_j = alpha[j];
    const double q_ij = y[i] * y[j] * k_i[j];
    if (y[i] != y[j]) {
      double quad = k_diag[i] + k_diag[j] + 2.0 * q_ij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = k_diag[i] + k_diag[j] - 2.0 * q_ij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double d_i = (alpha[i] - old_i) * y[i];
    const double d_j = (alpha[j] - old_j) * y[j];
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += y[t] * (k_i[t] * d_i + k_j[t] * d_j);
    }
  }

  // Offset from free support vectors, or the middle of the feasible interval.
  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= c) {
      if (y[t] < 0) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] > 0) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count)
                                    : (upper + lower) / 2.0;

  KernelSvmModel model;
  model.kernel = kernel;
  model.bias = -rho;
  model.c = c;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] <= 0.0) continue;
    model.support_vectors.emplace_back(problem.rows[t].begin(), problem.rows[t].end());
    model.dual_coefficients.push_back(y[t] * alpha[t]);
    model.sv_ids.push_back(problem.ids.empty() ? t : problem.ids[t]);
  }
  return model;
}

SvmModel train_svm(const BinaryProblem& problem, const KernelSpec& kernel,
                   const SvmConfig& config) {
  if (kernel.is_linear()) return train_linear_svm(problem, config);
  return train_kernel_svm(problem, kernel, config);
}

double decision_value(const LinearSvmModel& model, FeatureRow x) {
  if (x.size() != model.weights.size()) {
    throw ValidationError("feature vector has dimension " + std::to_string(x.size()) +
                          ", model expects " + std::to_string(model.weights.size()));
  }
  return dot(model.weights, x) + model.bias;
}

double decision_value(const KernelSvmModel& model, FeatureRow x, KernelEvalSession* session) {
  if (!model.support_vectors.empty() && x.size() != model.support_vectors.front().size()) {
    throw ValidationError("feature vector has dimension " + std::to_string(x.size()) +
                          ", model expects " +
                          std::to_string(model.support_vectors.front().size()));
  }
  double f = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
    const double k = session != nullptr
                         ? session->evaluate(model.kernel, model.sv_ids[i],
                                             model.support_vectors[i], x)
                         : kernel_value(model.kernel, model.support_vectors[i], x);
    f += model.dual_coefficients[i] * k;
  }
  return f;
}

double decision_value(const SvmModel& model, FeatureRow x, KernelEvalSession* session) {
  if (const auto* linear = std::get_if<LinearSvmModel>(&model)) {
    return decision_value(*linear, x);
  }
  return decision_value(std::get<KernelSvmModel>(model), x, session);
}

int predict(const SvmModel& model, FeatureRow x) { return sign_of(decision_value(model, x)); }

std::size_t model_dimension(const SvmModel& model) {
  if (const auto* linear = std::get_if<LinearSvmModel>(&model)) return linear->weights.size();
  const auto& k = std::get<KernelSvmModel>(model);
  return k.support_vectors.empty() ? 0 : k.support_vectors.front().size();
}

bool is_linear(const SvmModel& model) { return std::holds_alternative<LinearSvmModel>(model); }

std::size_t support_vector_count(const SvmModel& model) {
  if (const auto* k = std::get_if<KernelSvmModel>(&model)) return k->num_support_vectors();
  return 0;
}

KernelSvmModel truncate_svs(const KernelSvmModel& model, std::size_t budget) {
  if (budget == 0) throw ValidationError("support-vector budget must be positive");
  if (budget >= model.num_support_vectors()) return model;

  std::vector<std::size_t> order(model.num_support_vectors());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(model.dual_coefficients[a]) > std::abs(model.dual_coefficients[b]);
  });
  order.resize(budget);
  std::sort(order.begin(), order.end());

  KernelSvmModel out;
  out.kernel = model.kernel;
  out.c = model.c;
  for (std::size_t i : order) {
    out.support_vectors.push_back(model.support_vectors[i]);
    out.dual_coefficients.push_back(model.dual_coefficients[i]);
    out.sv_ids.push_back(model.sv_ids[i]);
  }

  const double bound = model.c * (1.0 - 1e-9);
  double free_sum = 0.0;
  std::size_t free_count = 0;
  double all_sum = 0.0;
  for (std::size_t i = 0; i < out.num_support_vectors(); ++i) {
    double f = 0.0;
    for (std::size_t j = 0; j < out.num_support_vectors(); ++j) {
      f += out.dual_coefficients[j] *
           kernel_value(out.kernel, out.support_vectors[j], out.support_vectors[i]);
    }
    const double label = out.dual_coefficients[i] > 0.0 ? 1.0 : -1.0;
    all_sum += label - f;
    if (std::abs(out.dual_coefficients[i]) < bound) {
      free_sum += label - f;
      ++free_count;
    }
  }
  out.bias = free_count > 0 ? free_sum / static_cast<double>(free_count)
                            : all_sum / static_cast<double>(out.num_support_vectors());
  return out;
}

double select_c_by_cross_validation(const BinaryProblem& problem, const KernelSpec& kernel,
                                    const SvmConfig& config, int folds,
                                    std::span<const double> grid) {
  static constexpr double kDefaultGrid[] = {0.01, 0.1, 1.0, 10.0, 100.0};
  if (grid.empty()) grid = kDefaultGrid;
  if (folds < 2) throw ValidationError("cross-validation needs at least 2 folds");
  check_problem(problem, "select_c_by_cross_validation");

  // Stratified fold assignment: shuffle each label's indices, deal round-robin.
  std::vector<int> fold_of(problem.size(), 0);
  Rng rng(config.seed);
  for (int label : {1, -1}) {
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < problem.size(); ++i) {
      if (problem.labels[i] == label) ids.push_back(i);
    }
    rng.shuffle(ids.begin(), ids.end());
    for (std::size_t k = 0; k < ids.size(); ++k) fold_of[ids[k]] = static_cast<int>(k % folds);
  }

  double best_c = grid.front();
  double best_acc = -1.0;
  for (double c : grid) {
    SvmConfig trial = config;
    trial.c = c;
    std::size_t correct = 0;
    std::size_t total = 0;
    for (int f = 0; f < folds; ++f) {
      BinaryProblem train;
      BinaryProblem held;
      for (std::size_t i = 0; i < problem.size(); ++i) {
        auto& dst = fold_of[i] == f ? held : train;
        dst.add(problem.rows[i], problem.labels[i], 0.0,
                problem.ids.empty() ? i : problem.ids[i]);
      }
      if (held.size() == 0) continue;
      if (!train.has_both_labels()) continue;
      const SvmModel model = train_svm(train, kernel, trial);
      for (std::size_t i = 0; i < held.size(); ++i) {
        if (predict(model, held.rows[i]) == held.labels[i]) ++correct;
        ++total;
      }
    }
    const double acc = total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    if (acc > best_acc) {
      best_acc = acc;
      best_c = c;
    }
  }
  return best_c;
}

}  // namespace atree
