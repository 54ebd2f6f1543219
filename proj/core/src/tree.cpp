#include "atree/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "atree/error.hpp"

namespace atree {

namespace {

double split_midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  // Adjacent doubles can round the midpoint down onto lo; hi still separates
  // them under the strict "<" rule.
  return lo < mid ? mid : hi;
}

struct SplitScan {
  std::vector<double> total;  // per class mass
  double total_mass = 0.0;
};

// Objective of a candidate given unnormalized per-class masses on the left.
double split_objective(const std::vector<double>& left, const SplitScan& scan,
                       double* left_share, double* right_share) {
  double left_mass = 0.0;
  for (double m : left) left_mass += m;
  double right_mass = 0.0;
  double h_left = 0.0;
  double h_right = 0.0;
  for (std::size_t k = 0; k < left.size(); ++k) {
    const double r = std::max(0.0, scan.total[k] - left[k]);
    right_mass += r;
  }
  for (std::size_t k = 0; k < left.size(); ++k) {
    if (left[k] > 0.0) {
      const double p = left[k] / left_mass;
      h_left -= p * std::log(p);
    }
    const double r = std::max(0.0, scan.total[k] - left[k]);
    if (r > 0.0) {
      const double p = r / right_mass;
      h_right -= p * std::log(p);
    }
  }
  *left_share = left_mass / scan.total_mass;
  *right_share = right_mass / scan.total_mass;
  return *left_share * h_left + *right_share * h_right;
}

LeafNode majority_leaf(const NodeSamples& s) {
  const auto dist = s.class_distribution();
  const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
  const auto best = std::max_element(dist.begin(), dist.end());  // first max = lowest id
  LeafNode leaf;
  leaf.class_label = static_cast<int>(best - dist.begin());
  leaf.training_purity = total > 0.0 ? *best / total : 1.0;
  return leaf;
}

class HierarchyBuilder {
 public:
  HierarchyBuilder(Atree& tree, const AtreeConfig& config, int max_depth)
      : tree_(tree), config_(config), max_depth_(max_depth) {}

  std::size_t grow(NodeSamples samples, int depth) {
    const std::size_t idx = tree_.nodes.size();
    AtreeNode node;
    node.id = idx;
    node.depth = depth;
    node.sample_count = samples.size();
    node.body = majority_leaf(samples);
    tree_.nodes.push_back(std::move(node));

    if (samples.classes_present().size() < 2) return idx;
    if (samples.size() < config_.min_node_samples) return idx;
    if (depth >= max_depth_) return idx;

    auto split = entropy_split(samples, config_.split_rule);
    if (!split) return idx;
    Binarization bin = binarize_labels(samples, *split);
    BoostedClassifier boost = adaboost_train(bin.problem, config_.boost);
    if (boost.empty()) return idx;
    PartitionResult part = partition_samples(samples, boost, config_.delta);
    if (part.left.empty() || part.right.empty()) return idx;

    InternalNode inner;
    inner.boost = std::move(boost);
    inner.split = std::move(*split);
    inner.pos_classes = std::move(bin.pos_classes);
    inner.neg_classes = std::move(bin.neg_classes);
    inner.class_distribution = samples.class_distribution();
    inner.left_only_ids = std::move(part.left_only_ids);
    inner.right_only_ids = std::move(part.right_only_ids);
    inner.star_ids = std::move(part.star_ids);
    tree_.nodes[idx].body = std::move(inner);

    const std::size_t left = grow(std::move(part.left), depth + 1);
    const std::size_t right = grow(std::move(part.right), depth + 1);
    auto& stored = tree_.nodes[idx].internal();
    stored.left = left;
    stored.right = right;
    return idx;
  }

 private:
  Atree& tree_;
  const AtreeConfig& config_;
  int max_depth_;
};

double training_accuracy(const SvmModel& model, const BinaryProblem& problem) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < problem.size(); ++i) {
    if (sign_of(decision_value(model, problem.rows[i])) == problem.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(problem.size());
}

}  // namespace

void AtreeConfig::validate() const {
  if (!(delta >= 0.5 && delta <= 1.0)) {
    throw ValidationError(
        "delta must lie in [0.5, 1]; below 0.5 easy samples would be passed down to "
        "both children");
  }
  if (max_depth < 0) throw ValidationError("max_depth must be positive (or 0 for default)");
  if (min_node_samples < 1) throw ValidationError("min_node_samples must be positive");
  for (std::size_t n : sv_budget_search) {
    if (n == 0) throw ValidationError("sv_budget_search entries must be positive");
  }
  boost.validate();
  svm.validate();
  kernel.validate();
}

int AtreeConfig::resolved_max_depth(int num_classes) const {
  if (max_depth > 0) return max_depth;
  int bits = 0;
  while ((1 << bits) < num_classes) ++bits;
  return std::max(1, 2 * bits);
}

void NodeSamples::normalize() {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (total > 0.0) {
    for (auto& w : weights) w /= total;
  }
}

std::vector<int> NodeSamples::classes_present() const {
  std::vector<char> seen(static_cast<std::size_t>(num_classes), 0);
  for (int y : labels) seen[static_cast<std::size_t>(y)] = 1;
  std::vector<int> out;
  for (int k = 0; k < num_classes; ++k) {
    if (seen[static_cast<std::size_t>(k)]) out.push_back(k);
  }
  return out;
}

std::vector<double> NodeSamples::class_distribution() const {
  std::vector<double> dist(static_cast<std::size_t>(num_classes), 0.0);
  for (std::size_t i = 0; i < size(); ++i) dist[static_cast<std::size_t>(labels[i])] += weights[i];
  return dist;
}

NodeSamples NodeSamples::from_dataset(const Dataset& data) {
  NodeSamples s;
  s.num_classes = data.num_classes();
  for (std::size_t i = 0; i < data.size(); ++i) s.add(data.row(i), data[i].label, data[i].weight, i);
  s.normalize();
  return s;
}

double entropy(std::span<const double> histogram) {
  double h = 0.0;
  for (double p : histogram) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

std::optional<EntropySplit> entropy_split(const NodeSamples& samples, SplitRule rule) {
  if (samples.classes_present().size() < 2) return std::nullopt;
  const std::size_t n = samples.size();
  const auto classes = static_cast<std::size_t>(samples.num_classes);

  SplitScan scan;
  scan.total.assign(classes, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    scan.total[static_cast<std::size_t>(samples.labels[i])] += samples.weights[i];
  }
  scan.total_mass = std::accumulate(scan.total.begin(), scan.total.end(), 0.0);
  if (!(scan.total_mass > 0.0)) return std::nullopt;

  const std::size_t features =
      rule == SplitRule::feature_threshold ? samples.rows.front().size() : 1;
  auto value_of = [&](std::size_t i, std::size_t f) {
    return rule == SplitRule::feature_threshold ? samples.rows[i][f]
                                                : static_cast<double>(samples.labels[i]);
  };

  bool found = false;
  double best_objective = std::numeric_limits<double>::infinity();
  std::size_t best_feature = 0;
  double best_threshold = 0.0;
  std::vector<std::size_t> order(n);
  std::vector<double> left(classes);
  for (std::size_t f = 0; f < features; ++f) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return value_of(a, f) < value_of(b, f); });
    std::fill(left.begin(), left.end(), 0.0);
    std::size_t k = 0;
    while (k < n) {
      const double value = value_of(order[k], f);
      while (k < n && value_of(order[k], f) == value) {
        left[static_cast<std::size_t>(samples.labels[order[k]])] += samples.weights[order[k]];
        ++k;
      }
      if (k == n) break;
      double zl = 0.0;
      double zr = 0.0;
      const double objective = split_objective(left, scan, &zl, &zr);
      if (objective < best_objective - kSplitTieTolerance) {
        best_objective = objective;
        best_feature = f;
        best_threshold = split_midpoint(value, value_of(order[k], f));
        found = true;
      }
    }
  }
  if (!found) return std::nullopt;

  EntropySplit split;
  split.rule = rule;
  split.feature_index = best_feature;
  split.threshold = best_threshold;
  split.left_histogram.assign(classes, 0.0);
  split.right_histogram.assign(classes, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& hist = split.goes_left(samples.rows[i], samples.labels[i]) ? split.left_histogram
                                                                     : split.right_histogram;
    hist[static_cast<std::size_t>(samples.labels[i])] += samples.weights[i];
  }
  const double zl = std::accumulate(split.left_histogram.begin(), split.left_histogram.end(), 0.0);
  const double zr =
      std::accumulate(split.right_histogram.begin(), split.right_histogram.end(), 0.0);
  for (auto& v : split.left_histogram) v /= zl;
  for (auto& v : split.right_histogram) v /= zr;
  split.left_mass = zl / scan.total_mass;
  split.right_mass = zr / scan.total_mass;
  split.objective = best_objective;
  return split;
}

Binarization binarize_labels(const NodeSamples& samples, const EntropySplit& split) {
  const auto classes = static_cast<std::size_t>(samples.num_classes);
  std::vector<double> left_mass(classes, 0.0);
  std::vector<double> right_mass(classes, 0.0);
  std::vector<char> present(classes, 0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto y = static_cast<std::size_t>(samples.labels[i]);
    present[y] = 1;
    (split.goes_left(samples.rows[i], samples.labels[i]) ? left_mass : right_mass)[y] +=
        samples.weights[i];
  }

  Binarization out;
  out.class_sign.assign(classes, 0);
  int positives = 0;
  int negatives = 0;
  for (std::size_t k = 0; k < classes; ++k) {
    if (!present[k]) continue;
    out.class_sign[k] = left_mass[k] >= right_mass[k] ? -1 : 1;
    (out.class_sign[k] > 0 ? positives : negatives) += 1;
  }
  if (positives + negatives >= 2 && (positives == 0 || negatives == 0)) {
    const int target = positives == 0 ? 1 : -1;
    std::size_t pick = classes;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < classes; ++k) {
      if (!present[k]) continue;
      const double lean = target > 0 ? right_mass[k] - left_mass[k] : left_mass[k] - right_mass[k];
      if (lean > best) {
        best = lean;
        pick = k;
      }
    }
    out.class_sign[pick] = target;
  }
  for (std::size_t k = 0; k < classes; ++k) {
    if (out.class_sign[k] > 0) out.pos_classes.push_back(static_cast<int>(k));
    if (out.class_sign[k] < 0) out.neg_classes.push_back(static_cast<int>(k));
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out.problem.add(samples.rows[i], out.class_sign[static_cast<std::size_t>(samples.labels[i])],
                    samples.weights[i], samples.ids[i]);
  }
  return out;
}

PartitionResult partition_samples(const NodeSamples& samples, const BoostedClassifier& boost,
                                  double delta) {
  if (!(delta >= 0.5 && delta <= 1.0)) throw ValidationError("delta must lie in [0.5, 1]");
  PartitionResult out;
  out.left.num_classes = samples.num_classes;
  out.right.num_classes = samples.num_classes;
  out.routes.reserve(samples.size());
  out.p_positive.reserve(samples.size());
  const bool constrained = delta == 0.5;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double h = strong_score(boost, samples.rows[i]);
    const double p_pos = logistic(h);
    out.p_positive.push_back(p_pos);
    Route route;
    if (p_pos > delta) {
      route = Route::right;
    } else if (p_pos < 1.0 - delta) {
      route = Route::left;
    } else {
      route = constrained ? Route::right : Route::both;
    }
    out.routes.push_back(route);
    const std::size_t id = samples.ids[i];
    switch (route) {
      case Route::right:
        out.right.add(samples.rows[i], samples.labels[i], 1.0, id);
        out.right_only_ids.push_back(id);
        break;
      case Route::left:
        out.left.add(samples.rows[i], samples.labels[i], 1.0, id);
        out.left_only_ids.push_back(id);
        break;
      case Route::both:
        out.right.add(samples.rows[i], samples.labels[i], p_pos, id);
        out.left.add(samples.rows[i], samples.labels[i], logistic(-h), id);
        out.star_ids.push_back(id);
        break;
    }
  }
  out.left.normalize();
  out.right.normalize();
  return out;
}

int Atree::depth() const {
  int d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

std::size_t Atree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const AtreeNode& n) { return n.is_leaf(); }));
}

std::size_t Atree::total_sample_copies() const {
  std::size_t total = 0;
  for (const auto& n : nodes) total += n.sample_count;
  return total;
}

bool Atree::has_classifiers() const {
  for (const auto& n : nodes) {
    if (n.is_leaf()) continue;
    const auto& in = n.internal();
    if (!in.svm && !in.pass_through) return false;
  }
  return true;
}

Atree build_phase1(const Dataset& data, const AtreeConfig& config) {
  config.validate();
  if (data.empty()) throw ValidationError("cannot build a tree from an empty dataset");
  Atree tree;
  tree.config = config;
  tree.label_names = data.label_names();
  tree.num_classes = data.num_classes();
  tree.dimension = data.dimension();
  HierarchyBuilder builder(tree, tree.config, config.resolved_max_depth(data.num_classes()));
  builder.grow(NodeSamples::from_dataset(data), 0);
  return tree;
}

void attach_svms_phase2(Atree& tree, const Dataset& data) {
  if (data.dimension() != tree.dimension) {
    throw ValidationError("phase II data dimension does not match the tree");
  }
  const AtreeConfig& config = tree.config;
  for (auto& node : tree.nodes) {
    if (node.is_leaf()) continue;
    auto& inner = node.internal();
    BinaryProblem problem;
    for (std::size_t id : inner.left_only_ids) {
      if (id >= data.size()) throw ValidationError("phase II data does not match phase I ids");
      problem.add(data.row(id), -1, 1.0, id);
    }
    for (std::size_t id : inner.right_only_ids) {
      if (id >= data.size()) throw ValidationError("phase II data does not match phase I ids");
      problem.add(data.row(id), 1, 1.0, id);
    }
    inner.svm.reset();
    inner.pass_through.reset();
    if (!problem.has_both_labels()) {
      inner.pass_through = inner.left_only_ids.empty() || !inner.right_only_ids.empty()
                               ? Route::right
                               : Route::left;
      continue;
    }
    SvmConfig svm_config = config.svm;
    if (config.auto_c) {
      svm_config.c = select_c_by_cross_validation(problem, config.kernel, svm_config);
    }
    SvmModel model = train_svm(problem, config.kernel, svm_config);
    if (auto* kernel_model = std::get_if<KernelSvmModel>(&model);
        kernel_model != nullptr && !config.sv_budget_search.empty()) {
      const double base = training_accuracy(model, problem);
      std::vector<std::size_t> budgets = config.sv_budget_search;
      std::sort(budgets.begin(), budgets.end());
      for (std::size_t budget : budgets) {
        if (budget >= kernel_model->num_support_vectors()) break;
        SvmModel candidate = truncate_svs(*kernel_model, budget);
        // Cost is linear in N, so the smallest budget within one point wins.
        if (base - training_accuracy(candidate, problem) <= 0.01) {
          model = std::move(candidate);
          break;
        }
      }
    }
    inner.svm = std::move(model);
  }
}

Atree train_atree(const Dataset& data, const AtreeConfig& config) {
  Atree tree = build_phase1(data, config);
  attach_svms_phase2(tree, data);
  return tree;
}

std::size_t Trace::classifier_evaluations() const {
  return static_cast<std::size_t>(
      std::count_if(steps.begin(), steps.end(), [](const TraceStep& s) { return s.evaluated; }));
}

TreePrediction predict(const Atree& tree, FeatureRow x, KernelEvalSession* session) {
  if (tree.nodes.empty()) throw ValidationError("tree has no nodes");
  if (x.size() != tree.dimension) {
    throw ValidationError("feature vector has dimension " + std::to_string(x.size()) +
                          ", tree expects " + std::to_string(tree.dimension));
  }
  TreePrediction out;
  std::size_t at = 0;
  while (!tree.nodes[at].is_leaf()) {
    const auto& inner = tree.nodes[at].internal();
    TraceStep step;
    step.node = at;
    bool go_right;
    if (inner.pass_through) {
      step.evaluated = false;
      go_right = *inner.pass_through != Route::left;
    } else if (inner.svm) {
      step.decision = decision_value(*inner.svm, x, session);
      go_right = step.decision >= 0.0;
    } else {
      throw ValidationError("node " + std::to_string(at) + " has no classifier; run phase II");
    }
    out.trace.steps.push_back(step);
    at = go_right ? inner.right : inner.left;
  }
  out.trace.leaf = at;
  out.label = tree.nodes[at].leaf().class_label;
  return out;
}

double node_cost(double support_vectors, std::size_t pos_classes, std::size_t neg_classes) {
  if (pos_classes == 0 || neg_classes == 0) {
    throw ValidationError("node cost needs nonempty positive and negative class sets");
  }
  const double zp = static_cast<double>(pos_classes);
  const double zn = static_cast<double>(neg_classes);
  const double f_neg = zn / (zp + zn);
  const double f_pos = zp / (zp + zn);
  return f_neg * support_vectors / zp + f_pos * support_vectors / zn;
}

double node_cost(const AtreeNode& node) {
  if (node.is_leaf()) throw ValidationError("node cost is defined for internal nodes only");
  const auto& inner = node.internal();
  if (!inner.svm) throw ValidationError("node has no trained classifier");
  const double n = is_linear(*inner.svm)
                       ? 1.0
                       : static_cast<double>(support_vector_count(*inner.svm));
  return node_cost(n, inner.pos_classes.size(), inner.neg_classes.size());
}

}  // namespace atree
