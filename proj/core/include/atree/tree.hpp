#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "atree/boosting.hpp"
#include "atree/dataset.hpp"
#include "atree/kernel.hpp"
#include "atree/svm.hpp"

namespace atree {

/// How a candidate (feature, value) pair sends samples left.
enum class SplitRule {
  feature_threshold,        // x[f] < v goes left
  literal_label_threshold,  // class id < v goes left, whatever the feature
};

struct AtreeConfig {
  /// Routing threshold: a sample goes to exactly one child only when the node
  /// is more than `delta` sure about it. 0.5 gives a constrained hierarchy,
  /// 1.0 sends everything both ways.
  double delta = 0.6;
  /// Maximum root-to-leaf path length; 0 selects 2 * ceil(log2(num_classes)).
  int max_depth = 0;
  BoostConfig boost;
  SvmConfig svm;
  KernelSpec kernel;
  std::size_t min_node_samples = 5;
  /// Candidate support-vector budgets tried per node for nonlinear kernels.
  std::vector<std::size_t> sv_budget_search;
  SplitRule split_rule = SplitRule::feature_threshold;
  /// Choose each node's C by cross-validation instead of svm.c.
  bool auto_c = false;

  void validate() const;
  int resolved_max_depth(int num_classes) const;
};

/// Weighted multi-class samples reaching a tree node.
struct NodeSamples {
  std::vector<FeatureRow> rows;
  std::vector<int> labels;
  std::vector<double> weights;
  std::vector<std::size_t> ids;
  int num_classes = 0;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  void add(FeatureRow row, int label, double weight, std::size_t id) {
    rows.push_back(row);
    labels.push_back(label);
    weights.push_back(weight);
    ids.push_back(id);
  }
  /// Rescales weights to sum to one.
  void normalize();
  /// Distinct labels present, ascending.
  std::vector<int> classes_present() const;
  /// Weighted class distribution p(y) = sum_i w_i [y_i = y].
  std::vector<double> class_distribution() const;

  static NodeSamples from_dataset(const Dataset& data);
};

/// Minimum-entropy binary split of a multi-class node.
struct EntropySplit {
  std::size_t feature_index = 0;
  double threshold = 0.0;
  double left_mass = 0.0;   // share of node weight sent left
  double right_mass = 0.0;
  std::vector<double> left_histogram;   // per class, sums to 1
  std::vector<double> right_histogram;
  double objective = 0.0;   // left_mass*H(left) + right_mass*H(right), nats
  SplitRule rule = SplitRule::feature_threshold;

  bool goes_left(FeatureRow x, int label) const {
    return rule == SplitRule::feature_threshold ? x[feature_index] < threshold
                                                : static_cast<double>(label) < threshold;
  }
};

/// Natural-log entropy of a histogram, with 0 log 0 = 0.
double entropy(std::span<const double> histogram);

/// Candidate values are midpoints between consecutive distinct sorted values
/// (feature values, or class ids under the literal rule). Objectives closer than
/// kSplitTieTolerance count as ties and keep the earlier candidate: lowest
/// feature, then lowest threshold. Returns nullopt when fewer than two classes
/// are present or no candidate leaves both sides nonempty.
inline constexpr double kSplitTieTolerance = 1e-12;
std::optional<EntropySplit> entropy_split(const NodeSamples& samples,
                                          SplitRule rule = SplitRule::feature_threshold);

struct Binarization {
  BinaryProblem problem;
  std::vector<int> class_sign;  // per class id: -1, +1, or 0 when absent
  std::vector<int> pos_classes;
  std::vector<int> neg_classes;
};

/// Maps each class to -1 when its mass on the left of the split is at least
/// its mass on the right, else +1, and relabels every sample accordingly. If
/// that leaves a single sign, the class with the largest right-minus-left mass
/// is moved to +1 (or, symmetrically, to -1) so both signs exist.
Binarization binarize_labels(const NodeSamples& samples, const EntropySplit& split);

enum class Route : std::uint8_t { left, right, both };

struct PartitionResult {
  NodeSamples left;   // normalized
  NodeSamples right;  // normalized
  std::vector<std::size_t> left_only_ids;
  std::vector<std::size_t> right_only_ids;
  std::vector<std::size_t> star_ids;
  std::vector<Route> routes;          // per input sample
  std::vector<double> p_positive;     // per input sample
};

/// p+ > delta routes right, p+ < 1 - delta routes left (both with weight 1),
/// anything else is starred and copied to both sides with weights p+ (right)
/// and p- (left). At delta = 0.5 the band is empty and p+ = 0.5 goes right.
/// Each side is then renormalized.
PartitionResult partition_samples(const NodeSamples& samples, const BoostedClassifier& boost,
                                  double delta);

struct LeafNode {
  int class_label = 0;
  double training_purity = 1.0;
};

struct InternalNode {
  BoostedClassifier boost;
  std::optional<SvmModel> svm;  // set by phase II unless pass_through
  EntropySplit split;
  std::vector<int> pos_classes;  // classes binarized to +1 (right)
  std::vector<int> neg_classes;  // classes binarized to -1 (left)
  std::size_t left = 0;
  std::size_t right = 0;
  /// Phase II could not train a classifier; always route to this side.
  std::optional<Route> pass_through;
  std::vector<double> class_distribution;

  // Phase I bookkeeping consumed by phase II; not serialized.
  std::vector<std::size_t> left_only_ids;
  std::vector<std::size_t> right_only_ids;
  std::vector<std::size_t> star_ids;
};

struct AtreeNode {
  std::size_t id = 0;
  int depth = 0;
  std::size_t sample_count = 0;  // Phase I copies reaching the node
  std::variant<LeafNode, InternalNode> body;

  bool is_leaf() const { return std::holds_alternative<LeafNode>(body); }
  const LeafNode& leaf() const { return std::get<LeafNode>(body); }
  const InternalNode& internal() const { return std::get<InternalNode>(body); }
  InternalNode& internal() { return std::get<InternalNode>(body); }
};

/// The hierarchy: nodes in creation (pre-)order, root at index 0.
struct Atree {
  std::vector<AtreeNode> nodes;
  AtreeConfig config;
  std::vector<std::int64_t> label_names;
  int num_classes = 0;
  std::size_t dimension = 0;

  const AtreeNode& root() const { return nodes.front(); }
  int depth() const;
  std::size_t leaf_count() const;
  std::size_t internal_count() const { return nodes.size() - leaf_count(); }
  /// Total Phase I sample copies held by all nodes.
  std::size_t total_sample_copies() const;
  bool has_classifiers() const;
};

/// Phase I: recursive entropy split, binarization, boosting and partition.
/// A node becomes a leaf when a single class is present, it holds fewer than
/// min_node_samples copies, it sits at max depth, no split exists, boosting
/// keeps no round, or the partition leaves one side empty.
Atree build_phase1(const Dataset& data, const AtreeConfig& config);

/// Phase II: one binary SVM per internal node on its left-only (-1) and
/// right-only (+1) samples, starred samples excluded, unweighted.
void attach_svms_phase2(Atree& tree, const Dataset& data);

/// Both phases.
Atree train_atree(const Dataset& data, const AtreeConfig& config);

struct TraceStep {
  std::size_t node = 0;
  double decision = 0.0;
  bool evaluated = true;  // false for pass-through nodes
};

struct Trace {
  std::vector<TraceStep> steps;  // internal nodes visited, root first
  std::size_t leaf = 0;

  std::size_t classifier_evaluations() const;
};

struct TreePrediction {
  int label = 0;
  Trace trace;
};

/// Walks from the root, going right iff the node's decision value is >= 0.
/// Kernel evaluations are routed through `session` when given.
TreePrediction predict(const Atree& tree, FeatureRow x, KernelEvalSession* session = nullptr);

/// Average cost of eliminating one class at a node:
/// f- * N / |Z+| + f+ * N / |Z-| with f- = |Z-| / (|Z+| + |Z-|).
double node_cost(double support_vectors, std::size_t pos_classes, std::size_t neg_classes);
/// N is the support-vector count for kernel nodes and 1 for linear nodes.
double node_cost(const AtreeNode& node);

}  // namespace atree
