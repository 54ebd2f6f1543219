#include "training_log.hpp"

#include <chrono>
#include <ctime>
#include <iomanip>
#include <ostream>
#include <string>

#include "atree/json_config.hpp"

namespace atree::cli {

namespace {

std::string class_list(const Atree& tree, const std::vector<int>& classes) {
  std::string s = "{";
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(tree.label_names[static_cast<std::size_t>(classes[i])]);
  }
  return s + "}";
}

}  // namespace

void write_training_log(const Atree& tree, std::ostream& out, bool timestamp) {
  if (timestamp) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    out << "# trained " << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ") << "\n";
  }
  out << "# config " << atree_config_to_json(tree.config) << "\n";
  out << "nodes " << tree.nodes.size() << " leaves " << tree.leaf_count() << " depth "
      << tree.depth() << " sample_copies " << tree.total_sample_copies() << "\n";
  const auto old_precision = out.precision(6);
  for (const auto& node : tree.nodes) {
    out << "node " << node.id << " depth " << node.depth << " samples " << node.sample_count;
    if (node.is_leaf()) {
      const auto& leaf = node.leaf();
      out << " leaf label " << tree.label_names[static_cast<std::size_t>(leaf.class_label)]
          << " purity " << leaf.training_purity << "\n";
      continue;
    }
    const auto& in = node.internal();
    out << " children " << in.left << "," << in.right << "\n";
    out << "  split feature " << in.split.feature_index << " threshold " << in.split.threshold
        << " objective " << in.split.objective << " mass " << in.split.left_mass << "/"
        << in.split.right_mass << "\n";
    out << "  Z+ " << class_list(tree, in.pos_classes) << " Z- "
        << class_list(tree, in.neg_classes) << "\n";
    out << "  boost rounds " << in.boost.rounds.size() << (in.boost.exited_early ? " (gamma exit)" : "")
        << " eps [";
    for (std::size_t t = 0; t < in.boost.round_errors.size(); ++t) {
      out << (t ? " " : "") << in.boost.round_errors[t];
    }
    out << "] bound " << error_bound(in.boost) << "\n";
    out << "  routed left " << in.left_only_ids.size() << " right " << in.right_only_ids.size()
        << " star " << in.star_ids.size() << "\n";
    if (in.svm) {
      out << "  svm " << (is_linear(*in.svm) ? "linear" : "kernel") << " sv "
          << support_vector_count(*in.svm) << " cost " << node_cost(node) << "\n";
    } else if (in.pass_through) {
      out << "  pass-through " << (*in.pass_through == Route::left ? "left" : "right") << "\n";
    }
  }
  out.precision(old_precision);
}

}  // namespace atree::cli
