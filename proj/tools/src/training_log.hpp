#pragma once

#include <iosfwd>

#include "atree/tree.hpp"

namespace atree::cli {

/// Human-readable per-node record of a trained tree: split, class sets,
/// boosting error series and bound, routing counts, classifier size and cost.
void write_training_log(const Atree& tree, std::ostream& out, bool timestamp);

}  // namespace atree::cli
