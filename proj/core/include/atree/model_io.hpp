#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "atree/tree.hpp"

namespace atree {

inline constexpr int kModelSchemaVersion = 1;

/// JSON document:
///   {format, version, config, label_map, num_classes, dimension, depth,
///    nodes: [{id, kind, depth, samples, ...}]}
/// Internal nodes carry split, boost rounds, class sets, children and either an
/// svm payload or a pass_through side; leaves carry label and purity.
/// Doubles are written in shortest round-trip form.
std::string serialize_model(const Atree& tree);

/// Throws ModelFormatError on malformed input or a version other than
/// kModelSchemaVersion.
Atree deserialize_model(std::string_view json);

void save_model(const Atree& tree, const std::filesystem::path& path);
Atree load_model(const std::filesystem::path& path);

/// Graphviz digraph. Internal nodes show the split feature and threshold and
/// |Z+|/|Z-|; leaves show the original class label and purity. `max_depth`
/// < 0 renders the whole tree, otherwise only nodes at depth <= max_depth - 1.
std::string export_dot(const Atree& tree, int max_depth = -1);

}  // namespace atree
