#pragma once

#include <string>
#include <string_view>

#include "atree/tree.hpp"

namespace atree {

/// AtreeConfig as a JSON object (text). Keys:
///   delta, max_depth, min_node_samples, kernel, split_rule, auto_c,
///   sv_budget_search, boost{max_rounds, gamma, min_weight_floor},
///   svm{c, tolerance, max_passes, seed, bias_scale, cache_megabytes}
std::string atree_config_to_json(const AtreeConfig& config);

/// Missing keys keep their defaults; unknown keys and out-of-range values
/// raise ValidationError naming the field.
AtreeConfig atree_config_from_json(std::string_view json_text);

}  // namespace atree
