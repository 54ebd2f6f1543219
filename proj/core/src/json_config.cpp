#include "atree/json_config.hpp"

#include <set>

#include <json.hpp>

#include "atree/error.hpp"

namespace atree {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.contains(it.key())) {
      throw ValidationError("unknown config field '" + where + it.key() + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config field '" + where + key + "' has the wrong type");
  }
}

}  // namespace

std::string atree_config_to_json(const AtreeConfig& c) {
  json j = {
      {"delta", c.delta},
      {"max_depth", c.max_depth},
      {"min_node_samples", c.min_node_samples},
      {"kernel", c.kernel.to_string()},
      {"split_rule", c.split_rule == SplitRule::feature_threshold ? "feature" : "label"},
      {"auto_c", c.auto_c},
      {"sv_budget_search", c.sv_budget_search},
      {"boost",
       {{"max_rounds", c.boost.max_rounds},
        {"gamma", c.boost.gamma},
        {"min_weight_floor", c.boost.min_weight_floor}}},
      {"svm",
       {{"c", c.svm.c},
        {"tolerance", c.svm.tolerance},
        {"max_passes", c.svm.max_passes},
        {"seed", c.svm.seed},
        {"bias_scale", c.svm.bias_scale},
        {"cache_megabytes", c.svm.cache_megabytes}}},
  };
  return j.dump();
}

AtreeConfig atree_config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  reject_unknown(j,
                 {"delta", "max_depth", "min_node_samples", "kernel", "split_rule", "auto_c",
                  "sv_budget_search", "boost", "svm"},
                 "");
  AtreeConfig c;
  read(j, "delta", c.delta, "");
  read(j, "max_depth", c.max_depth, "");
  read(j, "min_node_samples", c.min_node_samples, "");
  read(j, "auto_c", c.auto_c, "");
  read(j, "sv_budget_search", c.sv_budget_search, "");
  if (j.contains("kernel")) {
    std::string kernel;
    read(j, "kernel", kernel, "");
    c.kernel = KernelSpec::parse(kernel);
  }
  if (j.contains("split_rule")) {
    std::string rule;
    read(j, "split_rule", rule, "");
    if (rule == "feature") c.split_rule = SplitRule::feature_threshold;
    else if (rule == "label") c.split_rule = SplitRule::literal_label_threshold;
    else throw ValidationError("config field 'split_rule' must be 'feature' or 'label'");
  }
  if (j.contains("boost")) {
    const json& b = j.at("boost");
    if (!b.is_object()) throw ValidationError("config field 'boost' must be an object");
    reject_unknown(b, {"max_rounds", "gamma", "min_weight_floor"}, "boost.");
    read(b, "max_rounds", c.boost.max_rounds, "boost.");
    read(b, "gamma", c.boost.gamma, "boost.");
    read(b, "min_weight_floor", c.boost.min_weight_floor, "boost.");
  }
  if (j.contains("svm")) {
    const json& s = j.at("svm");
    if (!s.is_object()) throw ValidationError("config field 'svm' must be an object");
    reject_unknown(s, {"c", "tolerance", "max_passes", "seed", "bias_scale", "cache_megabytes"},
                   "svm.");
    read(s, "c", c.svm.c, "svm.");
    read(s, "tolerance", c.svm.tolerance, "svm.");
    read(s, "max_passes", c.svm.max_passes, "svm.");
    read(s, "seed", c.svm.seed, "svm.");
    read(s, "bias_scale", c.svm.bias_scale, "svm.");
    read(s, "cache_megabytes", c.svm.cache_megabytes, "svm.");
  }
  c.validate();
  return c;
}

}  // namespace atree
