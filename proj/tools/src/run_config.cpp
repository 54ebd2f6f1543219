#include "run_config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "atree/error.hpp"
#include "atree/json_config.hpp"

namespace atree::cli {

using nlohmann::json;

void RunConfig::validate() const {
  if (baseline != "none" && baseline != "ova" && baseline != "ovo") {
    throw ValidationError("baseline must be one of ova, ovo, none (got '" + baseline + "')");
  }
  atree.validate();
}

std::string run_config_to_json(const RunConfig& config) {
  json j;
  j["seed"] = config.seed;
  j["baseline"] = config.baseline;
  j["atree"] = json::parse(atree_config_to_json(config.atree));
  return j.dump(2) + "\n";
}

RunConfig run_config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  RunConfig config;
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") {
      if (!value.is_number_unsigned()) throw ValidationError("seed must be a nonnegative integer");
      config.seed = value.get<std::uint64_t>();
    } else if (key == "baseline") {
      if (!value.is_string()) throw ValidationError("baseline must be a string");
      config.baseline = value.get<std::string>();
    } else if (key == "atree") {
      config.atree = atree_config_from_json(value.dump());
    } else {
      throw ValidationError("unknown config key '" + key + "'");
    }
  }
  config.validate();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return run_config_from_json(text.str());
}

}  // namespace atree::cli
