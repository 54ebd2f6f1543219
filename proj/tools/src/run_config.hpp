#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "atree/tree.hpp"

namespace atree::cli {

/// Everything that shapes a run besides the input files. Stored as
/// {"seed": n, "baseline": "ova"|"ovo"|"none", "atree": {...}}.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string baseline = "none";
  AtreeConfig atree;

  void validate() const;
};

std::string run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace atree::cli
