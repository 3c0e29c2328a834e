#pragma once

#include "wanco/problem.hpp"
#include "wanco/trainer.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace wanco {

/// Bad or incomplete run configuration. The message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::json;

std::vector<std::string> preset_names();
/// Full configuration tree of a named preset.
Json preset_tree(const std::string& name);

/// Applies `user` on top of the preset it names (if any). Objects merge key by
/// key; any other value replaces the preset's.
Json expand_config(const Json& user);

/// Recursive object merge used by presets and compare variants.
Json merge_config(Json base, const Json& overrides);

struct RunConfig {
  Json tree;  // expanded
  std::shared_ptr<const Problem> problem;
  TrainConfig train;
  SamplerConfig sampler;
  std::string output_dir;
};

/// Expands and validates. Unknown keys and missing required keys throw ConfigError.
RunConfig parse_run_config(const Json& user);
RunConfig load_run_config(const std::filesystem::path& path);

/// Builds the problem described by the "problem" and "networks" subtrees.
std::shared_ptr<const Problem> build_problem(const Json& problem, const Json& networks);

Json read_json_file(const std::filesystem::path& path);

}  // namespace wanco
