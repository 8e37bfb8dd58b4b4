#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tabrl/agent.hpp"

namespace tabrl {

/// Experiment description loaded from a flat `key = value` file.
///
///   # comments and blank lines are ignored
///   env.name          = MountainCar      (required)
///   env.cap           = 200
///   run.seeds         = 0,1,2,3,4
///   run.episodes      = 300
///   run.record_timing = false
///   context.budget    = 2048
///   context.operator  = latest           stale|latest|naive-dedup|embed-dedup|reward-variance
///   context.initial   = 200
///   gate.quantile     = 0.95
///   fqi.iterations    = 60
///   fqi.gamma         = 0.99
///   epsilon.initial   = 0.7
///   epsilon.decay     = 0.99
///   epsilon.min       = 0.1
///   backend.kind      = knn              knn|remote
///   backend.k         = 5
///   backend.endpoint  = 127.0.0.1:7878   (BRIDGE_ENDPOINT overrides)
///   backend.embed_layer = final
///   backend.timeout   = 60
///   output.dir        = runs
struct ExperimentConfig {
  AgentConfig agent;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::filesystem::path output_dir = "runs";

  void validate() const;
};

/// Parse error or out-of-range value; the message names the line or field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ExperimentConfig parse_config(std::string_view text, std::string_view origin = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Inverse of parse_config: every key, in a fixed order.
std::string format_config(const ExperimentConfig& config);

}  // namespace tabrl
