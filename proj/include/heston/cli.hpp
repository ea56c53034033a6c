#pragma once

#include <cstdint>
#include <string>

namespace heston {

// Exit codes: 0 success, 1 configuration/validation error, 2 numerical
// failure, 3 property-check failure (sweep/probe/commutators).
struct CliOptions {
  std::string config_path;
  std::string out_dir = ".";
  int threads = 1;
  std::uint64_t seed = 0x5eedULL;
};

int run_cli(const CliOptions& options);

// Same entry point with the configuration text supplied directly (tests).
int run_config_text(const std::string& config_json, const CliOptions& options);

}  // namespace heston
