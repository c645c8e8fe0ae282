#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pushmpc {

inline constexpr const char* kArtifactVersion = "push-mpc 1.0.0";

// Record of one command invocation: enough to re-run it and check that the
// outputs come back byte-identical.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;  // resolved settings incl. seed and jobs
  uint64_t seed = 0;
  std::vector<std::string> inputs;   // absolute paths read
  std::vector<std::string> outputs;  // absolute paths written
  std::string artifact_version = kArtifactVersion;
  std::string started_at;            // UTC wall clock, informational
  double wall_seconds = 0.0;         // informational
  bool volatile_outputs = false;     // outputs carry measured timings; replay skips comparison
};

void save_manifest(const RunManifest& m, const std::string& path);
RunManifest load_manifest(const std::string& path);

}  // namespace pushmpc
