#include "pushmpc/manifest.hpp"

#include <stdexcept>

#include "json.hpp"
#include "pushmpc/io.hpp"

namespace pushmpc {

void save_manifest(const RunManifest& m, const std::string& path) {
  nlohmann::json doc;
  doc["format"] = "push-mpc-manifest";
  doc["version"] = 1;
  doc["command"] = m.command;
  doc["config"] = m.config;
  doc["seed"] = m.seed;
  doc["inputs"] = m.inputs;
  doc["outputs"] = m.outputs;
  doc["artifact_version"] = m.artifact_version;
  doc["started_at"] = m.started_at;
  doc["wall_seconds"] = m.wall_seconds;
  doc["volatile_outputs"] = m.volatile_outputs;
  atomic_write_file(path, doc.dump(2) + "\n");
}

RunManifest load_manifest(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("manifest " + path + " is not valid JSON: " + e.what());
  }
  if (!doc.contains("format") || doc["format"] != "push-mpc-manifest") {
    throw std::runtime_error("manifest " + path + " has an unknown format tag");
  }
  RunManifest m;
  m.command = doc.at("command").get<std::string>();
  m.config = doc.at("config").get<std::map<std::string, std::string>>();
  m.seed = doc.at("seed").get<uint64_t>();
  m.inputs = doc.at("inputs").get<std::vector<std::string>>();
  m.outputs = doc.at("outputs").get<std::vector<std::string>>();
  m.artifact_version = doc.at("artifact_version").get<std::string>();
  m.started_at = doc.value("started_at", std::string());
  m.wall_seconds = doc.value("wall_seconds", 0.0);
  m.volatile_outputs = doc.value("volatile_outputs", false);
  return m;
}

}  // namespace pushmpc
