#include "mail/harness/manifest.hpp"

#include <nlohmann/json.hpp>

#include "mail/core/binary_io.hpp"
#include "mail/core/hash.hpp"

namespace mail::harness {

std::string file_hash(const std::filesystem::path& path) { return git_blob_hash(read_file(path)); }

void write_manifest(const std::filesystem::path& dir, Manifest m, const std::vector<std::filesystem::path>& inputs,
                    const std::vector<std::string>& outputs) {
  for (const auto& p : inputs) m.inputs[p.string()] = file_hash(p);
  for (const auto& name : outputs) m.outputs[name] = file_hash(dir / name);
  nlohmann::json j;
  j["command"] = m.command;
  j["args"] = m.args;
  j["seed"] = m.seed;
  j["config"] = m.config_json.empty() ? nlohmann::json(nullptr) : nlohmann::json::parse(m.config_json);
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  write_file(dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace mail::harness
