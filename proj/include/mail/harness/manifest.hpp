#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mail::harness {

/// Record of one CLI run: command line, seed, config copy and git-style
/// content hashes of every input and output file.
struct Manifest {
  std::string command;
  std::vector<std::string> args;
  std::uint64_t seed = 0;
  std::string config_json;  // empty when the command takes no config
  std::map<std::string, std::string> inputs;   // path -> blob hash
  std::map<std::string, std::string> outputs;  // file name -> blob hash
};

/// Hashes the listed files (outputs relative to `dir`) and writes dir/manifest.json.
void write_manifest(const std::filesystem::path& dir, Manifest m, const std::vector<std::filesystem::path>& inputs,
                    const std::vector<std::string>& outputs);

/// git_blob_hash of a file's bytes.
std::string file_hash(const std::filesystem::path& path);

}  // namespace mail::harness
