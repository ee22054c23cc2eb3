#pragma once

// Manifest describing which checkpoint files make up a trained bundle and
// which networks read a shared encoder.

#include <filesystem>
#include <string>
#include <vector>

namespace mail::models {

struct LinkEntry {
  std::string network;  // e.g. "actor"
  std::string file;     // checkpoint file relative to the manifest
  std::string encoder;  // network whose encoder this one reads, or "" if none
  friend bool operator==(const LinkEntry&, const LinkEntry&) = default;
};

void write_linkage(const std::filesystem::path& path, const std::vector<LinkEntry>& entries);
std::vector<LinkEntry> read_linkage(const std::filesystem::path& path);

}  // namespace mail::models
