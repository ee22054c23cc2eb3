#include "mail/models/linkage.hpp"

#include <nlohmann/json.hpp>

#include "mail/core/binary_io.hpp"
#include "mail/core/error.hpp"

namespace mail::models {

void write_linkage(const std::filesystem::path& path, const std::vector<LinkEntry>& entries) {
  nlohmann::json doc;
  doc["format"] = "mail-linkage";
  doc["version"] = 1;
  doc["networks"] = nlohmann::json::array();
  for (const auto& e : entries) {
    doc["networks"].push_back({{"network", e.network}, {"file", e.file}, {"encoder", e.encoder}});
  }
  write_file(path, doc.dump(2) + "\n");
}

std::vector<LinkEntry> read_linkage(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("linkage manifest " + path.string() + ": " + e.what());
  }
  if (doc.value("format", "") != "mail-linkage") throw ConfigError("not a linkage manifest: " + path.string());
  std::vector<LinkEntry> out;
  for (const auto& n : doc.at("networks")) {
    out.push_back({n.at("network").get<std::string>(), n.at("file").get<std::string>(),
                   n.at("encoder").get<std::string>()});
  }
  return out;
}

}  // namespace mail::models
