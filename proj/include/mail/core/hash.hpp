#pragma once

#include <string>
#include <string_view>

namespace mail {

/// Lower-case hex SHA-1 of `data`.
std::string sha1_hex(std::string_view data);
/// Git blob id: SHA-1 of "blob <size>\0" + data.
std::string git_blob_hash(std::string_view data);

}  // namespace mail
