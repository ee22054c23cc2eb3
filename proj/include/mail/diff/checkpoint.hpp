#pragma once

// Parameter checkpoint file:
//   "MAILPARM" | version u32 | { name_len u32 | name | dtype u8 | rank u32 |
//                                dims u64[rank] | values[prod(dims)] }*
// Little-endian throughout; records run to end of file.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mail/diff/params.hpp"

namespace mail::diff {

inline constexpr std::string_view kCheckpointMagic = "MAILPARM";
inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class DType : std::uint8_t { Float32 = 1, Float64 = 2 };

struct CheckpointRecord {
  std::string name;
  std::variant<Tensor<float>, Tensor<double>> tensor;
  std::uint64_t offset = 0;  // byte span of the record in the file
  std::uint64_t end = 0;
};

template <class T>
std::string encode_checkpoint(const ParamSet<T>& params);

std::vector<CheckpointRecord> decode_checkpoint(std::string_view bytes);

/// Copies checkpoint values into existing leaves, keeping their identity.
/// Every parameter in `params` must be present with matching dtype and shape;
/// anything else (missing, unknown or repeated records) is a FormatError.
template <class T>
void assign_checkpoint(ParamSet<T>& params, const std::vector<CheckpointRecord>& records);

template <class T>
void save_checkpoint(const ParamSet<T>& params, const std::filesystem::path& path);

template <class T>
void load_checkpoint(ParamSet<T>& params, const std::filesystem::path& path);

}  // namespace mail::diff
