#include "mail/diff/checkpoint.hpp"

#include "mail/core/binary_io.hpp"

namespace mail::diff {

namespace {

template <class T>
constexpr DType dtype_of() {
  return std::is_same_v<T, float> ? DType::Float32 : DType::Float64;
}

template <class T>
void write_values(ByteWriter& w, std::span<const T> values) {
  for (T v : values) {
    if constexpr (std::is_same_v<T, float>) {
      w.f32(v);
    } else {
      w.f64(v);
    }
  }
}

template <class T>
Tensor<T> read_tensor(ByteReader& r, Shape shape) {
  const std::size_t count = shape_size(shape);
  if (count > r.remaining() / sizeof(T)) {
    throw FormatError("truncated file while reading tensor values", r.offset());
  }
  std::vector<T> values(count);
  for (auto& v : values) {
    if constexpr (std::is_same_v<T, float>) {
      v = r.f32("tensor value");
    } else {
      v = r.f64("tensor value");
    }
  }
  return Tensor<T>(std::move(shape), std::move(values));
}

}  // namespace

template <class T>
std::string encode_checkpoint(const ParamSet<T>& params) {
  ByteWriter w;
  w.bytes(kCheckpointMagic);
  w.u32(kCheckpointVersion);
  for (const auto& e : params.entries()) {
    w.u32(static_cast<std::uint32_t>(e.name.size()));
    w.bytes(e.name);
    w.u8(static_cast<std::uint8_t>(dtype_of<T>()));
    const auto& shape = e.var.shape();
    w.u32(static_cast<std::uint32_t>(shape.size()));
    for (auto d : shape) w.u64(d);
    write_values<T>(w, e.var.data());
  }
  return w.take();
}

std::vector<CheckpointRecord> decode_checkpoint(std::string_view bytes) {
  ByteReader r(bytes);
  r.expect_magic(kCheckpointMagic);
  const auto version_at = r.offset();
  const auto version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version), version_at);
  }
  std::vector<CheckpointRecord> out;
  while (!r.at_end()) {
    CheckpointRecord rec;
    rec.offset = r.offset();
    const auto name_len = r.u32("name length");
    if (name_len == 0 || name_len > 4096) throw FormatError("implausible parameter name length", r.offset() - 4);
    rec.name = std::string(r.bytes(name_len, "parameter name"));
    const auto tag_at = r.offset();
    const auto tag = r.u8("dtype tag");
    const auto rank_at = r.offset();
    const auto rank = r.u32("rank");
    if (rank > 8) throw FormatError("implausible tensor rank " + std::to_string(rank), rank_at);
    Shape shape(rank);
    for (auto& d : shape) {
      const auto dim_at = r.offset();
      d = r.u64("dimension");
      if (d == 0 || d > (std::uint64_t{1} << 32)) throw FormatError("invalid tensor dimension", dim_at);
    }
    switch (static_cast<DType>(tag)) {
      case DType::Float32:
        rec.tensor = read_tensor<float>(r, std::move(shape));
        break;
      case DType::Float64:
        rec.tensor = read_tensor<double>(r, std::move(shape));
        break;
      default:
        throw FormatError("unknown dtype tag " + std::to_string(tag), tag_at);
    }
    rec.end = r.offset();
    out.push_back(std::move(rec));
  }
  return out;
}

template <class T>
void assign_checkpoint(ParamSet<T>& params, const std::vector<CheckpointRecord>& records) {
  const std::uint64_t end = records.empty() ? kCheckpointMagic.size() + 4 : records.back().end;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!params.contains(records[i].name))
      throw FormatError("checkpoint has unexpected parameter '" + records[i].name + "'", records[i].offset);
    for (std::size_t j = 0; j < i; ++j)
      if (records[j].name == records[i].name)
        throw FormatError("checkpoint repeats parameter '" + records[i].name + "'", records[i].offset);
  }
  for (const auto& e : params.entries()) {
    const CheckpointRecord* found = nullptr;
    for (const auto& rec : records)
      if (rec.name == e.name) found = &rec;
    if (!found) throw FormatError("checkpoint is missing parameter '" + e.name + "'", end);
    const auto* t = std::get_if<Tensor<T>>(&found->tensor);
    if (!t) throw FormatError("checkpoint parameter '" + e.name + "' has the wrong dtype", found->offset);
    if (t->shape() != e.var.shape()) {
      throw FormatError("checkpoint parameter '" + e.name + "' has shape " + shape_string(t->shape()) +
                            ", expected " + shape_string(e.var.shape()),
                        found->offset);
    }
  }
  for (const auto& e : params.entries()) {
    for (const auto& rec : records) {
      if (rec.name != e.name) continue;
      auto var = e.var;
      const auto& src = std::get<Tensor<T>>(rec.tensor);
      std::copy(src.data().begin(), src.data().end(), var.value().data().begin());
    }
  }
}

template <class T>
void save_checkpoint(const ParamSet<T>& params, const std::filesystem::path& path) {
  write_file(path, encode_checkpoint(params));
}

template <class T>
void load_checkpoint(ParamSet<T>& params, const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  assign_checkpoint(params, decode_checkpoint(bytes));
}

template std::string encode_checkpoint(const ParamSet<float>&);
template std::string encode_checkpoint(const ParamSet<double>&);
template void assign_checkpoint(ParamSet<float>&, const std::vector<CheckpointRecord>&);
template void assign_checkpoint(ParamSet<double>&, const std::vector<CheckpointRecord>&);
template void save_checkpoint(const ParamSet<float>&, const std::filesystem::path&);
template void save_checkpoint(const ParamSet<double>&, const std::filesystem::path&);
template void load_checkpoint(ParamSet<float>&, const std::filesystem::path&);
template void load_checkpoint(ParamSet<double>&, const std::filesystem::path&);

}  // namespace mail::diff
