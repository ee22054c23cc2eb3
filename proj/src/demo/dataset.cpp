#include "mail/demo/dataset.hpp"

#include "mail/core/binary_io.hpp"
#include "mail/core/error.hpp"
#include "mail/core/rng.hpp"
#include "mail/demo/expert.hpp"

namespace mail::demo {

std::pair<std::size_t, std::size_t> DemoDataset::episode(std::size_t e) const {
  if (e >= episode_offsets.size()) throw UsageError("episode index out of range");
  const std::size_t begin = episode_offsets[e];
  const std::size_t end = e + 1 < episode_offsets.size() ? episode_offsets[e + 1] : records.size();
  return {begin, end};
}

DemoDataset generate(std::size_t n_pairs, std::uint64_t seed) {
  if (n_pairs == 0) throw ConfigError("generate: n_pairs must be positive");
  DemoDataset ds;
  ds.seed = seed;
  for (std::uint64_t e = 0; ds.records.size() < n_pairs; ++e) {
    nav::EnvState s = nav::reset(derive_seed(seed, e));
    if (nav::is_done(s)) continue;
    ds.episode_offsets.push_back(ds.records.size());
    while (!nav::is_done(s)) {
      const nav::Action a = expert_action(s);
      ds.records.push_back({s.agent, s.key, s.car, s.has_key, a});
      s = nav::step(s, a).state;
    }
  }
  return ds;
}

ReplayResult replay_episode(const DemoDataset& ds, std::size_t e) {
  const auto [begin, end] = ds.episode(e);
  ReplayResult out;
  nav::EnvState s = ds.records[begin].state();
  out.d1 = s.d1;
  out.d2 = s.d2;
  for (std::size_t i = begin; i < end; ++i) {
    const auto& rec = ds.records[i];
    if (nav::is_done(s)) {
      out.states_match = false;
      break;
    }
    if (rec.agent != s.agent || rec.key != s.key || rec.car != s.car || rec.has_key != s.has_key) {
      out.states_match = false;
    }
    const auto r = nav::step(s, rec.action);
    out.total_return += r.reward;
    ++out.length;
    s = r.state;
  }
  out.success = nav::is_success(s);
  return out;
}

namespace {

constexpr std::size_t kRecordBytes = 8;

void put_cell(ByteWriter& w, nav::Cell c) {
  w.u8(static_cast<std::uint8_t>(c.row));
  w.u8(static_cast<std::uint8_t>(c.col));
}

nav::Cell get_cell(ByteReader& r, const char* what) {
  const int row = r.u8(what);
  const int col = r.u8(what);
  return {row, col};
}

}  // namespace

std::string encode_dataset(const DemoDataset& ds) {
  ByteWriter w;
  w.bytes(kDatasetMagic);
  w.u32(kDatasetVersion);
  w.u64(ds.seed);
  w.u64(ds.records.size());
  w.u64(ds.episode_offsets.size());
  for (auto off : ds.episode_offsets) w.u64(off);
  for (const auto& rec : ds.records) {
    put_cell(w, rec.agent);
    put_cell(w, rec.key);
    put_cell(w, rec.car);
    w.u8(rec.has_key ? 1 : 0);
    w.u8(static_cast<std::uint8_t>(rec.action));
  }
  return w.take();
}

DemoDataset decode_dataset(std::string_view bytes) {
  const auto& layout = nav::GridLayout::four_rooms();
  ByteReader r(bytes);
  r.expect_magic(kDatasetMagic);
  const auto version_at = r.offset();
  const auto version = r.u32("version");
  if (version != kDatasetVersion) throw FormatError("unsupported dataset version " + std::to_string(version), version_at);
  DemoDataset ds;
  ds.seed = r.u64("seed");
  const auto count = r.u64("record count");
  const auto episodes_at = r.offset();
  const auto episodes = r.u64("episode count");
  if (episodes > count || (count > 0 && episodes == 0)) {
    throw FormatError("episode count inconsistent with record count", episodes_at);
  }
  if (episodes > r.remaining() / 8 || count > r.remaining() / kRecordBytes) {
    throw FormatError("truncated file: header declares more data than present", r.offset());
  }
  ds.episode_offsets.resize(episodes);
  for (std::size_t e = 0; e < episodes; ++e) {
    const auto at = r.offset();
    ds.episode_offsets[e] = r.u64("episode offset");
    const bool ordered = e == 0 ? ds.episode_offsets[0] == 0 : ds.episode_offsets[e] > ds.episode_offsets[e - 1];
    if (!ordered || ds.episode_offsets[e] >= count) throw FormatError("invalid episode offset", at);
  }
  ds.records.resize(count);
  for (auto& rec : ds.records) {
    const auto at = r.offset();
    rec.agent = get_cell(r, "record");
    rec.key = get_cell(r, "record");
    rec.car = get_cell(r, "record");
    const auto has_key = r.u8("record");
    const auto action = r.u8("record");
    if (!layout.is_open(rec.agent) || !layout.in_room(rec.key, nav::Room::TopLeft) ||
        !layout.in_room(rec.car, nav::Room::BottomRight) || has_key > 1 || action >= nav::kNumActions) {
      throw FormatError("invalid demonstration record", at);
    }
    rec.has_key = has_key == 1;
    rec.action = static_cast<nav::Action>(action);
  }
  if (!r.at_end()) throw FormatError("trailing bytes after last record", r.offset());
  return ds;
}

void save_dataset(const DemoDataset& ds, const std::filesystem::path& path) { write_file(path, encode_dataset(ds)); }

DemoDataset load_dataset(const std::filesystem::path& path) { return decode_dataset(read_file(path)); }

}  // namespace mail::demo
