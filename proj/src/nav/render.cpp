#include "mail/nav/render.hpp"

#include <algorithm>
#include <sstream>

#include "mail/core/error.hpp"

namespace mail::nav {

namespace {

constexpr float kWallGrey = 0.5f;
constexpr std::size_t kPlane = kImageSize * kImageSize;

void fill_cell(std::span<float> out, Cell c, int channel, float value) {
  const int y0 = kBorderPixels + c.row * kCellPixels;
  const int x0 = kBorderPixels + c.col * kCellPixels;
  float* plane = out.data() + channel * kPlane;
  for (int y = y0; y < y0 + kCellPixels; ++y)
    for (int x = x0; x < x0 + kCellPixels; ++x) plane[y * kImageSize + x] += value;
}

}  // namespace

void render_into(const EnvState& state, std::span<float> out) {
  if (out.size() != kObservationSize) throw UsageError("render_into: buffer must hold 4096 values");
  std::fill(out.begin(), out.end(), 0.0f);
  const auto& layout = GridLayout::four_rooms();
  for (int ch = 0; ch < 3; ++ch) {
    float* plane = out.data() + ch * kPlane;
    for (int y = 0; y < kImageSize; ++y)
      for (int x = 0; x < kImageSize; ++x) {
        const bool border = y < kBorderPixels || x < kBorderPixels || y >= kImageSize - kBorderPixels ||
                            x >= kImageSize - kBorderPixels;
        if (border) plane[y * kImageSize + x] = kWallGrey;
      }
  }
  for (int i = 0; i < kGridSize * kGridSize; ++i) {
    const Cell c = cell_at(i);
    if (!layout.is_wall(c)) continue;
    for (int ch = 0; ch < 3; ++ch) fill_cell(out, c, ch, kWallGrey);
  }
  fill_cell(out, state.agent, 0, 1.0f);
  fill_cell(out, state.key, 1, 1.0f);
  fill_cell(out, state.car, 2, 1.0f);
  if (state.has_key) std::fill(out.begin() + 3 * kPlane, out.end(), 1.0f);
}

Observation render(const EnvState& state) {
  Observation obs(kObservationSize);
  render_into(state, obs);
  return obs;
}

std::uint32_t observation_key(const EnvState& s) {
  constexpr std::uint32_t kCells = kGridSize * kGridSize;
  const auto idx = [](Cell c) { return static_cast<std::uint32_t>(cell_index(c)); };
  return ((idx(s.agent) * kCells + idx(s.key)) * kCells + idx(s.car)) * 2 + (s.has_key ? 1 : 0);
}

std::string observation_csv(const Observation& obs) {
  std::ostringstream os;
  for (std::size_t i = 0; i < obs.size(); ++i) os << (i ? "," : "") << obs[i];
  os << '\n';
  return os.str();
}

}  // namespace mail::nav
