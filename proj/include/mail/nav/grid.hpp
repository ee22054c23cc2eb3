#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace mail::nav {

inline constexpr int kGridSize = 7;
inline constexpr int kWallIndex = 3;

struct Cell {
  int row = 0;
  int col = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

inline constexpr int cell_index(Cell c) { return c.row * kGridSize + c.col; }
inline constexpr Cell cell_at(int index) { return {index / kGridSize, index % kGridSize}; }

enum class Action : std::uint8_t { Up = 0, Down = 1, Left = 2, Right = 3 };

inline constexpr std::size_t kNumActions = 4;
inline constexpr std::array<Action, kNumActions> kActions{Action::Up, Action::Down, Action::Left, Action::Right};

std::string_view action_name(Action a);

/// Neighbouring cell in direction `a`, ignoring walls and borders.
inline constexpr Cell offset(Cell c, Action a) {
  switch (a) {
    case Action::Up:
      return {c.row - 1, c.col};
    case Action::Down:
      return {c.row + 1, c.col};
    case Action::Left:
      return {c.row, c.col - 1};
    case Action::Right:
      return {c.row, c.col + 1};
  }
  return c;
}

enum class Room { TopLeft, TopRight, BottomLeft, BottomRight };

/// 7x7 four-rooms layout: a wall cross on row 3 and column 3 with one
/// passage per arm at (3,1), (1,3), (3,5) and (5,3).
class GridLayout {
 public:
  static const GridLayout& four_rooms();

  bool in_bounds(Cell c) const { return c.row >= 0 && c.col >= 0 && c.row < kGridSize && c.col < kGridSize; }
  bool is_wall(Cell c) const { return walls_[cell_index(c)]; }
  bool is_open(Cell c) const { return in_bounds(c) && !is_wall(c); }

  const std::vector<Cell>& open_cells() const { return open_; }
  const std::vector<Cell>& room_cells(Room r) const { return rooms_[static_cast<std::size_t>(r)]; }
  const std::array<Cell, 4>& passages() const { return passages_; }
  bool in_room(Cell c, Room r) const;

  /// Cell reached by moving from `c`; blocked moves stay put.
  Cell move(Cell c, Action a) const {
    const Cell next = offset(c, a);
    return is_open(next) ? next : c;
  }

  /// Precomputed BFS distance. Throws for wall cells.
  int distance(Cell from, Cell to) const;

 private:
  GridLayout();

  std::array<bool, kGridSize * kGridSize> walls_{};
  std::array<Cell, 4> passages_{};
  std::vector<Cell> open_;
  std::array<std::vector<Cell>, 4> rooms_;
  std::vector<int> dist_;
};

/// BFS geodesic step count under the 4-neighbourhood with wall blocking.
int shortest_distance(Cell from, Cell to, const GridLayout& layout = GridLayout::four_rooms());

}  // namespace mail::nav
