#include "mail/nav/grid.hpp"

#include <deque>
#include <string>

#include "mail/core/error.hpp"

namespace mail::nav {

namespace {

constexpr int kCells = kGridSize * kGridSize;

std::string cell_string(Cell c) { return "(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")"; }

}  // namespace

std::string_view action_name(Action a) {
  switch (a) {
    case Action::Up:
      return "up";
    case Action::Down:
      return "down";
    case Action::Left:
      return "left";
    case Action::Right:
      return "right";
  }
  return "?";
}

GridLayout::GridLayout() : passages_{Cell{3, 1}, Cell{1, 3}, Cell{3, 5}, Cell{5, 3}} {
  for (int i = 0; i < kGridSize; ++i) {
    walls_[cell_index({kWallIndex, i})] = true;
    walls_[cell_index({i, kWallIndex})] = true;
  }
  for (Cell p : passages_) walls_[cell_index(p)] = false;

  for (int i = 0; i < kCells; ++i) {
    const Cell c = cell_at(i);
    if (walls_[i]) continue;
    open_.push_back(c);
    if (c.row == kWallIndex || c.col == kWallIndex) continue;  // passages belong to no room
    const bool bottom = c.row > kWallIndex, right = c.col > kWallIndex;
    const Room r = bottom ? (right ? Room::BottomRight : Room::BottomLeft) : (right ? Room::TopRight : Room::TopLeft);
    rooms_[static_cast<std::size_t>(r)].push_back(c);
  }

  dist_.assign(kCells * kCells, -1);
  for (Cell src : open_) {
    int* row = &dist_[cell_index(src) * kCells];
    std::deque<Cell> frontier{src};
    row[cell_index(src)] = 0;
    while (!frontier.empty()) {
      const Cell c = frontier.front();
      frontier.pop_front();
      for (Action a : kActions) {
        const Cell n = offset(c, a);
        if (!is_open(n) || row[cell_index(n)] >= 0) continue;
        row[cell_index(n)] = row[cell_index(c)] + 1;
        frontier.push_back(n);
      }
    }
  }
}

const GridLayout& GridLayout::four_rooms() {
  static const GridLayout layout;
  return layout;
}

bool GridLayout::in_room(Cell c, Room r) const {
  for (Cell x : room_cells(r))
    if (x == c) return true;
  return false;
}

int GridLayout::distance(Cell from, Cell to) const {
  if (!is_open(from) || !is_open(to)) {
    throw UsageError("shortest_distance: " + cell_string(from) + " -> " + cell_string(to) +
                     " involves a wall or out-of-bounds cell");
  }
  const int d = dist_[cell_index(from) * kCells + cell_index(to)];
  if (d < 0) throw ConfigError("cells " + cell_string(from) + " and " + cell_string(to) + " are not connected");
  return d;
}

int shortest_distance(Cell from, Cell to, const GridLayout& layout) { return layout.distance(from, to); }

}  // namespace mail::nav
