#include <gtest/gtest.h>

#include <algorithm>
#include <climits>
#include <map>
#include <queue>
#include <set>

#include "mail/core/error.hpp"
#include "mail/core/rng.hpp"
#include "mail/nav/env.hpp"
#include "mail/nav/render.hpp"

using namespace mail;
using namespace mail::nav;

namespace {

const GridLayout& L() { return GridLayout::four_rooms(); }

// Unit-weight Dijkstra over the open-cell graph, written without the BFS table.
int dijkstra(Cell from, Cell to) {
  std::map<Cell, int> dist;
  using Item = std::pair<int, Cell>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[from] = 0;
  pq.push({0, from});
  while (!pq.empty()) {
    auto [d, c] = pq.top();
    pq.pop();
    if (d > dist[c]) continue;
    if (c == to) return d;
    const Cell nbrs[] = {{c.row - 1, c.col}, {c.row + 1, c.col}, {c.row, c.col - 1}, {c.row, c.col + 1}};
    for (Cell n : nbrs) {
      if (n.row < 0 || n.col < 0 || n.row >= 7 || n.col >= 7) continue;
      const bool wall = (n.row == 3 || n.col == 3) &&
                        !(n == Cell{3, 1} || n == Cell{1, 3} || n == Cell{3, 5} || n == Cell{5, 3});
      if (wall) continue;
      auto it = dist.find(n);
      if (it == dist.end() || d + 1 < it->second) {
        dist[n] = d + 1;
        pq.push({d + 1, n});
      }
    }
  }
  return -1;
}

std::vector<EnvState> reachable_states() {
  std::vector<EnvState> out;
  for (Cell a : L().open_cells())
    for (Cell c : L().room_cells(Room::BottomRight)) {
      for (Cell k : L().room_cells(Room::TopLeft)) {
        if (a != k) out.push_back(make_state(a, k, c, false));
        out.push_back(make_state(a, k, c, true));
      }
    }
  return out;
}

}  // namespace

TEST(GridLayout, FourRoomsOfNineCellsAndFourPassages) {
  EXPECT_EQ(L().open_cells().size(), 40u);
  for (Room r : {Room::TopLeft, Room::TopRight, Room::BottomLeft, Room::BottomRight})
    EXPECT_EQ(L().room_cells(r).size(), 9u);
  for (Cell p : L().passages()) EXPECT_TRUE(L().is_open(p));
  int wall_cells = 0;
  for (int i = 0; i < 49; ++i) wall_cells += L().is_wall(cell_at(i));
  EXPECT_EQ(wall_cells, 9);
}

TEST(GridLayout, EveryOpenCellReachable) {
  for (Cell a : L().open_cells())
    for (Cell b : L().open_cells()) EXPECT_GE(shortest_distance(a, b), 0);
}

TEST(ShortestDistance, TrivialCases) {
  EXPECT_EQ(shortest_distance({0, 0}, {0, 0}), 0);
  EXPECT_EQ(shortest_distance({0, 0}, {0, 1}), 1);
  EXPECT_EQ(shortest_distance({3, 1}, {4, 1}), 1);
  EXPECT_THROW(shortest_distance({3, 3}, {0, 0}), UsageError);
}

TEST(ShortestDistance, MatchesDijkstraOnAllPairs) {
  for (Cell a : L().open_cells())
    for (Cell b : L().open_cells()) ASSERT_EQ(shortest_distance(a, b), dijkstra(a, b));
}

TEST(ShortestDistance, SymmetricAndTriangleOnRandomTriples) {
  Rng rng(99);
  const auto& open = L().open_cells();
  for (int i = 0; i < 200; ++i) {
    Cell a = open[rng.uniform_int(open.size())], b = open[rng.uniform_int(open.size())],
         c = open[rng.uniform_int(open.size())];
    EXPECT_EQ(shortest_distance(a, b), shortest_distance(b, a));
    EXPECT_LE(shortest_distance(a, c), shortest_distance(a, b) + shortest_distance(b, c));
  }
}

TEST(Reset, SameSeedSameState) { EXPECT_EQ(reset(7), reset(7)); }

TEST(Reset, ThousandResetsRespectRoomsAndCoverAgentCells) {
  std::set<Cell> agents;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto st = reset(s);
    EXPECT_TRUE(L().in_room(st.key, Room::TopLeft));
    EXPECT_TRUE(L().in_room(st.car, Room::BottomRight));
    EXPECT_TRUE(L().is_open(st.agent));
    EXPECT_EQ(st.t, 0);
    EXPECT_EQ(st.d1, st.has_key ? 0 : shortest_distance(st.agent, st.key));
    EXPECT_EQ(st.d2, shortest_distance(st.key, st.car));
    agents.insert(st.agent);
  }
  EXPECT_EQ(agents, std::set<Cell>(L().open_cells().begin(), L().open_cells().end()));
}

TEST(Step, WallMoveKeepsPositionAndCostsOne) {
  const auto s = make_state({2, 2}, {0, 0}, {6, 6}, false);
  const auto r = step(s, Action::Right);  // (2,3) is wall
  EXPECT_EQ(r.state.agent, s.agent);
  EXPECT_EQ(r.reward, -1.0);
  EXPECT_FALSE(r.done);
  const auto border = step(make_state({0, 1}, {0, 0}, {6, 6}, false), Action::Up);
  EXPECT_EQ(border.state.agent, (Cell{0, 1}));
}

TEST(Step, NeverReachingKeyReturnsMinusHundred) {
  auto s = make_state({6, 6}, {0, 0}, {4, 4}, false);
  double ret = 0;
  int n = 0;
  while (!is_done(s)) {
    auto r = step(s, Action::Down);
    ret += r.reward;
    s = r.state;
    ++n;
  }
  EXPECT_EQ(n, 100);
  EXPECT_EQ(ret, -100.0);
  EXPECT_THROW(step(s, Action::Up), UsageError);
}

TEST(Step, IsPure) {
  const auto s = reset(3);
  for (Action a : kActions) EXPECT_EQ(step(s, a).state, step(s, a).state);
}

TEST(Step, RewardDecompositionOnRandomSuccessfulEpisodes) {
  Rng rng(5);
  int successes = 0;
  for (std::uint64_t e = 0; e < 3000; ++e) {
    auto s = reset(derive_seed(11, e));
    const int d1 = s.d1, d2 = s.d2;
    double ret = 0;
    int len = 0;
    while (!is_done(s)) {
      auto r = step(s, kActions[rng.uniform_int(4)]);
      ret += r.reward;
      s = r.state;
      ++len;
    }
    if (is_success(s)) {
      ++successes;
      EXPECT_EQ(ret, -len + d1 + d2 + 1);
    }
  }
  EXPECT_GT(successes, 0);
}

TEST(Render, ShapeRangeAndDeterminism) {
  const auto s = reset(1);
  const auto a = render(s), b = render(s);
  ASSERT_EQ(a.size(), 32u * 32u * 4u);
  EXPECT_EQ(a, b);
  for (float v : a) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(Render, HasKeyOnlyChangesFlagPlane) {
  const auto s = make_state({5, 0}, {1, 1}, {6, 6}, false);
  auto held = s;
  held.has_key = true;
  const auto a = render(s), b = render(held);
  const std::size_t plane = 32 * 32;
  EXPECT_TRUE(std::equal(a.begin(), a.begin() + 3 * plane, b.begin()));
  for (std::size_t i = 3 * plane; i < 4 * plane; ++i) {
    EXPECT_EQ(a[i], 0.0f);
    EXPECT_EQ(b[i], 1.0f);
  }
}

TEST(Render, InjectiveOnReachableStates) {
  const auto states = reachable_states();
  EXPECT_EQ(states.size(), 40u * 81u * 2u - 81u);
  std::set<std::vector<float>> images;
  std::set<std::uint32_t> keys;
  for (const auto& s : states) {
    images.insert(render(s));
    keys.insert(observation_key(s));
  }
  EXPECT_EQ(images.size(), states.size());
  EXPECT_EQ(keys.size(), states.size());
}

TEST(Render, CsvHas4096Values) {
  const auto csv = observation_csv(render(reset(2)));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), ','), 4095);
}
