#include "rmcoop/gridworld.hpp"

#include <deque>

#include "rmcoop/error.hpp"

namespace rmc {

std::string_view action_name(Action a) {
  switch (a) {
    case Action::stay: return "stay";
    case Action::up: return "up";
    case Action::down: return "down";
    case Action::left: return "left";
    case Action::right: return "right";
  }
  return "?";
}

std::array<Action, 2> perpendicular(Action a) {
  switch (a) {
    case Action::up:
    case Action::down: return {Action::left, Action::right};
    case Action::left:
    case Action::right: return {Action::up, Action::down};
    case Action::stay: break;
  }
  return {Action::stay, Action::stay};
}

GridWorld::GridWorld(int rows, int cols, const std::vector<GridPos>& walls,
                     std::vector<Region> regions, double slip_prob)
    : rows_(rows), cols_(cols), slip_prob_(slip_prob), regions_(std::move(regions)) {
  if (rows <= 0 || cols <= 0) throw InputError("grid must have positive size");
  if (!(slip_prob >= 0.0 && slip_prob <= 1.0)) throw InputError("slip_prob must lie in [0, 1]");
  if (regions_.size() > kMaxRegions) throw InputError("at most 32 regions supported");
  wall_.assign(num_cells(), 0);
  for (auto w : walls) {
    if (!in_bounds(w)) throw InputError("wall cell out of bounds");
    wall_[cell(w)] = 1;
  }
  region_of_.assign(num_cells(), -1);
  for (std::size_t r = 0; r < regions_.size(); ++r) {
    for (auto c : regions_[r].cells) {
      if (c >= num_cells()) throw InputError("region " + regions_[r].name + " cell out of bounds");
      if (wall_[c]) throw InputError("region " + regions_[r].name + " contains a wall cell");
      if (region_of_[c] >= 0 && region_of_[c] != static_cast<int>(r))
        throw InputError("regions " + regions_[region_of_[c]].name + " and " + regions_[r].name +
                         " overlap");
      region_of_[c] = static_cast<int>(r);
    }
  }
  for (LocalState s = 0; s < num_cells(); ++s)
    if (!wall_[s]) free_.push_back(s);

  static constexpr int dr[] = {0, -1, 1, 0, 0};
  static constexpr int dc[] = {0, 0, 0, -1, 1};
  move_.resize(num_cells() * kNumActions);
  for (LocalState s = 0; s < num_cells(); ++s) {
    GridPos p = pos(s);
    for (std::size_t a = 0; a < kNumActions; ++a) {
      GridPos q{p.row + dr[a], p.col + dc[a]};
      move_[s * kNumActions + a] = (in_bounds(q) && !wall_[cell(q)]) ? cell(q) : s;
    }
  }
}

std::vector<int> GridWorld::distances(LocalState from, RegionMask closed) const {
  std::vector<int> dist(num_cells(), -1);
  if (from >= num_cells() || wall_[from]) return dist;
  std::deque<LocalState> queue{from};
  dist[from] = 0;
  while (!queue.empty()) {
    LocalState s = queue.front();
    queue.pop_front();
    for (auto a : kActions) {
      LocalState t = move(s, a, closed);
      if (dist[t] < 0) {
        dist[t] = dist[s] + 1;
        queue.push_back(t);
      }
    }
  }
  return dist;
}

LocalState step_agent(const GridWorld& grid, LocalState s, Action a, RegionMask closed, Rng& rng) {
  if (a == Action::stay) return s;
  const double slip = grid.slip_prob();
  if (slip > 0) {
    double x = rng.uniform();
    if (x < slip) a = perpendicular(a)[x < 0.5 * slip ? 0 : 1];
  }
  return grid.move(s, a, closed);
}

void step_team(const GridWorld& grid, std::span<const LocalState> s, std::span<const Action> a,
               std::span<const RegionMask> closed, std::span<Rng> rngs, std::span<LocalState> out) {
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = step_agent(grid, s[i], a[i], closed[i], rngs[i]);
}

GateTable::GateTable(const GridWorld& grid, const RewardMachine& rm)
    : closed_(rm.num_states(), 0) {
  const auto& regions = grid.regions();
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const int gate = rm.alphabet().position(regions[r].gate);
    std::vector<char> seen(rm.num_states(), 0);
    std::deque<StateIndex> queue{rm.initial()};
    seen[rm.initial()] = 1;
    while (!queue.empty()) {
      StateIndex u = queue.front();
      queue.pop_front();
      closed_[u] |= RegionMask{1} << r;
      for (std::size_t p = 0; p < rm.alphabet().size(); ++p) {
        if (static_cast<int>(p) == gate) continue;
        StateIndex v = rm.next(u, p);
        if (v != kNoState && !seen[v]) {
          seen[v] = 1;
          queue.push_back(v);
        }
      }
    }
  }
}

}  // namespace rmc
