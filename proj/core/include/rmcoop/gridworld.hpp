#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rmcoop/labeling.hpp"
#include "rmcoop/reward_machine.hpp"
#include "rmcoop/rng.hpp"

namespace rmc {

/// Action order is fixed; greedy ties break toward the lowest index.
enum class Action : std::uint8_t { stay = 0, up, down, left, right };
inline constexpr std::size_t kNumActions = 5;
inline constexpr std::array<Action, kNumActions> kActions = {Action::stay, Action::up, Action::down,
                                                             Action::left, Action::right};
std::string_view action_name(Action a);

struct GridPos {
  int row = 0;
  int col = 0;
  friend bool operator==(GridPos, GridPos) = default;
};

/// A set of cells that can only be entered once its gate event happened.
struct Region {
  std::string name;
  Event gate;
  std::vector<LocalState> cells;
};

/// Bit r set: region r is closed.
using RegionMask = std::uint32_t;
inline constexpr std::size_t kMaxRegions = 32;

/// Rectangular grid with blocked cells and gated regions. Cells are numbered
/// row-major, so LocalState = row * cols + col.
class GridWorld {
 public:
  GridWorld() = default;
  /// Throws InputError for out-of-range cells, gated walls or too many regions.
  GridWorld(int rows, int cols, const std::vector<GridPos>& walls, std::vector<Region> regions,
            double slip_prob);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t num_cells() const { return static_cast<std::size_t>(rows_) * cols_; }
  double slip_prob() const { return slip_prob_; }

  bool in_bounds(GridPos p) const { return p.row >= 0 && p.row < rows_ && p.col >= 0 && p.col < cols_; }
  LocalState cell(GridPos p) const { return static_cast<LocalState>(p.row * cols_ + p.col); }
  GridPos pos(LocalState s) const { return {static_cast<int>(s) / cols_, static_cast<int>(s) % cols_}; }
  bool is_wall(LocalState s) const { return wall_[s] != 0; }
  const std::vector<LocalState>& free_cells() const { return free_; }

  const std::vector<Region>& regions() const { return regions_; }
  /// -1 when the cell is in no region.
  int region_of(LocalState s) const { return region_of_[s]; }

  /// Destination of `a` ignoring gates and slip; `s` itself when the move
  /// leaves the grid or hits a wall.
  LocalState target(LocalState s, Action a) const {
    return move_[static_cast<std::size_t>(s) * kNumActions + static_cast<std::size_t>(a)];
  }
  /// Deterministic move including gates. Entering a closed region is
  /// blocked; an agent already inside one may move within it.
  LocalState move(LocalState s, Action a, RegionMask closed) const {
    LocalState t = target(s, a);
    int r = region_of_[t];
    return (r >= 0 && ((closed >> r) & 1u) && region_of_[s] != r) ? s : t;
  }

  /// BFS distances from `from` over free cells with the given regions
  /// closed; -1 where unreachable.
  std::vector<int> distances(LocalState from, RegionMask closed) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  double slip_prob_ = 0;
  std::vector<char> wall_;
  std::vector<LocalState> free_;
  std::vector<Region> regions_;
  std::vector<int> region_of_;
  std::vector<LocalState> move_;
};

/// The two actions perpendicular to a movement action.
std::array<Action, 2> perpendicular(Action a);

/// One agent's move: with probability 1 - slip the intended action, else one
/// of the two perpendicular moves uniformly. "stay" never slips. Blocked
/// moves (edge, wall, closed region) leave the agent in place.
LocalState step_agent(const GridWorld& grid, LocalState s, Action a, RegionMask closed, Rng& rng);

/// Componentwise step_agent; agent i draws only from rngs[i].
void step_team(const GridWorld& grid, std::span<const LocalState> s, std::span<const Action> a,
               std::span<const RegionMask> closed, std::span<Rng> rngs, std::span<LocalState> out);

/// Per RM state, the closed regions. Region r is closed in u when u can be
/// reached from the initial state without taking the gate event of r; a
/// gate outside the machine's alphabet keeps the region closed for good.
class GateTable {
 public:
  GateTable() = default;
  GateTable(const GridWorld& grid, const RewardMachine& rm);
  RegionMask closed(StateIndex u) const { return closed_[u]; }

 private:
  std::vector<RegionMask> closed_;
};

}  // namespace rmc
