#pragma once

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <vector>

#include "vantage/sampler.hpp"
#include "vantage/voxel.hpp"

namespace vantage {

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Path cost as (cardinal steps, diagonal steps). Distinct counts never tie in
/// real value because sqrt(2) is irrational, so ordering by value() is exact.
struct StepCount {
  long cardinal = 0;
  long diagonal = 0;
  double value() const { return static_cast<double>(cardinal) + std::sqrt(2.0) * static_cast<double>(diagonal); }
  friend bool operator==(const StepCount&, const StepCount&) = default;
};

struct GridPath {
  std::vector<Cell> cells;
  StepCount steps;
};

namespace detail {

inline constexpr std::array<std::array<int, 2>, 8> kMoves{
    {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};

// Diagonal moves may not cut past an occupied orthogonal neighbour.
inline bool move_allowed(const OccupancyGrid2& g, int x, int y, int dx, int dy) {
  const int nx = x + dx;
  const int ny = y + dy;
  if (!g.in_bounds(nx, ny) || g.occupied(nx, ny)) return false;
  if (dx != 0 && dy != 0 && (g.occupied(x + dx, y) || g.occupied(x, y + dy))) return false;
  return true;
}

inline void check_endpoint(const OccupancyGrid2& g, const Cell& c, const char* what) {
  if (!g.in_bounds(c.x, c.y)) throw Error(std::string("shortest_path: ") + what + " outside grid");
  if (g.occupied(c.x, c.y)) throw Error(std::string("shortest_path: ") + what + " cell is occupied");
}

}  // namespace detail

/// Dijkstra over 8-connected free cells, cardinal step 1, diagonal sqrt(2).
inline std::optional<GridPath> shortest_path(const OccupancyGrid2& grid, const Cell& start, const Cell& goal) {
  detail::check_endpoint(grid, start, "start");
  detail::check_endpoint(grid, goal, "goal");
  const std::size_t n = static_cast<std::size_t>(grid.nx()) * grid.ny();
  std::vector<StepCount> best(n);
  std::vector<bool> reached(n, false);
  std::vector<bool> done(n, false);
  std::vector<std::size_t> parent(n, n);

  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const std::size_t s = grid.linear(start.x, start.y);
  const std::size_t t = grid.linear(goal.x, goal.y);
  reached[s] = true;
  open.emplace(0.0, s);
  while (!open.empty()) {
    const auto [cost, u] = open.top();
    open.pop();
    if (done[u]) continue;
    done[u] = true;
    if (u == t) break;
    const int ux = static_cast<int>(u % grid.nx());
    const int uy = static_cast<int>(u / grid.nx());
    for (const auto& [dx, dy] : detail::kMoves) {
      if (!detail::move_allowed(grid, ux, uy, dx, dy)) continue;
      const std::size_t v = grid.linear(ux + dx, uy + dy);
      if (done[v]) continue;
      StepCount cand = best[u];
      (dx != 0 && dy != 0 ? cand.diagonal : cand.cardinal) += 1;
      if (!reached[v] || cand.value() < best[v].value()) {
        reached[v] = true;
        best[v] = cand;
        parent[v] = u;
        open.emplace(cand.value(), v);
      }
    }
  }
  if (!done[t]) return std::nullopt;

  GridPath path;
  path.steps = best[t];
  for (std::size_t v = t; v != n; v = parent[v])
    path.cells.push_back({static_cast<int>(v % grid.nx()), static_cast<int>(v / grid.nx())});
  std::reverse(path.cells.begin(), path.cells.end());
  return path;
}

/// Arc length in meters: sum of distances between consecutive cell centres.
inline double path_length(const std::vector<Cell>& cells, double resolution) {
  if (cells.empty()) throw Error("path_length: empty path");
  double len = 0.0;
  for (std::size_t i = 1; i < cells.size(); ++i)
    len += resolution * std::hypot(cells[i].x - cells[i - 1].x, cells[i].y - cells[i - 1].y);
  return len;
}

/// Marks every cell whose centre lies within `radius` of an occupied cell centre.
inline OccupancyGrid2 inflate(const OccupancyGrid2& grid, double radius) {
  OccupancyGrid2 out = grid;
  const int r = static_cast<int>(std::floor(radius / grid.resolution() + 1e-9));
  if (r <= 0) return out;
  std::vector<std::array<int, 2>> disk;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      if (grid.resolution() * std::hypot(dx, dy) <= radius + 1e-12) disk.push_back({dx, dy});
  for (int y = 0; y < grid.ny(); ++y)
    for (int x = 0; x < grid.nx(); ++x) {
      if (!grid.occupied(x, y)) continue;
      for (const auto& [dx, dy] : disk)
        if (grid.in_bounds(x + dx, y + dy)) out.set(x + dx, y + dy);
    }
  return out;
}

/// Rows are robots, columns viewpoints; +inf marks an unreachable pair.
using CostMatrix = std::vector<std::vector<double>>;

struct Assignment {
  std::vector<int> robot_to_viewpoint;  ///< -1 when a robot receives no viewpoint
  double total_cost = 0.0;
};

namespace detail {

// Pads to square. Surplus robots get zero-cost dummy viewpoints (they stay
// idle); surplus viewpoints get +inf dummy robots, which makes them unassignable.
inline CostMatrix pad_square(const CostMatrix& costs, std::size_t& robots, std::size_t& viewpoints) {
  robots = costs.size();
  viewpoints = robots ? costs.front().size() : 0;
  for (const auto& row : costs)
    if (row.size() != viewpoints) throw Error("assign: ragged cost matrix");
  const std::size_t n = std::max(robots, viewpoints);
  constexpr double inf = std::numeric_limits<double>::infinity();
  CostMatrix sq(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i < robots && j < viewpoints)
        sq[i][j] = costs[i][j];
      else if (i >= robots)
        sq[i][j] = inf;
    }
  return sq;
}

// O(n^3) Hungarian algorithm with potentials (square, finite or +inf entries).
inline std::vector<int> hungarian_square(const CostMatrix& a) {
  const std::size_t n = a.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr double big = 1e18;
  auto cost = [&](std::size_t i, std::size_t j) { return std::isinf(a[i][j]) ? big : a[i][j]; };
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (std::size_t j = 1; j <= n; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = static_cast<int>(j - 1);
  return row_to_col;
}

}  // namespace detail

/// Minimum-cost robot -> viewpoint matching. Up to 8x8 (after padding) every
/// permutation is enumerated in lexicographic order, so ties resolve to the
/// lexicographically smallest mapping; larger problems use the Hungarian method.
inline Assignment assign(const CostMatrix& costs) {
  std::size_t robots = 0, viewpoints = 0;
  const CostMatrix sq = detail::pad_square(costs, robots, viewpoints);
  const std::size_t n = sq.size();
  if (n == 0) return {};
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best_perm;
  double best = std::numeric_limits<double>::infinity();
  if (n <= 8) {
    do {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += sq[i][static_cast<std::size_t>(perm[i])];
      if (total < best) {
        best = total;
        best_perm = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    best_perm = detail::hungarian_square(sq);
    best = 0.0;
    for (std::size_t i = 0; i < n; ++i) best += sq[i][static_cast<std::size_t>(best_perm[i])];
  }
  if (best_perm.empty() || !std::isfinite(best)) throw Error("viewpoint unreachable");
  Assignment out;
  out.total_cost = best;
  for (std::size_t i = 0; i < robots; ++i)
    out.robot_to_viewpoint.push_back(best_perm[i] < static_cast<int>(viewpoints) ? best_perm[i] : -1);
  return out;
}

/// 2D cell under the candidate's base position (floor convention on boundaries).
inline Cell viewpoint_goal_cell(const CandidateViewpoint& candidate, const OccupancyGrid2& grid) {
  const auto c = grid.cell_of({candidate.config.x, candidate.config.y});
  if (!grid.in_bounds(c[0], c[1])) throw Error("viewpoint base outside the navigation grid");
  if (grid.occupied(c[0], c[1])) throw Error("goal blocked");
  return {c[0], c[1]};
}

}  // namespace vantage
