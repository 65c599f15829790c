#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "vantage/geometry.hpp"

namespace vantage {

struct GridIndex {
  int ix = 0;
  int iy = 0;
  int iz = 0;

  int& operator[](int axis) { return axis == 0 ? ix : axis == 1 ? iy : iz; }
  int operator[](int axis) const { return axis == 0 ? ix : axis == 1 ? iy : iz; }
  friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

/// Dense boolean occupancy over an axis-aligned block of cubic voxels.
/// Voxel (i, j, k) spans origin + [i, i+1) * resolution along each axis.
class VoxelGrid3 {
 public:
  VoxelGrid3() = default;
  VoxelGrid3(const Vec3& origin, double resolution, std::array<int, 3> dims)
      : origin_(origin), resolution_(resolution), dims_(dims) {
    if (!(resolution > 0.0)) throw Error("voxel grid: resolution must be positive");
    for (int d : dims)
      if (d <= 0) throw Error("voxel grid: dimensions must be positive");
    bits_.resize(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
  }

  const Vec3& origin() const { return origin_; }
  double resolution() const { return resolution_; }
  const std::array<int, 3>& dims() const { return dims_; }
  std::size_t size() const { return bits_.size(); }
  double half_diagonal() const { return 0.5 * std::sqrt(3.0) * resolution_; }

  AxisBox bounds() const {
    return {origin_, origin_ + resolution_ * Vec3(dims_[0], dims_[1], dims_[2])};
  }

  bool in_bounds(const GridIndex& i) const {
    return i.ix >= 0 && i.iy >= 0 && i.iz >= 0 && i.ix < dims_[0] && i.iy < dims_[1] && i.iz < dims_[2];
  }

  std::size_t linear(const GridIndex& i) const {
    return (static_cast<std::size_t>(i.iz) * dims_[1] + i.iy) * dims_[0] + i.ix;
  }

  GridIndex unravel(std::size_t n) const {
    GridIndex i;
    i.ix = static_cast<int>(n % dims_[0]);
    n /= dims_[0];
    i.iy = static_cast<int>(n % dims_[1]);
    i.iz = static_cast<int>(n / dims_[1]);
    return i;
  }

  /// Unclamped floor index; may be out of bounds.
  GridIndex raw_index(const Vec3& p) const {
    const Vec3 q = (p - origin_) / resolution_;
    return {static_cast<int>(std::floor(q.x())), static_cast<int>(std::floor(q.y())),
            static_cast<int>(std::floor(q.z()))};
  }

  std::optional<GridIndex> index_of(const Vec3& p) const {
    GridIndex i = raw_index(p);
    if (!in_bounds(i)) return std::nullopt;
    return i;
  }

  Vec3 center_of(const GridIndex& i) const {
    return origin_ + resolution_ * Vec3(i.ix + 0.5, i.iy + 0.5, i.iz + 0.5);
  }

  bool occupied(const GridIndex& i) const { return bits_.test(linear(i)); }
  bool occupied_linear(std::size_t n) const { return bits_.test(n); }
  void set(const GridIndex& i, bool value = true) { bits_.set(linear(i), value); }

  std::size_t occupied_count() const { return bits_.count(); }

  template <class F>
  void for_each_occupied(F&& f) const {
    for (auto n = bits_.find_first(); n != boost::dynamic_bitset<>::npos; n = bits_.find_next(n)) f(unravel(n));
  }

  /// True iff every occupied voxel of `other` is occupied here (same layout required).
  bool contains_all(const VoxelGrid3& other) const { return other.bits_.is_subset_of(bits_); }

  friend bool operator==(const VoxelGrid3& a, const VoxelGrid3& b) {
    return a.origin_ == b.origin_ && a.resolution_ == b.resolution_ && a.dims_ == b.dims_ && a.bits_ == b.bits_;
  }

 private:
  Vec3 origin_ = Vec3::Zero();
  double resolution_ = 1.0;
  std::array<int, 3> dims_{1, 1, 1};
  boost::dynamic_bitset<> bits_;
};

struct VoxelBuild {
  VoxelGrid3 grid;
  std::size_t outside = 0;  ///< points that fell outside the bounds
};

/// Marks every voxel that receives at least one point.
inline VoxelBuild build_from_points(std::span<const Vec3> points, double resolution, const AxisBox& bounds) {
  if (!(resolution > 0.0)) throw Error("build_from_points: resolution must be positive");
  if (bounds.isEmpty() || (bounds.sizes().array() <= 0.0).any())
    throw Error("build_from_points: degenerate bounds");
  std::array<int, 3> dims{};
  double cells = 1.0;
  for (int a = 0; a < 3; ++a) {
    const double n = std::max(1.0, std::ceil(bounds.sizes()[a] / resolution - 1e-9));
    cells *= n;
    if (cells > 1e9) throw Error("grid too large");
    dims[a] = static_cast<int>(n);
  }
  VoxelBuild out{VoxelGrid3(bounds.min(), resolution, dims), 0};
  for (const auto& p : points) {
    if (!bounds.contains(p)) {
      ++out.outside;
      continue;
    }
    GridIndex i = out.grid.raw_index(p);
    for (int a = 0; a < 3; ++a) i[a] = std::clamp(i[a], 0, dims[a] - 1);
    out.grid.set(i);
  }
  return out;
}

inline VoxelBuild build_from_points(const std::vector<Vec3>& points, double resolution, const AxisBox& bounds) {
  return build_from_points(std::span<const Vec3>(points), resolution, bounds);
}

namespace detail {

// Inclusive index range of voxels whose centres may fall in [lo, hi] along one axis.
inline std::pair<int, int> center_range(double lo, double hi, double origin, double res, int dim) {
  const int a = std::max(0, static_cast<int>(std::floor((lo - origin) / res - 0.5)));
  const int b = std::min(dim - 1, static_cast<int>(std::ceil((hi - origin) / res - 0.5)));
  return {a, b};
}

}  // namespace detail

/// Copy of `env` with the surface shell of each box added: a voxel is set when
/// its centre lies within half a voxel diagonal of any box face.
inline VoxelGrid3 overlay_state(const VoxelGrid3& env, std::span<const OrientedBox> boxes) {
  VoxelGrid3 out = env;
  const double reach = env.half_diagonal();
  const auto& dims = env.dims();
  const AxisBox grid_box = env.bounds();
  for (const auto& box : boxes) {
    AxisBox aabb = box.aabb();
    aabb.min().array() -= reach;
    aabb.max().array() += reach;
    if (!aabb.intersects(grid_box)) continue;
    std::array<std::pair<int, int>, 3> range;
    for (int a = 0; a < 3; ++a)
      range[a] = detail::center_range(aabb.min()[a], aabb.max()[a], env.origin()[a], env.resolution(), dims[a]);
    GridIndex i;
    for (i.iz = range[2].first; i.iz <= range[2].second; ++i.iz)
      for (i.iy = range[1].first; i.iy <= range[1].second; ++i.iy)
        for (i.ix = range[0].first; i.ix <= range[0].second; ++i.ix)
          if (box.surface_distance(env.center_of(i)) <= reach) out.set(i);
  }
  return out;
}

inline VoxelGrid3 overlay_state(const VoxelGrid3& env, const std::vector<OrientedBox>& boxes) {
  return overlay_state(env, std::span<const OrientedBox>(boxes));
}

/// Walks the voxels pierced by the segment from -> to in order (exact
/// incremental stepping). The walk starts where the segment enters the grid
/// and ends in the voxel containing `to` or where the segment leaves the grid.
/// Ties at edges and corners step x, then y, then z. `visit` returns true to stop.
template <class Visit>
void traverse(const VoxelGrid3& grid, const Vec3& from, const Vec3& to, Visit&& visit) {
  const Vec3 d = to - from;
  const AxisBox box = grid.bounds();
  double t_enter = 0.0;
  double t_exit = 1.0;
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (from[a] < box.min()[a] || from[a] > box.max()[a]) return;
      continue;
    }
    double ta = (box.min()[a] - from[a]) / d[a];
    double tb = (box.max()[a] - from[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t_enter = std::max(t_enter, ta);
    t_exit = std::min(t_exit, tb);
  }
  if (t_enter > t_exit) return;

  const auto& dims = grid.dims();
  const double res = grid.resolution();
  GridIndex cur = grid.raw_index(from + t_enter * d);
  for (int a = 0; a < 3; ++a) cur[a] = std::clamp(cur[a], 0, dims[a] - 1);
  const GridIndex last = grid.raw_index(to);

  std::array<int, 3> step{};
  Vec3 t_max;
  Vec3 t_delta;
  for (int a = 0; a < 3; ++a) {
    if (d[a] > 0.0) {
      step[a] = 1;
      t_max[a] = (grid.origin()[a] + (cur[a] + 1) * res - from[a]) / d[a];
      t_delta[a] = res / d[a];
    } else if (d[a] < 0.0) {
      step[a] = -1;
      t_max[a] = (grid.origin()[a] + cur[a] * res - from[a]) / d[a];
      t_delta[a] = -res / d[a];
    } else {
      t_max[a] = std::numeric_limits<double>::infinity();
      t_delta[a] = std::numeric_limits<double>::infinity();
    }
  }

  while (true) {
    if (visit(static_cast<const GridIndex&>(cur))) return;
    if (cur == last) return;
    int axis = 0;
    if (t_max[1] < t_max[axis]) axis = 1;
    if (t_max[2] < t_max[axis]) axis = 2;
    if (t_max[axis] > t_exit) return;
    cur[axis] += step[axis];
    if (cur[axis] < 0 || cur[axis] >= dims[axis]) return;
    t_max[axis] += t_delta[axis];
  }
}

struct RayHit {
  GridIndex index;
  Vec3 center;
};

/// First occupied voxel on the segment origin -> target, up to and including
/// the voxel that contains target. A ray starting inside an occupied voxel hits
/// that voxel.
inline std::optional<RayHit> raycast_first_hit(const VoxelGrid3& grid, const Vec3& origin, const Vec3& target) {
  std::optional<RayHit> hit;
  traverse(grid, origin, target, [&](const GridIndex& i) {
    if (!grid.occupied(i)) return false;
    hit = RayHit{i, grid.center_of(i)};
    return true;
  });
  return hit;
}

/// Planar occupancy grid; cell (i, j) spans origin + [i, i+1) x [j, j+1) * resolution.
class OccupancyGrid2 {
 public:
  OccupancyGrid2() = default;
  OccupancyGrid2(const Vec2& origin, double resolution, int nx, int ny)
      : origin_(origin), resolution_(resolution), nx_(nx), ny_(ny) {
    if (!(resolution > 0.0)) throw Error("2D grid: resolution must be positive");
    if (nx <= 0 || ny <= 0) throw Error("2D grid: dimensions must be positive");
    bits_.resize(static_cast<std::size_t>(nx) * ny);
  }

  const Vec2& origin() const { return origin_; }
  double resolution() const { return resolution_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < nx_ && y < ny_; }
  std::size_t linear(int x, int y) const { return static_cast<std::size_t>(y) * nx_ + x; }
  bool occupied(int x, int y) const { return bits_.test(linear(x, y)); }
  void set(int x, int y, bool value = true) { bits_.set(linear(x, y), value); }
  std::size_t occupied_count() const { return bits_.count(); }

  Vec2 center_of(int x, int y) const { return origin_ + resolution_ * Vec2(x + 0.5, y + 0.5); }
  std::array<int, 2> cell_of(const Vec2& p) const {
    const Vec2 q = (p - origin_) / resolution_;
    return {static_cast<int>(std::floor(q.x())), static_cast<int>(std::floor(q.y()))};
  }

  friend bool operator==(const OccupancyGrid2& a, const OccupancyGrid2& b) {
    return a.origin_ == b.origin_ && a.resolution_ == b.resolution_ && a.nx_ == b.nx_ && a.ny_ == b.ny_ &&
           a.bits_ == b.bits_;
  }

 private:
  Vec2 origin_ = Vec2::Zero();
  double resolution_ = 1.0;
  int nx_ = 1;
  int ny_ = 1;
  boost::dynamic_bitset<> bits_;
};

/// Column-wise OR over voxels whose centre height lies in [z_min, z_max].
inline OccupancyGrid2 project_to_2d(const VoxelGrid3& grid, double z_min, double z_max) {
  if (!(z_min < z_max)) throw Error("project_to_2d: z_min must be below z_max");
  const auto& dims = grid.dims();
  OccupancyGrid2 out(grid.origin().head<2>(), grid.resolution(), dims[0], dims[1]);
  GridIndex i;
  for (i.iz = 0; i.iz < dims[2]; ++i.iz) {
    const double zc = grid.center_of(i).z();
    if (zc < z_min || zc > z_max) continue;
    for (i.iy = 0; i.iy < dims[1]; ++i.iy)
      for (i.ix = 0; i.ix < dims[0]; ++i.ix)
        if (grid.occupied(i)) out.set(i.ix, i.iy);
  }
  return out;
}

/// True iff any occupied voxel centre lies inside `box` (closed).
inline bool region_occupied(const VoxelGrid3& grid, const AxisBox& box) {
  if (box.isEmpty()) return false;
  const auto& dims = grid.dims();
  std::array<std::pair<int, int>, 3> range;
  for (int a = 0; a < 3; ++a) {
    range[a] = detail::center_range(box.min()[a], box.max()[a], grid.origin()[a], grid.resolution(), dims[a]);
    if (range[a].first > range[a].second) return false;
  }
  GridIndex i;
  for (i.iz = range[2].first; i.iz <= range[2].second; ++i.iz)
    for (i.iy = range[1].first; i.iy <= range[1].second; ++i.iy)
      for (i.ix = range[0].first; i.ix <= range[0].second; ++i.ix)
        if (grid.occupied(i) && box.contains(grid.center_of(i))) return true;
  return false;
}

inline std::vector<Vec3> occupied_centers(const VoxelGrid3& grid) {
  std::vector<Vec3> out;
  out.reserve(grid.occupied_count());
  grid.for_each_occupied([&](const GridIndex& i) { out.push_back(grid.center_of(i)); });
  return out;
}

}  // namespace vantage
