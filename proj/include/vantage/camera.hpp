#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "vantage/geometry.hpp"
#include "vantage/voxel.hpp"

namespace vantage {

struct CameraIntrinsics {
  double vertical_fov = deg2rad(58.0);    ///< radians
  double horizontal_fov = deg2rad(87.0);  ///< radians
  double max_range = 10.0;                ///< meters

  void validate() const {
    if (!(vertical_fov > 0.0 && vertical_fov < kPi)) throw Error("camera: vertical FOV must be in (0, pi)");
    if (!(horizontal_fov > 0.0 && horizontal_fov < kPi)) throw Error("camera: horizontal FOV must be in (0, pi)");
    if (!(max_range > 0.0)) throw Error("camera: max range must be positive");
  }
};

/// Built-in intrinsics presets. "d435-depth" is the RealSense D435 depth stream
/// (87 x 58 degrees, 10 m).
inline const std::map<std::string, CameraIntrinsics>& camera_presets() {
  static const std::map<std::string, CameraIntrinsics> presets{
      {"d435-depth", {deg2rad(58.0), deg2rad(87.0), 10.0}},
      {"d435-rgb", {deg2rad(42.0), deg2rad(69.0), 10.0}},
  };
  return presets;
}

inline CameraIntrinsics camera_preset(const std::string& name) {
  const auto& p = camera_presets();
  auto it = p.find(name);
  if (it == p.end()) throw Error("unknown camera preset '" + name + "'");
  return it->second;
}

/// Camera at pose.position() looking along its local +z; local x spans the
/// horizontal FOV, local y the vertical one.
struct CameraView {
  Pose3 pose;
  CameraIntrinsics intrinsics;

  const Vec3& position() const { return pose.position(); }
  Vec3 forward() const { return pose.rotation().col(2); }
};

/// Rectangular pyramid with apex at the camera, clipped at max range.
inline bool contains_point(const CameraView& view, const Vec3& p) {
  const Vec3 q = view.pose.rotation().transpose() * (p - view.pose.position());
  if (!(q.z() > 0.0)) return false;
  if (std::abs(std::atan2(q.x(), q.z())) > 0.5 * view.intrinsics.horizontal_fov) return false;
  if (std::abs(std::atan2(q.y(), q.z())) > 0.5 * view.intrinsics.vertical_fov) return false;
  return q.norm() <= view.intrinsics.max_range;
}

/// 1 if p is in the frustum and the ray from the camera either reaches p's voxel
/// unobstructed or first hits a voxel whose centre is within epsilon of p.
inline int point_visibility(const CameraView& view, const VoxelGrid3& grid, const Vec3& p, double epsilon) {
  if (!contains_point(view, p)) return 0;
  const auto hit = raycast_first_hit(grid, view.position(), p);
  if (!hit) return 1;
  return (p - hit->center).norm() <= epsilon ? 1 : 0;
}

/// Per-point visibility from one view, bit k for point k.
inline boost::dynamic_bitset<> visibility_mask(const CameraView& view, const VoxelGrid3& grid,
                                               std::span<const Vec3> points, double epsilon) {
  boost::dynamic_bitset<> mask(points.size());
  for (std::size_t k = 0; k < points.size(); ++k)
    if (point_visibility(view, grid, points[k], epsilon)) mask.set(k);
  return mask;
}

/// Fraction of points visible from at least one view.
inline double object_visibility(std::span<const CameraView> views, const VoxelGrid3& grid,
                                std::span<const Vec3> points, double epsilon) {
  if (points.empty()) throw Error("object_visibility: empty point set");
  boost::dynamic_bitset<> seen(points.size());
  for (const auto& v : views) seen |= visibility_mask(v, grid, points, epsilon);
  return static_cast<double>(seen.count()) / static_cast<double>(points.size());
}

/// Mean per-state object visibility over a trajectory.
inline double avg_visibility(std::span<const CameraView> views, std::span<const VoxelGrid3> grids,
                             std::span<const std::vector<Vec3>> point_sets, double epsilon) {
  if (grids.size() != point_sets.size())
    throw Error("avg_visibility: " + std::to_string(grids.size()) + " grids but " +
                std::to_string(point_sets.size()) + " point sets");
  if (grids.empty()) throw Error("avg_visibility: no states");
  double sum = 0.0;
  for (std::size_t i = 0; i < grids.size(); ++i) sum += object_visibility(views, grids[i], point_sets[i], epsilon);
  return sum / static_cast<double>(grids.size());
}

/// Default epsilon: 1.5 voxel diagonals.
inline double default_epsilon(double resolution) { return 1.5 * std::sqrt(3.0) * resolution; }

}  // namespace vantage
