#pragma once

#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vantage/camera.hpp"
#include "vantage/metrics.hpp"
#include "vantage/robot.hpp"
#include "vantage/voxel.hpp"

namespace vantage {

/// A mobile manipulator carrying a camera.
struct SupervisorModel {
  std::string name;
  KinematicChain arm;            ///< base frame sits on the floor at the robot's (x, y, yaw)
  std::string camera_link;
  Pose3 camera_mount;            ///< camera_link frame -> camera frame (+z forward)
  double footprint_radius = 0.25;
  double collision_radius = 0.45;
  double collision_height = 0.8;
  double ground_clearance = 0.05;  ///< collision box starts this far above the floor
  CameraIntrinsics intrinsics;

  void validate() const {
    if (collision_radius < footprint_radius) throw Error("supervisor: collision radius below footprint radius");
    if (!(collision_height > 0.0)) throw Error("supervisor: collision height must be positive");
    if (!(footprint_radius > 0.0)) throw Error("supervisor: footprint radius must be positive");
    if (ground_clearance < 0.0 || ground_clearance >= collision_height)
      throw Error("supervisor: ground clearance must lie in [0, collision height)");
    arm.index_of(camera_link);
    intrinsics.validate();
  }

  CameraView camera_view(const JointConfig& config) const {
    const FkResult fk = forward_kinematics(arm, config);
    return {fk.links[arm.index_of(camera_link)] * camera_mount, intrinsics};
  }

  /// Axis-aligned box enclosing the robot's collision cylinder at a base position.
  AxisBox collision_box(const JointConfig& config) const {
    return {Vec3(config.x - collision_radius, config.y - collision_radius, ground_clearance),
            Vec3(config.x + collision_radius, config.y + collision_radius, collision_height)};
  }
};

struct CandidateViewpoint {
  int id = 0;
  CameraView view;
  JointConfig config;
  double coverage = 0.0;         ///< C(v) over the motion envelope, once evaluated
  double target_coverage = 0.0;  ///< C_obj(v) over the object envelope, once evaluated
  bool collision_free = false;
};

/// Grid points at `spacing` over the bounding box of the outer polygons, kept
/// when inside some outer polygon and not inside any hole.
inline std::vector<Vec2> sample_base_positions(std::span<const Polygon2> floor, double spacing) {
  if (!(spacing > 0.0)) throw Error("sample_base_positions: spacing must be positive");
  Eigen::AlignedBox2d bbox;
  for (const auto& poly : floor)
    if (!poly.hole)
      for (const auto& v : poly.vertices) bbox.extend(v);
  std::vector<Vec2> out;
  if (!bbox.isEmpty()) {
    const auto nx = static_cast<long>(std::floor(bbox.sizes().x() / spacing + 1e-9));
    const auto ny = static_cast<long>(std::floor(bbox.sizes().y() / spacing + 1e-9));
    for (long j = 0; j <= ny; ++j)
      for (long i = 0; i <= nx; ++i) {
        const Vec2 p = bbox.min() + spacing * Vec2(static_cast<double>(i), static_cast<double>(j));
        bool inside = false;
        bool in_hole = false;
        for (const auto& poly : floor) {
          if (!point_in_polygon(p, poly)) continue;
          (poly.hole ? in_hole : inside) = true;
        }
        if (inside && !in_hole) out.push_back(p);
      }
  }
  if (out.empty()) throw Error("operational area too small");
  return out;
}

/// `count` random configurations: base drawn with replacement from the valid
/// positions, yaw uniform in [0, 2pi), arm joints uniform within limits.
inline std::vector<CandidateViewpoint> sample_candidates(const SupervisorModel& model, std::size_t count,
                                                         std::span<const Vec2> base_positions, std::uint64_t seed) {
  if (count == 0) throw Error("sample_candidates: count must be at least 1");
  if (base_positions.empty()) throw Error("sample_candidates: no base positions");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, base_positions.size() - 1);
  std::uniform_real_distribution<double> yaw(0.0, 2.0 * kPi);
  std::vector<CandidateViewpoint> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    CandidateViewpoint c;
    c.id = static_cast<int>(n);
    const Vec2& b = base_positions[pick(rng)];
    c.config.x = b.x();
    c.config.y = b.y();
    c.config.yaw = yaw(rng);
    for (const auto& link : model.arm.links())
      if (link.joint != JointKind::Fixed)
        c.config.joints.push_back(std::uniform_real_distribution<double>(link.lower, link.upper)(rng));
    c.view = model.camera_view(c.config);
    out.push_back(std::move(c));
  }
  return out;
}

/// Angle between the camera's forward axis and the direction to `target`.
/// Zero when the camera sits on the target.
inline double facing_angle(const CameraView& view, const Vec3& target) {
  const Vec3 r = target - view.position();
  if (r.norm() == 0.0) return 0.0;
  const Vec3 z = view.forward();
  return std::atan2(z.cross(r).norm(), z.dot(r));
}

/// Keep unless the camera faces more than `alpha_threshold` away from the envelope centroid.
inline bool prefilter_orientation(const CandidateViewpoint& candidate, const MotionEnvelope& envelope,
                                  double alpha_threshold) {
  return facing_angle(candidate.view, centroid(envelope.points)) <= alpha_threshold;
}

inline std::vector<CandidateViewpoint> prefilter_orientation(std::span<const CandidateViewpoint> candidates,
                                                             const MotionEnvelope& envelope, double alpha_threshold) {
  const Vec3 c = centroid(envelope.points);
  std::vector<CandidateViewpoint> kept;
  for (const auto& cand : candidates)
    if (facing_angle(cand.view, c) <= alpha_threshold) kept.push_back(cand);
  return kept;
}

/// Keeps candidates whose single-view coverage is at least `c_single`; the
/// computed coverage is cached on each kept candidate.
inline std::vector<CandidateViewpoint> filter_coverage(std::span<const CandidateViewpoint> candidates,
                                                       const MotionEnvelope& envelope, double c_single) {
  std::vector<CandidateViewpoint> kept;
  for (auto cand : candidates) {
    cand.coverage = coverage(std::span<const CameraView>(&cand.view, 1), envelope);
    if (cand.coverage >= c_single) kept.push_back(std::move(cand));
  }
  return kept;
}

/// Object-envelope coverage filter; identity when there is no object envelope.
inline std::vector<CandidateViewpoint> filter_target_coverage(std::span<const CandidateViewpoint> candidates,
                                                              const MotionEnvelope* object_envelope,
                                                              double c_single_target) {
  if (!object_envelope) return {candidates.begin(), candidates.end()};
  std::vector<CandidateViewpoint> kept;
  for (auto cand : candidates) {
    cand.target_coverage = coverage(std::span<const CameraView>(&cand.view, 1), *object_envelope);
    if (cand.target_coverage >= c_single_target) kept.push_back(std::move(cand));
  }
  return kept;
}

/// Two-stage collision check on the supervisor's bounding box. Stage 1 rejects
/// any overlap with occupied environment voxels. Stage 2 only runs when the
/// box overlaps the envelope bounds: with per-state grids, any occupied voxel
/// at any state rejects; without them, overlap alone rejects.
inline std::vector<CandidateViewpoint> filter_collision(std::span<const CandidateViewpoint> candidates,
                                                        const VoxelGrid3& env, const MotionEnvelope& envelope,
                                                        std::span<const VoxelGrid3> state_grids,
                                                        const SupervisorModel& model) {
  const AxisBox envelope_box = envelope.bounds();
  std::vector<CandidateViewpoint> kept;
  for (auto cand : candidates) {
    const AxisBox box = model.collision_box(cand.config);
    bool collides = region_occupied(env, box);
    if (!collides && box.intersects(envelope_box)) {
      if (state_grids.empty()) {
        collides = true;
      } else {
        for (const auto& g : state_grids)
          if (region_occupied(g, box)) {
            collides = true;
            break;
          }
      }
    }
    cand.collision_free = !collides;
    if (!collides) kept.push_back(std::move(cand));
  }
  return kept;
}

}  // namespace vantage
