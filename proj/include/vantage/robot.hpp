#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vantage/geometry.hpp"
#include "vantage/voxel.hpp"

namespace vantage {

enum class JointKind { Fixed, Revolute, Prismatic };

struct Link {
  std::string name;
  int parent = -1;                 ///< index of an earlier link, -1 for the base frame
  Pose3 origin;                    ///< fixed transform from the parent frame
  JointKind joint = JointKind::Fixed;
  Vec3 axis = Vec3::UnitZ();       ///< unit axis in the link frame
  double lower = 0.0;
  double upper = 0.0;
  std::optional<TriMesh> geometry;  ///< in link-local coordinates
};

class KinematicChain {
 public:
  KinematicChain() = default;
  explicit KinematicChain(std::vector<Link> links) : links_(std::move(links)) { validate(); }

  const std::vector<Link>& links() const { return links_; }
  std::size_t size() const { return links_.size(); }

  std::size_t movable_count() const {
    std::size_t n = 0;
    for (const auto& l : links_) n += l.joint != JointKind::Fixed;
    return n;
  }

  std::size_t geometric_count() const {
    std::size_t n = 0;
    for (const auto& l : links_) n += l.geometry.has_value();
    return n;
  }

  std::optional<std::size_t> find(const std::string& name) const {
    for (std::size_t i = 0; i < links_.size(); ++i)
      if (links_[i].name == name) return i;
    return std::nullopt;
  }

  std::size_t index_of(const std::string& name) const {
    if (auto i = find(name)) return *i;
    throw Error("unknown link '" + name + "'");
  }

 private:
  void validate() const {
    for (std::size_t i = 0; i < links_.size(); ++i) {
      const auto& l = links_[i];
      if (l.parent >= static_cast<int>(i)) throw Error("link '" + l.name + "' must follow its parent");
      if (l.lower > l.upper) throw Error("link '" + l.name + "' has lower limit above upper limit");
      if (l.joint != JointKind::Fixed && std::abs(l.axis.norm() - 1.0) > 1e-9)
        throw Error("link '" + l.name + "' joint axis is not unit length");
      for (std::size_t j = 0; j < i; ++j)
        if (links_[j].name == l.name) throw Error("duplicate link name '" + l.name + "'");
      if (l.geometry) l.geometry->validate();
    }
  }

  std::vector<Link> links_;
};

/// Planar base pose plus one value per movable joint, in chain order.
struct JointConfig {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  std::vector<double> joints;

  Pose3 base_pose() const { return {Vec3(x, y, 0.0), rotation_from_euler(0.0, 0.0, yaw)}; }
  friend bool operator==(const JointConfig&, const JointConfig&) = default;
};

struct Trajectory {
  std::vector<JointConfig> states;
  std::size_t size() const { return states.size(); }
};

struct AttachedObject {
  TriMesh mesh;  ///< object-local frame
  std::string link;
  Pose3 grasp;   ///< link frame -> object frame
};

struct FkResult {
  std::vector<Pose3> links;
  std::optional<Pose3> object;
};

inline FkResult forward_kinematics(const KinematicChain& chain, const JointConfig& state,
                                   const AttachedObject* attached = nullptr) {
  if (state.joints.size() != chain.movable_count())
    throw Error("joint vector has " + std::to_string(state.joints.size()) + " values, chain has " +
                std::to_string(chain.movable_count()) + " movable joints");
  FkResult out;
  out.links.reserve(chain.size());
  const Pose3 base = state.base_pose();
  std::size_t q = 0;
  for (const auto& link : chain.links()) {
    const Pose3& parent = link.parent < 0 ? base : out.links[static_cast<std::size_t>(link.parent)];
    Pose3 pose = parent * link.origin;
    if (link.joint != JointKind::Fixed) {
      const double v = state.joints[q++];
      if (v < link.lower - 1e-12 || v > link.upper + 1e-12)
        throw Error("joint '" + link.name + "' value " + std::to_string(v) + " outside limits [" +
                    std::to_string(link.lower) + ", " + std::to_string(link.upper) + "]");
      if (link.joint == JointKind::Revolute)
        pose = pose * Pose3(Vec3::Zero(), Eigen::AngleAxisd(v, link.axis).toRotationMatrix());
      else
        pose = pose * Pose3::translation(v * link.axis);
    }
    out.links.push_back(pose);
  }
  if (attached) out.object = out.links[chain.index_of(attached->link)] * attached->grasp;
  return out;
}

/// Corner points of per-link OBBs over a trajectory, state-major then link then corner.
struct MotionEnvelope {
  std::vector<Vec3> points;
  std::size_t states = 0;
  std::size_t links = 0;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }

  AxisBox bounds() const {
    AxisBox b;
    for (const auto& p : points) b.extend(p);
    return b;
  }
};

/// Precomputed local-frame OBBs, so each state only needs a rigid transform.
/// A PCA box is equivariant under rigid motion, so transforming the local box
/// equals boxing the transformed mesh.
class LinkBoxes {
 public:
  LinkBoxes(const KinematicChain& chain, const AttachedObject* attached) : chain_(&chain), attached_(attached) {
    for (std::size_t i = 0; i < chain.size(); ++i)
      if (const auto& g = chain.links()[i].geometry) {
        link_ids_.push_back(i);
        local_.push_back(compute_obb(g->vertices));
      }
    if (attached) {
      if (attached->mesh.empty()) throw Error("attached object has an empty mesh");
      chain.index_of(attached->link);
      object_local_ = compute_obb(attached->mesh.vertices);
    }
  }

  std::size_t link_count() const { return link_ids_.size(); }
  bool has_object() const { return object_local_.has_value(); }

  /// Geometric links first, then the attached object when present.
  std::vector<OrientedBox> at(const JointConfig& state) const {
    FkResult fk = forward_kinematics(*chain_, state, attached_);
    std::vector<OrientedBox> out;
    out.reserve(local_.size() + 1);
    for (std::size_t k = 0; k < link_ids_.size(); ++k) out.push_back(local_[k].transformed(fk.links[link_ids_[k]]));
    if (object_local_) out.push_back(object_local_->transformed(*fk.object));
    return out;
  }

  std::optional<OrientedBox> object_at(const JointConfig& state) const {
    if (!object_local_) return std::nullopt;
    FkResult fk = forward_kinematics(*chain_, state, attached_);
    return object_local_->transformed(*fk.object);
  }

 private:
  const KinematicChain* chain_;
  const AttachedObject* attached_;
  std::vector<std::size_t> link_ids_;
  std::vector<OrientedBox> local_;
  std::optional<OrientedBox> object_local_;
};

inline MotionEnvelope motion_envelope(const KinematicChain& chain, const Trajectory& traj,
                                      const AttachedObject* attached = nullptr) {
  if (chain.geometric_count() == 0) throw Error("no geometry");
  if (traj.states.empty()) throw Error("motion_envelope: empty trajectory");
  LinkBoxes boxes(chain, attached);
  MotionEnvelope env;
  env.states = traj.size();
  env.links = boxes.link_count() + (attached ? 1 : 0);
  env.points.reserve(8 * env.states * env.links);
  for (const auto& s : traj.states)
    for (const auto& b : boxes.at(s))
      for (const auto& c : b.corners()) env.points.push_back(c);
  return env;
}

inline MotionEnvelope object_envelope(const KinematicChain& chain, const Trajectory& traj,
                                      const AttachedObject* attached) {
  if (!attached) throw Error("object_envelope: no attached object");
  if (traj.states.empty()) throw Error("object_envelope: empty trajectory");
  LinkBoxes boxes(chain, attached);
  MotionEnvelope env;
  env.states = traj.size();
  env.links = 1;
  env.points.reserve(8 * env.states);
  for (const auto& s : traj.states)
    for (const auto& c : boxes.object_at(s)->corners()) env.points.push_back(c);
  return env;
}

inline std::vector<Vec3> sample_target_points(const AttachedObject& attached, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw Error("sample_target_points: count must be at least 1");
  return sample_mesh_surface_count(attached.mesh, count, seed);
}

/// The same local samples carried through every state's object pose.
struct TargetPointSet {
  std::vector<Vec3> local_points;
  std::vector<std::vector<Vec3>> per_state;

  std::size_t states() const { return per_state.size(); }
};

inline TargetPointSet target_points_at_states(std::vector<Vec3> local_points, const KinematicChain& chain,
                                              const Trajectory& traj, const AttachedObject& attached) {
  TargetPointSet out;
  out.local_points = std::move(local_points);
  out.per_state.reserve(traj.size());
  for (const auto& s : traj.states) {
    const Pose3 object = *forward_kinematics(chain, s, &attached).object;
    std::vector<Vec3> world;
    world.reserve(out.local_points.size());
    for (const auto& p : out.local_points) world.push_back(object.apply(p));
    out.per_state.push_back(std::move(world));
  }
  return out;
}

/// Environment plus the OBB shells of every link (and the object) at one state.
inline VoxelGrid3 state_occupancy(const VoxelGrid3& env, const KinematicChain& chain, const JointConfig& state,
                                  const AttachedObject* attached = nullptr) {
  return overlay_state(env, LinkBoxes(chain, attached).at(state));
}

/// Linear interpolation between keyframes with `steps_per_segment` intervals per
/// segment. Yaw follows the shortest angular path; shared endpoints appear once.
inline Trajectory interpolate_trajectory(const std::vector<JointConfig>& keyframes, std::size_t steps_per_segment) {
  if (keyframes.size() < 2) throw Error("interpolate_trajectory: need at least 2 keyframes");
  if (steps_per_segment < 1) throw Error("interpolate_trajectory: steps_per_segment must be at least 1");
  for (const auto& k : keyframes)
    if (k.joints.size() != keyframes.front().joints.size())
      throw Error("interpolate_trajectory: keyframes have inconsistent joint counts");
  Trajectory traj;
  for (std::size_t seg = 0; seg + 1 < keyframes.size(); ++seg) {
    const auto& a = keyframes[seg];
    const auto& b = keyframes[seg + 1];
    const double dyaw = wrap_angle(b.yaw - a.yaw);
    for (std::size_t s = 0; s < steps_per_segment; ++s) {
      const double t = static_cast<double>(s) / static_cast<double>(steps_per_segment);
      JointConfig c;
      c.x = a.x + t * (b.x - a.x);
      c.y = a.y + t * (b.y - a.y);
      c.yaw = a.yaw + t * dyaw;
      c.joints.resize(a.joints.size());
      for (std::size_t j = 0; j < a.joints.size(); ++j) c.joints[j] = a.joints[j] + t * (b.joints[j] - a.joints[j]);
      traj.states.push_back(std::move(c));
    }
  }
  traj.states.push_back(keyframes.back());
  return traj;
}

}  // namespace vantage
