#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "vantage/camera.hpp"
#include "vantage/mesh_io.hpp"
#include "vantage/robot.hpp"
#include "vantage/sampler.hpp"

namespace vantage {

using Json = nlohmann::json;

namespace io {

/// Wraps a parse step so failures report the JSON pointer they happened at.
template <class F>
auto at_path(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    const std::string msg = e.what();
    if (msg.rfind(where, 0) == 0) throw;
    throw Error(where + ": " + msg);
  } catch (const nlohmann::json::exception& e) {
    throw Error(where + ": " + e.what());
  }
}

inline const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline Vec3 vec3(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw Error("expected an array of 3 numbers");
  Vec3 v(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
  if (!v.allFinite()) throw Error("non-finite value");
  return v;
}

inline Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

/// {"xyz": [..], "rpy": [..]}, both optional.
inline Pose3 pose(const Json& j) {
  const Vec3 xyz = j.contains("xyz") ? vec3(j.at("xyz")) : Vec3::Zero();
  const Vec3 rpy = j.contains("rpy") ? vec3(j.at("rpy")) : Vec3::Zero();
  return Pose3::from_xyz_rpy(xyz, rpy);
}

inline Json pose_json(const Pose3& p) { return {{"xyz", to_json(p.position())}, {"rpy", to_json(p.rpy())}}; }

inline Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace io

/// A mesh given either by file (STL/OFF) or as a box primitive, placed by an optional pose.
struct MeshRef {
  std::string file;          ///< as written in the document, relative to its directory
  std::optional<Vec3> box;   ///< full box size when no file is given
  Pose3 pose;

  static MeshRef parse(const Json& j) {
    MeshRef ref;
    if (j.is_string()) {
      ref.file = j.get<std::string>();
      return ref;
    }
    if (j.contains("file")) ref.file = j.at("file").get<std::string>();
    if (j.contains("box")) ref.box = io::vec3(j.at("box"));
    if (ref.file.empty() == !ref.box.has_value()) throw Error("mesh needs exactly one of 'file' or 'box'");
    if (ref.box && (ref.box->array() <= 0.0).any()) throw Error("box size must be positive");
    ref.pose = io::pose(j);
    return ref;
  }

  TriMesh load(const std::filesystem::path& base_dir) const {
    TriMesh m = box ? box_mesh(*box) : load_mesh(base_dir / file);
    return transform_mesh(pose, m);
  }

  /// Relative file paths are rewritten from `from_dir` to `to_dir` when both are given.
  Json to_json(const std::filesystem::path& from_dir = {}, const std::filesystem::path& to_dir = {}) const {
    Json j = io::pose_json(pose);
    if (box) {
      j["box"] = io::to_json(*box);
    } else {
      std::filesystem::path p = file;
      if (!from_dir.empty() && !to_dir.empty() && p.is_relative())
        p = std::filesystem::relative(std::filesystem::absolute(from_dir / p), std::filesystem::absolute(to_dir));
      j["file"] = p.generic_string();
    }
    return j;
  }
};

inline JointKind parse_joint_kind(const std::string& s) {
  if (s == "fixed") return JointKind::Fixed;
  if (s == "revolute") return JointKind::Revolute;
  if (s == "prismatic") return JointKind::Prismatic;
  throw Error("unknown joint type '" + s + "'");
}

/// Chain description: ordered links, each naming its parent (default: the
/// previous link; null for the base frame), a parent->link origin, a joint and
/// optional geometry.
inline KinematicChain parse_chain(const Json& doc, const std::filesystem::path& base_dir) {
  const Json& links = io::require(doc, "links");
  if (!links.is_array() || links.empty()) throw Error("/links: expected a non-empty array");
  std::vector<Link> out;
  for (std::size_t i = 0; i < links.size(); ++i) {
    const std::string where = "/links/" + std::to_string(i);
    out.push_back(io::at_path(where, [&] {
      const Json& j = links[i];
      Link l;
      l.name = io::require(j, "name").get<std::string>();
      if (!j.contains("parent")) {
        l.parent = static_cast<int>(i) - 1;
      } else if (j.at("parent").is_null()) {
        l.parent = -1;
      } else {
        const auto parent = j.at("parent").get<std::string>();
        l.parent = -2;
        for (std::size_t k = 0; k < out.size(); ++k)
          if (out[k].name == parent) l.parent = static_cast<int>(k);
        if (l.parent == -2) throw Error("parent '" + parent + "' is not an earlier link");
      }
      if (j.contains("origin")) l.origin = io::pose(j.at("origin"));
      if (j.contains("joint")) {
        const Json& jt = j.at("joint");
        l.joint = parse_joint_kind(io::require(jt, "type").get<std::string>());
        if (l.joint != JointKind::Fixed) {
          l.axis = io::vec3(io::require(jt, "axis")).normalized();
          const Json& lim = io::require(jt, "limits");
          if (!lim.is_array() || lim.size() != 2) throw Error("limits must be [lower, upper]");
          l.lower = lim[0].get<double>();
          l.upper = lim[1].get<double>();
          if (l.lower > l.upper) throw Error("lower limit above upper limit");
        }
      }
      if (j.contains("geometry")) l.geometry = MeshRef::parse(j.at("geometry")).load(base_dir);
      return l;
    }));
  }
  return KinematicChain(std::move(out));
}

inline KinematicChain load_chain(const std::filesystem::path& path) {
  return io::at_path(path.string(), [&] { return parse_chain(io::read_json(path), path.parent_path()); });
}

/// Intrinsics from {"horizontal_fov_deg", "vertical_fov_deg", "max_range"} or a preset name.
inline CameraIntrinsics parse_intrinsics(const Json& j) {
  if (j.is_string()) return camera_preset(j.get<std::string>());
  CameraIntrinsics c;
  c.horizontal_fov = deg2rad(io::require(j, "horizontal_fov_deg").get<double>());
  c.vertical_fov = deg2rad(io::require(j, "vertical_fov_deg").get<double>());
  c.max_range = io::require(j, "max_range").get<double>();
  c.validate();
  return c;
}

/// Camera profile file: {"presets": {"name": {intrinsics}, ...}}.
inline std::map<std::string, CameraIntrinsics> load_camera_profiles(const std::filesystem::path& path) {
  return io::at_path(path.string(), [&] {
    std::map<std::string, CameraIntrinsics> out;
    const Json doc = io::read_json(path);
    for (const auto& [name, j] : io::require(doc, "presets").items())
      out[name] = io::at_path("/presets/" + name, [&] { return parse_intrinsics(j); });
    return out;
  });
}

inline SupervisorModel parse_supervisor(const Json& doc, const std::filesystem::path& base_dir) {
  SupervisorModel m;
  m.name = doc.value("name", std::string("supervisor"));
  const Json& chain = io::require(doc, "chain");
  m.arm = chain.is_string() ? load_chain(base_dir / chain.get<std::string>())
                            : io::at_path("/chain", [&] { return parse_chain(chain, base_dir); });
  io::at_path("/camera_mount", [&] {
    const Json& mount = io::require(doc, "camera_mount");
    m.camera_link = io::require(mount, "link").get<std::string>();
    m.camera_mount = io::pose(mount);
    return 0;
  });
  m.footprint_radius = io::require(doc, "footprint_radius").get<double>();
  io::at_path("/collision", [&] {
    const Json& col = io::require(doc, "collision");
    m.collision_radius = io::require(col, "radius").get<double>();
    m.collision_height = io::require(col, "height").get<double>();
    m.ground_clearance = col.value("ground_clearance", m.ground_clearance);
    return 0;
  });
  m.intrinsics = io::at_path("/camera", [&] { return parse_intrinsics(io::require(doc, "camera")); });
  m.validate();
  return m;
}

inline SupervisorModel load_supervisor(const std::filesystem::path& path) {
  return io::at_path(path.string(), [&] { return parse_supervisor(io::read_json(path), path.parent_path()); });
}

}  // namespace vantage
