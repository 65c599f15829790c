#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vantage/model_io.hpp"

namespace vantage {

enum class Operation { Pick, Place };

inline std::string to_string(Operation op) { return op == Operation::Pick ? "pick" : "place"; }

inline Operation parse_operation(const std::string& s) {
  if (s == "pick") return Operation::Pick;
  if (s == "place") return Operation::Place;
  throw Error("operation must be 'pick' or 'place', got '" + s + "'");
}

/// Rotation taking +z onto `normal` along the shortest arc.
inline Mat3 rotation_from_normal(const Vec3& normal) {
  return Eigen::Quaterniond::FromTwoVectors(Vec3::UnitZ(), normal.normalized()).toRotationMatrix();
}

struct AsBuiltObject {
  std::string name;
  MeshRef ref;
  TriMesh mesh;  ///< world frame
};

struct Material {
  std::string name;
  std::string type;
  Vec3 position = Vec3::Zero();
  Vec3 rotation = Vec3::Zero();  ///< roll, pitch, yaw
  Vec3 picking_direction = -Vec3::UnitZ();
  Vec3 offset = Vec3::Zero();
  MeshRef ref;
  TriMesh local_mesh;  ///< material frame

  Pose3 pose() const { return Pose3::from_xyz_rpy(position, rotation); }
  TriMesh world_mesh() const { return transform_mesh(pose(), local_mesh); }
};

struct Target {
  std::string name;
  std::string type;
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  int order = 1;
  bool installed = false;

  /// Installed pose of a material: its local +z is aligned with the target normal.
  Pose3 pose() const { return {position, rotation_from_normal(normal)}; }
};

struct Floor {
  MeshRef ref;
  TriMesh mesh;
  double surface_height = 0.0;
};

struct SupervisorEntry {
  std::string name;
  std::string model_file;
  SupervisorModel model;
  JointConfig start;  ///< base pose; arm joints at zero (or clamped into limits)
};

struct AttachedSpec {
  std::string material;
  std::string link;
  Pose3 grasp;
};

struct TrajectorySpec {
  std::string name;
  Operation operation = Operation::Pick;
  int target = 1;
  std::size_t steps_per_segment = 1;
  std::vector<JointConfig> keyframes;
  bool explicit_states = false;  ///< keyframes are the states themselves
  std::optional<AttachedSpec> attached;

  Trajectory expand() const {
    if (explicit_states || keyframes.size() == 1) return Trajectory{keyframes};
    return interpolate_trajectory(keyframes, steps_per_segment);
  }
};

struct Scene {
  std::string name;
  std::filesystem::path base_dir;
  std::vector<AsBuiltObject> as_built;
  std::vector<Material> materials;
  std::vector<Target> targets;
  Floor floor;
  std::string construction_file;
  KinematicChain construction;
  std::vector<SupervisorEntry> supervisors;
  std::vector<TrajectorySpec> trajectories;

  const Target& target(int order) const {
    for (const auto& t : targets)
      if (t.order == order) return t;
    throw Error("no target with order " + std::to_string(order));
  }

  const Material& material(const std::string& name) const {
    for (const auto& m : materials)
      if (m.name == name) return m;
    throw Error("no material named '" + name + "'");
  }

  const TrajectorySpec& trajectory(Operation op, int target_order) const {
    for (const auto& t : trajectories)
      if (t.operation == op && t.target == target_order) return t;
    throw Error("no " + to_string(op) + " trajectory for target " + std::to_string(target_order));
  }

  /// Object carried by a trajectory, built from its material's local mesh.
  std::optional<AttachedObject> attached_object(const TrajectorySpec& spec) const {
    if (!spec.attached) return std::nullopt;
    return AttachedObject{material(spec.attached->material).local_mesh, spec.attached->link, spec.attached->grasp};
  }
};

namespace detail {

inline JointConfig parse_config(const Json& j) {
  JointConfig c;
  const Vec3 base = io::vec3(io::require(j, "base"));
  c.x = base.x();
  c.y = base.y();
  c.yaw = base.z();
  c.joints = io::require(j, "joints").get<std::vector<double>>();
  return c;
}

inline Json config_json(const JointConfig& c) {
  return {{"base", Json::array({c.x, c.y, c.yaw})}, {"joints", c.joints}};
}

}  // namespace detail

/// Checks the layer invariants and every cross reference; throws with a JSON pointer.
inline void validate_scene(const Scene& scene) {
  std::set<int> orders;
  for (std::size_t i = 0; i < scene.targets.size(); ++i) {
    const auto& t = scene.targets[i];
    const std::string where = "/targets/" + std::to_string(i);
    if (t.order < 1) throw Error(where + "/order: must be positive");
    if (!orders.insert(t.order).second) throw Error(where + "/order: duplicate order " + std::to_string(t.order));
    if (t.installed) continue;
    bool matched = false;
    for (const auto& m : scene.materials) matched = matched || m.type == t.type;
    if (!matched) throw Error(where + "/type: no material of type '" + t.type + "'");
  }
  if (!orders.empty() && (*orders.begin() != 1 || *orders.rbegin() != static_cast<int>(orders.size())))
    throw Error("/targets: orders must be contiguous from 1");
  std::set<std::string> names;
  for (std::size_t i = 0; i < scene.materials.size(); ++i)
    if (!names.insert(scene.materials[i].name).second)
      throw Error("/materials/" + std::to_string(i) + "/name: duplicate material '" + scene.materials[i].name + "'");

  for (std::size_t i = 0; i < scene.trajectories.size(); ++i) {
    const auto& tr = scene.trajectories[i];
    io::at_path("/trajectories/" + std::to_string(i), [&] {
      if (!orders.count(tr.target)) throw Error("target: no target with order " + std::to_string(tr.target));
      if (tr.operation == Operation::Place && !tr.attached) throw Error("attached: place trajectories carry an object");
      if (tr.operation == Operation::Pick && tr.attached) throw Error("attached: pick trajectories carry no object");
      if (tr.keyframes.empty()) throw Error("keyframes: empty");
      if (tr.attached) {
        scene.construction.index_of(tr.attached->link);
        // An installed target's material has already left the material layer.
        if (!scene.target(tr.target).installed) scene.material(tr.attached->material);
      }
      for (const auto& s : tr.expand().states) forward_kinematics(scene.construction, s);
      return 0;
    });
  }
  for (std::size_t i = 0; i < scene.supervisors.size(); ++i)
    io::at_path("/robots/supervisors/" + std::to_string(i), [&] {
      scene.supervisors[i].model.validate();
      forward_kinematics(scene.supervisors[i].model.arm, scene.supervisors[i].start);
      return 0;
    });
}

inline Scene parse_scene(const Json& doc, const std::filesystem::path& base_dir) {
  Scene s;
  s.base_dir = base_dir;
  s.name = doc.value("name", std::string("scene"));

  if (doc.contains("as_built"))
    for (std::size_t i = 0; i < doc.at("as_built").size(); ++i)
      s.as_built.push_back(io::at_path("/as_built/" + std::to_string(i), [&] {
        const Json& j = doc.at("as_built")[i];
        AsBuiltObject o;
        o.name = io::require(j, "name").get<std::string>();
        o.ref = io::at_path("/mesh", [&] { return MeshRef::parse(io::require(j, "mesh")); });
        o.mesh = io::at_path("/mesh", [&] { return o.ref.load(base_dir); });
        return o;
      }));

  if (doc.contains("materials"))
    for (std::size_t i = 0; i < doc.at("materials").size(); ++i)
      s.materials.push_back(io::at_path("/materials/" + std::to_string(i), [&] {
        const Json& j = doc.at("materials")[i];
        Material m;
        m.name = io::require(j, "name").get<std::string>();
        m.type = io::require(j, "type").get<std::string>();
        m.position = io::at_path("/position", [&] { return io::vec3(io::require(j, "position")); });
        m.rotation = io::at_path("/rotation", [&] { return io::vec3(io::require(j, "rotation")); });
        m.picking_direction =
            io::at_path("/picking_direction", [&] { return io::vec3(io::require(j, "picking_direction")); });
        if (std::abs(m.picking_direction.norm() - 1.0) > 1e-6) throw Error("/picking_direction: not a unit vector");
        m.offset = io::at_path("/offset", [&] { return io::vec3(io::require(j, "offset")); });
        m.ref = io::at_path("/mesh", [&] { return MeshRef::parse(io::require(j, "mesh")); });
        m.local_mesh = io::at_path("/mesh", [&] { return m.ref.load(base_dir); });
        return m;
      }));

  if (doc.contains("targets"))
    for (std::size_t i = 0; i < doc.at("targets").size(); ++i)
      s.targets.push_back(io::at_path("/targets/" + std::to_string(i), [&] {
        const Json& j = doc.at("targets")[i];
        Target t;
        t.name = io::require(j, "name").get<std::string>();
        t.type = io::require(j, "type").get<std::string>();
        t.position = io::at_path("/position", [&] { return io::vec3(io::require(j, "position")); });
        t.normal = io::at_path("/normal", [&] { return io::vec3(io::require(j, "normal")); });
        if (std::abs(t.normal.norm() - 1.0) > 1e-6) throw Error("/normal: not a unit vector");
        t.order = io::require(j, "order").get<int>();
        t.installed = j.value("installed", false);
        return t;
      }));

  io::at_path("/floor", [&] {
    const Json& f = io::require(doc, "floor");
    s.floor.ref = io::at_path("/mesh", [&] { return MeshRef::parse(io::require(f, "mesh")); });
    s.floor.mesh = io::at_path("/mesh", [&] { return s.floor.ref.load(base_dir); });
    s.floor.surface_height = io::require(f, "surface_height").get<double>();
    return 0;
  });

  io::at_path("/robots", [&] {
    const Json& r = io::require(doc, "robots");
    s.construction_file = io::at_path("/construction", [&] {
      return io::require(io::require(r, "construction"), "chain").get<std::string>();
    });
    s.construction = io::at_path("/construction/chain", [&] { return load_chain(base_dir / s.construction_file); });
    const Json& sup = io::require(r, "supervisors");
    for (std::size_t i = 0; i < sup.size(); ++i)
      s.supervisors.push_back(io::at_path("/supervisors/" + std::to_string(i), [&] {
        SupervisorEntry e;
        e.name = io::require(sup[i], "name").get<std::string>();
        e.model_file = io::require(sup[i], "model").get<std::string>();
        e.model = io::at_path("/model", [&] { return load_supervisor(base_dir / e.model_file); });
        const Vec3 start = io::at_path("/start", [&] { return io::vec3(io::require(sup[i], "start")); });
        e.start.x = start.x();
        e.start.y = start.y();
        e.start.yaw = start.z();
        for (const auto& l : e.model.arm.links())
          if (l.joint != JointKind::Fixed) e.start.joints.push_back(std::clamp(0.0, l.lower, l.upper));
        return e;
      }));
    return 0;
  });

  if (doc.contains("trajectories"))
    for (std::size_t i = 0; i < doc.at("trajectories").size(); ++i)
      s.trajectories.push_back(io::at_path("/trajectories/" + std::to_string(i), [&] {
        const Json& j = doc.at("trajectories")[i];
        TrajectorySpec t;
        t.name = io::require(j, "name").get<std::string>();
        t.operation = parse_operation(io::require(j, "operation").get<std::string>());
        t.target = io::require(j, "target").get<int>();
        if (j.contains("states")) {
          t.explicit_states = true;
          for (const auto& k : j.at("states")) t.keyframes.push_back(detail::parse_config(k));
        } else {
          for (const auto& k : io::require(j, "keyframes")) t.keyframes.push_back(detail::parse_config(k));
          t.steps_per_segment = io::require(j, "steps_per_segment").get<std::size_t>();
          if (t.steps_per_segment < 1) throw Error("/steps_per_segment: must be at least 1");
        }
        if (j.contains("attached")) {
          const Json& a = j.at("attached");
          AttachedSpec spec;
          spec.material = io::require(a, "material").get<std::string>();
          spec.link = io::require(a, "link").get<std::string>();
          if (a.contains("grasp")) spec.grasp = io::pose(a.at("grasp"));
          t.attached = spec;
        }
        return t;
      }));

  validate_scene(s);
  return s;
}

inline Scene load_scene(const std::filesystem::path& path) {
  const Json doc = io::read_json(path);
  try {
    return parse_scene(doc, path.parent_path());
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

/// Serialises the scene; relative file references are rewritten for `out_dir`.
inline Json scene_to_json(const Scene& s, const std::filesystem::path& out_dir) {
  auto rel = [&](const std::string& f) {
    std::filesystem::path p = f;
    if (p.is_absolute()) return p.generic_string();
    return std::filesystem::relative(std::filesystem::absolute(s.base_dir / p), std::filesystem::absolute(out_dir))
        .generic_string();
  };
  Json doc;
  doc["name"] = s.name;
  doc["units"] = "meters";
  doc["euler"] = "rpy: R = Rz(yaw) Ry(pitch) Rx(roll)";
  doc["as_built"] = Json::array();
  for (const auto& o : s.as_built) doc["as_built"].push_back({{"name", o.name}, {"mesh", o.ref.to_json(s.base_dir, out_dir)}});
  doc["materials"] = Json::array();
  for (const auto& m : s.materials)
    doc["materials"].push_back({{"name", m.name},
                                {"type", m.type},
                                {"position", io::to_json(m.position)},
                                {"rotation", io::to_json(m.rotation)},
                                {"picking_direction", io::to_json(m.picking_direction)},
                                {"offset", io::to_json(m.offset)},
                                {"mesh", m.ref.to_json(s.base_dir, out_dir)}});
  doc["targets"] = Json::array();
  for (const auto& t : s.targets) {
    Json j{{"name", t.name},
           {"type", t.type},
           {"position", io::to_json(t.position)},
           {"normal", io::to_json(t.normal)},
           {"order", t.order}};
    if (t.installed) j["installed"] = true;
    doc["targets"].push_back(j);
  }
  doc["floor"] = {{"mesh", s.floor.ref.to_json(s.base_dir, out_dir)}, {"surface_height", s.floor.surface_height}};
  Json sup = Json::array();
  for (const auto& e : s.supervisors)
    sup.push_back({{"name", e.name}, {"model", rel(e.model_file)}, {"start", Json::array({e.start.x, e.start.y, e.start.yaw})}});
  doc["robots"] = {{"construction", {{"chain", rel(s.construction_file)}}}, {"supervisors", sup}};
  doc["trajectories"] = Json::array();
  for (const auto& t : s.trajectories) {
    Json j{{"name", t.name}, {"operation", to_string(t.operation)}, {"target", t.target}};
    Json frames = Json::array();
    for (const auto& k : t.keyframes) frames.push_back(detail::config_json(k));
    if (t.explicit_states) {
      j["states"] = frames;
    } else {
      j["keyframes"] = frames;
      j["steps_per_segment"] = t.steps_per_segment;
    }
    if (t.attached)
      j["attached"] = {{"material", t.attached->material}, {"link", t.attached->link}, {"grasp", io::pose_json(t.attached->grasp)}};
    doc["trajectories"].push_back(j);
  }
  return doc;
}

inline void save_scene(const Scene& s, const std::filesystem::path& path) {
  const auto dir = path.parent_path().empty() ? std::filesystem::current_path() : path.parent_path();
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << scene_to_json(s, dir).dump(2) << '\n';
}

/// Moves the material consumed by target `order` into the as-built layer at the
/// target pose and marks the target installed. The place trajectory's material
/// is used when one exists, otherwise the first material of the target's type.
inline Scene update_after_install(const Scene& scene, int order) {
  Scene out = scene;
  auto target = std::find_if(out.targets.begin(), out.targets.end(), [&](const Target& t) { return t.order == order; });
  if (target == out.targets.end()) throw Error("no target with order " + std::to_string(order));
  if (target->installed) throw Error("target " + std::to_string(order) + " is already installed");

  std::string wanted;
  for (const auto& tr : out.trajectories)
    if (tr.operation == Operation::Place && tr.target == order && tr.attached) wanted = tr.attached->material;
  auto material = std::find_if(out.materials.begin(), out.materials.end(), [&](const Material& m) {
    return wanted.empty() ? m.type == target->type : m.name == wanted;
  });
  if (material == out.materials.end() || material->type != target->type)
    throw Error("no material of type '" + target->type + "' for target " + std::to_string(order));

  AsBuiltObject built;
  built.name = target->name;
  built.ref = material->ref;
  built.ref.pose = target->pose() * material->ref.pose;
  built.mesh = transform_mesh(target->pose(), material->local_mesh);
  out.as_built.push_back(std::move(built));
  out.materials.erase(material);
  target->installed = true;
  return out;
}

}  // namespace vantage
