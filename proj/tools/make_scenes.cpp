// Regenerates the bundled scenes under a directory (default: scenes/).
//
// Trajectories are written as joint-space keyframes. Keyframe joints come from
// a closed-form solve of the shoulder/elbow pair for a requested wrist point,
// and the material and target poses are read back from forward kinematics so
// every pick ends exactly on its material and every place on its target.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "vantage/vantage.hpp"

namespace fs = std::filesystem;
using vantage::Json;
using vantage::Vec3;

namespace {

constexpr double kPi = vantage::kPi;

// Construction robot dimensions.
constexpr double kTrackHeight = 0.5;
constexpr double kShoulderForward = 0.35;
constexpr double kShoulderUp = 0.45;
constexpr double kUpperArm = 0.85;
constexpr double kForearm = 1.1;
constexpr double kWristOffset = 0.15;
constexpr double kFlange = 0.1;
constexpr double kTool = 0.2;

// Frame material.
constexpr double kFrameSize = 1.2;
constexpr double kFrameBar = 0.1;
constexpr double kFrameDepth = 0.1;
const Vec3 kGrasp(0.55, 0.0, 0.06);

Json box_geometry(const Vec3& size, const Vec3& at) {
  return {{"box", vantage::io::to_json(size)}, {"xyz", vantage::io::to_json(at)}};
}

Json revolute(const Vec3& axis, double lo, double hi) {
  return {{"type", "revolute"}, {"axis", vantage::io::to_json(axis)}, {"limits", {lo, hi}}};
}

Json construction_robot() {
  Json links = Json::array();
  links.push_back({{"name", "track"}, {"parent", nullptr}, {"geometry", box_geometry({1.2, 0.9, kTrackHeight}, {0, 0, 0.5 * kTrackHeight})}});
  links.push_back({{"name", "turret"},
                   {"origin", {{"xyz", {0, 0, kTrackHeight}}}},
                   {"joint", revolute(Vec3::UnitZ(), -3.2, 3.2)},
                   {"geometry", box_geometry({0.6, 0.5, 0.45}, {0.1, 0, 0.225})}});
  links.push_back({{"name", "upper_arm"},
                   {"origin", {{"xyz", {kShoulderForward, 0, kShoulderUp}}}},
                   {"joint", revolute(Vec3::UnitY(), -1.4, 1.8)},
                   {"geometry", box_geometry({0.25, 0.25, kUpperArm}, {0, 0, 0.5 * kUpperArm})}});
  links.push_back({{"name", "forearm"},
                   {"origin", {{"xyz", {0, 0, kUpperArm}}}},
                   {"joint", revolute(Vec3::UnitY(), -2.6, 2.6)},
                   {"geometry", box_geometry({kForearm, 0.2, 0.2}, {0.5 * kForearm, 0, 0})}});
  links.push_back({{"name", "wrist_roll"},
                   {"origin", {{"xyz", {kForearm, 0, 0}}}},
                   {"joint", revolute(Vec3::UnitX(), -6.0, 6.0)},
                   {"geometry", box_geometry({kWristOffset, 0.15, 0.15}, {0.5 * kWristOffset, 0, 0})}});
  links.push_back({{"name", "wrist_pitch"},
                   {"origin", {{"xyz", {kWristOffset, 0, 0}}}},
                   {"joint", revolute(Vec3::UnitY(), -2.2, 2.2)}});
  links.push_back({{"name", "flange"},
                   {"origin", {{"xyz", {kFlange, 0, 0}}}},
                   {"joint", revolute(Vec3::UnitX(), -6.0, 6.0)},
                   {"geometry", box_geometry({kTool, 0.3, 0.3}, {0.5 * kTool, 0, 0})}});
  links.push_back({{"name", "tool0"},
                   {"origin", {{"xyz", {kTool, 0, 0}}, {"rpy", {0, 0.5 * kPi, 0}}}},
                   {"joint", {{"type", "fixed"}}}});
  return {{"name", "tracked 6-axis arm"}, {"links", links}};
}

Json supervisor_robot() {
  Json links = Json::array();
  links.push_back({{"name", "base"}, {"parent", nullptr}, {"geometry", box_geometry({0.28, 0.3, 0.2}, {0, 0, 0.1})}});
  links.push_back({{"name", "link1"},
                   {"origin", {{"xyz", {-0.09, 0, 0.2}}}},
                   {"joint", revolute(Vec3::UnitZ(), -kPi, kPi)},
                   {"geometry", box_geometry({0.05, 0.05, 0.077}, {0, 0, 0.0385})}});
  links.push_back({{"name", "link2"},
                   {"origin", {{"xyz", {0, 0, 0.077}}}},
                   {"joint", revolute(Vec3::UnitY(), -1.5, 1.5)},
                   {"geometry", box_geometry({0.05, 0.05, 0.13}, {0.012, 0, 0.065})}});
  links.push_back({{"name", "link3"},
                   {"origin", {{"xyz", {0.024, 0, 0.128}}}},
                   {"joint", revolute(Vec3::UnitY(), -1.5, 1.4)},
                   {"geometry", box_geometry({0.124, 0.05, 0.05}, {0.062, 0, 0})}});
  links.push_back({{"name", "link4"},
                   {"origin", {{"xyz", {0.124, 0, 0}}}},
                   {"joint", revolute(Vec3::UnitY(), -1.7, 1.97)},
                   {"geometry", box_geometry({0.126, 0.05, 0.05}, {0.063, 0, 0})}});
  links.push_back({{"name", "camera_link"}, {"origin", {{"xyz", {0.126, 0, 0}}}}});
  return {{"name", "mobile base with 4-axis arm and depth camera"},
          {"chain", {{"links", links}}},
          {"camera_mount", {{"link", "camera_link"}, {"xyz", {0, 0, 0}}, {"rpy", {-0.5 * kPi, 0, -0.5 * kPi}}}},
          {"footprint_radius", 0.22},
          {"collision", {{"radius", 0.35}, {"height", 0.8}, {"ground_clearance", 0.05}}},
          {"camera", "d435-depth"}};
}

vantage::TriMesh frame_mesh() {
  vantage::TriMesh m;
  const double h = 0.5 * kFrameSize;
  const double inner = kFrameSize - 2 * kFrameBar;
  for (double s : {-1.0, 1.0}) {
    vantage::append_mesh(m, vantage::transform_mesh(vantage::Pose3::translation({s * (h - 0.5 * kFrameBar), 0, 0}),
                                                    vantage::box_mesh({kFrameBar, kFrameSize, kFrameDepth})));
    vantage::append_mesh(m, vantage::transform_mesh(vantage::Pose3::translation({0, s * (h - 0.5 * kFrameBar), 0}),
                                                    vantage::box_mesh({inner, kFrameBar, kFrameDepth})));
  }
  return m;
}

/// Joint values putting the wrist-pitch centre at `wrist` (base frame) with
/// the flange pitched `flange_pitch` below horizontal, base at (bx, 0).
vantage::JointConfig solve_arm(double bx, const Vec3& wrist, double flange_pitch) {
  const double yaw = std::atan2(wrist.y(), wrist.x());
  const double r = std::hypot(wrist.x(), wrist.y()) - kShoulderForward;
  const double h = wrist.z() - kTrackHeight - kShoulderUp;
  const double l1 = kUpperArm;
  const double l2 = kForearm + kWristOffset;
  const double c = (r * r + h * h - l1 * l1 - l2 * l2) / (2 * l1 * l2);
  if (std::abs(c) > 1.0) throw vantage::Error("wrist point out of reach");
  const double bend = std::acos(c);  // elbow up
  const double a = std::atan2(h, r) + std::atan2(l2 * std::sin(bend), l1 + l2 * std::cos(bend));
  const double b = a - bend;
  const double q2 = 0.5 * kPi - a;
  const double q3 = -b - q2;
  const double q5 = flange_pitch - (q2 + q3);
  return {bx, 0.0, 0.0, {yaw, q2, q3, 0.0, q5, 0.0}};
}

// Frames stand upright, gripped at the middle of the top bar, so the frame
// plane contains the arm and faces sideways along x.
constexpr double kReach = 1.5;        // horizontal wrist distance, toward +y
constexpr double kCarryLift = 0.35;
const double kSetHeight = 0.5 * kFrameSize + 0.02 + kGrasp.x();  // lower bar 2 cm above the floor

vantage::JointConfig hold(double bx, double height) { return solve_arm(bx, {0.0, kReach, height}, 0.0); }

Json keyframes(const std::vector<vantage::JointConfig>& frames) {
  Json out = Json::array();
  for (const auto& f : frames) out.push_back({{"base", {f.x, f.y, f.yaw}}, {"joints", f.joints}});
  return out;
}

struct Job {
  std::string name;
  double pick_x;   ///< track position when grasping from the rack
  double place_x;  ///< track position when installing
};

Json make_scene(const std::string& name, const std::vector<Job>& jobs, const vantage::KinematicChain& chain,
                const Json& as_built) {
  const vantage::Pose3 grasp = vantage::Pose3::from_xyz_rpy(kGrasp, {-0.5 * kPi, 0.0, 0.0});
  const auto tool = chain.index_of("tool0");
  Json materials = Json::array();
  Json targets = Json::array();
  Json trajectories = Json::array();
  int order = 1;
  for (const auto& job : jobs) {
    const auto grab = hold(job.pick_x, kSetHeight);
    const auto install = hold(job.place_x, kSetHeight);
    const vantage::Pose3 material = vantage::forward_kinematics(chain, grab).links[tool] * grasp;
    const vantage::Pose3 placed = vantage::forward_kinematics(chain, install).links[tool] * grasp;
    materials.push_back({{"name", job.name},
                         {"type", "frame"},
                         {"position", vantage::io::to_json(material.position())},
                         {"rotation", vantage::io::to_json(material.rpy())},
                         {"picking_direction", {0, 0, -1}},
                         {"offset", vantage::io::to_json(kGrasp)},
                         {"mesh", "../meshes/frame.off"}});
    targets.push_back({{"name", "target_" + std::to_string(order)},
                       {"type", "frame"},
                       {"position", vantage::io::to_json(placed.position())},
                       {"normal", vantage::io::to_json(placed.rotation().col(2))},
                       {"order", order}});

    vantage::JointConfig home{0.0, 0.0, 0.0, {0.5 * kPi, 0.0, 0.0, 0.0, 0.5 * kPi, 0.0}};
    vantage::JointConfig parked = home;
    parked.x = job.pick_x;
    const auto approach = hold(job.pick_x, kSetHeight + kCarryLift);
    trajectories.push_back({{"name", "pick_" + job.name},
                            {"operation", "pick"},
                            {"target", order},
                            {"steps_per_segment", 5},
                            {"keyframes", keyframes({home, parked, approach, grab})}});
    trajectories.push_back({{"name", "place_" + job.name},
                            {"operation", "place"},
                            {"target", order},
                            {"steps_per_segment", 5},
                            {"keyframes", keyframes({grab, hold(job.pick_x, kSetHeight + kCarryLift),
                                                     hold(job.place_x, kSetHeight + kCarryLift), install})},
                            {"attached", {{"material", job.name}, {"link", "tool0"}, {"grasp", vantage::io::pose_json(grasp)}}}});
    ++order;
  }

  return {{"name", name},
          {"units", "meters"},
          {"as_built", as_built},
          {"materials", materials},
          {"targets", targets},
          {"floor", {{"mesh", {{"box", {10.0, 8.0, 0.2}}, {"xyz", {0, 0, -0.1}}}}, {"surface_height", 0.0}}},
          {"robots",
           {{"construction", {{"chain", "../robots/tracked_arm.json"}}},
            {"supervisors",
             {{{"name", "supervisor_1"}, {"model", "../robots/supervisor.json"}, {"start", {-4.3, -3.3, 0.0}}},
              {{"name", "supervisor_2"}, {"model", "../robots/supervisor.json"}, {"start", {4.3, -3.3, 0.0}}}}}}},
          {"trajectories", trajectories}};
}

void write_json(const fs::path& path, const Json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw vantage::Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  try {
    const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path("scenes");
    write_json(root / "robots" / "tracked_arm.json", construction_robot());
    write_json(root / "robots" / "supervisor.json", supervisor_robot());

    fs::create_directories(root / "meshes");
    {
      std::ofstream out(root / "meshes" / "frame.off");
      vantage::write_off(out, frame_mesh());
    }
    {
      // Wall segment behind the robot: along x at y = -2.5, 4 m long, 2.5 m high.
      std::ofstream out(root / "meshes" / "wall.stl");
      vantage::write_stl_ascii(out, vantage::transform_mesh(vantage::Pose3::translation({-1.0, -2.5, 1.25}),
                                                            vantage::box_mesh({4.0, 0.2, 2.5})),
                               "wall");
    }

    const auto chain = vantage::load_chain(root / "robots" / "tracked_arm.json");
    const Json wall = Json::array({{{"name", "wall"}, {"mesh", "../meshes/wall.stl"}}});
    write_json(root / "single_room" / "scene.json", make_scene("single_room", {{"frame_1", -1.5, 1.5}}, chain, wall));
    write_json(root / "three_frames" / "scene.json",
               make_scene("three_frames", {{"frame_1", -1.4, 0.6}, {"frame_2", -2.0, 1.4}, {"frame_3", -2.6, 2.2}},
                          chain, wall));

    for (const char* scene : {"single_room", "three_frames"}) vantage::load_scene(root / scene / "scene.json");
    std::cout << "wrote scenes under " << root << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
