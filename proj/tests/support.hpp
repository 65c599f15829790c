#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "vantage/vantage.hpp"

namespace testing_support {

using vantage::Vec3;

inline std::filesystem::path source_dir() { return VANTAGE_SOURCE_DIR; }
inline std::filesystem::path scene_path(const std::string& name) {
  return source_dir() / "scenes" / name / "scene.json";
}

inline const std::vector<std::string>& bundled_scenes() {
  static const std::vector<std::string> names{"single_room", "three_frames"};
  return names;
}

// Camera at `eye` looking at `at`; local x is horizontal where possible.
inline vantage::CameraView look_at(const Vec3& eye, const Vec3& at,
                                   vantage::CameraIntrinsics in = vantage::CameraIntrinsics{}) {
  const Vec3 z = (at - eye).normalized();
  Vec3 up = Vec3::UnitZ();
  if (std::abs(z.dot(up)) > 0.99) up = Vec3::UnitX();
  const Vec3 x = up.cross(z).normalized();
  const Vec3 y = z.cross(x);
  vantage::Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return {vantage::Pose3(eye, r), in};
}

inline Vec3 uniform_in(std::mt19937_64& rng, const Vec3& lo, const Vec3& hi) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return lo + Vec3(u(rng), u(rng), u(rng)).cwiseProduct(hi - lo);
}

inline vantage::Mat3 random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> a(-vantage::kPi, vantage::kPi);
  return vantage::rotation_from_euler(a(rng), a(rng), a(rng));
}

// Axis-aligned rectangle in the z = height plane, split into two triangles.
inline vantage::TriMesh flat_quad(double x0, double y0, double x1, double y1, double height = 0.0) {
  vantage::TriMesh m;
  m.vertices = {Vec3(x0, y0, height), Vec3(x1, y0, height), Vec3(x1, y1, height), Vec3(x0, y1, height)};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

inline vantage::Link link(const std::string& name, int parent, const vantage::Pose3& origin,
                          vantage::JointKind kind = vantage::JointKind::Fixed, const Vec3& axis = Vec3::UnitZ(),
                          double lower = 0.0, double upper = 0.0,
                          std::optional<vantage::TriMesh> geometry = std::nullopt) {
  vantage::Link l;
  l.name = name;
  l.parent = parent;
  l.origin = origin;
  l.joint = kind;
  l.axis = axis;
  l.lower = lower;
  l.upper = upper;
  l.geometry = std::move(geometry);
  return l;
}

inline vantage::MotionEnvelope random_envelope(std::mt19937_64& rng, std::size_t points, const Vec3& lo,
                                               const Vec3& hi) {
  vantage::MotionEnvelope env;
  for (std::size_t i = 0; i < points; ++i) env.points.push_back(uniform_in(rng, lo, hi));
  env.states = points / 8;
  env.links = 1;
  return env;
}

}  // namespace testing_support
