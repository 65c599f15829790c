#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "vantage/core.hpp"

namespace vantage {

/// Rotation for roll/pitch/yaw about x, y, z: R = Rz(yaw) * Ry(pitch) * Rx(roll).
inline Mat3 rotation_from_euler(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
          Eigen::AngleAxisd(roll, Vec3::UnitX()))
      .toRotationMatrix();
}

/// Inverse of rotation_from_euler. Returns (roll, pitch, yaw); pitch in [-pi/2, pi/2].
inline Vec3 euler_from_rotation(const Mat3& r) {
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  double roll = 0.0;
  double yaw = 0.0;
  if (std::abs(r(2, 0)) < 1.0 - 1e-12) {
    roll = std::atan2(r(2, 1), r(2, 2));
    yaw = std::atan2(r(1, 0), r(0, 0));
  } else {
    // gimbal lock: fold everything into yaw
    yaw = std::atan2(-r(0, 1), r(1, 1));
  }
  return {roll, pitch, yaw};
}

/// Rigid transform in the global frame {0}: x' = R x + t.
class Pose3 {
 public:
  Pose3() = default;
  Pose3(const Vec3& position, const Mat3& rotation) : position_(position), rotation_(rotation) {}

  static Pose3 identity() { return {}; }
  static Pose3 from_xyz_rpy(const Vec3& xyz, const Vec3& rpy) {
    return {xyz, rotation_from_euler(rpy.x(), rpy.y(), rpy.z())};
  }
  static Pose3 translation(const Vec3& xyz) { return {xyz, Mat3::Identity()}; }

  const Vec3& position() const { return position_; }
  const Mat3& rotation() const { return rotation_; }
  Vec3 rpy() const { return euler_from_rotation(rotation_); }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + position_; }
  Vec3 apply_direction(const Vec3& d) const { return rotation_ * d; }

  Pose3 inverse() const {
    Mat3 rt = rotation_.transpose();
    return {-(rt * position_), rt};
  }

  Pose3 operator*(const Pose3& rhs) const {
    return {rotation_ * rhs.position_ + position_, rotation_ * rhs.rotation_};
  }

  bool is_finite() const { return position_.allFinite() && rotation_.allFinite(); }

 private:
  Vec3 position_ = Vec3::Zero();
  Mat3 rotation_ = Mat3::Identity();
};

using Triangle = std::array<std::uint32_t, 3>;

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;

  bool empty() const { return triangles.empty(); }

  double triangle_area(std::size_t t) const {
    const auto& tri = triangles[t];
    return 0.5 * (vertices[tri[1]] - vertices[tri[0]]).cross(vertices[tri[2]] - vertices[tri[0]]).norm();
  }

  double area() const {
    double a = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) a += triangle_area(t);
    return a;
  }

  AxisBox bounds() const {
    AxisBox box;
    for (const auto& v : vertices) box.extend(v);
    return box;
  }

  /// Throws on out-of-range indices, non-finite vertices or triangles below 1e-12 m^2.
  void validate() const {
    for (const auto& v : vertices)
      if (!v.allFinite()) throw Error("mesh: non-finite vertex");
    for (std::size_t t = 0; t < triangles.size(); ++t) {
      for (auto idx : triangles[t])
        if (idx >= vertices.size())
          throw Error("mesh: triangle " + std::to_string(t) + " references vertex " + std::to_string(idx) +
                      " of " + std::to_string(vertices.size()));
      if (triangle_area(t) < 1e-12) throw Error("mesh: triangle " + std::to_string(t) + " has zero area");
    }
  }
};

/// Appends `other` to `mesh`, re-indexing its triangles.
inline void append_mesh(TriMesh& mesh, const TriMesh& other) {
  const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
  mesh.vertices.insert(mesh.vertices.end(), other.vertices.begin(), other.vertices.end());
  for (const auto& t : other.triangles) mesh.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
}

/// Closed box of the given full size centred at the origin, outward-facing triangles.
inline TriMesh box_mesh(const Vec3& size) {
  const Vec3 h = 0.5 * size;
  TriMesh m;
  for (int i = 0; i < 8; ++i)
    m.vertices.emplace_back((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(), (i & 4) ? h.z() : -h.z());
  m.triangles = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                 {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return m;
}

inline TriMesh transform_mesh(const Pose3& pose, const TriMesh& mesh) {
  TriMesh out;
  out.triangles = mesh.triangles;
  out.vertices.reserve(mesh.vertices.size());
  for (const auto& v : mesh.vertices) out.vertices.push_back(pose.apply(v));
  return out;
}

namespace detail {

inline Vec3 sample_triangle(const Vec3& a, const Vec3& b, const Vec3& c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double u = u01(rng);
  double v = u01(rng);
  if (u + v > 1.0) {
    u = 1.0 - u;
    v = 1.0 - v;
  }
  return a + u * (b - a) + v * (c - a);
}

}  // namespace detail

/// Area-weighted surface samples at `density` points per m^2. Each triangle gets
/// floor(area * density) points plus one more with probability equal to the
/// fractional remainder, so the expected total is exactly area * density.
inline std::vector<Vec3> sample_mesh_surface(const TriMesh& mesh, double density, std::uint64_t seed) {
  if (mesh.empty()) throw Error("empty mesh");
  if (!(density > 0.0)) throw Error("sample_mesh_surface: density must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(mesh.area() * density) + mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const double expected = mesh.triangle_area(t) * density;
    auto n = static_cast<std::size_t>(std::floor(expected));
    if (u01(rng) < expected - std::floor(expected)) ++n;
    const auto& tri = mesh.triangles[t];
    for (std::size_t k = 0; k < n; ++k)
      out.push_back(detail::sample_triangle(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]], rng));
  }
  return out;
}

/// Exactly `count` area-weighted uniform samples (multinomial over triangles).
inline std::vector<Vec3> sample_mesh_surface_count(const TriMesh& mesh, std::size_t count, std::uint64_t seed) {
  if (mesh.empty()) throw Error("empty mesh");
  std::vector<double> cumulative(mesh.triangles.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    acc += mesh.triangle_area(t);
    cumulative[t] = acc;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pick(0.0, acc);
  std::vector<Vec3> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick(rng));
    std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
    const auto& tri = mesh.triangles[t];
    out.push_back(detail::sample_triangle(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]], rng));
  }
  return out;
}

struct OrientedBox {
  Vec3 center = Vec3::Zero();
  std::array<Vec3, 3> axes{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  Vec3 half_extents = Vec3::Zero();

  /// Corner k uses sign bit i of k for axis i.
  std::array<Vec3, 8> corners() const {
    std::array<Vec3, 8> c;
    for (int k = 0; k < 8; ++k) {
      Vec3 p = center;
      for (int i = 0; i < 3; ++i) p += ((k >> i) & 1 ? 1.0 : -1.0) * half_extents[i] * axes[i];
      c[k] = p;
    }
    return c;
  }

  Vec3 to_local(const Vec3& p) const {
    const Vec3 d = p - center;
    return {axes[0].dot(d), axes[1].dot(d), axes[2].dot(d)};
  }

  bool contains(const Vec3& p, double tol = 1e-9) const {
    const Vec3 q = to_local(p);
    for (int i = 0; i < 3; ++i)
      if (std::abs(q[i]) > half_extents[i] + tol) return false;
    return true;
  }

  double volume() const { return 8.0 * half_extents.prod(); }

  /// Distance from p to the closest point of the box boundary (the six faces).
  double surface_distance(const Vec3& p) const {
    const Vec3 q = to_local(p).cwiseAbs();
    const Vec3 excess = q - half_extents;
    if ((excess.array() > 0.0).any()) return excess.cwiseMax(0.0).norm();
    return -excess.maxCoeff();
  }

  AxisBox aabb() const {
    AxisBox b;
    for (const auto& c : corners()) b.extend(c);
    return b;
  }

  OrientedBox transformed(const Pose3& pose) const {
    OrientedBox out;
    out.center = pose.apply(center);
    for (int i = 0; i < 3; ++i) out.axes[i] = pose.apply_direction(axes[i]);
    out.half_extents = half_extents;
    return out;
  }
};

/// PCA box: axes are the eigenvectors of the point covariance, extents come
/// from the projections. Exact for box-shaped point sets with distinct
/// principal variances; not a minimum-volume box in general.
inline OrientedBox compute_obb(std::span<const Vec3> points) {
  if (points.empty()) throw Error("compute_obb: no points");
  OrientedBox box;
  Vec3 mean = Vec3::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  if (points.size() == 1) {
    box.center = mean;
    return box;
  }
  Mat3 cov = Mat3::Zero();
  for (const auto& p : points) {
    const Vec3 d = p - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(points.size());

  Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
  Mat3 vecs = solver.eigenvectors();
  // Descending variance order; make the frame right-handed.
  box.axes = {vecs.col(2).normalized(), vecs.col(1).normalized(), Vec3::Zero()};
  box.axes[2] = box.axes[0].cross(box.axes[1]).normalized();

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& p : points) {
    const Vec3 d = p - mean;
    for (int i = 0; i < 3; ++i) {
      const double s = box.axes[i].dot(d);
      lo[i] = std::min(lo[i], s);
      hi[i] = std::max(hi[i], s);
    }
  }
  box.center = mean;
  for (int i = 0; i < 3; ++i) {
    box.center += 0.5 * (lo[i] + hi[i]) * box.axes[i];
    box.half_extents[i] = 0.5 * (hi[i] - lo[i]);
    if (box.half_extents[i] < 1e-12) box.half_extents[i] = 0.0;
  }
  return box;
}

inline OrientedBox compute_obb(const std::vector<Vec3>& points) { return compute_obb(std::span<const Vec3>(points)); }

struct Polygon2 {
  std::vector<Vec2> vertices;
  bool hole = false;

  void validate() const {
    if (vertices.size() < 3) throw Error("polygon: fewer than 3 vertices");
    for (std::size_t i = 0; i < vertices.size(); ++i)
      if ((vertices[i] - vertices[(i + 1) % vertices.size()]).norm() <= 1e-9)
        throw Error("polygon: repeated consecutive vertex " + std::to_string(i));
  }

  /// Shoelace area, positive for counter-clockwise order.
  double signed_area() const {
    double a = 0.0;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      const auto& p = vertices[i];
      const auto& q = vertices[(i + 1) % vertices.size()];
      a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
  }
};

inline bool point_on_segment(const Vec2& p, const Vec2& a, const Vec2& b, double tol = 1e-12) {
  const Vec2 ab = b - a;
  const Vec2 ap = p - a;
  const double len2 = ab.squaredNorm();
  const double cross = ab.x() * ap.y() - ab.y() * ap.x();
  if (std::abs(cross) > tol * std::max(1.0, std::sqrt(len2))) return false;
  const double t = ap.dot(ab);
  return t >= -tol && t <= len2 + tol;
}

/// Even-odd ray casting; points on the boundary count as inside.
inline bool point_in_polygon(const Vec2& p, const Polygon2& poly) {
  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if (point_on_segment(p, v[j], v[i])) return true;
    if ((v[i].y() > p.y()) != (v[j].y() > p.y())) {
      const double x_cross = v[j].x() + (p.y() - v[j].y()) * (v[i].x() - v[j].x()) / (v[i].y() - v[j].y());
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

/// Drops vertices whose neighbours are collinear with them.
inline std::vector<Vec2> merge_collinear(std::vector<Vec2> pts, double tol = 1e-9) {
  bool changed = true;
  while (changed && pts.size() > 3) {
    changed = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec2& prev = pts[(i + pts.size() - 1) % pts.size()];
      const Vec2& cur = pts[i];
      const Vec2& next = pts[(i + 1) % pts.size()];
      const Vec2 a = cur - prev;
      const Vec2 b = next - cur;
      if (std::abs(a.x() * b.y() - a.y() * b.x()) <= tol * std::max(1.0, a.norm() * b.norm()) && a.dot(b) > 0.0) {
        pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  return pts;
}

/// Boundary polygons of the horizontal surface at `surface_height`. Triangles
/// whose three vertices lie within `height_tolerance` of that height are merged;
/// edges used by a single selected triangle form the boundary loops. Outer loops
/// come back counter-clockwise, holes clockwise with `hole = true`.
inline std::vector<Polygon2> extract_floor_boundary(const TriMesh& floor_mesh, double surface_height,
                                                    double height_tolerance = 0.01) {
  // Weld coincident vertices so duplicated STL corners share an id.
  std::map<std::pair<std::int64_t, std::int64_t>, std::uint32_t> weld;
  std::vector<Vec2> welded;
  auto weld_id = [&](const Vec3& v) {
    const auto key = std::make_pair(std::llround(v.x() * 1e7), std::llround(v.y() * 1e7));
    auto [it, inserted] = weld.try_emplace(key, static_cast<std::uint32_t>(welded.size()));
    if (inserted) welded.emplace_back(v.x(), v.y());
    return it->second;
  };

  std::map<std::pair<std::uint32_t, std::uint32_t>, int> directed;
  for (const auto& tri : floor_mesh.triangles) {
    bool flat = true;
    for (auto idx : tri) flat = flat && std::abs(floor_mesh.vertices[idx].z() - surface_height) <= height_tolerance;
    if (!flat) continue;
    std::array<std::uint32_t, 3> ids{weld_id(floor_mesh.vertices[tri[0]]), weld_id(floor_mesh.vertices[tri[1]]),
                                     weld_id(floor_mesh.vertices[tri[2]])};
    if (ids[0] == ids[1] || ids[1] == ids[2] || ids[0] == ids[2]) continue;
    const Vec2 a = welded[ids[1]] - welded[ids[0]];
    const Vec2 b = welded[ids[2]] - welded[ids[0]];
    const double cross = a.x() * b.y() - a.y() * b.x();
    if (std::abs(cross) < 1e-12) continue;
    if (cross < 0.0) std::swap(ids[1], ids[2]);
    for (int e = 0; e < 3; ++e) directed[{ids[e], ids[(e + 1) % 3]}] += 1;
  }
  if (directed.empty()) throw Error("no floor surface found");

  std::multimap<std::uint32_t, std::uint32_t> next;
  for (const auto& [edge, count] : directed) {
    auto rev = directed.find({edge.second, edge.first});
    const int opposite = rev == directed.end() ? 0 : rev->second;
    for (int k = 0; k < count - opposite; ++k) next.emplace(edge.first, edge.second);
  }

  std::vector<Polygon2> polygons;
  while (!next.empty()) {
    auto it = next.begin();
    const std::uint32_t start = it->first;
    std::vector<Vec2> loop;
    std::uint32_t cur = start;
    while (true) {
      auto edge = next.find(cur);
      if (edge == next.end()) break;
      loop.push_back(welded[cur]);
      cur = edge->second;
      next.erase(edge);
      if (cur == start) break;
    }
    if (loop.size() < 3) continue;
    Polygon2 poly;
    poly.vertices = merge_collinear(std::move(loop));
    if (poly.vertices.size() < 3) continue;
    poly.hole = poly.signed_area() < 0.0;
    polygons.push_back(std::move(poly));
  }
  if (polygons.empty()) throw Error("no floor surface found");
  return polygons;
}

}  // namespace vantage
