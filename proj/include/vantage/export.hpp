#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "vantage/pipeline.hpp"

namespace vantage {

struct PlyData {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> colors;   ///< empty when the file has no colour
  std::vector<std::array<int, 2>> edges;
};

inline void write_ply(const std::filesystem::path& path, const PlyData& data) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  const bool colored = !data.colors.empty();
  if (colored && data.colors.size() != data.vertices.size()) throw Error("write_ply: colour count mismatch");
  out << "ply\nformat ascii 1.0\nelement vertex " << data.vertices.size() << "\nproperty float x\nproperty float y\n"
      << "property float z\n";
  if (colored) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (!data.edges.empty()) out << "element edge " << data.edges.size() << "\nproperty int vertex1\nproperty int vertex2\n";
  out << "end_header\n" << std::setprecision(9);
  for (std::size_t i = 0; i < data.vertices.size(); ++i) {
    const auto& v = data.vertices[i];
    out << v.x() << ' ' << v.y() << ' ' << v.z();
    if (colored) out << ' ' << data.colors[i][0] << ' ' << data.colors[i][1] << ' ' << data.colors[i][2];
    out << '\n';
  }
  for (const auto& e : data.edges) out << e[0] << ' ' << e[1] << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

/// Reads the ASCII subset written by write_ply().
inline PlyData read_ply(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "ply") throw Error(path.string() + ": not a PLY file");
  std::size_t vertex_count = 0, edge_count = 0;
  int vertex_props = 0;
  std::string current;
  while (std::getline(in, line) && line != "end_header") {
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt != "ascii") throw Error(path.string() + ": only ascii PLY is supported");
    } else if (word == "element") {
      std::size_t n = 0;
      ss >> current >> n;
      (current == "vertex" ? vertex_count : edge_count) = n;
    } else if (word == "property" && current == "vertex") {
      ++vertex_props;
    }
  }
  if (vertex_props != 3 && vertex_props != 6) throw Error(path.string() + ": unsupported vertex layout");
  PlyData data;
  for (std::size_t i = 0; i < vertex_count; ++i) {
    Vec3 v;
    in >> v.x() >> v.y() >> v.z();
    data.vertices.push_back(v);
    if (vertex_props == 6) {
      std::array<int, 3> c{};
      in >> c[0] >> c[1] >> c[2];
      data.colors.push_back(c);
    }
  }
  for (std::size_t i = 0; i < edge_count; ++i) {
    std::array<int, 2> e{};
    in >> e[0] >> e[1];
    data.edges.push_back(e);
  }
  if (!in) throw Error(path.string() + ": truncated PLY");
  return data;
}

/// Apex plus the four far-plane corners, with the eight pyramid edges.
inline void append_frustum(PlyData& data, const CameraView& view) {
  const int base = static_cast<int>(data.vertices.size());
  const auto& in = view.intrinsics;
  const double tx = std::tan(0.5 * in.horizontal_fov);
  const double ty = std::tan(0.5 * in.vertical_fov);
  // Far corners sit at range max_range along each corner ray.
  data.vertices.push_back(view.position());
  for (const auto& [sx, sy] : std::array<std::array<double, 2>, 4>{{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}}) {
    const Vec3 dir = Vec3(sx * tx, sy * ty, 1.0).normalized();
    data.vertices.push_back(view.pose.apply(in.max_range * dir));
  }
  for (int k = 1; k <= 4; ++k) {
    data.edges.push_back({base, base + k});
    data.edges.push_back({base + k, base + (k % 4) + 1});
  }
}

/// Writes envelope.ply, frusta.ply, target_visibility.ply (place runs; visible
/// points green, hidden red) and report.json into `dir`.
inline void export_geometry(const RunResult& run, const std::filesystem::path& dir, bool include_timing = false) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw Error("cannot create directory " + dir.string());

  write_ply(dir / "envelope.ply", PlyData{run.artifacts.envelope.points, {}, {}});

  PlyData frusta;
  for (const auto& v : run.artifacts.views) append_frustum(frusta, v);
  write_ply(dir / "frusta.ply", frusta);

  if (const auto& t = run.artifacts.target_points) {
    PlyData pts;
    for (std::size_t s = 0; s < t->states(); ++s)
      for (std::size_t k = 0; k < t->per_state[s].size(); ++k) {
        pts.vertices.push_back(t->per_state[s][k]);
        pts.colors.push_back(run.artifacts.visible[s].test(k) ? std::array<int, 3>{0, 200, 0}
                                                               : std::array<int, 3>{220, 0, 0});
      }
    write_ply(dir / "target_visibility.ply", pts);
  }

  std::ofstream out(dir / "report.json");
  if (!out) throw Error("cannot write " + (dir / "report.json").string());
  out << run.report.to_json(include_timing).dump(2) << '\n';
}

}  // namespace vantage
