#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>

#include "vantage/geometry.hpp"

namespace vantage {

namespace detail {

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Strips '#' comments and returns the next non-empty line.
inline bool next_off_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

}  // namespace detail

/// ASCII STL. Identical vertex coordinates are shared.
inline TriMesh read_stl_ascii(std::istream& in, const std::string& name = "<stl>") {
  TriMesh mesh;
  std::map<std::array<double, 3>, std::uint32_t> index;
  std::string token;
  std::array<std::uint32_t, 3> tri{};
  int corner = 0;
  bool solid = false;
  while (in >> token) {
    token = detail::lower(token);
    if (token == "solid") {
      solid = true;
      std::string rest;
      std::getline(in, rest);
    } else if (token == "vertex") {
      std::array<double, 3> xyz{};
      if (!(in >> xyz[0] >> xyz[1] >> xyz[2])) throw Error(name + ": malformed vertex");
      auto [it, inserted] = index.try_emplace(xyz, static_cast<std::uint32_t>(mesh.vertices.size()));
      if (inserted) mesh.vertices.emplace_back(xyz[0], xyz[1], xyz[2]);
      if (corner > 2) throw Error(name + ": facet with more than 3 vertices");
      tri[corner++] = it->second;
    } else if (token == "endloop") {
      if (corner != 3) throw Error(name + ": facet without 3 vertices");
      mesh.triangles.push_back(tri);
      corner = 0;
    }
  }
  if (!solid) throw Error(name + ": not an ASCII STL file");
  try {
    mesh.validate();
  } catch (const Error& e) {
    throw Error(name + ": " + e.what());
  }
  return mesh;
}

/// OFF; polygons with more than 3 vertices are fan-triangulated.
inline TriMesh read_off(std::istream& in, const std::string& name = "<off>") {
  std::string line;
  if (!detail::next_off_line(in, line)) throw Error(name + ": empty OFF file");
  std::istringstream header(line);
  std::string magic;
  header >> magic;
  if (magic.rfind("OFF", 0) != 0) throw Error(name + ": missing OFF header");
  std::size_t nv = 0, nf = 0, ne = 0;
  if (!(header >> nv >> nf >> ne)) {
    if (!detail::next_off_line(in, line)) throw Error(name + ": missing OFF counts");
    std::istringstream counts(line);
    if (!(counts >> nv >> nf)) throw Error(name + ": malformed OFF counts");
  }
  TriMesh mesh;
  mesh.vertices.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    if (!detail::next_off_line(in, line)) throw Error(name + ": truncated vertex list");
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x >> y >> z)) throw Error(name + ": malformed vertex " + std::to_string(i));
    mesh.vertices.emplace_back(x, y, z);
  }
  for (std::size_t f = 0; f < nf; ++f) {
    if (!detail::next_off_line(in, line)) throw Error(name + ": truncated face list");
    std::istringstream ls(line);
    std::size_t k = 0;
    if (!(ls >> k) || k < 3) throw Error(name + ": malformed face " + std::to_string(f));
    std::vector<std::uint32_t> ids(k);
    for (auto& id : ids)
      if (!(ls >> id)) throw Error(name + ": malformed face " + std::to_string(f));
    for (std::size_t j = 1; j + 1 < k; ++j) mesh.triangles.push_back({ids[0], ids[j], ids[j + 1]});
  }
  try {
    mesh.validate();
  } catch (const Error& e) {
    throw Error(name + ": " + e.what());
  }
  return mesh;
}

/// Dispatches on extension (.stl / .off, case-insensitive).
inline TriMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh file " + path.string());
  const auto ext = detail::lower(path.extension().string());
  if (ext == ".stl") return read_stl_ascii(in, path.string());
  if (ext == ".off") return read_off(in, path.string());
  throw Error("unsupported mesh format " + path.string());
}

inline void write_off(std::ostream& out, const TriMesh& mesh) {
  out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.triangles.size() << " 0\n";
  out << std::setprecision(17);
  for (const auto& v : mesh.vertices) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

inline void write_stl_ascii(std::ostream& out, const TriMesh& mesh, const std::string& solid_name = "mesh") {
  out << "solid " << solid_name << '\n' << std::setprecision(17);
  for (const auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    const Vec3 n = (b - a).cross(c - a).normalized();
    out << "  facet normal " << n.x() << ' ' << n.y() << ' ' << n.z() << "\n    outer loop\n";
    for (const Vec3* v : {&a, &b, &c}) out << "      vertex " << v->x() << ' ' << v->y() << ' ' << v->z() << '\n';
    out << "    endloop\n  endfacet\n";
  }
  out << "endsolid " << solid_name << '\n';
}

}  // namespace vantage
