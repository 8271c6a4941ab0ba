// Copyright 2026 The glasspose Authors
// SPDX-License-Identifier: Apache-2.0

#include "glasspose/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "glasspose/error.hpp"

namespace glasspose {

namespace {

std::uint64_t EdgeKey(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

std::string ToLower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  if (vertices_.empty() || faces_.empty()) {
    Fail(ErrorCode::kParse, "mesh: no vertices or no faces");
  }
  const int n = static_cast<int>(vertices_.size());
  for (std::size_t i = 0; i < faces_.size(); ++i) {
    const Face& f = faces_[i];
    for (int idx : f) {
      if (idx < 0 || idx >= n) {
        Fail(ErrorCode::kParse, "mesh: face " + std::to_string(i) + " index out of range");
      }
    }
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
      Fail(ErrorCode::kParse, "mesh: degenerate face " + std::to_string(i) + " (repeated index)");
    }
  }
  for (const Vec3& v : vertices_) {
    if (!v.allFinite()) Fail(ErrorCode::kParse, "mesh: non-finite vertex");
    bounds_.Extend(v);
  }

  std::unordered_map<std::uint64_t, int> directed;
  directed.reserve(faces_.size() * 3);
  bool manifold = true;
  for (const Face& f : faces_) {
    for (int k = 0; k < 3; ++k) {
      if (++directed[EdgeKey(f[k], f[(k + 1) % 3])] > 1) manifold = false;
    }
  }
  if (manifold) {
    for (const auto& [key, count] : directed) {
      const int a = static_cast<int>(key >> 32);
      const int b = static_cast<int>(key & 0xffffffffu);
      if (directed.find(EdgeKey(b, a)) == directed.end()) {
        manifold = false;
        break;
      }
    }
  }
  closed_ = manifold;
  if (!closed_) {
    warnings_.push_back("mesh is not closed (some edge is not shared by exactly two consistently oriented faces)");
  }

  if (closed_) {
    double volume = 0.0;
    for (const Face& f : faces_) {
      volume += vertices_[f[0]].dot(vertices_[f[1]].cross(vertices_[f[2]]));
    }
    if (volume < 0.0) {
      for (Face& f : faces_) std::swap(f[1], f[2]);
      warnings_.push_back("mesh had inward winding; faces reoriented");
    }
  }

  face_normals_.reserve(faces_.size());
  for (std::size_t i = 0; i < faces_.size(); ++i) {
    const Face& f = faces_[i];
    const Vec3 cross = (vertices_[f[1]] - vertices_[f[0]]).cross(vertices_[f[2]] - vertices_[f[0]]);
    const double len = cross.norm();
    if (!(len > 0.0)) {
      Fail(ErrorCode::kParse, "mesh: degenerate face " + std::to_string(i) + " (zero area)");
    }
    face_normals_.push_back(cross / len);
  }

  diameter_ = MaxPairwiseDistance(vertices_);
  if (!(diameter_ > 0.0)) Fail(ErrorCode::kParse, "mesh: zero diameter");
}

void TriangleMesh::RequireClosed() const {
  if (!closed_) {
    Fail(ErrorCode::kMeshNotClosed, "refraction requires a closed, consistently oriented mesh");
  }
}

double MaxPairwiseDistance(std::span<const Vec3> points) {
  double best = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      best = std::max(best, (points[i] - points[j]).squaredNorm());
    }
  }
  return std::sqrt(best);
}

TriangleMesh ParseObj(const std::string& text) {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto parse_error = [&](const std::string& what) {
    Fail(ErrorCode::kParse, "obj line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) parse_error("malformed vertex");
      vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string tok;
      while (ls >> tok) {
        const std::string head = tok.substr(0, tok.find('/'));
        int idx = 0;
        try {
          std::size_t used = 0;
          idx = std::stoi(head, &used);
          if (used != head.size()) parse_error("bad face index '" + tok + "'");
        } catch (const std::logic_error&) {
          parse_error("bad face index '" + tok + "'");
        }
        if (idx == 0) parse_error("face index 0 is invalid");
        idx = idx > 0 ? idx - 1 : static_cast<int>(vertices.size()) + idx;
        poly.push_back(idx);
      }
      if (poly.size() < 3) parse_error("face with fewer than 3 vertices");
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        faces.push_back({poly[0], poly[k], poly[k + 1]});
      }
    }
  }
  return TriangleMesh(std::move(vertices), std::move(faces));
}

TriangleMesh ParsePly(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto parse_error = [](const std::string& what) { Fail(ErrorCode::kParse, "ply: " + what); };
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) parse_error("missing 'ply' magic");

  struct Element {
    std::string name;
    long count = 0;
    std::vector<std::string> props;
  };
  std::vector<Element> elements;
  bool ascii = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = fmt == "ascii";
    } else if (word == "element") {
      Element e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (word == "property") {
      if (elements.empty()) parse_error("property before element");
      std::string type;
      ls >> type;
      std::string name;
      if (type == "list") {
        std::string count_type, item_type;
        ls >> count_type >> item_type;
      }
      ls >> name;
      elements.back().props.push_back(name);
    } else if (word == "end_header") {
      break;
    }
  }
  if (!ascii) parse_error("only ASCII PLY is supported");

  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  for (const Element& e : elements) {
    for (long i = 0; i < e.count; ++i) {
      if (!std::getline(in, line)) parse_error("unexpected end of data in element " + e.name);
      std::istringstream ls(line);
      if (e.name == "vertex") {
        Vec3 v = Vec3::Zero();
        int found = 0;
        for (const std::string& p : e.props) {
          double value;
          if (!(ls >> value)) parse_error("malformed vertex line");
          if (p == "x") v.x() = value, found |= 1;
          if (p == "y") v.y() = value, found |= 2;
          if (p == "z") v.z() = value, found |= 4;
        }
        if (found != 7) parse_error("vertex element lacks x/y/z");
        vertices.push_back(v);
      } else if (e.name == "face") {
        int n = 0;
        if (!(ls >> n) || n < 3) parse_error("face with fewer than 3 vertices");
        std::vector<int> poly(n);
        for (int& idx : poly) {
          if (!(ls >> idx)) parse_error("malformed face line");
        }
        for (int k = 1; k + 1 < n; ++k) faces.push_back({poly[0], poly[k], poly[k + 1]});
      }
    }
  }
  return TriangleMesh(std::move(vertices), std::move(faces));
}

TriangleMesh LoadMesh(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) Fail(ErrorCode::kIo, "cannot open mesh file " + path.string());
  std::stringstream buffer;
  buffer << file.rdbuf();
  const std::string ext = ToLower(path.extension().string());
  if (ext == ".obj") return ParseObj(buffer.str());
  if (ext == ".ply") return ParsePly(buffer.str());
  Fail(ErrorCode::kParse, "unsupported mesh extension '" + ext + "' (expected .obj or .ply)");
}

void SaveObj(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out.precision(17);
  for (const Vec3& v : mesh.vertices()) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const Face& f : mesh.faces()) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  if (!out) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

TriangleMesh MakeIcosphere(int subdivisions, double radius) {
  if (subdivisions < 0 || !(radius > 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "icosphere: need subdivisions >= 0 and radius > 0");
  }
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
                         {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
                         {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (Vec3& p : v) p.normalize();
  std::vector<Face> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoints;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoints.find(key);
      if (it != midpoints.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int idx = static_cast<int>(v.size()) - 1;
      midpoints.emplace(key, idx);
      return idx;
    };
    std::vector<Face> next;
    next.reserve(faces.size() * 4);
    for (const Face& f : faces) {
      const int ab = midpoint(f[0], f[1]);
      const int bc = midpoint(f[1], f[2]);
      const int ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  for (Vec3& p : v) p *= radius;
  return TriangleMesh(std::move(v), std::move(faces));
}

TriangleMesh MakeBox(const Vec3& size) {
  if (!(size.minCoeff() > 0.0)) Fail(ErrorCode::kInvalidArgument, "box: sizes must be positive");
  std::vector<Vec3> v;
  for (int i = 0; i < 8; ++i) {
    v.emplace_back(((i & 1) - 0.5) * size.x(), (((i >> 1) & 1) - 0.5) * size.y(),
                   (((i >> 2) & 1) - 0.5) * size.z());
  }
  std::vector<Face> faces = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 5}, {0, 5, 4},
                             {2, 6, 7}, {2, 7, 3}, {0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}};
  return TriangleMesh(std::move(v), std::move(faces));
}

TriangleMesh MakeCylinder(double radius, double height, int segments) {
  if (!(radius > 0.0) || !(height > 0.0) || segments < 3) {
    Fail(ErrorCode::kInvalidArgument, "cylinder: need radius, height > 0 and segments >= 3");
  }
  const int n = segments;
  std::vector<Vec3> v;
  v.reserve(2 * n + 2);
  for (int ring = 0; ring < 2; ++ring) {
    const double z = ring == 0 ? -0.5 * height : 0.5 * height;
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * M_PI * i / n;
      v.emplace_back(radius * std::cos(a), radius * std::sin(a), z);
    }
  }
  const int bottom = 2 * n;
  const int top = 2 * n + 1;
  v.emplace_back(0.0, 0.0, -0.5 * height);
  v.emplace_back(0.0, 0.0, 0.5 * height);
  std::vector<Face> faces;
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    faces.push_back({i, j, n + j});
    faces.push_back({i, n + j, n + i});
    faces.push_back({bottom, j, i});
    faces.push_back({top, n + i, n + j});
  }
  return TriangleMesh(std::move(v), std::move(faces));
}

}  // namespace glasspose
