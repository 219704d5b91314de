#pragma once
////////////////////////////////////////////////////////////////////////////////
// mesh.hpp
//
// Structured tetrahedral background mesh of an axis-aligned box. Each grid
// cube is split into six tetrahedra by the Kuhn (Freudenthal) subdivision,
// which is conforming across cubes and shape regular under uniform
// refinement. The mesh is immutable after construction.
////////////////////////////////////////////////////////////////////////////////

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "tracefem/errors.hpp"

namespace tracefem {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Box {
  Vec3 lo{-1.5, -1.5, -1.5};
  Vec3 hi{1.5, 1.5, 1.5};
};

class BackgroundMesh {
 public:
  BackgroundMesh(std::vector<Vec3> vertices, std::vector<std::array<int, 4>> tets,
                 int level, double cube_edge)
      : vertices_(std::move(vertices)),
        tets_(std::move(tets)),
        level_(level),
        cube_edge_(cube_edge) {}

  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_tets() const { return static_cast<int>(tets_.size()); }
  int level() const { return level_; }
  // Nominal mesh size h used in all parameter scalings.
  double cube_edge() const { return cube_edge_; }

  const Vec3& vertex(int v) const { return vertices_[v]; }
  const std::array<int, 4>& tet(int t) const { return tets_[t]; }
  const std::vector<std::array<int, 4>>& tets() const { return tets_; }

  std::array<Vec3, 4> tet_vertices(int t) const {
    const auto& c = tets_[t];
    return {vertices_[c[0]], vertices_[c[1]], vertices_[c[2]], vertices_[c[3]]};
  }

  double tet_volume(int t) const {
    const auto v = tet_vertices(t);
    return (v[1] - v[0]).cross(v[2] - v[0]).dot(v[3] - v[0]) / 6.0;
  }

 private:
  std::vector<Vec3> vertices_;
  std::vector<std::array<int, 4>> tets_;
  int level_;
  double cube_edge_;
};

// Grid of cubes of edge 0.5*2^-level covering the box, six Kuhn tets per
// cube, all positively oriented. The box extents must be (near) integer
// multiples of the cube edge.
inline BackgroundMesh build_background_mesh(const Box& box, int level) {
  if (level < 0) throw ConfigError("refinement level must be >= 0");
  if (level > 7) throw ResourceError("refinement level > 7 exceeds resource guard");
  const Vec3 ext = box.hi - box.lo;
  if (ext.minCoeff() <= 0.0) throw ConfigError("empty bounding box");

  const double edge = 0.5 * std::pow(2.0, -level);
  std::array<int, 3> n;
  for (int a = 0; a < 3; ++a) {
    n[a] = static_cast<int>(std::llround(ext[a] / edge));
    if (n[a] < 1 || std::abs(n[a] * edge - ext[a]) > 1e-9)
      throw ConfigError("box extent is not a multiple of the cube edge");
  }

  const auto vid = [&](int i, int j, int k) {
    return (k * (n[1] + 1) + j) * (n[0] + 1) + i;
  };

  std::vector<Vec3> vertices;
  vertices.reserve(static_cast<size_t>(n[0] + 1) * (n[1] + 1) * (n[2] + 1));
  for (int k = 0; k <= n[2]; ++k)
    for (int j = 0; j <= n[1]; ++j)
      for (int i = 0; i <= n[0]; ++i)
        vertices.emplace_back(box.lo[0] + i * edge, box.lo[1] + j * edge,
                              box.lo[2] + k * edge);

  // The six permutations of (x,y,z) steps; odd permutations get their last
  // two vertices swapped to keep the signed volume positive.
  static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                      {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  static constexpr bool odd[6] = {false, true, true, false, false, true};

  std::vector<std::array<int, 4>> tets;
  tets.reserve(static_cast<size_t>(n[0]) * n[1] * n[2] * 6);
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i) {
        std::array<int, 3> c0 = {i, j, k};
        for (int p = 0; p < 6; ++p) {
          std::array<std::array<int, 3>, 4> corner;
          corner[0] = c0;
          for (int s = 0; s < 3; ++s) {
            corner[s + 1] = corner[s];
            corner[s + 1][perms[p][s]] += 1;
          }
          std::array<int, 4> t;
          for (int s = 0; s < 4; ++s)
            t[s] = vid(corner[s][0], corner[s][1], corner[s][2]);
          if (odd[p]) std::swap(t[2], t[3]);
          tets.push_back(t);
        }
      }

  return BackgroundMesh(std::move(vertices), std::move(tets), level, edge);
}

// Faces keyed by their sorted vertex triple; values are the incident tets.
using FaceKey = std::array<int, 3>;

inline std::map<FaceKey, std::vector<int>> face_adjacency(const BackgroundMesh& mesh) {
  static constexpr int faces[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
  std::map<FaceKey, std::vector<int>> adj;
  for (int t = 0; t < mesh.n_tets(); ++t) {
    const auto& c = mesh.tet(t);
    for (const auto& f : faces) {
      FaceKey key = {c[f[0]], c[f[1]], c[f[2]]};
      std::sort(key.begin(), key.end());
      adj[key].push_back(t);
    }
  }
  return adj;
}

}  // namespace tracefem
