#pragma once
////////////////////////////////////////////////////////////////////////////////
// cut.hpp
//
// Level-set interpolation, piecewise-linear reduction and marching-tetrahedra
// extraction of the low-order surface approximation. The active mesh is the
// set of background tetrahedra intersected by the zero set of the linearized
// level set. Cut-triangle vertices remember the background edge they sit on,
// which makes watertightness checks and cross-element matching exact integer
// operations.
////////////////////////////////////////////////////////////////////////////////

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <vector>

#include "tracefem/fem.hpp"
#include "tracefem/geometry.hpp"
#include "tracefem/mesh.hpp"

namespace tracefem {

using EdgeKey = std::array<int, 2>;  // sorted global vertex ids

struct CutTriangle {
  std::array<Vec3, 3> v;
  std::array<EdgeKey, 3> on_edge;  // background edge carrying each vertex
  double area = 0.0;
};

struct CutTopology {
  std::vector<int> active_tets;                 // ascending background tet ids
  std::vector<std::array<int8_t, 4>> signs;     // per active tet, +1/-1 per vertex
  std::vector<Vec3> n_lin;                      // per active tet, unit
  std::vector<CutTriangle> tris;                // flat list
  std::vector<std::pair<int, int>> tri_range;   // per active tet [begin, end)
  int degenerate_dropped = 0;

  int n_active() const { return static_cast<int>(active_tets.size()); }
  std::span<const CutTriangle> triangles_of(int e) const {
    return {tris.data() + tri_range[e].first,
            static_cast<size_t>(tri_range[e].second - tri_range[e].first)};
  }
};

namespace detail {

// Vertex level-set samples; NaN marks points where the oracle is singular
// (such points lie outside the tube, so their tets are never cut).
inline std::vector<double> vertex_levelset(const BackgroundMesh& mesh,
                                           const LevelSetOracle& oracle) {
  std::vector<double> v(mesh.n_vertices());
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    try {
      v[i] = oracle.phi(mesh.vertex(i));
    } catch (const DomainError&) {
      v[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return v;
}

// Exact zeros become positive: +1e-14 h, keeping facets single-counted.
inline double perturb_zero(double v, double h) { return v == 0.0 ? 1e-14 * h : v; }

inline std::vector<int> cut_tets(const BackgroundMesh& mesh,
                                 const std::vector<double>& vals) {
  std::vector<int> out;
  for (int t = 0; t < mesh.n_tets(); ++t) {
    const auto& c = mesh.tet(t);
    bool neg = false, pos = false, bad = false;
    for (int i = 0; i < 4; ++i) {
      const double v = perturb_zero(vals[c[i]], mesh.cube_edge());
      if (std::isnan(v)) bad = true;
      (v < 0.0 ? neg : pos) = true;
    }
    if (!bad && neg && pos) out.push_back(t);
  }
  return out;
}

}  // namespace detail

// Nodal interpolation of the exact level set into the degree-k_g Lagrange
// space on the tetrahedra cut by its zero set. Every node of a cut element
// must lie inside the oracle tube.
inline FEFunction interpolate_levelset(const BackgroundMesh& mesh,
                                       const LevelSetOracle& oracle, int kg) {
  if (kg < 1 || kg > 3) throw ConfigError("geometry degree k_g must be in 1..3");
  const auto vals = detail::vertex_levelset(mesh, oracle);
  auto space = std::make_shared<FESpace>(mesh, detail::cut_tets(mesh, vals), kg);
  FEFunction phi(space, 1);
  for (int d = 0; d < space->n_dofs(); ++d) {
    const Vec3& x = space->dof_coord(d);
    if (!oracle.in_tube(x))
      throw GeometryError("Lagrange node of a cut element outside the level-set tube");
    phi.coeffs[d] = oracle.phi(x);
  }
  return phi;
}

// Piecewise-linear nodal interpolation: vertex values kept, higher-order
// nodes dropped.
inline FEFunction linearize(const FEFunction& phi_h) {
  const FESpace& s = *phi_h.space;
  auto p1 = std::make_shared<FESpace>(s.mesh(), s.tet_ids(), 1);
  FEFunction out(p1, 1);
  for (int e = 0; e < s.n_elems(); ++e) {
    // Vertices are the degree-k nodes with barycentric weight k on one vertex;
    // in the equispaced ordering they are locals 0, k, (k+1)(k+2)/2 - 1, last.
    for (int v = 0; v < 4; ++v) {
      const int d1 = p1->dof(e, v);
      // Match by coordinate signature: vertex nodes coincide between spaces.
      for (int i = 0; i < s.nodes_per_elem(); ++i) {
        const auto& bw = s.basis().node_bary(i);
        if (bw[v] == s.degree()) {
          out.coeffs[d1] = phi_h.coeffs[s.dof(e, i)];
          break;
        }
      }
    }
  }
  return out;
}

// Marching tetrahedra on the linearized level set. One triangle for 1-3 sign
// splits, two (split along the shorter quad diagonal) for 2-2 splits.
inline CutTopology extract_cut(const BackgroundMesh& mesh, const FEFunction& phi_lin) {
  if (phi_lin.space->degree() != 1)
    throw ConfigError("extract_cut expects a piecewise-linear level set");
  const FESpace& space = *phi_lin.space;
  const double h = mesh.cube_edge();
  const double area_eps = 1e-14 * h * h;

  CutTopology cut;
  cut.active_tets = space.tet_ids();
  cut.signs.resize(space.n_elems());
  cut.n_lin.resize(space.n_elems());
  cut.tri_range.resize(space.n_elems());

  for (int e = 0; e < space.n_elems(); ++e) {
    const int t = space.tet_of(e);
    const auto& conn = mesh.tet(t);
    const auto verts = mesh.tet_vertices(t);

    std::array<double, 4> val;
    for (int i = 0; i < 4; ++i)
      val[i] = detail::perturb_zero(phi_lin.coeffs[space.dof(e, i)], h);

    // Constant gradient of the linear interpolant.
    Vec3 dref(val[1] - val[0], val[2] - val[0], val[3] - val[0]);
    Vec3 grad = space.elem_jacobian_invT(e) * dref;
    const double gn = grad.norm();
    if (gn == 0.0) throw GeometryError("vanishing linearized level-set gradient");
    cut.n_lin[e] = grad / gn;

    std::array<int, 4> neg, pos;
    int nneg = 0, npos = 0;
    for (int i = 0; i < 4; ++i) {
      cut.signs[e][i] = val[i] < 0.0 ? -1 : 1;
      (val[i] < 0.0 ? neg[nneg++] : pos[npos++]) = i;
    }
    if (nneg == 0 || nneg == 4)
      throw GeometryError("uncut tetrahedron in the active set");

    const auto crossing = [&](int a, int b, Vec3& x, EdgeKey& key) {
      int ga = conn[a], gb = conn[b];
      double va = val[a], vb = val[b];
      if (ga > gb) {
        std::swap(ga, gb);
        std::swap(va, vb);
      }
      const Vec3 xa = mesh.vertex(ga), xb = mesh.vertex(gb);
      const double s = va / (va - vb);
      x = xa + s * (xb - xa);
      key = {ga, gb};
    };

    const int begin = static_cast<int>(cut.tris.size());
    const auto emit = [&](const std::array<Vec3, 3>& v,
                          const std::array<EdgeKey, 3>& keys) {
      CutTriangle tri;
      tri.v = v;
      tri.on_edge = keys;
      Vec3 cr = (tri.v[1] - tri.v[0]).cross(tri.v[2] - tri.v[0]);
      tri.area = 0.5 * cr.norm();
      if (tri.area < area_eps) {
        ++cut.degenerate_dropped;
        return;
      }
      if (cr.dot(cut.n_lin[e]) < 0.0) {
        std::swap(tri.v[1], tri.v[2]);
        std::swap(tri.on_edge[1], tri.on_edge[2]);
      }
      cut.tris.push_back(tri);
    };

    if (nneg == 1 || nneg == 3) {
      const int apex = (nneg == 1) ? neg[0] : pos[0];
      const std::array<int, 3> others =
          (nneg == 1) ? std::array<int, 3>{pos[0], pos[1], pos[2]}
                      : std::array<int, 3>{neg[0], neg[1], neg[2]};
      std::array<Vec3, 3> x;
      std::array<EdgeKey, 3> k;
      for (int i = 0; i < 3; ++i) crossing(apex, others[i], x[i], k[i]);
      emit(x, k);
    } else {  // 2-2 split: quad with cyclic corners ac, ad, bd, bc
      const int a = neg[0], b = neg[1], c = pos[0], d = pos[1];
      Vec3 xac, xad, xbd, xbc;
      EdgeKey kac, kad, kbd, kbc;
      crossing(a, c, xac, kac);
      crossing(a, d, xad, kad);
      crossing(b, d, xbd, kbd);
      crossing(b, c, xbc, kbc);
      if ((xac - xbd).squaredNorm() <= (xad - xbc).squaredNorm()) {
        emit({xac, xad, xbd}, {kac, kad, kbd});
        emit({xac, xbd, xbc}, {kac, kbd, kbc});
      } else {
        emit({xad, xbd, xbc}, {kad, kbd, kbc});
        emit({xad, xbc, xac}, {kad, kbc, kac});
      }
    }
    cut.tri_range[e] = {begin, static_cast<int>(cut.tris.size())};
  }
  return cut;
}

inline double gamma_lin_area(const CutTopology& cut) {
  double a = 0.0;
  for (const auto& t : cut.tris) a += t.area;
  return a;
}

// Number of cut-triangle edges not shared by exactly two triangles. Edges are
// identified by the pair of background edges carrying their endpoints.
inline int watertight_defects(const CutTopology& cut) {
  std::map<std::array<EdgeKey, 2>, int> count;
  for (const auto& tri : cut.tris)
    for (int i = 0; i < 3; ++i) {
      std::array<EdgeKey, 2> ek = {tri.on_edge[i], tri.on_edge[(i + 1) % 3]};
      if (ek[1] < ek[0]) std::swap(ek[0], ek[1]);
      ++count[ek];
    }
  int defects = 0;
  for (const auto& [key, c] : count)
    if (c != 2) ++defects;
  return defects;
}

// Debug dump of the planar surface as legacy VTK POLYDATA.
inline void write_gamma_lin_vtk(const CutTopology& cut, const std::string& path) {
  std::ofstream os(path);
  os << "# vtk DataFile Version 3.0\ngamma_lin\nASCII\nDATASET POLYDATA\n";
  os << "POINTS " << 3 * cut.tris.size() << " double\n";
  for (const auto& t : cut.tris)
    for (const auto& v : t.v) os << v.x() << " " << v.y() << " " << v.z() << "\n";
  os << "POLYGONS " << cut.tris.size() << " " << 4 * cut.tris.size() << "\n";
  for (size_t i = 0; i < cut.tris.size(); ++i)
    os << "3 " << 3 * i << " " << 3 * i + 1 << " " << 3 * i + 2 << "\n";
}

}  // namespace tracefem
