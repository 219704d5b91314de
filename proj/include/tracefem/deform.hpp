#pragma once
////////////////////////////////////////////////////////////////////////////////
// deform.hpp
//
// Parametric mesh transformation of order k_g on the active mesh. Each
// Lagrange node xi of an active element is moved along the constant
// element direction G_T (the normalized gradient of the linearized level
// set) by the in-absolute-value-smallest root d of
//
//     source(xi + d G_T) = phi_lin(xi),
//
// where source is the higher-order level-set interpolant (elementwise
// polynomial extension) or the exact level set. Elementwise nodal values are
// averaged at shared nodes, so the deformation is a continuous FE function.
// The module also produces the mapped surface/volume quadrature geometry and
// the discrete normal and Weingarten fields.
////////////////////////////////////////////////////////////////////////////////

#include <cmath>
#include <vector>

#include "tracefem/cut.hpp"
#include "tracefem/fem.hpp"
#include "tracefem/geometry.hpp"
#include "tracefem/quadrature.hpp"

namespace tracefem {

enum class GeometrySource { Identity, FE, Exact };

struct MeshDeformation {
  FEFunction displacement;   // degree k_g vector FE function on the active tets
  int kg = 1;
  GeometrySource source = GeometrySource::Identity;
  double max_node_displacement = 0.0;

  const FESpace& space() const { return *displacement.space; }
  bool is_identity() const { return source == GeometrySource::Identity; }

  Vec3 theta(int e, const Vec3& x) const {
    if (is_identity()) return x;
    Vec3 d;
    eval_vector(displacement, e, space().to_reference(e, x), &d);
    return x + d;
  }

  // Theta and its full Jacobian at a physical point of element e.
  void theta_with_jacobian(int e, const Vec3& x, Vec3* y, Mat3* dtheta) const {
    if (is_identity()) {
      *y = x;
      *dtheta = Mat3::Identity();
      return;
    }
    Vec3 d;
    Mat3 g;
    eval_vector(displacement, e, space().to_reference(e, x), &d, &g);
    *y = x + d;
    *dtheta = Mat3::Identity() + g;
  }
};

// Safeguarded Newton with bisection fallback for source(x + t G) = target on
// the bracket [-2h, 2h]. SourceFn maps a point to (value, gradient).
template <class SourceFn>
double find_dtilde(const Vec3& x, const Vec3& G, SourceFn&& source, double target,
                   double h) {
  constexpr int kMaxIter = 50;
  constexpr double kTol = 1e-12;

  const auto eval = [&](double t) {
    const auto [v, g] = source(Vec3(x + t * G));
    return std::pair<double, double>(v - target, g.dot(G));
  };

  double t = 0.0;
  auto [g0, dg0] = eval(t);
  if (std::abs(g0) <= kTol) return t;

  double lo = -2.0 * h, hi = 2.0 * h;
  auto [glo, dglo] = eval(lo);
  auto [ghi, dghi] = eval(hi);
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  if ((glo < 0.0) == (ghi < 0.0))
    throw RootFindError("find_dtilde: no sign change on [-2h,2h] at x=(" +
                        std::to_string(x.x()) + "," + std::to_string(x.y()) + "," +
                        std::to_string(x.z()) + "), values " + std::to_string(glo) +
                        " / " + std::to_string(ghi));
  // Keep the bracket [lo, hi] with g(lo) < 0 < g(hi) orientation-free.
  double g = g0, dg = dg0;
  for (int it = 0; it < kMaxIter; ++it) {
    // Shrink the bracket with the current point.
    if ((g < 0.0) == (glo < 0.0)) {
      lo = t;
      glo = g;
    } else {
      hi = t;
      ghi = g;
    }
    double tn = t - g / dg;
    if (!std::isfinite(tn) || tn <= std::min(lo, hi) || tn >= std::max(lo, hi))
      tn = 0.5 * (lo + hi);
    t = tn;
    std::tie(g, dg) = eval(t);
    if (std::abs(g) <= kTol) return t;
  }
  throw RootFindError("find_dtilde: no convergence within 50 iterations");
}

// Build the order-k_g transformation. phi_h and phi_lin live on the active
// mesh; for k_g = 1 the transformation is the identity. With the FE source
// the root equation uses the elementwise polynomial extension of phi_h; the
// exact source replaces it by the level-set oracle (test oracle mode).
inline MeshDeformation build_theta(const BackgroundMesh& mesh, const CutTopology& cut,
                                   const FEFunction& phi_h, const FEFunction& phi_lin,
                                   const LevelSetOracle& oracle, int kg,
                                   GeometrySource source) {
  MeshDeformation def;
  def.kg = kg;
  def.displacement = FEFunction(phi_h.space, 3);
  if (kg == 1 || source == GeometrySource::Identity) {
    def.source = GeometrySource::Identity;
    return def;
  }
  def.source = source;

  const FESpace& space = *phi_h.space;
  const double h = mesh.cube_edge();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(3 * space.n_dofs());
  Eigen::VectorXi count = Eigen::VectorXi::Zero(space.n_dofs());

  for (int e = 0; e < space.n_elems(); ++e) {
    const Vec3 G = cut.n_lin[e];
    for (int i = 0; i < space.nodes_per_elem(); ++i) {
      const int dof = space.dof(e, i);
      const Vec3 xi = space.dof_coord(dof);
      double target;
      eval_scalar(phi_lin, e, space.to_reference(e, xi), &target);

      double dt;
      try {
        if (source == GeometrySource::Exact) {
          dt = find_dtilde(
              xi, G,
              [&](const Vec3& p) {
                return std::pair<double, Vec3>(oracle.phi(p), oracle.grad_phi(p));
              },
              target, h);
        } else {
          dt = find_dtilde(
              xi, G,
              [&](const Vec3& p) {
                double v;
                Vec3 g;
                eval_scalar(phi_h, e, space.to_reference(e, p), &v, &g);
                return std::pair<double, Vec3>(v, g);
              },
              target, h);
        }
      } catch (const RootFindError& err) {
        throw RootFindError(std::string(err.what()) + " (element " +
                            std::to_string(cut.active_tets[e]) + ")");
      }
      sum.segment<3>(3 * dof) += dt * G;
      count[dof] += 1;
    }
  }
  for (int d = 0; d < space.n_dofs(); ++d) {
    def.displacement.coeffs.segment<3>(3 * d) = sum.segment<3>(3 * d) / count[d];
    def.max_node_displacement = std::max(
        def.max_node_displacement, def.displacement.coeffs.segment<3>(3 * d).norm());
  }
  return def;
}

struct SurfQuadPoint {
  int elem;          // active-element index
  Vec3 ref;          // reference coords in the background tet
  Vec3 xlin;         // point on the planar surface (undeformed)
  Vec3 x;            // mapped point Theta(xlin)
  double w;          // weight including flat area and surface Jacobian
  Vec3 n_lin;
  Vec3 n_h;
  Mat3 dtheta_invT;  // DTheta^-T, for pushing gradients to the mapped frame
};

struct VolQuadPoint {
  int elem;
  Vec3 ref;
  Vec3 x;            // mapped point
  double w;          // weight including |det DTheta|
  Vec3 n_h;
  Mat3 dtheta_invT;
};

// Quadrature points of one element's surface triangles. Appends to out.
inline void element_surface_points(const CutTopology& cut, const MeshDeformation& def,
                                   const TriQuadRule& rule, int e,
                                   std::vector<SurfQuadPoint>& out) {
  const FESpace& space = def.space();
  for (const auto& tri : cut.triangles_of(e)) {
    for (size_t q = 0; q < rule.w.size(); ++q) {
      SurfQuadPoint p;
      p.elem = e;
      const auto& b = rule.bary[q];
      p.xlin = b[0] * tri.v[0] + b[1] * tri.v[1] + b[2] * tri.v[2];
      p.ref = space.to_reference(e, p.xlin);
      p.n_lin = cut.n_lin[e];
      if (def.is_identity()) {
        p.x = p.xlin;
        p.n_h = p.n_lin;
        p.dtheta_invT = Mat3::Identity();
        p.w = rule.w[q] * tri.area;
      } else {
        Mat3 dtheta;
        def.theta_with_jacobian(e, p.xlin, &p.x, &dtheta);
        const double det = dtheta.determinant();
        if (det <= 0.0)
          throw GeometryError("nonpositive deformation Jacobian on the surface");
        p.dtheta_invT = dtheta.inverse().transpose();
        const Vec3 v = p.dtheta_invT * p.n_lin;
        const double vn = v.norm();
        p.n_h = v / vn;
        p.w = rule.w[q] * tri.area * det * vn;
      }
      out.push_back(p);
    }
  }
}

// Quadrature points of one mapped element volume. Appends to out.
inline void element_volume_points(const BackgroundMesh& mesh, const CutTopology& cut,
                                  const MeshDeformation& def, const TetQuadRule& rule,
                                  int e, std::vector<VolQuadPoint>& out) {
  const FESpace& space = def.space();
  const auto verts = mesh.tet_vertices(cut.active_tets[e]);
  const double vol = mesh.tet_volume(cut.active_tets[e]);
  for (size_t q = 0; q < rule.w.size(); ++q) {
    VolQuadPoint p;
    p.elem = e;
    const auto& b = rule.bary[q];
    const Vec3 xq =
        b[0] * verts[0] + b[1] * verts[1] + b[2] * verts[2] + b[3] * verts[3];
    p.ref = space.to_reference(e, xq);
    if (def.is_identity()) {
      p.x = xq;
      p.n_h = cut.n_lin[e];
      p.dtheta_invT = Mat3::Identity();
      p.w = rule.w[q] * vol;
    } else {
      Mat3 dtheta;
      def.theta_with_jacobian(e, xq, &p.x, &dtheta);
      const double det = dtheta.determinant();
      if (det <= 0.0)
        throw GeometryError("nonpositive deformation Jacobian in the volume");
      p.dtheta_invT = dtheta.inverse().transpose();
      const Vec3 v = p.dtheta_invT * cut.n_lin[e];
      p.n_h = v / v.norm();
      p.w = rule.w[q] * vol * det;
    }
    out.push_back(p);
  }
}

inline std::vector<SurfQuadPoint> surface_quadrature(const CutTopology& cut,
                                                     const MeshDeformation& def,
                                                     int degree) {
  const auto& rule = triangle_rule(degree);
  std::vector<SurfQuadPoint> pts;
  for (int e = 0; e < cut.n_active(); ++e) element_surface_points(cut, def, rule, e, pts);
  return pts;
}

inline std::vector<VolQuadPoint> volume_quadrature(const BackgroundMesh& mesh,
                                                   const CutTopology& cut,
                                                   const MeshDeformation& def,
                                                   int degree) {
  const auto& rule = tet_rule(degree);
  std::vector<VolQuadPoint> pts;
  for (int e = 0; e < cut.n_active(); ++e)
    element_volume_points(mesh, cut, def, rule, e, pts);
  return pts;
}

// Parametric nodal interpolation: the coefficient at node xi is
// field(Theta(xi)).
template <class F>
FEFunction interpolate_parametric(FESpacePtr space, const MeshDeformation& def,
                                  F&& field) {
  FEFunction out(space, 1);
  std::vector<char> done(space->n_dofs(), 0);
  for (int e = 0; e < space->n_elems(); ++e)
    for (int i = 0; i < space->nodes_per_elem(); ++i) {
      const int d = space->dof(e, i);
      if (done[d]) continue;
      done[d] = 1;
      out.coeffs[d] = field(def.theta(e, space->dof_coord(d)));
    }
  return out;
}

template <class F>
FEFunction interpolate_parametric_vector(FESpacePtr space, const MeshDeformation& def,
                                         F&& field) {
  FEFunction out(space, 3);
  std::vector<char> done(space->n_dofs(), 0);
  for (int e = 0; e < space->n_elems(); ++e)
    for (int i = 0; i < space->nodes_per_elem(); ++i) {
      const int d = space->dof(e, i);
      if (done[d]) continue;
      done[d] = 1;
      out.coeffs.segment<3>(3 * d) = field(def.theta(e, space->dof_coord(d)));
    }
  return out;
}

// Normal approximation used in the penalty term: the normalized mapped
// gradient of the parametric degree-k_p interpolant of the exact level set.
struct PenaltyNormalField {
  FEFunction phi_tilde;

  Vec3 eval(int e, const Vec3& ref, const Mat3& dtheta_invT) const {
    double v;
    Vec3 g;
    eval_scalar(phi_tilde, e, ref, &v, &g);
    const Vec3 mg = dtheta_invT * g;
    const double n = mg.norm();
    if (n < 1e-12) throw GeometryError("vanishing penalty-normal gradient");
    return mg / n;
  }
};

inline PenaltyNormalField penalty_normal(const MeshDeformation& def,
                                         const LevelSetOracle& oracle, int kp) {
  if (kp < def.kg) throw ConfigError("penalty normal degree k_p must be >= k_g");
  auto space = std::make_shared<FESpace>(def.space().mesh(), def.space().tet_ids(), kp);
  PenaltyNormalField f;
  f.phi_tilde =
      interpolate_parametric(space, def, [&](const Vec3& y) { return oracle.phi(y); });
  return f;
}

// Discrete Weingarten map: full mapped gradient of the componentwise
// parametric degree-k_g interpolant of n_h (elementwise values averaged at
// shared nodes).
struct WeingartenField {
  FEFunction n_interp;

  Mat3 eval(int e, const Vec3& ref, const Mat3& dtheta_invT) const {
    Vec3 v;
    Mat3 g;
    eval_vector(n_interp, e, ref, &v, &g);
    return g * dtheta_invT.transpose();
  }
};

inline WeingartenField weingarten_h(const CutTopology& cut, const MeshDeformation& def) {
  const FESpace& space = def.space();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(3 * space.n_dofs());
  Eigen::VectorXi count = Eigen::VectorXi::Zero(space.n_dofs());
  for (int e = 0; e < space.n_elems(); ++e)
    for (int i = 0; i < space.nodes_per_elem(); ++i) {
      const int d = space.dof(e, i);
      Vec3 nh = cut.n_lin[e];
      if (!def.is_identity()) {
        Vec3 y;
        Mat3 dtheta;
        def.theta_with_jacobian(e, space.dof_coord(d), &y, &dtheta);
        const Vec3 v = dtheta.inverse().transpose() * cut.n_lin[e];
        nh = v / v.norm();
      }
      sum.segment<3>(3 * d) += nh;
      count[d] += 1;
    }
  WeingartenField f;
  f.n_interp = FEFunction(def.displacement.space, 3);
  for (int d = 0; d < space.n_dofs(); ++d)
    f.n_interp.coeffs.segment<3>(3 * d) = sum.segment<3>(3 * d) / count[d];
  return f;
}

// Value and mapped-frame gradient of an FE function at a physical point of
// the mapped element e (inverts Theta by Newton iteration).
inline void eval_fefunction(const FEFunction& f, const MeshDeformation& def, int e,
                            const Vec3& y, Vec3* value, Mat3* grad = nullptr) {
  const FESpace& space = *f.space;
  Vec3 x = y;
  Mat3 dtheta = Mat3::Identity();
  if (!def.is_identity()) {
    bool converged = false;
    for (int it = 0; it < 30; ++it) {
      Vec3 ty;
      def.theta_with_jacobian(e, x, &ty, &dtheta);
      const Vec3 r = ty - y;
      if (r.norm() < 1e-13) {
        converged = true;
        break;
      }
      x -= dtheta.inverse() * r;
    }
    if (!converged) throw DomainError("eval_fefunction: Theta inversion failed");
  }
  const Vec3 ref = space.to_reference(e, x);
  const double l0 = 1.0 - ref.sum();
  if (ref.minCoeff() < -1e-6 || l0 < -1e-6)
    throw DomainError("eval_fefunction: point not in the mapped element");
  Mat3 g;
  eval_vector(f, e, ref, value, grad ? &g : nullptr);
  if (grad) *grad = g * dtheta.inverse();
}

}  // namespace tracefem
