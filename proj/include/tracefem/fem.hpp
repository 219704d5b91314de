#pragma once
////////////////////////////////////////////////////////////////////////////////
// fem.hpp
//
// Continuous Lagrange finite elements of degree 1..4 on a subset of the
// background tetrahedra (the active mesh). Shape functions use equispaced
// nodes on the reference tetrahedron and are represented in the monomial
// basis through an inverted Vandermonde matrix. Global dofs are identified
// by integer barycentric signatures over global vertex ids, which makes the
// matching across shared faces/edges/vertices exact.
////////////////////////////////////////////////////////////////////////////////

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "tracefem/errors.hpp"
#include "tracefem/mesh.hpp"

namespace tracefem {

class LagrangeBasis {
 public:
  explicit LagrangeBasis(int degree) : degree_(degree) {
    if (degree < 1 || degree > 4)
      throw ConfigError("Lagrange basis supports degrees 1..4");
    for (int z = 0; z <= degree; ++z)
      for (int y = 0; y <= degree - z; ++y)
        for (int x = 0; x <= degree - z - y; ++x) {
          nodes_.emplace_back(double(x) / degree, double(y) / degree,
                              double(z) / degree);
          bary_.push_back({degree - x - y - z, x, y, z});
          expo_.push_back({x, y, z});
        }
    n_ = static_cast<int>(nodes_.size());

    Eigen::MatrixXd vand(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < n_; ++k) vand(i, k) = monomial(k, nodes_[i]);
    coeff_ = vand.inverse().transpose();  // N_j(p) = sum_k coeff_(j,k) m_k(p)
  }

  int degree() const { return degree_; }
  int size() const { return n_; }
  const std::vector<Vec3>& nodes() const { return nodes_; }
  // Integer barycentric weights of each node w.r.t. the 4 vertices, sum = degree.
  const std::array<int, 4>& node_bary(int i) const { return bary_[i]; }

  void eval(const Vec3& p, std::span<double> values) const {
    Eigen::VectorXd m(n_);
    for (int k = 0; k < n_; ++k) m[k] = monomial(k, p);
    Eigen::Map<Eigen::VectorXd>(values.data(), n_) = coeff_ * m;
  }

  // Values and reference gradients.
  void eval_grad(const Vec3& p, std::span<double> values, std::span<Vec3> grads) const {
    Eigen::VectorXd m(n_);
    Eigen::MatrixXd dm(n_, 3);
    for (int k = 0; k < n_; ++k) {
      m[k] = monomial(k, p);
      for (int a = 0; a < 3; ++a) dm(k, a) = dmonomial(k, a, p);
    }
    Eigen::Map<Eigen::VectorXd>(values.data(), n_) = coeff_ * m;
    Eigen::MatrixXd g = coeff_ * dm;
    for (int j = 0; j < n_; ++j) grads[j] = g.row(j).transpose();
  }

  static const LagrangeBasis& get(int degree) {
    static std::array<LagrangeBasis, 4> cache = {
        LagrangeBasis(1), LagrangeBasis(2), LagrangeBasis(3), LagrangeBasis(4)};
    if (degree < 1 || degree > 4)
      throw ConfigError("Lagrange basis supports degrees 1..4");
    return cache[degree - 1];
  }

 private:
  double monomial(int k, const Vec3& p) const {
    const auto& e = expo_[k];
    return ipow(p.x(), e[0]) * ipow(p.y(), e[1]) * ipow(p.z(), e[2]);
  }
  double dmonomial(int k, int axis, const Vec3& p) const {
    auto e = expo_[k];
    if (e[axis] == 0) return 0.0;
    const double c = e[axis];
    e[axis] -= 1;
    return c * ipow(p.x(), e[0]) * ipow(p.y(), e[1]) * ipow(p.z(), e[2]);
  }
  static double ipow(double b, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
  }

  int degree_, n_ = 0;
  std::vector<Vec3> nodes_;
  std::vector<std::array<int, 4>> bary_;
  std::vector<std::array<int, 3>> expo_;
  Eigen::MatrixXd coeff_;
};

// Shape function values/gradients at a point of the reference tetrahedron,
// validated. This is the checked public entry; interior code paths that
// evaluate polynomial extensions outside the element use the basis directly.
inline void eval_basis(int degree, const Vec3& ref_point, std::span<double> values,
                       std::span<Vec3> grads) {
  const double l0 = 1.0 - ref_point.sum();
  if (ref_point.minCoeff() < -1e-10 || l0 < -1e-10)
    throw DomainError("reference point outside the reference tetrahedron");
  LagrangeBasis::get(degree).eval_grad(ref_point, values, grads);
}

namespace detail {
// Dof signature: the (vertex id, integer weight) pairs of a Lagrange node,
// weights > 0 summing to the degree, sorted by vertex id.
struct DofKey {
  std::array<std::pair<int, int>, 4> vw;
  int count = 0;
  bool operator==(const DofKey& o) const {
    if (count != o.count) return false;
    for (int i = 0; i < count; ++i)
      if (vw[i] != o.vw[i]) return false;
    return true;
  }
};
struct DofKeyHash {
  size_t operator()(const DofKey& k) const {
    size_t h = 1469598103934665603ull;
    for (int i = 0; i < k.count; ++i) {
      h = (h ^ static_cast<size_t>(k.vw[i].first)) * 1099511628211ull;
      h = (h ^ static_cast<size_t>(k.vw[i].second)) * 1099511628211ull;
    }
    return h;
  }
};
}  // namespace detail

class FESpace {
 public:
  FESpace(const BackgroundMesh& mesh, std::vector<int> tet_ids, int degree)
      : mesh_(&mesh), tet_ids_(std::move(tet_ids)), basis_(&LagrangeBasis::get(degree)) {
    const int nloc = basis_->size();
    dofs_.resize(tet_ids_.size() * nloc);
    v0_.reserve(tet_ids_.size());
    jac_.reserve(tet_ids_.size());
    jac_invT_.reserve(tet_ids_.size());

    std::unordered_map<detail::DofKey, int, detail::DofKeyHash> dof_of;
    dof_of.reserve(tet_ids_.size() * nloc);

    for (size_t e = 0; e < tet_ids_.size(); ++e) {
      const auto& conn = mesh.tet(tet_ids_[e]);
      const auto verts = mesh.tet_vertices(tet_ids_[e]);
      Mat3 a;
      a.col(0) = verts[1] - verts[0];
      a.col(1) = verts[2] - verts[0];
      a.col(2) = verts[3] - verts[0];
      v0_.push_back(verts[0]);
      jac_.push_back(a);
      jac_invT_.push_back(a.inverse().transpose());

      for (int i = 0; i < nloc; ++i) {
        const auto& bw = basis_->node_bary(i);
        detail::DofKey key;
        for (int v = 0; v < 4; ++v)
          if (bw[v] > 0) key.vw[key.count++] = {conn[v], bw[v]};
        std::sort(key.vw.begin(), key.vw.begin() + key.count);
        auto [it, inserted] = dof_of.try_emplace(key, n_dofs_);
        if (inserted) {
          Vec3 x = Vec3::Zero();
          for (int v = 0; v < key.count; ++v)
            x += (double(key.vw[v].second) / degree) * mesh.vertex(key.vw[v].first);
          dof_coords_.push_back(x);
          ++n_dofs_;
        }
        dofs_[e * nloc + i] = it->second;
      }
    }
  }

  const BackgroundMesh& mesh() const { return *mesh_; }
  int degree() const { return basis_->degree(); }
  const LagrangeBasis& basis() const { return *basis_; }
  int n_elems() const { return static_cast<int>(tet_ids_.size()); }
  int n_dofs() const { return n_dofs_; }
  int nodes_per_elem() const { return basis_->size(); }
  int tet_of(int e) const { return tet_ids_[e]; }
  const std::vector<int>& tet_ids() const { return tet_ids_; }

  int dof(int e, int local) const { return dofs_[e * basis_->size() + local]; }
  std::span<const int> element_dofs(int e) const {
    return {dofs_.data() + static_cast<size_t>(e) * basis_->size(),
            static_cast<size_t>(basis_->size())};
  }
  const Vec3& dof_coord(int dof) const { return dof_coords_[dof]; }

  const Vec3& elem_origin(int e) const { return v0_[e]; }
  const Mat3& elem_jacobian(int e) const { return jac_[e]; }
  const Mat3& elem_jacobian_invT(int e) const { return jac_invT_[e]; }
  double elem_volume(int e) const { return jac_[e].determinant() / 6.0; }

  Vec3 to_reference(int e, const Vec3& x) const {
    return jac_invT_[e].transpose() * (x - v0_[e]);
  }
  Vec3 to_physical(int e, const Vec3& ref) const { return v0_[e] + jac_[e] * ref; }

  // Physical coordinate of a local Lagrange node.
  Vec3 node_position(int e, int local) const {
    return dof_coords_[dof(e, local)];
  }

 private:
  const BackgroundMesh* mesh_;
  std::vector<int> tet_ids_;
  const LagrangeBasis* basis_;
  std::vector<int> dofs_;
  std::vector<Vec3> dof_coords_;
  std::vector<Vec3> v0_;
  std::vector<Mat3> jac_, jac_invT_;
  int n_dofs_ = 0;
};

using FESpacePtr = std::shared_ptr<const FESpace>;

struct FEFunction {
  FESpacePtr space;
  int components = 1;
  Eigen::VectorXd coeffs;

  FEFunction() = default;
  FEFunction(FESpacePtr s, int comps)
      : space(std::move(s)), components(comps),
        coeffs(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(comps) *
                                     space->n_dofs())) {}

  double& coeff(int dof, int c = 0) { return coeffs[components * dof + c]; }
  double coeff(int dof, int c = 0) const { return coeffs[components * dof + c]; }
};

// Value and physical (undeformed) gradient of a scalar FE function at a
// reference point of element e. No domain check: callers may evaluate the
// polynomial extension slightly outside the element.
inline void eval_scalar(const FEFunction& f, int e, const Vec3& ref, double* value,
                        Vec3* grad = nullptr) {
  const auto& basis = f.space->basis();
  const int n = basis.size();
  std::array<double, 35> vals;
  std::array<Vec3, 35> refgrads;
  const auto dofs = f.space->element_dofs(e);
  if (grad) {
    basis.eval_grad(ref, {vals.data(), size_t(n)}, {refgrads.data(), size_t(n)});
    Vec3 g = Vec3::Zero();
    double v = 0.0;
    for (int i = 0; i < n; ++i) {
      v += f.coeffs[dofs[i]] * vals[i];
      g += f.coeffs[dofs[i]] * refgrads[i];
    }
    *value = v;
    *grad = f.space->elem_jacobian_invT(e) * g;
  } else {
    basis.eval(ref, {vals.data(), size_t(n)});
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += f.coeffs[dofs[i]] * vals[i];
    *value = v;
  }
}

// Vector variant; gradient rows are component gradients: grad(i,j) = d v_i / d x_j.
inline void eval_vector(const FEFunction& f, int e, const Vec3& ref, Vec3* value,
                        Mat3* grad = nullptr) {
  const auto& basis = f.space->basis();
  const int n = basis.size();
  std::array<double, 35> vals;
  std::array<Vec3, 35> refgrads;
  const auto dofs = f.space->element_dofs(e);
  Vec3 v = Vec3::Zero();
  if (grad) {
    basis.eval_grad(ref, {vals.data(), size_t(n)}, {refgrads.data(), size_t(n)});
    Mat3 gref = Mat3::Zero();
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < 3; ++c) {
        const double ci = f.coeffs[3 * dofs[i] + c];
        v[c] += ci * vals[i];
        gref.row(c) += ci * refgrads[i].transpose();
      }
    *value = v;
    *grad = gref * f.space->elem_jacobian_invT(e).transpose();
  } else {
    basis.eval(ref, {vals.data(), size_t(n)});
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < 3; ++c) v[c] += f.coeffs[3 * dofs[i] + c] * vals[i];
    *value = v;
  }
}

// Nodal interpolation of an exact scalar field.
template <class F>
FEFunction interpolate(FESpacePtr space, F&& field) {
  FEFunction f(space, 1);
  for (int d = 0; d < space->n_dofs(); ++d) f.coeffs[d] = field(space->dof_coord(d));
  return f;
}

}  // namespace tracefem
