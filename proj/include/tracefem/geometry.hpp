#pragma once
////////////////////////////////////////////////////////////////////////////////
// geometry.hpp
//
// Exact level-set description of the test surface. The oracle supplies the
// level-set value phi, its gradient and Hessian, the signed distance d, the
// outward unit normal n, the tangential projector P = I - n n^T, the
// Weingarten map H and the closest-point projection p, all on a tubular
// neighborhood of the surface. The unit sphere is the shipped instance; its
// phi is the signed distance itself.
////////////////////////////////////////////////////////////////////////////////

#include <cmath>
#include <memory>

#include <Eigen/Dense>

#include "tracefem/errors.hpp"
#include "tracefem/mesh.hpp"

namespace tracefem {

struct SurfaceFrame {
  Vec3 n;      // outward unit normal
  Mat3 P;      // tangential projector I - n n^T
  Mat3 H;      // Weingarten map (Hessian of the signed distance)
  double d;    // signed distance
  Vec3 p;      // closest point on the surface
};

class LevelSetOracle {
 public:
  virtual ~LevelSetOracle() = default;

  virtual double phi(const Vec3& x) const = 0;
  virtual Vec3 grad_phi(const Vec3& x) const = 0;
  virtual Mat3 hess_phi(const Vec3& x) const = 0;

  virtual double distance(const Vec3& x) const = 0;
  virtual Vec3 closest_point(const Vec3& x) const = 0;
  virtual SurfaceFrame frame_at(const Vec3& x) const = 0;

  // Half-width of the tube on which the oracle fields are valid.
  virtual double tube_halfwidth() const = 0;

  bool in_tube(const Vec3& x) const {
    return std::abs(distance(x)) < tube_halfwidth();
  }
};

// Unit sphere, phi(x) = |x| - 1.
class SphereLevelSet final : public LevelSetOracle {
 public:
  double phi(const Vec3& x) const override {
    check_origin(x);
    return x.norm() - 1.0;
  }

  Vec3 grad_phi(const Vec3& x) const override {
    check_origin(x);
    return x / x.norm();
  }

  Mat3 hess_phi(const Vec3& x) const override {
    const SurfaceFrame f = frame_at(x);
    return f.H;
  }

  double distance(const Vec3& x) const override { return phi(x); }

  Vec3 closest_point(const Vec3& x) const override {
    check_tube(x);
    return x / x.norm();
  }

  SurfaceFrame frame_at(const Vec3& x) const override {
    check_tube(x);
    const double r = x.norm();
    SurfaceFrame f;
    f.n = x / r;
    f.P = Mat3::Identity() - f.n * f.n.transpose();
    f.H = f.P / r;
    f.d = r - 1.0;
    f.p = x / r;
    return f;
  }

  double tube_halfwidth() const override { return 0.9; }

 private:
  static void check_origin(const Vec3& x) {
    if (x.squaredNorm() == 0.0)
      throw DomainError("sphere level set undefined at the origin");
  }
  void check_tube(const Vec3& x) const {
    check_origin(x);
    if (std::abs(x.norm() - 1.0) >= tube_halfwidth())
      throw DomainError("point outside the level-set tube");
  }
};

}  // namespace tracefem
