#pragma once
////////////////////////////////////////////////////////////////////////////////
// dual.hpp
//
// Forward-mode automatic differentiation scalars with three seed directions.
// Dual1<T> carries a value and a gradient, Dual2<T> additionally a symmetric
// Hessian. Both are templated on the scalar type so they nest: evaluating a
// formula on Dual2<Dual1<double>> yields derivatives of derived quantities
// through a composition (used for gradients of fields pulled back by the
// closest-point projection).
////////////////////////////////////////////////////////////////////////////////

#include <array>
#include <cmath>

namespace tracefem {

template <class T>
struct Dual1 {
  T v{};
  std::array<T, 3> d{T{}, T{}, T{}};

  Dual1() = default;
  Dual1(double c) : v(c) {}  // NOLINT: implicit constant lift
  Dual1(T value, std::array<T, 3> grad) : v(std::move(value)), d(std::move(grad)) {}

  static Dual1 variable(T value, int i) {
    Dual1 r(std::move(value), {T{}, T{}, T{}});
    r.d[i] = T(1.0);
    return r;
  }
};

template <class T>
Dual1<T> operator+(const Dual1<T>& a, const Dual1<T>& b) {
  return {a.v + b.v, {a.d[0] + b.d[0], a.d[1] + b.d[1], a.d[2] + b.d[2]}};
}
template <class T>
Dual1<T> operator-(const Dual1<T>& a, const Dual1<T>& b) {
  return {a.v - b.v, {a.d[0] - b.d[0], a.d[1] - b.d[1], a.d[2] - b.d[2]}};
}
template <class T>
Dual1<T> operator-(const Dual1<T>& a) {
  return {-a.v, {-a.d[0], -a.d[1], -a.d[2]}};
}
template <class T>
Dual1<T> operator*(const Dual1<T>& a, const Dual1<T>& b) {
  return {a.v * b.v,
          {a.d[0] * b.v + a.v * b.d[0], a.d[1] * b.v + a.v * b.d[1],
           a.d[2] * b.v + a.v * b.d[2]}};
}
template <class T>
Dual1<T> operator/(const Dual1<T>& a, const Dual1<T>& b) {
  const T inv = T(1.0) / b.v;
  const T q = a.v * inv;
  return {q, {(a.d[0] - q * b.d[0]) * inv, (a.d[1] - q * b.d[1]) * inv,
              (a.d[2] - q * b.d[2]) * inv}};
}
template <class T>
Dual1<T> sqrt(const Dual1<T>& a) {
  using std::sqrt;
  const T s = sqrt(a.v);
  const T f = T(0.5) / s;
  return {s, {f * a.d[0], f * a.d[1], f * a.d[2]}};
}

// Symmetric Hessian stored as upper triangle: (0,0),(0,1),(0,2),(1,1),(1,2),(2,2).
template <class T>
struct Dual2 {
  T v{};
  std::array<T, 3> d{T{}, T{}, T{}};
  std::array<T, 6> h{T{}, T{}, T{}, T{}, T{}, T{}};

  Dual2() = default;
  Dual2(double c) : v(c) {}  // NOLINT: implicit constant lift
  Dual2(T value, std::array<T, 3> grad, std::array<T, 6> hess)
      : v(std::move(value)), d(std::move(grad)), h(std::move(hess)) {}

  static Dual2 variable(T value, int i) {
    Dual2 r;
    r.v = std::move(value);
    r.d[i] = T(1.0);
    return r;
  }
  // Hessian entry (i,j), i<=j not required.
  const T& hess(int i, int j) const {
    static constexpr int idx[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
    return h[idx[i][j]];
  }
};

namespace detail {
constexpr int kHessRow[6] = {0, 0, 0, 1, 1, 2};
constexpr int kHessCol[6] = {0, 1, 2, 1, 2, 2};
}  // namespace detail

template <class T>
Dual2<T> operator+(const Dual2<T>& a, const Dual2<T>& b) {
  Dual2<T> r;
  r.v = a.v + b.v;
  for (int i = 0; i < 3; ++i) r.d[i] = a.d[i] + b.d[i];
  for (int i = 0; i < 6; ++i) r.h[i] = a.h[i] + b.h[i];
  return r;
}
template <class T>
Dual2<T> operator-(const Dual2<T>& a, const Dual2<T>& b) {
  Dual2<T> r;
  r.v = a.v - b.v;
  for (int i = 0; i < 3; ++i) r.d[i] = a.d[i] - b.d[i];
  for (int i = 0; i < 6; ++i) r.h[i] = a.h[i] - b.h[i];
  return r;
}
template <class T>
Dual2<T> operator-(const Dual2<T>& a) {
  Dual2<T> r;
  r.v = -a.v;
  for (int i = 0; i < 3; ++i) r.d[i] = -a.d[i];
  for (int i = 0; i < 6; ++i) r.h[i] = -a.h[i];
  return r;
}
template <class T>
Dual2<T> operator*(const Dual2<T>& a, const Dual2<T>& b) {
  Dual2<T> r;
  r.v = a.v * b.v;
  for (int i = 0; i < 3; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  for (int k = 0; k < 6; ++k) {
    const int i = detail::kHessRow[k], j = detail::kHessCol[k];
    r.h[k] = a.h[k] * b.v + a.d[i] * b.d[j] + a.d[j] * b.d[i] + a.v * b.h[k];
  }
  return r;
}
template <class T>
Dual2<T> operator/(const Dual2<T>& a, const Dual2<T>& b) {
  // q = a/b; q' = (a' - q b')/b; q'' = (a'' - q'⊗b' - b'⊗q' - q b'')/b.
  Dual2<T> r;
  const T inv = T(1.0) / b.v;
  r.v = a.v * inv;
  for (int i = 0; i < 3; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) * inv;
  for (int k = 0; k < 6; ++k) {
    const int i = detail::kHessRow[k], j = detail::kHessCol[k];
    r.h[k] = (a.h[k] - r.d[i] * b.d[j] - r.d[j] * b.d[i] - r.v * b.h[k]) * inv;
  }
  return r;
}
template <class T>
Dual2<T> sqrt(const Dual2<T>& a) {
  using std::sqrt;
  Dual2<T> r;
  r.v = sqrt(a.v);
  const T inv = T(0.5) / r.v;
  for (int i = 0; i < 3; ++i) r.d[i] = a.d[i] * inv;
  for (int k = 0; k < 6; ++k) {
    const int i = detail::kHessRow[k], j = detail::kHessCol[k];
    r.h[k] = (T(0.5) * a.h[k] - r.d[i] * r.d[j]) / r.v;
  }
  return r;
}

}  // namespace tracefem
