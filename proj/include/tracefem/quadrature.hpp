#pragma once
////////////////////////////////////////////////////////////////////////////////
// quadrature.hpp
//
// Gauss rules on the reference triangle and tetrahedron via conical products
// of Gauss-Legendre rules (collapsed-coordinate construction). Exact for
// polynomials up to the requested total degree; any degree is available.
// Points are returned in barycentric coordinates with weights summing to 1,
// so a physical integral is  measure(simplex) * sum_q w_q f(x_q).
////////////////////////////////////////////////////////////////////////////////

#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "tracefem/errors.hpp"

namespace tracefem {

struct Gauss1D {
  std::vector<double> x;  // nodes on [0,1]
  std::vector<double> w;  // weights summing to 1
};

// Gauss-Legendre nodes by Newton iteration on the Legendre recurrence.
inline Gauss1D gauss_legendre_01(int n) {
  if (n < 1) throw ConfigError("Gauss rule needs n >= 1");
  Gauss1D rule;
  rule.x.resize(n);
  rule.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.x[i] = 0.5 * (1.0 - x);  // descending cos -> ascending node
    rule.w[i] = 0.5 * w;
    rule.x[n - 1 - i] = 0.5 * (1.0 + x);
    rule.w[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

struct TriQuadRule {
  std::vector<std::array<double, 3>> bary;
  std::vector<double> w;  // sum to 1
  int degree = 0;
};

struct TetQuadRule {
  std::vector<std::array<double, 4>> bary;
  std::vector<double> w;  // sum to 1
  int degree = 0;
};

// u = xi, v = eta (1 - xi); du dv = (1 - xi) dxi deta on the unit triangle.
inline const TriQuadRule& triangle_rule(int degree) {
  static std::map<int, TriQuadRule> cache;
  auto it = cache.find(degree);
  if (it != cache.end()) return it->second;

  const int n = (degree + 3) / 2;  // ceil((degree + 2) / 2)
  const Gauss1D g = gauss_legendre_01(n);
  TriQuadRule rule;
  rule.degree = degree;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double xi = g.x[i], eta = g.x[j];
      const double u = xi, v = eta * (1.0 - xi);
      rule.bary.push_back({1.0 - u - v, u, v});
      rule.w.push_back(2.0 * g.w[i] * g.w[j] * (1.0 - xi));
    }
  return cache.emplace(degree, std::move(rule)).first->second;
}

// u = xi, v = eta (1 - xi), w = zeta (1 - xi)(1 - eta);
// Jacobian (1 - xi)^2 (1 - eta) on the unit tetrahedron.
inline const TetQuadRule& tet_rule(int degree) {
  static std::map<int, TetQuadRule> cache;
  auto it = cache.find(degree);
  if (it != cache.end()) return it->second;

  const int n = (degree + 4) / 2;  // ceil((degree + 3) / 2)
  const Gauss1D g = gauss_legendre_01(n);
  TetQuadRule rule;
  rule.degree = degree;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double xi = g.x[i], eta = g.x[j], zeta = g.x[k];
        const double u = xi;
        const double v = eta * (1.0 - xi);
        const double w = zeta * (1.0 - xi) * (1.0 - eta);
        rule.bary.push_back({1.0 - u - v - w, u, v, w});
        rule.w.push_back(6.0 * g.w[i] * g.w[j] * g.w[k] * (1.0 - xi) * (1.0 - xi) *
                         (1.0 - eta));
      }
  return cache.emplace(degree, std::move(rule)).first->second;
}

}  // namespace tracefem
