#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "fracreg/common.hpp"

namespace fracreg {

// Cell-pair integrals for the singular interaction |x-y|^{-alpha}.
//
// For two lattice cells of side h whose centres differ by h*m,
//
//   \int_{cell_0} \int_{cell_m} |x-y|^{-alpha} dx dy = h^{2n-alpha} J_alpha(m),
//   J_alpha(m) = \int_{R^n} T_m(t) |t|^{-alpha} dt,
//
// where T_m(t) = prod_k (1 - |t_k - m_k|)_+ is the tent obtained by convolving
// two unit cells. The midpoint rule replaces J_alpha(m) by |m|^{-alpha}; the
// discrete forms use J_alpha only for touching cells (|m|_inf = 1), where the
// midpoint rule is poor.
//
// J is evaluated cell by cell over the unit cells covering the tent support.
// Cells with a corner at the origin are mapped with a Duffy transform
// t = u*(1, v): the tent is bilinear and vanishes at the origin, so the radial
// integral is done exactly in powers of u and only the smooth angular factor
// needs Gauss-Legendre. All other cells are smooth and use tensor Gauss-Legendre.

namespace detail {

using Gauss = boost::math::quadrature::gauss<double, 30>;

/// One factor of the tent restricted to the unit interval [a, a+1] as c + d*t.
inline std::pair<double, double> tent_factor_linear(int a, int m) {
  // On [a, a+1] with m in {a, a+1}: 1 - |t - m| is linear.
  if (m == a) return {1.0 + m, -1.0};  // 1 - (t - m) = (1 + m) - t
  return {1.0 - m, 1.0};               // 1 - (m - t) = (1 - m) + t
}

inline double cell_pair_1d(double alpha, int m) {
  double total = 0.0;
  for (int a = m - 1; a <= m; ++a) {
    const auto [c, d] = tent_factor_linear(a, m);
    if (a == 0 || a == -1) {
      // t = sigma*u with u in [0,1]; the tent vanishes at 0, so it equals d*sigma*u.
      total += d * ((a == 0) ? 1.0 : -1.0) / (2.0 - alpha);
    } else {
      total += Gauss::integrate(
          [&](double t) { return (c + d * t) * std::pow(std::abs(t), -alpha); }, static_cast<double>(a),
          static_cast<double>(a + 1));
    }
  }
  return total;
}

inline double cell_pair_2d(double alpha, int m0, int m1) {
  double total = 0.0;
  for (int a0 = m0 - 1; a0 <= m0; ++a0) {
    for (int a1 = m1 - 1; a1 <= m1; ++a1) {
      const auto [c0, d0] = tent_factor_linear(a0, m0);
      const auto [c1, d1] = tent_factor_linear(a1, m1);
      const bool corner = (a0 == 0 || a0 == -1) && (a1 == 0 || a1 == -1);
      if (!corner) {
        total += Gauss::integrate(
            [&](double t0) {
              return Gauss::integrate(
                  [&](double t1) {
                    const double r2 = t0 * t0 + t1 * t1;
                    return (c0 + d0 * t0) * (c1 + d1 * t1) * std::pow(r2, -0.5 * alpha);
                  },
                  static_cast<double>(a1), static_cast<double>(a1 + 1));
            },
            static_cast<double>(a0), static_cast<double>(a0 + 1));
        continue;
      }
      // Reflect to [0,1]^2: t_k = sigma_k x_k, tent factor = c_k + (d_k sigma_k) x_k.
      const double e0 = d0 * ((a0 == 0) ? 1.0 : -1.0);
      const double e1 = d1 * ((a1 == 0) ? 1.0 : -1.0);
      // Triangle x = (u, u v) and x = (u v, u); Jacobian u; |x| = u sqrt(1+v^2).
      // Integrand u^{1-alpha} (1+v^2)^{-alpha/2} (c0 + e0 x0)(c1 + e1 x1); c0*c1 = T(0) = 0.
      auto radial = [alpha](double p1, double p2) {
        // \int_0^1 u^{1-alpha} (p1 u + p2 u^2) du
        return p1 / (3.0 - alpha) + p2 / (4.0 - alpha);
      };
      total += Gauss::integrate(
          [&](double v) {
            const double ang = std::pow(1.0 + v * v, -0.5 * alpha);
            // x0 = u, x1 = u v
            const double t1 = radial(e0 * c1 + c0 * e1 * v, e0 * e1 * v);
            // x0 = u v, x1 = u
            const double t2 = radial(e0 * v * c1 + c0 * e1, e0 * e1 * v);
            return ang * (t1 + t2);
          },
          0.0, 1.0);
    }
  }
  return total;
}

}  // namespace detail

/// J_alpha(m) for a touching offset (|m|_inf = 1). Requires alpha < n + 1,
/// the integrability threshold of the tent at the origin.
inline double cell_pair_integral(int dim, double alpha, const Lattice& m) {
  if (chebyshev_length(m, dim) != 1) throw PreconditionError("cell_pair_integral: offset is not a touching cell");
  if (!(alpha < dim + 1.0)) throw PreconditionError("cell_pair_integral: singularity not integrable");
  // J is invariant under sign flips and axis permutations.
  int a = std::abs(m[0]);
  int b = dim > 1 ? std::abs(m[1]) : 0;
  if (a < b) std::swap(a, b);
  static std::mutex mu;
  static std::map<std::tuple<int, double, int, int>, double> cache;
  const auto key = std::make_tuple(dim, alpha, a, b);
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const double v = dim == 1 ? detail::cell_pair_1d(alpha, a) : detail::cell_pair_2d(alpha, a, b);
  std::lock_guard lock(mu);
  cache.emplace(key, v);
  return v;
}

/// Dimensionless geometric weight g_alpha(m): the cell-pair integral for
/// touching cells (when integrable), |m|^{-alpha} otherwise. The physical
/// weight of a node pair at offset h*m is h^{2n-alpha} g_alpha(m).
inline double geometric_factor(int dim, double alpha, const Lattice& m) {
  if (chebyshev_length(m, dim) == 1 && alpha < dim + 1.0) return cell_pair_integral(dim, alpha, m);
  return std::pow(static_cast<double>(squared_length(m, dim)), -0.5 * alpha);
}

}  // namespace fracreg
