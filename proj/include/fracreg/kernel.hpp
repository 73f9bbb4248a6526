#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fracreg/common.hpp"

namespace fracreg {

/// A symmetric coefficient c(x,y) modulating the singular interaction
/// |x-y|^{-n-2s}. Shared by kernel coefficients A and data kernels D_i.
/// Optionally translation invariant: c(x,y) = a(x-y).
class Coefficient {
 public:
  using Evaluator = std::function<double(const Point&, const Point&)>;
  using Profile = std::function<double(const Point&)>;

  Coefficient() = default;

  static Coefficient general(Evaluator g, int dim, double far_field, std::string label) {
    Coefficient c;
    c.dim_ = dim;
    c.eval_ = std::move(g);
    c.far_field_ = far_field;
    c.label_ = std::move(label);
    return c;
  }

  static Coefficient translation_invariant(Profile a, int dim, double far_field, std::string label) {
    Coefficient c;
    c.dim_ = dim;
    c.profile_ = std::move(a);
    c.far_field_ = far_field;
    c.label_ = std::move(label);
    return c;
  }

  bool translation_invariant() const { return static_cast<bool>(profile_); }
  int dim() const { return dim_; }
  const std::string& label() const { return label_; }

  /// Value used for interactions beyond the explicit interaction radius.
  double far_field() const { return far_field_; }

  /// Profile a(z); only meaningful for translation-invariant coefficients.
  double profile(const Point& z) const { return profile_(z); }

  double operator()(const Point& x, const Point& y) const {
    if (profile_) return profile_(displacement(x, y));
    return eval_(x, y);
  }

  Point displacement(const Point& x, const Point& y) const {
    Point z{0.0, 0.0};
    for (int k = 0; k < dim_; ++k) z[k] = x[k] - y[k];
    return z;
  }

 private:
  int dim_ = 1;
  Evaluator eval_;
  Profile profile_;
  double far_field_ = 1.0;
  std::string label_;
};

/// Kernel coefficient A with ellipticity constant lambda >= 1.
class KernelCoefficient {
 public:
  KernelCoefficient() = default;
  KernelCoefficient(Coefficient c, double lambda) : coef_(std::move(c)), lambda_(lambda) {
    if (!(lambda_ >= 1.0)) throw ConfigError("ellipticity constant lambda must be >= 1");
  }

  const Coefficient& coefficient() const { return coef_; }
  double lambda() const { return lambda_; }
  bool translation_invariant() const { return coef_.translation_invariant(); }
  int dim() const { return coef_.dim(); }
  const std::string& label() const { return coef_.label(); }
  double operator()(const Point& x, const Point& y) const { return coef_(x, y); }

 private:
  Coefficient coef_;
  double lambda_ = 1.0;
};

/// The data kernels D_1..D_m with sum_i |D_i| <= big_lambda.
struct DataKernel {
  std::vector<Coefficient> evaluators;
  double big_lambda = 1.0;

  std::size_t size() const { return evaluators.size(); }
};

inline bool same_point(const Point& x, const Point& y, int dim) {
  for (int k = 0; k < dim; ++k)
    if (x[k] != y[k]) return false;
  return true;
}

inline double eval_kernel(const KernelCoefficient& k, const Point& x, const Point& y) {
  if (same_point(x, y, k.dim())) throw PreconditionError("diagonal evaluation");
  return k(x, y);
}

/// (g(x,y) + g(y,x)) / 2, so that symmetry holds by construction.
inline Coefficient::Evaluator symmetrized(Coefficient::Evaluator g) {
  return [g = std::move(g)](const Point& x, const Point& y) { return 0.5 * (g(x, y) + g(y, x)); };
}

// ---------------------------------------------------------------------------
// Built-in families.

namespace kernels {

inline KernelCoefficient constant(int dim, double value = 1.0, double lambda = 1.0) {
  auto c = Coefficient::translation_invariant([value](const Point&) { return value; }, dim, value, "constant");
  return KernelCoefficient(std::move(c), std::max(lambda, std::max(value, 1.0 / value)));
}

/// a(z) = 1 + kappa * sign(sin|z|) with kappa = min(1/2, 1 - 1/lambda).
inline KernelCoefficient oscillatory(int dim, double lambda = 2.0) {
  const double kappa = std::min(0.5, 1.0 - 1.0 / lambda);
  auto a = [dim, kappa](const Point& z) {
    const double v = std::sin(norm(z, dim));
    const double sg = (v > 0.0) - (v < 0.0);
    return 1.0 + kappa * sg;
  };
  return KernelCoefficient(Coefficient::translation_invariant(a, dim, 1.0, "oscillatory"), lambda);
}

/// Random piecewise-constant even profile on cells of width `cell`, values
/// log-uniform in [1/lambda, lambda]. The cell index uses |z_k|, so a(-z) = a(z).
inline KernelCoefficient rough(int dim, double lambda, std::uint64_t seed, double cell = 0.25) {
  auto a = [dim, lambda, seed, cell](const Point& z) {
    const auto c0 = static_cast<std::int64_t>(std::floor(std::abs(z[0]) / cell));
    const auto c1 = dim > 1 ? static_cast<std::int64_t>(std::floor(std::abs(z[1]) / cell)) : 0;
    const double u = unit_from_hash(hash_combine(seed, c0, c1, 0x6b));
    return std::pow(lambda, 2.0 * u - 1.0);
  };
  return KernelCoefficient(Coefficient::translation_invariant(a, dim, 1.0, "rough"), lambda);
}

/// General (not translation-invariant) kernel: lambda if floor(x1)+floor(y1)
/// is even, 1/lambda otherwise.
inline KernelCoefficient checkerboard(int dim, double lambda = 2.0) {
  auto g = [lambda](const Point& x, const Point& y) {
    const auto parity = static_cast<std::int64_t>(std::floor(x[0])) + static_cast<std::int64_t>(std::floor(y[0]));
    return (parity % 2 == 0) ? lambda : 1.0 / lambda;
  };
  return KernelCoefficient(
      Coefficient::general(symmetrized(g), dim, 0.5 * (lambda + 1.0 / lambda), "checkerboard"), lambda);
}

/// A single even data kernel with values uniform in [-big_lambda, big_lambda].
inline DataKernel rough_data(int dim, double big_lambda, std::uint64_t seed, double cell = 0.25) {
  auto d = [dim, big_lambda, seed, cell](const Point& z) {
    const auto c0 = static_cast<std::int64_t>(std::floor(std::abs(z[0]) / cell));
    const auto c1 = dim > 1 ? static_cast<std::int64_t>(std::floor(std::abs(z[1]) / cell)) : 0;
    return big_lambda * (2.0 * unit_from_hash(hash_combine(seed, c0, c1, 0xda)) - 1.0);
  };
  DataKernel dk;
  dk.big_lambda = big_lambda;
  dk.evaluators.push_back(Coefficient::translation_invariant(d, dim, 0.0, "rough-data"));
  return dk;
}

}  // namespace kernels

// ---------------------------------------------------------------------------

struct KernelClassReport {
  bool bounds_ok = true;
  bool symmetry_ok = true;
  bool translation_ok = true;  ///< vacuously true for general kernels
  double bound_violation = 0.0;        ///< max distance of a sample outside [1/lambda, lambda]
  double symmetry_violation = 0.0;     ///< max |A(x,y) - A(y,x)|
  double translation_violation = 0.0;  ///< max |A(x,y) - a(x-y)| and shift defects
  int samples = 0;
};

/// Samples deterministic pseudo-random pairs in [-box_radius, box_radius]^n and
/// reports the worst violations of the bounds, symmetry and (when claimed)
/// translation invariance.
inline KernelClassReport verify_kernel_class(const KernelCoefficient& k, int sample_count, double box_radius = 8.0) {
  if (sample_count < 1) throw PreconditionError("sample_count must be >= 1");
  KernelClassReport rep;
  rep.samples = sample_count;
  const int dim = k.dim();
  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> coord(-box_radius, box_radius);
  std::uniform_int_distribution<int> shift(-16, 16);
  const double lo = 1.0 / k.lambda(), hi = k.lambda();
  for (int i = 0; i < sample_count; ++i) {
    Point x{0, 0}, y{0, 0};
    for (int d = 0; d < dim; ++d) {
      x[d] = coord(rng);
      y[d] = coord(rng);
    }
    if (same_point(x, y, dim)) continue;
    const double a = k(x, y);
    const double b = k(y, x);
    if (!std::isfinite(a)) {
      rep.bound_violation = std::numeric_limits<double>::infinity();
    } else {
      rep.bound_violation = std::max({rep.bound_violation, lo - a, a - hi});
    }
    rep.symmetry_violation = std::max(rep.symmetry_violation, std::abs(a - b));
    if (k.translation_invariant()) {
      const auto& c = k.coefficient();
      rep.translation_violation = std::max(rep.translation_violation, std::abs(a - c.profile(c.displacement(x, y))));
      Point xs = x, ys = y;
      for (int d = 0; d < dim; ++d) {
        const double t = shift(rng) * 0.25;
        xs[d] += t;
        ys[d] += t;
      }
      rep.translation_violation = std::max(rep.translation_violation, std::abs(a - k(xs, ys)));
    }
  }
  rep.bounds_ok = rep.bound_violation <= 0.0;
  rep.symmetry_ok = rep.symmetry_violation == 0.0;
  rep.translation_ok = rep.translation_violation == 0.0;
  return rep;
}

struct DataKernelReport {
  bool bound_ok = true;
  bool symmetry_ok = true;
  double max_sum = 0.0;
};

inline DataKernelReport verify_data_kernel(const DataKernel& dk, int sample_count, double box_radius = 8.0) {
  DataKernelReport rep;
  if (dk.evaluators.empty()) return rep;
  const int dim = dk.evaluators.front().dim();
  std::mt19937_64 rng(0xda7aULL);
  std::uniform_real_distribution<double> coord(-box_radius, box_radius);
  for (int i = 0; i < sample_count; ++i) {
    Point x{0, 0}, y{0, 0};
    for (int d = 0; d < dim; ++d) {
      x[d] = coord(rng);
      y[d] = coord(rng);
    }
    double sum = 0.0;
    for (const auto& d : dk.evaluators) {
      const double v = d(x, y);
      sum += std::abs(v);
      if (v != d(y, x)) rep.symmetry_ok = false;
    }
    rep.max_sum = std::max(rep.max_sum, sum);
  }
  rep.bound_ok = rep.max_sum <= dk.big_lambda;
  return rep;
}

}  // namespace fracreg
