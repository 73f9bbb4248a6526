#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fracreg {

/// A point of R^n, n <= 2. Unused trailing components are zero.
using Point = std::array<double, 2>;

/// Integer lattice vector (node offsets, node coordinates in units of h).
using Lattice = std::array<int, 2>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration (s out of range, n <= 2s, bad block).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Geometry violations: empty domains, balls exceeding the box, mismatched grids.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation is not met.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// Surface area of the unit sphere S^{n-1}.
inline double sphere_area(int dim) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    default: throw ConfigError("sphere_area: unsupported dimension " + std::to_string(dim));
  }
}

/// Volume of the unit ball in R^n.
inline double unit_ball_volume(int dim) { return sphere_area(dim) / dim; }

/// Closed form of the kernel tail  \int_{|z|>r} |z|^{-n-2s} dz = omega_n / (2 s r^{2s}).
inline double kernel_tail(int dim, double s, double r) {
  return sphere_area(dim) / (2.0 * s * std::pow(r, 2.0 * s));
}

inline double norm(const Point& p, int dim) {
  double acc = 0.0;
  for (int k = 0; k < dim; ++k) acc += p[k] * p[k];
  return std::sqrt(acc);
}

inline long squared_length(const Lattice& z, int dim) {
  long acc = 0;
  for (int k = 0; k < dim; ++k) acc += static_cast<long>(z[k]) * z[k];
  return acc;
}

inline int chebyshev_length(const Lattice& z, int dim) {
  int m = 0;
  for (int k = 0; k < dim; ++k) m = std::max(m, std::abs(z[k]));
  return m;
}

inline void require_order(double s) {
  if (!(s > 0.0 && s < 1.0)) throw ConfigError("fractional order s must lie in (0,1), got " + std::to_string(s));
}

/// The standing assumption n > 2s.
inline void require_admissible(int dim, double s) {
  require_order(s);
  if (!(dim > 2.0 * s))
    throw ConfigError("dimension n=" + std::to_string(dim) + " violates n > 2s for s=" + std::to_string(s));
}

// ---------------------------------------------------------------------------
// Data-parallel loops. Every body writes to disjoint slots, so results do not
// depend on the worker count. Nested calls run serially.

namespace detail {
inline std::atomic<unsigned>& worker_setting() {
  static std::atomic<unsigned> workers{0};
  return workers;
}
inline thread_local bool in_parallel_region = false;
}  // namespace detail

/// 0 means "available parallelism".
inline void set_worker_count(unsigned workers) { detail::worker_setting() = workers; }

inline unsigned worker_count() {
  unsigned w = detail::worker_setting();
  if (w == 0) w = std::max(1u, std::thread::hardware_concurrency());
  return w;
}

template <class Body>
void parallel_for(std::size_t begin, std::size_t end, Body&& body, std::size_t min_chunk = 256) {
  if (end <= begin) return;
  const std::size_t n = end - begin;
  unsigned workers = detail::in_parallel_region ? 1u : worker_count();
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, (n + min_chunk - 1) / min_chunk));
  if (workers <= 1) {
    for (std::size_t i = begin; i < end; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = begin + w * chunk;
    const std::size_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      detail::in_parallel_region = true;
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
}

// ---------------------------------------------------------------------------
// Counter-based hashing for seed-controlled random fields that must be
// evaluated at arbitrary points without storing tables.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::int64_t a, std::int64_t b = 0, std::int64_t c = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(a));
  h = splitmix64(h ^ static_cast<std::uint64_t>(b));
  h = splitmix64(h ^ static_cast<std::uint64_t>(c));
  return h;
}

/// Uniform value in [0,1) derived from a hash.
inline double unit_from_hash(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

}  // namespace fracreg
