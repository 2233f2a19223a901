#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "errors.hpp"
#include "normal.hpp"
#include "philox.hpp"

namespace sdeconv {

// Default cap on M * N_fine stored doubles (1 GiB).
inline constexpr std::size_t kDefaultLatticeCap = std::size_t{1} << 27;

// Increments are rounded to a dyadic quantum ~2^-28 of their standard
// deviation. Every partial sum of a path is then exactly representable, so
// coarsening is associative and sums telescope without rounding.
inline double increment_quantum(double T, std::size_t N_fine) {
  const double sd = std::sqrt(T / static_cast<double>(N_fine));
  return std::ldexp(1.0, static_cast<int>(std::floor(std::log2(sd))) - 28);
}

/// Fills `out` (length N_fine) with the increments of path `path`. The values
/// depend only on (seed, T, N_fine, path): step k consumes one uniform from
/// Philox block k/2 of stream `path`.
inline void generate_path_increments(std::uint64_t seed, double T, std::size_t N_fine, std::size_t path,
                                     std::span<double> out) {
  const double sd = std::sqrt(T / static_cast<double>(N_fine));
  const double q = increment_quantum(T, N_fine);
  const double scale = sd / q;
  for (std::size_t k = 0; k < N_fine; k += 2) {
    const auto u = philox_uniform_pair(seed, path, k / 2);
    out[k] = std::nearbyint(normal_inverse_cdf(u[0]) * scale) * q;
    if (k + 1 < N_fine) out[k + 1] = std::nearbyint(normal_inverse_cdf(u[1]) * scale) * q;
  }
}

/// Brownian increments dW on the uniform grid of N_fine steps over [0,T]
/// for M independent paths, stored row-major (path, step).
class BrownianLattice {
 public:
  static BrownianLattice generate(std::uint64_t seed, double T, std::size_t N_fine, std::size_t M,
                                  std::size_t memory_cap = kDefaultLatticeCap) {
    check_shape(T, N_fine, M);
    if (M > memory_cap / N_fine) throw ResourceError("BrownianLattice: M*N_fine exceeds memory cap; stream paths instead");
    BrownianLattice L(T, N_fine, M, seed);
    L.dw_.resize(M * N_fine);
    for (std::size_t j = 0; j < M; ++j) generate_path_increments(seed, T, N_fine, j, L.mutable_path(j));
    return L;
  }

  // Lattice with caller-supplied increments (row-major, M x N_fine).
  static BrownianLattice from_increments(double T, std::size_t N_fine, std::size_t M, std::vector<double> dw) {
    check_shape(T, N_fine, M);
    if (dw.size() != M * N_fine) throw DomainError("BrownianLattice: increment array has wrong size");
    BrownianLattice L(T, N_fine, M, 0);
    L.dw_ = std::move(dw);
    return L;
  }

  double T() const { return T_; }
  std::size_t N_fine() const { return N_; }
  std::size_t M() const { return M_; }
  std::uint64_t seed() const { return seed_; }
  double dt() const { return T_ / static_cast<double>(N_); }
  std::span<const double> path(std::size_t j) const { return {dw_.data() + j * N_, N_}; }
  const std::vector<double>& increments() const { return dw_; }

 private:
  BrownianLattice(double T, std::size_t N, std::size_t M, std::uint64_t seed) : T_(T), N_(N), M_(M), seed_(seed) {}
  std::span<double> mutable_path(std::size_t j) { return {dw_.data() + j * N_, N_}; }

  static void check_shape(double T, std::size_t N, std::size_t M) {
    if (!(T > 0.0)) throw DomainError("BrownianLattice: T must be positive");
    if (N < 1 || M < 1) throw DomainError("BrownianLattice: N_fine and M must be >= 1");
  }

  double T_;
  std::size_t N_, M_;
  std::uint64_t seed_;
  std::vector<double> dw_;
};

// Sums consecutive groups of fine increments; out.size() == n.
inline void coarsen_path(std::span<const double> fine, std::size_t n, std::span<double> out) {
  if (n == 0 || fine.size() % n != 0) throw DomainError("coarsen: n must divide N_fine");
  const std::size_t r = fine.size() / n;
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t i = k * r; i < (k + 1) * r; ++i) s += fine[i];
    out[k] = s;
  }
}

/// M x n array of coarse increments (row-major).
inline std::vector<double> coarsen(const BrownianLattice& L, std::size_t n) {
  if (n == 0 || L.N_fine() % n != 0) throw DomainError("coarsen: n must divide N_fine");
  std::vector<double> out(L.M() * n);
  for (std::size_t j = 0; j < L.M(); ++j) coarsen_path(L.path(j), n, {out.data() + j * n, n});
  return out;
}

}  // namespace sdeconv
