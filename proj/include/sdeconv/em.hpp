#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "brownian.hpp"
#include "coeffs.hpp"
#include "errors.hpp"

namespace sdeconv {

/// Euler-Maruyama on the coarse grid t_k = kT/n driven by the fine increments
/// `dw` of one path. Coarse increments are the sequential sums of fine ones,
/// exactly as in coarsen_path.
///
/// `coarse_out` (n+1 values) receives X_{t_k}. If `fine_out` is non-empty
/// (N_fine+1 values) it receives the continuous interpolation
///   X_t = X_{eta(t)} + b(X_{eta(t)}) (t - eta(t)) + sigma(X_{eta(t)}) (W_t - W_{eta(t)})
/// at every fine time; entries at multiples of N_fine/n equal coarse_out.
inline void em_fine_path(const CoefficientSpec& b, const CoefficientSpec& sigma, double x0, double T,
                         std::span<const double> dw, std::size_t n, std::span<double> coarse_out,
                         std::span<double> fine_out, std::size_t path_index = 0) {
  const std::size_t N = dw.size();
  if (n == 0 || N % n != 0) throw DomainError("em: n must divide N_fine");
  const std::size_t r = N / n;
  const bool fine = !fine_out.empty();
  const double h = T / static_cast<double>(n);
  const double dt = T / static_cast<double>(N);

  double x = x0;
  if (!coarse_out.empty()) coarse_out[0] = x0;
  if (fine) fine_out[0] = x0;
  for (std::size_t k = 0; k < n; ++k) {
    const double bk = b(x), sk = sigma(x);
    const std::size_t base = k * r;
    double partial = 0.0;
    for (std::size_t j = 1; j < r; ++j) {
      partial += dw[base + j - 1];
      if (fine) fine_out[base + j] = x + bk * (static_cast<double>(j) * dt) + sk * partial;
    }
    partial += dw[base + r - 1];
    x = x + bk * h + sk * partial;
    if (!std::isfinite(x)) throw NonFiniteError("em: non-finite state at step " + std::to_string(k), path_index);
    if (!coarse_out.empty()) coarse_out[k + 1] = x;
    if (fine) fine_out[base + r] = x;
  }
}

/// EM values of M paths at resolution n: coarse (M x (n+1)) and optionally
/// the fine interpolation (M x (N_fine+1)), both row-major.
struct EmTrajectory {
  std::size_t n = 0;
  double x0 = 0.0;
  double T = 1.0;
  std::size_t M = 0;
  std::size_t N_fine = 0;
  std::vector<double> coarse_values;
  std::vector<double> fine_values;

  bool has_fine() const { return !fine_values.empty(); }
  std::size_t ratio() const { return N_fine / n; }
  double coarse(std::size_t j, std::size_t k) const { return coarse_values[j * (n + 1) + k]; }
  double fine(std::size_t j, std::size_t i) const { return fine_values[j * (N_fine + 1) + i]; }
  std::span<const double> fine_path(std::size_t j) const { return {fine_values.data() + j * (N_fine + 1), N_fine + 1}; }
  std::span<const double> coarse_path(std::size_t j) const { return {coarse_values.data() + j * (n + 1), n + 1}; }
};

namespace detail {
template <class Fn>
void parallel_paths(std::size_t M, unsigned workers, Fn&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(M)));
  if (workers == 1) {
    for (std::size_t j = 0; j < M; ++j) fn(j);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t j = w; j < M; j += workers) fn(j);
    });
}
}  // namespace detail

inline EmTrajectory em_path(const CoefficientSpec& b, const CoefficientSpec& sigma, double x0,
                            const BrownianLattice& lattice, std::size_t n, bool want_fine, unsigned workers = 1) {
  const std::size_t N = lattice.N_fine();
  if (n == 0 || N % n != 0) throw DomainError("em_path: n must divide N_fine");
  EmTrajectory tr;
  tr.n = n;
  tr.x0 = x0;
  tr.T = lattice.T();
  tr.M = lattice.M();
  tr.N_fine = N;
  tr.coarse_values.resize(tr.M * (n + 1));
  if (want_fine) tr.fine_values.resize(tr.M * (N + 1));
  detail::parallel_paths(tr.M, workers, [&](std::size_t j) {
    std::span<double> fine_out;
    if (want_fine) fine_out = {tr.fine_values.data() + j * (N + 1), N + 1};
    em_fine_path(b, sigma, x0, lattice.T(), lattice.path(j), n, {tr.coarse_values.data() + j * (n + 1), n + 1},
                 fine_out, j);
  });
  return tr;
}

/// Trajectories for every n in n_list plus n_ref, all driven by the same
/// lattice and carrying fine interpolations. The n_ref entry is the reference.
inline std::map<std::size_t, EmTrajectory> em_coupled(const CoefficientSpec& b, const CoefficientSpec& sigma, double x0,
                                                      const BrownianLattice& lattice,
                                                      const std::vector<std::size_t>& n_list, std::size_t n_ref,
                                                      unsigned workers = 1) {
  for (auto n : n_list) {
    if (n == 0 || lattice.N_fine() % n != 0) throw DomainError("em_coupled: every n must divide N_fine");
    if (n >= n_ref) throw DomainError("em_coupled: n_ref must exceed every n in n_list");
  }
  if (lattice.N_fine() % n_ref != 0) throw DomainError("em_coupled: n_ref must divide N_fine");
  std::map<std::size_t, EmTrajectory> out;
  for (auto n : n_list) out.emplace(n, em_path(b, sigma, x0, lattice, n, true, workers));
  out.emplace(n_ref, em_path(b, sigma, x0, lattice, n_ref, true, workers));
  return out;
}

}  // namespace sdeconv
