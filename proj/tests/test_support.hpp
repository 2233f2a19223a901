#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include <sdeconv/brownian.hpp>
#include <sdeconv/em.hpp>

namespace testing_support {

// Calls fn(j, fine) with the fine EM interpolation of every path, one path at a time.
template <class Fn>
void stream_paths(const sdeconv::CoefficientSpec& b, const sdeconv::CoefficientSpec& s, double x0, double T,
                  std::uint64_t seed, std::size_t N, std::size_t M, std::size_t n, Fn&& fn) {
  std::vector<double> dw(N), fine(N + 1);
  for (std::size_t j = 0; j < M; ++j) {
    sdeconv::generate_path_increments(seed, T, N, j, dw);
    sdeconv::em_fine_path(b, s, x0, T, dw, n, {}, fine, j);
    fn(j, static_cast<const std::vector<double>&>(fine));
  }
}

// P(sup_{[0,1]} |B| >= a) from the eigenfunction series of the exit time of (-a, a).
inline double two_sided_exit_probability(double a) {
  double stay = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double m = 2 * k + 1;
    stay += (k % 2 ? -1.0 : 1.0) / m * std::exp(-m * m * std::numbers::pi * std::numbers::pi / (8 * a * a));
  }
  return 1.0 - 4.0 / std::numbers::pi * stay;
}

}  // namespace testing_support
