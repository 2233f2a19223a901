#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "errors.hpp"

namespace sdeconv {

__extension__ typedef __int128 int128_t;

// Order-independent accumulator: every addend is rounded to a multiple of
// 2^-kFracBits and summed in 128-bit fixed point, so the total does not depend
// on summation order, batch size or the number of workers.
class ExactSum {
 public:
  static constexpr int kFracBits = 60;
  static_assert(kFracBits == 60, "add() splits the shift as 20 + 40");
  // |addend| must stay below 2^kMaxExp; totals up to ~2^67 are representable.
  static constexpr int kMaxExp = 40;

  void add(double v) {
    if (!(std::fabs(v) < std::ldexp(1.0, kMaxExp)))
      throw DomainError("ExactSum: addend out of fixed-point range");
    // Truncate v * 2^60 toward zero in two exact int64 conversions.
    const double hi_part = v * 0x1.0p20;
    const auto hi = static_cast<std::int64_t>(hi_part);
    const auto lo = static_cast<std::int64_t>((hi_part - static_cast<double>(hi)) * 0x1.0p40);
    acc_ += static_cast<int128_t>(hi) * (int128_t{1} << 40) + lo;
  }
  ExactSum& operator+=(const ExactSum& o) {
    acc_ += o.acc_;
    return *this;
  }
  double value() const {
    return static_cast<double>(std::ldexp(static_cast<long double>(acc_), -kFracBits));
  }
  bool operator==(const ExactSum&) const = default;

 private:
  int128_t acc_ = 0;
};

// Running first and second moments of a scalar over Monte Carlo paths.
struct MomentSum {
  ExactSum s1, s2;
  std::uint64_t count = 0;

  void add(double v) {
    s1.add(v);
    s2.add(v * v);
    ++count;
  }
  MomentSum& operator+=(const MomentSum& o) {
    s1 += o.s1;
    s2 += o.s2;
    count += o.count;
    return *this;
  }
  double mean() const { return count ? s1.value() / static_cast<double>(count) : 0.0; }
  // Standard error of the mean (unbiased sample variance).
  double standard_error() const {
    if (count < 2) return 0.0;
    const double m = static_cast<double>(count);
    const double mu = s1.value() / m;
    const double var = std::max(0.0, (s2.value() - m * mu * mu) / (m - 1.0));
    return std::sqrt(var / m);
  }
};

inline void merge_into(std::vector<MomentSum>& dst, const std::vector<MomentSum>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace sdeconv
