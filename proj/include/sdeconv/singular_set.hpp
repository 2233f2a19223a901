#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace sdeconv {

// Points p_1 > p_2 > ... > 0 given in closed form, accumulating at 0.
struct AccumulatingSequence {
  std::function<double(std::uint64_t)> point;  // k >= 1
  std::string description;

  // Smallest k with point(k) <= y, for y > 0.
  std::uint64_t first_at_or_below(double y) const {
    std::uint64_t lo = 1, hi = 1;
    while (point(hi) > y) {
      lo = hi + 1;
      if (hi > (std::uint64_t{1} << 61)) return hi;
      hi *= 2;
    }
    while (lo < hi) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      if (point(mid) <= y)
        hi = mid;
      else
        lo = mid + 1;
    }
    return lo;
  }
};

using Interval = std::pair<double, double>;

// Total length of a union of closed intervals.
inline double union_length(std::vector<Interval> iv) {
  std::sort(iv.begin(), iv.end());
  double total = 0.0;
  bool open = false;
  double lo = 0.0, hi = 0.0;
  for (const auto& [a, b] : iv) {
    if (b <= a) continue;
    if (open && a <= hi) {
      hi = std::max(hi, b);
    } else {
      if (open) total += hi - lo;
      lo = a;
      hi = b;
      open = true;
    }
  }
  if (open) total += hi - lo;
  return total;
}

// The exceptional set S(f): a finite sorted point set plus any number of
// sequences accumulating at 0. Unions concatenate both parts.
class SingularSet {
 public:
  SingularSet() = default;

  static SingularSet empty() { return {}; }

  static SingularSet finite(std::vector<double> pts) {
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (!(pts[i - 1] < pts[i])) throw DomainError("SingularSet: finite points must be strictly increasing");
    SingularSet s;
    s.points_ = std::move(pts);
    return s;
  }

  static SingularSet accumulating(AccumulatingSequence seq) {
    SingularSet s;
    s.sequences_.push_back(std::move(seq));
    return s;
  }

  // S = { k^{-1/(1-kappa)} : k = 1, 2, ... }
  static SingularSet inverse_power(double kappa) {
    const double e = -1.0 / (1.0 - kappa);
    return accumulating({[e](std::uint64_t k) { return std::pow(static_cast<double>(k), e); },
                         "k^(" + std::to_string(e) + "), k>=1"});
  }

  SingularSet unite(const SingularSet& o) const {
    SingularSet s = *this;
    s.points_.insert(s.points_.end(), o.points_.begin(), o.points_.end());
    std::sort(s.points_.begin(), s.points_.end());
    s.points_.erase(std::unique(s.points_.begin(), s.points_.end()), s.points_.end());
    s.sequences_.insert(s.sequences_.end(), o.sequences_.begin(), o.sequences_.end());
    return s;
  }

  bool is_empty() const { return points_.empty() && sequences_.empty(); }
  const std::vector<double>& finite_points() const { return points_; }
  const std::vector<AccumulatingSequence>& sequences() const { return sequences_; }

  // Whether the closed interval [x, y] meets S.
  bool intersects(double x, double y) const {
    if (y < x) std::swap(x, y);
    auto it = std::lower_bound(points_.begin(), points_.end(), x);
    if (it != points_.end() && *it <= y) return true;
    for (const auto& seq : sequences_) {
      if (y <= 0.0) continue;
      if (x <= 0.0) return true;
      if (seq.point(seq.first_at_or_below(y)) >= x) return true;
    }
    return false;
  }

  // Lebesgue measure of S^eps intersected with [-K, K], by interval merging.
  // For each sequence, once two consecutive gaps fall below 2*eps every later
  // point lies in the single blob [-eps, p_k + eps].
  double neighborhood_measure(double eps, double K) const {
    if (!(eps > 0.0)) throw DomainError("neighborhood_measure: eps must be positive");
    if (!(K >= 1.0)) throw DomainError("neighborhood_measure: K must be >= 1");
    std::vector<Interval> iv;
    auto clip_push = [&](double a, double b) {
      a = std::max(a, -K);
      b = std::min(b, K);
      if (a < b) iv.emplace_back(a, b);
    };
    for (double p : points_) clip_push(p - eps, p + eps);
    for (const auto& seq : sequences_) {
      // Points above K + eps cannot reach [-K, K].
      std::uint64_t k = seq.point(1) > K + eps ? seq.first_at_or_below(K + eps) : 1;
      int small_gaps = 0;
      std::uint64_t blob_start = 0;
      constexpr std::uint64_t kScanLimit = 50'000'000;
      for (; k < kScanLimit; ++k) {
        const double p = seq.point(k);
        const double gap = p - seq.point(k + 1);
        if (gap < 2.0 * eps) {
          if (++small_gaps == 1) blob_start = k;
          if (small_gaps == 2) break;
        } else {
          if (small_gaps == 1) clip_push(seq.point(blob_start) - eps, seq.point(blob_start) + eps);
          small_gaps = 0;
        }
        if (small_gaps == 0) clip_push(p - eps, p + eps);
      }
      if (k >= kScanLimit) throw DomainError("neighborhood_measure: eps too small for sequence scan");
      clip_push(-eps, seq.point(blob_start) + eps);
    }
    return union_length(std::move(iv));
  }

  // Finite sample of S inside (lo, hi) for use as quadrature breakpoints.
  // Sequence points are listed until consecutive spacing drops below
  // `min_spacing`; 0 is added as the accumulation point.
  std::vector<double> sample_points(double lo, double hi, double min_spacing) const {
    std::vector<double> out;
    for (double p : points_)
      if (p > lo && p < hi) out.push_back(p);
    for (const auto& seq : sequences_) {
      for (std::uint64_t k = 1; k < 10'000'000; ++k) {
        const double p = seq.point(k);
        if (p > lo && p < hi) out.push_back(p);
        if (p - seq.point(k + 1) < min_spacing) break;
      }
      if (0.0 > lo && 0.0 < hi) out.push_back(0.0);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::string describe() const {
    if (is_empty()) return "empty";
    std::string s;
    if (!points_.empty()) {
      s += "{";
      for (std::size_t i = 0; i < points_.size(); ++i) s += (i ? ", " : "") + fmt_num(points_[i]);
      s += "}";
    }
    for (const auto& seq : sequences_) s += (s.empty() ? "" : " u ") + std::string("{") + seq.description + "}";
    return s;
  }

 private:
  static std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
  }

  std::vector<double> points_;
  std::vector<AccumulatingSequence> sequences_;
};

}  // namespace sdeconv
