#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "coeffs.hpp"
#include "errors.hpp"
#include "quadrature.hpp"

namespace sdeconv {

/// Scale function that removes the drift of dX = b dt + sigma dW:
///   phi(x) = int_0^x exp(-2 int_0^y b/sigma^2 dz) dy,
/// so that phi(X) is a local martingale. Requires b in L^1 and sigma elliptic.
///
/// The inner integral G(y) = int_0^y b/sigma^2 is computed once by adaptive
/// Gauss-Legendre quadrature on [-x_max, x_max], with the singular points of
/// b and sigma as forced breakpoints, and stored at the refinement nodes.
/// Between nodes G is linear, so phi is integrated in closed form per cell.
class DriftRemovalTransform {
 public:
  struct Options {
    double tolerance = 1e-8;
    double x_max = 50.0;
    int max_depth = 50;
  };

  DriftRemovalTransform(CoefficientSpec b, CoefficientSpec sigma, DiffusionCertificate cert)
      : DriftRemovalTransform(std::move(b), std::move(sigma), std::move(cert), Options{}) {}

  DriftRemovalTransform(CoefficientSpec b, CoefficientSpec sigma, DiffusionCertificate cert, Options opt)
      : b_(std::move(b)), sigma_(std::move(sigma)), cert_(std::move(cert)), opt_(opt) {
    if (!b_.in_L1) throw DomainError("DriftRemovalTransform: drift must be integrable");
    if (!(cert_.sigma_lower > 0.0)) throw DomainError("DriftRemovalTransform: sigma must be uniformly positive");
    if (!(opt_.tolerance > 0.0) || !(opt_.x_max > 0.0)) throw DomainError("DriftRemovalTransform: bad options");
    K_sigma_ = std::max(cert_.sigma_upper, 1.0 / cert_.sigma_lower);
    C0_ = std::exp(2.0 * K_sigma_ * K_sigma_ * b_.L1_norm);
    build_mesh();
  }

  double K_sigma() const { return K_sigma_; }
  double C0() const { return C0_; }
  double x_max() const { return opt_.x_max; }
  double tolerance() const { return opt_.tolerance; }
  double achieved_error() const { return achieved_; }
  std::size_t node_count() const { return y_.size(); }

  // Inner integral G(x) = int_0^x b/sigma^2 (piecewise-linear interpolant).
  double inner_integral(double x) const {
    x = std::clamp(x, y_.front(), y_.back());
    const std::size_t i = cell_of(x);
    return G_[i] + slope_[i] * (x - y_[i]);
  }

  double phi(double x) const {
    if (x == 0.0) return 0.0;
    if (x > y_.back()) return Phi_.back() + phi_prime(y_.back()) * (x - y_.back());
    if (x < y_.front()) return Phi_.front() + phi_prime(y_.front()) * (x - y_.front());
    const std::size_t i = cell_of(x);
    return Phi_[i] + std::exp(-2.0 * G_[i]) * exp_integral(2.0 * slope_[i], x - y_[i]);
  }

  double phi_prime(double x) const { return std::exp(-2.0 * inner_integral(x)); }

  // phi'' = -2 b phi' / sigma^2.
  double phi_second(double x) const {
    const double s = sigma_(x);
    return -2.0 * b_(x) * phi_prime(x) / (s * s);
  }

  /// Inverse on [phi(-x_max), phi(x_max)]: closed-form inversion inside the
  /// located cell, polished by safeguarded Newton/bisection steps.
  double phi_inverse(double z) const {
    const double lo_z = Phi_.front(), hi_z = Phi_.back();
    if (!(z >= lo_z - opt_.tolerance && z <= hi_z + opt_.tolerance))
      throw RangeError("phi_inverse: value outside the range of phi on [-x_max, x_max]");
    z = std::clamp(z, lo_z, hi_z);
    std::size_t i = static_cast<std::size_t>(std::upper_bound(Phi_.begin(), Phi_.end(), z) - Phi_.begin());
    i = std::min(i == 0 ? 0 : i - 1, y_.size() - 2);
    double a = y_[i], c = y_[i + 1];
    const double e = std::exp(-2.0 * G_[i]);
    const double rate = 2.0 * slope_[i];
    const double target = (z - Phi_[i]) / e;
    double t = std::fabs(rate * target) < 1e-12 ? target : -std::log1p(-rate * target) / rate;
    double x = std::isfinite(t) ? std::clamp(a + t, a, c) : 0.5 * (a + c);
    for (int it = 0; it < 60; ++it) {
      const double fx = phi(x) - z;
      if (std::fabs(fx) <= 0.01 * opt_.tolerance) break;
      if (fx > 0) c = x; else a = x;
      double nx = x - fx / phi_prime(x);
      if (!(nx > a && nx < c)) nx = 0.5 * (a + c);
      if (nx == x) break;
      x = nx;
    }
    return x;
  }

 private:
  static double exp_integral(double rate, double t) {
    // int_0^t exp(-rate s) ds
    const double u = rate * t;
    if (std::fabs(u) < 1e-10) return t * (1.0 - 0.5 * u);
    return -std::expm1(-u) / rate;
  }

  std::size_t cell_of(double x) const {
    auto it = std::upper_bound(y_.begin(), y_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - y_.begin());
    return std::min(i == 0 ? 0 : i - 1, y_.size() - 2);
  }

  double g(double z) const {
    const double s = sigma_(z);
    return b_(z) / (s * s);
  }

  struct Leaf {
    double l, r, integral;
  };

  void refine(double l, double r, double whole, int depth, std::vector<Leaf>& out) {
    const double m = 0.5 * (l + r);
    const auto gf = [this](double z) { return g(z); };
    const double left = quad::gauss_legendre(gf, l, m);
    const double right = quad::gauss_legendre(gf, m, r);
    const double int_err = std::fabs(whole - left - right);
    const double lin_dev = 0.5 * std::fabs(left - right);
    const double budget = tol_G_ * (r - l) / (2.0 * opt_.x_max);
    if ((int_err <= budget && lin_dev <= tol_G_) || depth >= opt_.max_depth) {
      if (depth >= opt_.max_depth) achieved_ = std::max(achieved_, std::max(int_err, lin_dev));
      out.push_back({l, m, left});
      out.push_back({m, r, right});
      return;
    }
    refine(l, m, left, depth + 1, out);
    refine(m, r, right, depth + 1, out);
  }

  void build_mesh() {
    const double X = opt_.x_max;
    // phi' = exp(-2G), so an error d in G is a relative error of about 2d in
    // phi'. C0 is far too pessimistic to size this (it can reach e^30).
    tol_G_ = opt_.tolerance / 2.0;
    std::vector<double> brk{-X, 0.0, X};
    for (const auto* s : {&b_.singular_set, &sigma_.singular_set}) {
      auto pts = s->sample_points(-X, X, opt_.tolerance);
      brk.insert(brk.end(), pts.begin(), pts.end());
    }
    std::sort(brk.begin(), brk.end());
    brk.erase(std::unique(brk.begin(), brk.end()), brk.end());

    std::vector<Leaf> leaves;
    const auto gf = [this](double z) { return g(z); };
    for (std::size_t i = 0; i + 1 < brk.size(); ++i)
      refine(brk[i], brk[i + 1], quad::gauss_legendre(gf, brk[i], brk[i + 1]), 0, leaves);

    y_.resize(leaves.size() + 1);
    G_.assign(leaves.size() + 1, 0.0);
    Phi_.assign(leaves.size() + 1, 0.0);
    for (std::size_t i = 0; i < leaves.size(); ++i) y_[i] = leaves[i].l;
    y_.back() = leaves.back().r;
    const auto zero = static_cast<std::size_t>(std::find(y_.begin(), y_.end(), 0.0) - y_.begin());
    // Accumulate outward from the node at 0 so that G(0) = phi(0) = 0 exactly.
    for (std::size_t i = zero; i < leaves.size(); ++i) G_[i + 1] = G_[i] + leaves[i].integral;
    for (std::size_t i = zero; i-- > 0;) G_[i] = G_[i + 1] - leaves[i].integral;
    slope_.resize(leaves.size());
    for (std::size_t i = 0; i < leaves.size(); ++i) slope_[i] = (G_[i + 1] - G_[i]) / (y_[i + 1] - y_[i]);
    for (std::size_t i = zero; i < leaves.size(); ++i)
      Phi_[i + 1] = Phi_[i] + std::exp(-2.0 * G_[i]) * exp_integral(2.0 * slope_[i], y_[i + 1] - y_[i]);
    for (std::size_t i = zero; i-- > 0;)
      Phi_[i] = Phi_[i + 1] - std::exp(-2.0 * G_[i]) * exp_integral(2.0 * slope_[i], y_[i + 1] - y_[i]);
    if (achieved_ > tol_G_)
      throw QuadratureError("DriftRemovalTransform: quadrature did not converge (achieved " +
                                std::to_string(achieved_) + ")",
                            achieved_);
  }

  CoefficientSpec b_, sigma_;
  DiffusionCertificate cert_;
  Options opt_;
  double K_sigma_ = 1.0, C0_ = 1.0, tol_G_ = 0.0, achieved_ = 0.0;
  std::vector<double> y_, G_, Phi_, slope_;
};

/// Pointwise check of the scale-function bounds on a grid:
///   C0^{-1} <= phi' <= C0,  |phi''| <= 2 K^2 |b|_inf |phi'|_inf,
///   |phi^{-1}(z) - phi^{-1}(w)| <= C0 |z - w|,  phi^{-1}(phi(x)) = x.
struct DriftRemovalReport {
  double C0 = 0.0, K_sigma = 0.0;
  double min_phi_prime = INFINITY, max_phi_prime = 0.0;
  double max_abs_phi_second = 0.0, phi_second_bound = 0.0;
  double max_round_trip_error = 0.0;
  double max_lipschitz_ratio = 0.0;  // max |phi^{-1}(z)-phi^{-1}(w)| / |z-w|
  std::size_t lipschitz_pairs = 0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

inline DriftRemovalReport verify_drift_removal(const DriftRemovalTransform& tr, const CoefficientSpec& b,
                                               const std::vector<double>& grid, double round_trip_tol,
                                               std::size_t pairs = 10000, std::uint64_t seed = 7) {
  DriftRemovalReport rep;
  rep.C0 = tr.C0();
  rep.K_sigma = tr.K_sigma();
  const double slack = 10.0 * tr.tolerance();
  std::vector<double> z(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    const double d1 = tr.phi_prime(x);
    rep.min_phi_prime = std::min(rep.min_phi_prime, d1);
    rep.max_phi_prime = std::max(rep.max_phi_prime, d1);
    rep.max_abs_phi_second = std::max(rep.max_abs_phi_second, std::fabs(tr.phi_second(x)));
    z[i] = tr.phi(x);
    rep.max_round_trip_error = std::max(rep.max_round_trip_error, std::fabs(tr.phi_inverse(z[i]) - x));
  }
  rep.phi_second_bound = 2.0 * rep.K_sigma * rep.K_sigma * b.sup_norm * rep.max_phi_prime;
  if (rep.min_phi_prime < 1.0 / rep.C0 - slack) rep.violations.push_back("phi' below 1/C0");
  if (rep.max_phi_prime > rep.C0 + slack) rep.violations.push_back("phi' above C0");
  if (rep.max_abs_phi_second > rep.phi_second_bound * (1 + 1e-12) + slack) rep.violations.push_back("|phi''| bound");
  if (rep.max_round_trip_error > round_trip_tol) rep.violations.push_back("phi^{-1}(phi(x)) != x");

  if (grid.size() >= 2) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
    for (std::size_t r = 0; r < pairs; ++r) {
      const auto i = pick(rng), j = pick(rng);
      if (z[i] == z[j]) continue;
      const double ratio = std::fabs(tr.phi_inverse(z[i]) - tr.phi_inverse(z[j])) / std::fabs(z[i] - z[j]);
      rep.max_lipschitz_ratio = std::max(rep.max_lipschitz_ratio, ratio);
      ++rep.lipschitz_pairs;
    }
    if (rep.max_lipschitz_ratio > rep.C0 * (1 + 1e-9)) rep.violations.push_back("phi^{-1} Lipschitz bound");
  }
  return rep;
}

}  // namespace sdeconv
