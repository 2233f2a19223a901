#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "quadrature.hpp"

namespace sdeconv {

/// Yamada-Watanabe pair for (delta, eps): a continuous density psi supported in
/// [eps/delta, eps] with int psi = 1 and psi(z) <= 2/(z log delta), and the
/// even C^2 surrogate of |x|
///   phi(x) = int_0^{|x|} int_0^y psi(z) dz dy.
///
/// psi(z) = s h(log z) / z where h is a trapezoid in u = log z: it rises over
/// the first ramp_fraction of [log(eps/delta), log eps], stays at 1, and falls
/// over the last ramp_fraction. In u-coordinates everything is polynomial, so
/// the normaliser s = 1/(log(delta)(1 - ramp)) and both integrals of psi are
/// evaluated in closed form.
class MollifierPair {
 public:
  MollifierPair(double delta, double eps, double ramp_fraction = 0.125)
      : delta_(delta), eps_(eps), ramp_(ramp_fraction) {
    if (!(delta > 1.0)) throw DomainError("MollifierPair: delta must exceed 1");
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("MollifierPair: eps must lie in (0,1)");
    if (!(ramp_fraction > 0.0 && ramp_fraction <= 0.25)) throw DomainError("MollifierPair: ramp_fraction must lie in (0,1/4]");
    log_delta_ = std::log(delta);
    u0_ = std::log(eps) - log_delta_;
    u3_ = std::log(eps);
    w_ = ramp_ * log_delta_;
    u1_ = u0_ + w_;
    u2_ = u3_ - w_;
    a0_ = eps / delta;
    a1_ = std::exp(u1_);
    a2_ = std::exp(u2_);
    s_ = 1.0 / (log_delta_ * (1.0 - ramp_));
    if (s_ > 2.0 / log_delta_) throw DomainError("MollifierPair: cap 2/(z log delta) would be violated");
    Phi_a1_ = Phi_seg1(a1_);
    Phi_a2_ = Phi_a1_ + Phi_seg2(a2_);
    Phi_eps_ = Phi_a2_ + Phi_seg3(eps_);
  }

  double delta() const { return delta_; }
  double eps() const { return eps_; }
  double ramp_fraction() const { return ramp_; }
  double normalizer() const { return s_; }
  double log_delta() const { return log_delta_; }

  double psi(double z) const {
    if (!(z > a0_ && z < eps_)) return 0.0;
    return s_ * h(std::log(z)) / z;
  }

  // int_0^y psi, y >= 0.
  double psi_cumulative(double y) const {
    if (y <= a0_) return 0.0;
    if (y >= eps_) return 1.0;
    const double u = std::log(y);
    if (u <= u1_) return s_ * (u - u0_) * (u - u0_) / (2.0 * w_);
    if (u <= u2_) return s_ * (0.5 * w_ + (u - u1_));
    const double v = u - u2_;
    return std::min(1.0, s_ * (0.5 * w_ + (u2_ - u1_) + v - v * v / (2.0 * w_)));
  }

  double phi(double x) const {
    const double y = std::fabs(x);
    if (y <= a0_) return 0.0;
    if (y <= a1_) return Phi_seg1(y);
    if (y <= a2_) return Phi_a1_ + Phi_seg2(y);
    if (y <= eps_) return Phi_a2_ + Phi_seg3(y);
    return Phi_eps_ + (y - eps_);
  }

  double phi_prime(double x) const { return x >= 0 ? psi_cumulative(x) : -psi_cumulative(-x); }
  double phi_second(double x) const { return psi(std::fabs(x)); }

 private:
  double h(double u) const {
    if (u <= u0_ || u >= u3_) return 0.0;
    if (u < u1_) return (u - u0_) / w_;
    if (u > u2_) return (u3_ - u) / w_;
    return 1.0;
  }

  // Antiderivatives in y of (log y - c)^k, k = 1, 2.
  static double A1(double y, double c) { return y * (std::log(y) - c - 1.0); }
  static double A2(double y, double c) {
    const double v = std::log(y) - c;
    return y * (v * v - 2.0 * v + 2.0);
  }

  double Phi_seg1(double y) const { return s_ / (2.0 * w_) * (A2(y, u0_) - A2(a0_, u0_)); }
  double Phi_seg2(double y) const { return s_ * (0.5 * w_ * (y - a1_) + A1(y, u1_) - A1(a1_, u1_)); }
  double Phi_seg3(double y) const {
    return s_ * ((0.5 * w_ + u2_ - u1_) * (y - a2_) + A1(y, u2_) - A1(a2_, u2_) -
                 (A2(y, u2_) - A2(a2_, u2_)) / (2.0 * w_));
  }

  double delta_, eps_, ramp_;
  double log_delta_, u0_, u1_, u2_, u3_, w_, a0_, a1_, a2_, s_;
  double Phi_a1_, Phi_a2_, Phi_eps_;
};

inline MollifierPair build_mollifier(double delta, double eps, double ramp_fraction = 0.125) {
  return MollifierPair(delta, eps, ramp_fraction);
}

struct MollifierReport {
  double integral_slack = 0.0;          // |int psi - 1|
  double max_cap_ratio = 0.0;           // max psi(z) z log(delta) / 2
  double min_surrogate_slack = INFINITY;  // min eps + phi(x) - |x|
  double max_abs_phi_prime = 0.0;
  double max_phi_second_mismatch = 0.0;   // |phi'' - psi(|x|)| via central differences of phi'
  double max_phi_prime_mismatch = 0.0;    // |phi' - (phi(x+h)-phi(x-h))/2h|
  std::size_t points = 0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Grid of `n` points: dense on [-2 eps, 2 eps] plus log-spaced tails to +-10.
inline std::vector<double> mollifier_grid(const MollifierPair& pair, std::size_t n = 10000) {
  std::vector<double> g;
  const std::size_t dense = n * 8 / 10, tail = (n - dense) / 2;
  const double e = pair.eps();
  for (std::size_t i = 0; i < dense; ++i) g.push_back(-2 * e + 4 * e * (static_cast<double>(i) + 0.5) / static_cast<double>(dense));
  for (std::size_t i = 0; i < tail; ++i) {
    const double v = 2 * e * std::pow(5.0 / e, (static_cast<double>(i) + 1) / static_cast<double>(tail));
    g.push_back(v);
    g.push_back(-v);
  }
  std::sort(g.begin(), g.end());
  return g;
}

/// Checks the mollifier properties pointwise on `grid`:
///   int psi = 1,  0 <= psi(z) <= 2/(z log delta),  |x| <= eps + phi(x),
///   |phi'| <= 1,  phi''(+-|x|) = psi(|x|) <= 2/(|x| log delta) 1_{[eps/delta, eps]}(|x|).
/// The normalisation and the derivative identities are re-derived numerically
/// (quadrature, finite differences) rather than read from the closed forms.
inline MollifierReport verify_properties(const MollifierPair& pair, const std::vector<double>& grid,
                                         double integral_tol = 1e-6) {
  MollifierReport rep;
  rep.points = grid.size();
  const double a0 = pair.eps() / pair.delta(), eps = pair.eps(), L = pair.log_delta();

  // Quadrature in u = log z where psi(z) dz = s h(u) du; 64 panels per ramp/flat piece.
  const double u0 = std::log(a0), u3 = std::log(eps), w = pair.ramp_fraction() * L;
  const auto integrand = [&](double u) { return pair.psi(std::exp(u)) * std::exp(u); };
  const double integral = quad::composite(integrand, u0, u0 + w, 64) + quad::composite(integrand, u0 + w, u3 - w, 64) +
                          quad::composite(integrand, u3 - w, u3, 64);
  rep.integral_slack = std::fabs(integral - 1.0);
  if (rep.integral_slack > integral_tol) rep.violations.push_back("int psi != 1");

  for (double x : grid) {
    const double y = std::fabs(x);
    if (y > 0) {
      const double p = pair.psi(y);
      const double cap = 2.0 / (y * L);
      rep.max_cap_ratio = std::max(rep.max_cap_ratio, p / cap);
      if (p < 0.0 || p > cap) rep.violations.push_back("psi cap at " + std::to_string(y));
      if ((y < a0 || y > eps) && p != 0.0) rep.violations.push_back("psi support at " + std::to_string(y));
    }
    const double slack = eps + pair.phi(x) - y;
    rep.min_surrogate_slack = std::min(rep.min_surrogate_slack, slack);
    if (slack < 0.0) rep.violations.push_back("|x| <= eps + phi(x) at " + std::to_string(x));
    const double d1 = std::fabs(pair.phi_prime(x));
    rep.max_abs_phi_prime = std::max(rep.max_abs_phi_prime, d1);
    if (d1 > 1.0 + 1e-12) rep.violations.push_back("|phi'| <= 1 at " + std::to_string(x));

    // Finite-difference cross checks, step small relative to the local scale.
    const double hstep = 1e-4 * std::max(y, a0);
    const double fd1 = (pair.phi(x + hstep) - pair.phi(x - hstep)) / (2 * hstep);
    rep.max_phi_prime_mismatch = std::max(rep.max_phi_prime_mismatch, std::fabs(fd1 - pair.phi_prime(x)));
    if (y > 2 * hstep && std::fabs(y - a0) > 2 * hstep && std::fabs(y - eps) > 2 * hstep) {
      const double fd2 = (pair.phi_prime(x + hstep) - pair.phi_prime(x - hstep)) / (2 * hstep);
      rep.max_phi_second_mismatch = std::max(rep.max_phi_second_mismatch, std::fabs(fd2 - pair.psi(y)) * y);
    }
  }
  return rep;
}

}  // namespace sdeconv
