#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "quadrature.hpp"
#include "singular_set.hpp"

namespace sdeconv {

using RealFn = std::function<double(double)>;

/// A bounded scalar coefficient (drift or diffusion) together with the data
/// certifying membership in H^{beta,kappa}:
///   |f(x) - f(y)| <= holder_seminorm * |x - y|^beta   whenever [x,y] misses S(f),
///   lambda(S(f)^eps  ∩ [-K,K]) <= c_beta_kappa_bound * K * eps^kappa.
struct CoefficientSpec {
  RealFn eval;
  double sup_norm = 0.0;
  double beta = 1.0;
  double kappa = 1.0;
  double holder_seminorm = 0.0;
  SingularSet singular_set;
  double c_beta_kappa_bound = 0.0;
  bool in_L1 = false;
  double L1_norm = 0.0;
  std::string name;

  double operator()(double x) const { return eval(x); }
  double holder_norm() const { return sup_norm + holder_seminorm; }
};

/// Uniform ellipticity bounds plus the monotone dominance witness f_sigma with
/// |sigma(x) - sigma(y)|^2 <= |f_sigma(x) - f_sigma(y)|. The witness is absent
/// for diffusions where none is known (e.g. periodic sigma).
struct DiffusionCertificate {
  double sigma_lower = 1.0;
  double sigma_upper = 1.0;
  RealFn f_sigma;
  double f_sigma_sup = 0.0;

  bool has_witness() const { return static_cast<bool>(f_sigma); }
};

struct Diffusion {
  CoefficientSpec spec;
  DiffusionCertificate cert;
};

// ---------------------------------------------------------------------------
// Pieces for piecewise-Hölder coefficients.

struct Piece {
  RealFn f;
  // [min, max] of f over [lo, hi]; infinite bounds allowed for the outer pieces.
  std::function<std::pair<double, double>(double, double)> range_on;
  // Integral of |f| over [lo, hi] if finite.
  std::function<std::optional<double>(double, double)> l1_on;
  double lipschitz = 0.0;
  bool is_constant = false;
};

namespace piece {

inline Piece constant(double c) {
  Piece p;
  p.f = [c](double) { return c; };
  p.range_on = [c](double, double) { return std::pair{c, c}; };
  p.l1_on = [c](double lo, double hi) -> std::optional<double> {
    if (c == 0.0) return 0.0;
    if (!std::isfinite(lo) || !std::isfinite(hi)) return std::nullopt;
    return std::fabs(c) * (hi - lo);
  };
  p.is_constant = true;
  return p;
}

inline Piece linear(double slope, double intercept) {
  if (slope == 0.0) return constant(intercept);
  Piece p;
  p.f = [slope, intercept](double x) { return slope * x + intercept; };
  p.range_on = [slope, intercept](double lo, double hi) {
    const double a = std::isfinite(lo) ? slope * lo + intercept : (slope > 0 ? -INFINITY : INFINITY);
    const double b = std::isfinite(hi) ? slope * hi + intercept : (slope > 0 ? INFINITY : -INFINITY);
    return std::pair{std::min(a, b), std::max(a, b)};
  };
  p.l1_on = [slope, intercept](double lo, double hi) -> std::optional<double> {
    if (!std::isfinite(lo) || !std::isfinite(hi)) return std::nullopt;
    // Integral of |slope*x + intercept|, split at the root.
    const double root = -intercept / slope;
    auto prim = [&](double x) { return 0.5 * slope * x * x + intercept * x; };
    if (root <= lo || root >= hi) return std::fabs(prim(hi) - prim(lo));
    return std::fabs(prim(root) - prim(lo)) + std::fabs(prim(hi) - prim(root));
  };
  p.lipschitz = std::fabs(slope);
  return p;
}

// offset + amplitude * sin(frequency * x + phase)
inline Piece sine(double amplitude, double frequency, double phase, double offset) {
  if (amplitude == 0.0 || frequency == 0.0) return constant(offset + amplitude * std::sin(phase));
  Piece p;
  p.f = [=](double x) { return offset + amplitude * std::sin(frequency * x + phase); };
  p.range_on = [=](double lo, double hi) {
    const double a = std::fabs(amplitude);
    if (!std::isfinite(lo) || !std::isfinite(hi) || std::fabs(frequency) * (hi - lo) >= 2 * std::numbers::pi)
      return std::pair{offset - a, offset + a};
    // Endpoints plus interior extrema at phase pi/2 + k*pi.
    const double u_lo = std::min(frequency * lo, frequency * hi) + phase;
    const double u_hi = std::max(frequency * lo, frequency * hi) + phase;
    double mn = offset + amplitude * std::min(std::sin(u_lo), std::sin(u_hi));
    double mx = offset + amplitude * std::max(std::sin(u_lo), std::sin(u_hi));
    const double half_pi = 0.5 * std::numbers::pi;
    for (double k = std::ceil((u_lo - half_pi) / std::numbers::pi); half_pi + k * std::numbers::pi <= u_hi; k += 1) {
      const double v = offset + amplitude * std::sin(half_pi + k * std::numbers::pi);
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    return std::pair{mn, mx};
  };
  p.l1_on = [=](double lo, double hi) -> std::optional<double> {
    if (!std::isfinite(lo) || !std::isfinite(hi)) return std::nullopt;
    const int panels = std::max(64, static_cast<int>(std::fabs(frequency) * (hi - lo) * 16));
    return quad::composite([&](double x) { return std::fabs(offset + amplitude * std::sin(frequency * x + phase)); },
                           lo, hi, panels);
  };
  p.lipschitz = std::fabs(amplitude * frequency);
  return p;
}

// Arbitrary bounded function with user-declared bounds.
inline Piece custom(RealFn f, double inf_value, double sup_value, double lipschitz) {
  Piece p;
  p.f = std::move(f);
  p.range_on = [=](double, double) { return std::pair{inf_value, sup_value}; };
  p.l1_on = [](double, double) -> std::optional<double> { return std::nullopt; };
  p.lipschitz = lipschitz;
  return p;
}

}  // namespace piece

// ---------------------------------------------------------------------------
// Constructors.

inline CoefficientSpec make_constant(double c) {
  CoefficientSpec s;
  s.eval = [c](double) { return c; };
  s.sup_norm = std::fabs(c);
  s.in_L1 = (c == 0.0);
  s.name = "constant(" + std::to_string(c) + ")";
  return s;
}

/// Piecewise beta-Hölder function: pieces[i] acts on [s_i, s_{i+1}) with
/// s_0 = -inf and s_{m+1} = +inf (right-continuous at each breakpoint).
inline CoefficientSpec make_piecewise_holder(std::vector<double> breakpoints, std::vector<Piece> pieces, double beta,
                                             double L) {
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i - 1] < breakpoints[i]))
      throw DomainError("make_piecewise_holder: breakpoints must be strictly increasing");
  if (pieces.size() != breakpoints.size() + 1)
    throw DomainError("make_piecewise_holder: need exactly one more piece than breakpoints");
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("make_piecewise_holder: beta must lie in (0,1]");
  if (!(L >= 0.0)) throw DomainError("make_piecewise_holder: L must be nonnegative");

  CoefficientSpec s;
  const std::size_t m = breakpoints.size();
  double sup = 0.0, l1 = 0.0;
  bool integrable = true;
  for (std::size_t i = 0; i <= m; ++i) {
    const double lo = i == 0 ? -INFINITY : breakpoints[i - 1];
    const double hi = i == m ? INFINITY : breakpoints[i];
    const auto [mn, mx] = pieces[i].range_on(lo, hi);
    sup = std::max({sup, std::fabs(mn), std::fabs(mx)});
    if (auto v = pieces[i].l1_on(lo, hi))
      l1 += *v;
    else
      integrable = false;
  }
  if (!std::isfinite(sup)) throw DomainError("make_piecewise_holder: coefficient is unbounded");

  std::vector<RealFn> fs;
  for (auto& p : pieces) fs.push_back(p.f);
  s.eval = [bp = breakpoints, fs = std::move(fs)](double x) {
    const auto i = static_cast<std::size_t>(std::upper_bound(bp.begin(), bp.end(), x) - bp.begin());
    return fs[i](x);
  };
  s.sup_norm = sup;
  s.beta = beta;
  s.kappa = 1.0;
  s.holder_seminorm = L;
  s.singular_set = SingularSet::finite(breakpoints);
  s.c_beta_kappa_bound = 2.0 * static_cast<double>(m);
  s.in_L1 = integrable;
  s.L1_norm = integrable ? l1 : 0.0;
  s.name = "piecewise(m=" + std::to_string(m) + ")";
  return s;
}

// Indicator of [a, b), right-continuous at both ends.
inline CoefficientSpec make_indicator_interval(double a, double b) {
  auto s = make_piecewise_holder({a, b}, {piece::constant(0), piece::constant(1), piece::constant(0)}, 1.0, 0.0);
  s.name = "indicator[" + std::to_string(a) + "," + std::to_string(b) + ")";
  return s;
}

// Ellipticity bounds and, for piecewise-constant sigma, the dominance witness
//   f(x) = m * sum_i J_i^2 1{x >= s_i} + arctan(x)/pi + 1/2,
// valid since (sum of m jumps)^2 <= m * sum J_i^2.
inline DiffusionCertificate make_piecewise_diffusion_certificate(const std::vector<double>& breakpoints,
                                                                 const std::vector<Piece>& pieces) {
  DiffusionCertificate c;
  const std::size_t m = breakpoints.size();
  double lo_v = INFINITY, hi_v = -INFINITY;
  bool all_constant = true;
  for (std::size_t i = 0; i <= m; ++i) {
    const double lo = i == 0 ? -INFINITY : breakpoints[i - 1];
    const double hi = i == m ? INFINITY : breakpoints[i];
    const auto [mn, mx] = pieces[i].range_on(lo, hi);
    lo_v = std::min(lo_v, mn);
    hi_v = std::max(hi_v, mx);
    all_constant = all_constant && pieces[i].is_constant;
  }
  if (!(lo_v > 0.0)) throw DomainError("diffusion must be uniformly positive");
  if (!std::isfinite(hi_v)) throw DomainError("diffusion must be bounded");
  c.sigma_lower = lo_v;
  c.sigma_upper = hi_v;
  if (all_constant) {
    std::vector<double> weights;
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double jump = pieces[i + 1].f(breakpoints[i]) - pieces[i].f(breakpoints[i]);
      weights.push_back(static_cast<double>(m) * jump * jump);
      total += weights.back();
    }
    c.f_sigma = [bp = breakpoints, weights](double x) {
      double v = std::atan(x) / std::numbers::pi + 0.5;
      for (std::size_t i = 0; i < bp.size(); ++i)
        if (x >= bp[i]) v += weights[i];
      return v;
    };
    c.f_sigma_sup = total + 1.0;
  }
  return c;
}

/// sigma(x) = 1 + 1{x >= 0}.
inline Diffusion make_step_sigma() {
  std::vector<Piece> pieces{piece::constant(1.0), piece::constant(2.0)};
  Diffusion d;
  d.spec = make_piecewise_holder({0.0}, pieces, 1.0, 0.0);
  d.spec.name = "step_sigma";
  d.cert = make_piecewise_diffusion_certificate({0.0}, pieces);
  return d;
}

// Closed-form evaluation of the strictly increasing function zeta with
// discontinuities at p_n = n^{-1/(1-kappa)}.
inline double zeta_value(double x, double beta_hat, double kappa) {
  if (x <= 0.0) return (x - 1.0) / (2.0 * x - 1.0);
  if (x >= 1.0) return (3.0 * x + 1.0) / (x + 1.0);
  const double e = -1.0 / (1.0 - kappa);
  auto p = [e](double n) { return std::pow(n, e); };
  // n with p(n+1) <= x < p(n).
  double n = std::floor(std::pow(x, -(1.0 - kappa)));
  n = std::max(n, 1.0);
  while (p(n + 1.0) > x) n += 1.0;
  while (n > 1.0 && p(n) <= x) n -= 1.0;
  return 1.0 + std::numbers::ln2 / std::log(n + 1.0) * std::pow(x, beta_hat);
}

namespace detail {

// Upper bound on sup |zeta(x)-zeta(y)|/|x-y|^beta over pairs inside one
// continuity piece. On the n-th middle piece the increment is bounded by
// c_n * min(d^bh, bh * p_{n+1}^{bh-1} * d); the outer branches are 1- and
// 1/2-Lipschitz with ranges of length 1/2 and 1.
inline double zeta_holder_seminorm(double beta_hat, double kappa, double beta) {
  const double e = -1.0 / (1.0 - kappa);
  double L = 1.0;
  for (std::uint64_t n = 1; n <= 200000; ++n) {
    const double pn = std::pow(static_cast<double>(n), e);
    const double pn1 = std::pow(static_cast<double>(n + 1), e);
    const double len = pn - pn1;
    const double cn = std::numbers::ln2 / std::log(static_cast<double>(n) + 1.0);
    const double slope = beta_hat * std::pow(pn1, beta_hat - 1.0);
    const double cross = std::pow(slope, -1.0 / (1.0 - beta_hat));
    const double d = std::min(cross, len);
    const double ratio = cn * std::min(std::pow(d, beta_hat), slope * d) / std::pow(d, beta);
    L = std::max(L, ratio);
  }
  return L * (1.0 + 1e-9);
}

}  // namespace detail

/// zeta with parameters (beta_hat, kappa) in (0,1)^2: beta = (1+bh-kappa)/(2-kappa),
/// S = { n^{-1/(1-kappa)} }, C_{beta,kappa} <= 3, 1/2 < zeta < 3, and f_sigma = (5/2) zeta.
inline Diffusion make_zeta(double beta_hat, double kappa) {
  if (!(beta_hat > 0.0 && beta_hat < 1.0) || !(kappa > 0.0 && kappa < 1.0))
    throw DomainError("make_zeta: beta_hat and kappa must lie in (0,1)");
  Diffusion d;
  auto& s = d.spec;
  s.eval = [beta_hat, kappa](double x) { return zeta_value(x, beta_hat, kappa); };
  s.sup_norm = 3.0;
  s.beta = (1.0 + beta_hat - kappa) / (2.0 - kappa);
  s.kappa = kappa;
  s.holder_seminorm = detail::zeta_holder_seminorm(beta_hat, kappa, s.beta);
  s.singular_set = SingularSet::inverse_power(kappa);
  s.c_beta_kappa_bound = 3.0;
  s.in_L1 = false;
  s.name = "zeta(" + std::to_string(beta_hat) + "," + std::to_string(kappa) + ")";
  d.cert.sigma_lower = 0.5;
  d.cert.sigma_upper = 3.0;
  d.cert.f_sigma = [beta_hat, kappa](double x) { return 2.5 * zeta_value(x, beta_hat, kappa); };
  d.cert.f_sigma_sup = 7.5;
  return d;
}

// ---------------------------------------------------------------------------
// Vector-space structure.

namespace detail {
// Hölder constant of f at a smaller exponent: increments over |x-y| > 1 are
// bounded by 2 sup|f|.
inline double seminorm_at(const CoefficientSpec& f, double beta) {
  return f.beta == beta ? f.holder_seminorm : std::max(f.holder_seminorm, 2.0 * f.sup_norm);
}
}  // namespace detail

/// a*f + b*g. beta and kappa are the minima (kappa over nonempty singular
/// sets); L1_norm is an upper bound when both are integrable.
inline CoefficientSpec combine(double a, const CoefficientSpec& f, double b, const CoefficientSpec& g) {
  CoefficientSpec s;
  s.eval = [a, b, fe = f.eval, ge = g.eval](double x) { return a * fe(x) + b * ge(x); };
  s.sup_norm = std::fabs(a) * f.sup_norm + std::fabs(b) * g.sup_norm;
  s.beta = std::min(f.beta, g.beta);
  const bool fe = f.singular_set.is_empty(), ge = g.singular_set.is_empty();
  s.kappa = fe && ge ? std::min(f.kappa, g.kappa) : fe ? g.kappa : ge ? f.kappa : std::min(f.kappa, g.kappa);
  s.holder_seminorm =
      std::fabs(a) * detail::seminorm_at(f, s.beta) + std::fabs(b) * detail::seminorm_at(g, s.beta);
  s.singular_set = f.singular_set.unite(g.singular_set);
  // eps <= 1: eps^kappa_i <= eps^kappa; eps > 1: measure <= 2K <= 2K eps^kappa.
  s.c_beta_kappa_bound = s.singular_set.is_empty() ? 0.0 : std::max(f.c_beta_kappa_bound + g.c_beta_kappa_bound, 2.0);
  s.in_L1 = (a == 0.0 || f.in_L1) && (b == 0.0 || g.in_L1);
  s.L1_norm = s.in_L1 ? std::fabs(a) * f.L1_norm + std::fabs(b) * g.L1_norm : 0.0;
  s.name = "combine(" + f.name + "," + g.name + ")";
  return s;
}

/// a*sigma1 + b*sigma2 with a, b > 0; witness 2a^2 f1 + 2b^2 f2.
inline Diffusion combine(double a, const Diffusion& s1, double b, const Diffusion& s2) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("combine: diffusion weights must be positive");
  Diffusion d;
  d.spec = combine(a, s1.spec, b, s2.spec);
  d.cert.sigma_lower = a * s1.cert.sigma_lower + b * s2.cert.sigma_lower;
  d.cert.sigma_upper = a * s1.cert.sigma_upper + b * s2.cert.sigma_upper;
  if (s1.cert.has_witness() && s2.cert.has_witness()) {
    d.cert.f_sigma = [a, b, f1 = s1.cert.f_sigma, f2 = s2.cert.f_sigma](double x) {
      return 2 * a * a * f1(x) + 2 * b * b * f2(x);
    };
    d.cert.f_sigma_sup = 2 * a * a * s1.cert.f_sigma_sup + 2 * b * b * s2.cert.f_sigma_sup;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Neighbourhood measure and certificate checks.

inline double neighborhood_measure(const SingularSet& S, double eps, double K) {
  return S.neighborhood_measure(eps, K);
}

struct KEps {
  double K;
  double eps;
};

// K in {1,2,4,8,16}, eps = 10^{-6} .. 10^{1} at four points per decade.
inline std::vector<KEps> default_c_grid() {
  std::vector<KEps> g;
  for (double K : {1.0, 2.0, 4.0, 8.0, 16.0})
    for (int i = -24; i <= 4; ++i) g.push_back({K, std::pow(10.0, i / 4.0)});
  return g;
}

/// max over the grid of lambda(S^eps ∩ [-K,K]) / (K eps^kappa); a lower bound for C_{beta,kappa}.
inline double estimate_c_beta_kappa(const SingularSet& S, double kappa, const std::vector<KEps>& grid) {
  if (grid.empty()) throw DomainError("estimate_c_beta_kappa: empty grid");
  if (S.is_empty()) return 0.0;
  double best = 0.0;
  for (const auto& [K, eps] : grid) best = std::max(best, S.neighborhood_measure(eps, K) / (K * std::pow(eps, kappa)));
  return best;
}

struct Violation {
  std::string check;
  double x = 0.0, y = 0.0;  // witnesses (y unused for pointwise checks)
  double lhs = 0.0, rhs = 0.0;
};

struct CertificateReport {
  std::vector<Violation> violations;
  std::size_t holder_pairs_checked = 0;
  double max_holder_ratio = 0.0;  // max |f(x)-f(y)| / |x-y|^beta over checked pairs
  double c_beta_kappa_estimate = 0.0;
  bool ok() const { return violations.empty(); }
};

struct CertificateCheckOptions {
  std::size_t random_pairs = 10000;
  std::uint64_t seed = 0x5eed;
  std::vector<KEps> c_grid = default_c_grid();
  double rel_tol = 1e-12;
};

/// Checks every certificate inequality on `grid` (sorted). Hölder pairs are all
/// consecutive grid pairs plus `random_pairs` random ones, skipping pairs
/// whose closed span meets S(f).
inline CertificateReport check_certificates(const CoefficientSpec& spec, const DiffusionCertificate* cert,
                                            const std::vector<double>& grid, const CertificateCheckOptions& opt = {}) {
  CertificateReport rep;
  const auto tol = [&](double rhs) { return rhs * (1.0 + opt.rel_tol) + 1e-14; };
  std::vector<double> fx(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    fx[i] = spec(grid[i]);
    if (std::fabs(fx[i]) > tol(spec.sup_norm)) rep.violations.push_back({"sup_norm", grid[i], 0, std::fabs(fx[i]), spec.sup_norm});
  }

  std::mt19937_64 rng(opt.seed);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 1; i < grid.size(); ++i) pairs.emplace_back(i - 1, i);
  if (grid.size() >= 2) {
    std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
    for (std::size_t r = 0; r < opt.random_pairs; ++r) {
      auto i = pick(rng), j = pick(rng);
      if (i == j) continue;
      if (i > j) std::swap(i, j);
      pairs.emplace_back(i, j);
    }
  }
  for (const auto& [i, j] : pairs) {
    const double x = grid[i], y = grid[j];
    if (!(x < y) || spec.singular_set.intersects(x, y)) continue;
    ++rep.holder_pairs_checked;
    const double lhs = std::fabs(fx[i] - fx[j]);
    const double scale = std::pow(y - x, spec.beta);
    rep.max_holder_ratio = std::max(rep.max_holder_ratio, lhs / scale);
    if (lhs > tol(spec.holder_seminorm * scale)) rep.violations.push_back({"holder", x, y, lhs, spec.holder_seminorm * scale});
  }

  rep.c_beta_kappa_estimate = estimate_c_beta_kappa(spec.singular_set, spec.kappa, opt.c_grid);
  if (!spec.singular_set.is_empty()) {
    for (const auto& [K, eps] : opt.c_grid) {
      const double lhs = spec.singular_set.neighborhood_measure(eps, K);
      const double rhs = spec.c_beta_kappa_bound * K * std::pow(eps, spec.kappa);
      if (lhs > tol(rhs)) rep.violations.push_back({"neighborhood", K, eps, lhs, rhs});
    }
  }

  if (cert) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (fx[i] < cert->sigma_lower * (1 - opt.rel_tol))
        rep.violations.push_back({"ellipticity_lower", grid[i], 0, fx[i], cert->sigma_lower});
      if (fx[i] > tol(cert->sigma_upper)) rep.violations.push_back({"ellipticity_upper", grid[i], 0, fx[i], cert->sigma_upper});
    }
    if (cert->has_witness()) {
      std::vector<double> gx(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i) {
        gx[i] = cert->f_sigma(grid[i]);
        if (std::fabs(gx[i]) > tol(cert->f_sigma_sup))
          rep.violations.push_back({"f_sigma_bound", grid[i], 0, std::fabs(gx[i]), cert->f_sigma_sup});
        if (i > 0 && grid[i - 1] < grid[i] && !(gx[i - 1] < gx[i]))
          rep.violations.push_back({"f_sigma_increasing", grid[i - 1], grid[i], gx[i - 1], gx[i]});
      }
      for (const auto& [i, j] : pairs) {
        const double lhs = (fx[i] - fx[j]) * (fx[i] - fx[j]);
        const double rhs = std::fabs(gx[i] - gx[j]);
        if (lhs > tol(rhs)) rep.violations.push_back({"f_sigma_dominance", grid[i], grid[j], lhs, rhs});
      }
    }
  }
  return rep;
}

}  // namespace sdeconv
