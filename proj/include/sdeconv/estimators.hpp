#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "coeffs.hpp"
#include "em.hpp"
#include "errors.hpp"
#include "exact_sum.hpp"

namespace sdeconv {

// ---------------------------------------------------------------------------
// Per-time moment series and sup-of-mean summaries

/// First and second moments of a path functional at every fine time,
/// accumulated exactly so the result is independent of path order.
class TimeMoments {
 public:
  TimeMoments() = default;
  explicit TimeMoments(std::size_t points) : s1_(points), s2_(points) {}

  std::size_t size() const { return s1_.size(); }
  std::uint64_t count() const { return count_; }

  // values[i] for i < size(); one call per path.
  void add_path(std::span<const double> values) {
    for (std::size_t i = 0; i < s1_.size(); ++i) {
      s1_[i].add(values[i]);
      s2_[i].add(values[i] * values[i]);
    }
    ++count_;
  }
  TimeMoments& operator+=(const TimeMoments& o) {
    for (std::size_t i = 0; i < s1_.size(); ++i) {
      s1_[i] += o.s1_[i];
      s2_[i] += o.s2_[i];
    }
    count_ += o.count_;
    return *this;
  }
  double mean(std::size_t i) const { return count_ ? s1_[i].value() / static_cast<double>(count_) : 0.0; }
  double standard_error(std::size_t i) const {
    if (count_ < 2) return 0.0;
    const double m = static_cast<double>(count_);
    const double mu = s1_[i].value() / m;
    return std::sqrt(std::max(0.0, (s2_[i].value() - m * mu * mu) / (m - 1.0)) / m);
  }

 private:
  std::vector<ExactSum> s1_, s2_;
  std::uint64_t count_ = 0;
};

struct SupMean {
  double value = 0.0;
  double se = 0.0;
  std::size_t argmax_index = 0;
  double argmax_time = 0.0;
  std::uint64_t samples = 0;
};

// max_i mean(i); the first index attaining it wins. Standard error at argmax.
inline SupMean sup_of_mean(const TimeMoments& tm, double dt) {
  SupMean s;
  s.samples = tm.count();
  s.value = -1.0;
  for (std::size_t i = 0; i < tm.size(); ++i) {
    const double m = tm.mean(i);
    if (m > s.value) {
      s.value = m;
      s.argmax_index = i;
    }
  }
  if (tm.size() == 0) s.value = 0.0;
  s.se = tm.standard_error(s.argmax_index);
  s.argmax_time = static_cast<double>(s.argmax_index) * dt;
  return s;
}

// ---------------------------------------------------------------------------
// Strong error  sup_t E|X^ref_t - X^(n)_t|

struct ErrorRow {
  std::size_t n = 0;
  double error_mean = 0.0;
  double error_se = 0.0;
  std::uint64_t samples = 0;
  double argmax_time = 0.0;
  double error_times_logn() const { return error_mean * std::log(static_cast<double>(n)); }
};

struct StrongErrorResult {
  std::vector<ErrorRow> rows;
  // e(n_ref/2 vs n_ref); negative when the n_ref/2 trajectory was unavailable.
  double self_coupling_floor = -1.0;
  double self_coupling_floor_se = 0.0;
  std::vector<std::string> warnings;
};

/// Streaming accumulator: feed one coupled path at a time.
class StrongErrorAccumulator {
 public:
  StrongErrorAccumulator(std::size_t N_fine, double T, std::vector<std::size_t> ns)
      : N_(N_fine), T_(T), ns_(std::move(ns)) {
    for (std::size_t i = 0; i < ns_.size(); ++i) moments_.emplace_back(N_fine + 1);
    diff_.resize(N_fine + 1);
  }

  const std::vector<std::size_t>& levels() const { return ns_; }

  // em[i] is the fine interpolation at resolution levels()[i].
  void add_path(std::span<const double> ref, const std::vector<std::span<const double>>& em) {
    for (std::size_t l = 0; l < ns_.size(); ++l) {
      for (std::size_t i = 0; i <= N_; ++i) diff_[i] = std::fabs(ref[i] - em[l][i]);
      moments_[l].add_path(diff_);
    }
  }
  StrongErrorAccumulator& operator+=(const StrongErrorAccumulator& o) {
    for (std::size_t l = 0; l < ns_.size(); ++l) moments_[l] += o.moments_[l];
    return *this;
  }
  SupMean level(std::size_t l) const { return sup_of_mean(moments_[l], T_ / static_cast<double>(N_)); }

 private:
  std::size_t N_;
  double T_;
  std::vector<std::size_t> ns_;
  std::vector<TimeMoments> moments_;
  std::vector<double> diff_;
};

inline ErrorRow make_error_row(std::size_t n, const SupMean& s) {
  return ErrorRow{n, s.value, s.se, s.samples, s.argmax_time};
}

/// Adds the self-coupling warnings: any e(n) within 10x of the floor.
inline void flag_floor_contamination(StrongErrorResult& res) {
  if (res.self_coupling_floor < 0.0) {
    res.warnings.push_back("self-coupling floor unavailable (no n_ref/2 trajectory)");
    return;
  }
  for (const auto& r : res.rows)
    if (r.error_mean > 0.0 && r.error_mean < 10.0 * res.self_coupling_floor)
      res.warnings.push_back("e(" + std::to_string(r.n) + ") is within 10x of the self-coupling floor");
}

/// sup over fine times of the Monte Carlo mean of |X^ref_t - X^(n)_t| for each
/// n != n_ref in `trajs`. The sup is taken after averaging. If n_ref/2 is
/// present it doubles as the self-coupling floor.
inline StrongErrorResult strong_error(const std::map<std::size_t, EmTrajectory>& trajs, std::size_t n_ref) {
  const auto it = trajs.find(n_ref);
  if (it == trajs.end()) throw DomainError("strong_error: n_ref trajectory missing");
  const EmTrajectory& ref = it->second;
  if (!ref.has_fine()) throw DomainError("strong_error: fine interpolation required");
  std::vector<std::size_t> ns;
  for (const auto& [n, tr] : trajs) {
    if (n == n_ref) continue;
    if (!tr.has_fine() || tr.M != ref.M || tr.N_fine != ref.N_fine)
      throw DomainError("strong_error: trajectories are not coupled on a common fine lattice");
    ns.push_back(n);
  }
  StrongErrorAccumulator acc(ref.N_fine, ref.T, ns);
  std::vector<std::span<const double>> em(ns.size());
  for (std::size_t j = 0; j < ref.M; ++j) {
    for (std::size_t l = 0; l < ns.size(); ++l) em[l] = trajs.at(ns[l]).fine_path(j);
    acc.add_path(ref.fine_path(j), em);
  }
  StrongErrorResult res;
  for (std::size_t l = 0; l < ns.size(); ++l) {
    const SupMean s = acc.level(l);
    if (ns[l] * 2 == n_ref) {
      res.self_coupling_floor = s.value;
      res.self_coupling_floor_se = s.se;
    }
    res.rows.push_back(make_error_row(ns[l], s));
  }
  flag_floor_contamination(res);
  return res;
}

// ---------------------------------------------------------------------------
// Increment moments  sup_t E|X^(n)_t - X^(n)_{eta(t)}|^q

inline void increment_powers(std::span<const double> fine, std::size_t n, double q, std::span<double> out) {
  const std::size_t N = fine.size() - 1, r = N / n;
  for (std::size_t i = 0; i <= N; ++i) out[i] = std::pow(std::fabs(fine[i] - fine[(i / r) * r]), q);
}

class IncrementMomentAccumulator {
 public:
  IncrementMomentAccumulator(std::size_t N_fine, double T, std::size_t n, double q)
      : N_(N_fine), T_(T), n_(n), q_(q), tm_(N_fine + 1), buf_(N_fine + 1) {
    if (!(q > 0.0)) throw DomainError("increment_moment: q must be positive");
  }
  void add_path(std::span<const double> fine) {
    increment_powers(fine, n_, q_, buf_);
    tm_.add_path(buf_);
  }
  IncrementMomentAccumulator& operator+=(const IncrementMomentAccumulator& o) {
    tm_ += o.tm_;
    return *this;
  }
  SupMean result() const { return sup_of_mean(tm_, T_ / static_cast<double>(N_)); }
  std::size_t n() const { return n_; }
  double q() const { return q_; }

 private:
  std::size_t N_;
  double T_;
  std::size_t n_;
  double q_;
  TimeMoments tm_;
  std::vector<double> buf_;
};

inline SupMean increment_moment(const EmTrajectory& traj, double q) {
  if (!traj.has_fine()) throw DomainError("increment_moment: fine interpolation required");
  IncrementMomentAccumulator acc(traj.N_fine, traj.T, traj.n, q);
  for (std::size_t j = 0; j < traj.M; ++j) acc.add_path(traj.fine_path(j));
  return acc.result();
}

// ---------------------------------------------------------------------------
// Local time of V(theta) = (1-theta) X^ref + theta X^(n)

/// Fine values of V (N+1 per path) and quadratic-variation increments
///   ((1-theta) sigma(X^ref_i) + theta sigma(X^(n)_{eta(i)}))^2 dt   (N per path).
struct InterpolatedProcess {
  double theta = 0.0;
  double T = 1.0;
  std::size_t n = 0;
  std::size_t M = 0;
  std::size_t N_fine = 0;
  std::vector<double> values;
  std::vector<double> qv;

  double dt() const { return T / static_cast<double>(N_fine); }
  std::span<const double> path(std::size_t j) const { return {values.data() + j * (N_fine + 1), N_fine + 1}; }
  std::span<const double> qv_path(std::size_t j) const { return {qv.data() + j * N_fine, N_fine}; }
};

inline void interpolate_path(std::span<const double> ref, std::span<const double> em, std::size_t n,
                             const CoefficientSpec& sigma, double theta, double dt, std::span<double> v_out,
                             std::span<double> qv_out) {
  const std::size_t N = ref.size() - 1, r = N / n;
  // Endpoints exact: theta in {0,1} reproduces the input path bit for bit.
  for (std::size_t i = 0; i <= N; ++i)
    v_out[i] = theta == 0.0 ? ref[i] : theta == 1.0 ? em[i] : (1.0 - theta) * ref[i] + theta * em[i];
  double s_em = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    if (i % r == 0) s_em = sigma(em[i]);
    const double s = (theta == 1.0 ? 0.0 : (1.0 - theta) * sigma(ref[i])) + (theta == 0.0 ? 0.0 : theta * s_em);
    qv_out[i] = s * s * dt;
  }
}

inline InterpolatedProcess interpolate(const EmTrajectory& ref, const EmTrajectory& em, const CoefficientSpec& sigma,
                                       double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("interpolate: theta must lie in [0,1]");
  if (!ref.has_fine() || !em.has_fine() || ref.M != em.M || ref.N_fine != em.N_fine)
    throw DomainError("interpolate: coupled fine trajectories required");
  InterpolatedProcess p;
  p.theta = theta;
  p.T = ref.T;
  p.n = em.n;
  p.M = ref.M;
  p.N_fine = ref.N_fine;
  p.values.resize(p.M * (p.N_fine + 1));
  p.qv.resize(p.M * p.N_fine);
  for (std::size_t j = 0; j < p.M; ++j)
    interpolate_path(ref.fine_path(j), em.fine_path(j), em.n, sigma, theta, p.dt(),
                     {p.values.data() + j * (p.N_fine + 1), p.N_fine + 1}, {p.qv.data() + j * p.N_fine, p.N_fine});
  return p;
}

/// Occupation-density estimate (1/2h) sum_{i<N} 1{|V_i - x| <= h} dQV_i.
inline double local_time_path(std::span<const double> v, std::span<const double> qv, double x, double h) {
  double s = 0.0;
  for (std::size_t i = 0; i < qv.size(); ++i)
    if (std::fabs(v[i] - x) <= h) s += qv[i];
  return s / (2.0 * h);
}

inline double default_bandwidth(double T, std::size_t N_fine) { return std::cbrt(T / static_cast<double>(N_fine)); }

inline bool bandwidth_under_resolved(double h, double sigma_bar, double dt) {
  return h < 3.0 * std::sqrt(sigma_bar * sigma_bar * dt);
}

struct LocalTimeEstimate {
  std::vector<double> per_path;
  double mean = 0.0;
  double se = 0.0;
  double second_moment = 0.0;
  double second_moment_se = 0.0;
  std::vector<std::string> warnings;
};

inline LocalTimeEstimate summarize_local_time(const MomentSum& l, const MomentSum& l2) {
  LocalTimeEstimate e;
  e.mean = l.mean();
  e.se = l.standard_error();
  e.second_moment = l2.mean();
  e.second_moment_se = l2.standard_error();
  return e;
}

/// `sigma_bar` only feeds the bandwidth warning; pass 0 to skip it.
inline LocalTimeEstimate local_time_estimate(const InterpolatedProcess& proc, double x, double h,
                                             double sigma_bar = 0.0) {
  if (!(h > 0.0)) throw DomainError("local_time_estimate: bandwidth must be positive");
  MomentSum l, l2;
  std::vector<double> per_path(proc.M);
  for (std::size_t j = 0; j < proc.M; ++j) {
    per_path[j] = local_time_path(proc.path(j), proc.qv_path(j), x, h);
    l.add(per_path[j]);
    l2.add(per_path[j] * per_path[j]);
  }
  LocalTimeEstimate e = summarize_local_time(l, l2);
  e.per_path = std::move(per_path);
  if (bandwidth_under_resolved(h, sigma_bar, proc.dt()))
    e.warnings.push_back("bandwidth under-resolved: h < 3 sigma_bar sqrt(dt)");
  return e;
}

inline double local_time_bound(double b_sup, double sigma_bar, double T) {
  if (b_sup < 0.0 || sigma_bar < 0.0 || T < 0.0) throw DomainError("local_time_bound: inputs must be nonnegative");
  return 12.0 * b_sup * b_sup * T * T + 6.0 * sigma_bar * sigma_bar * T;
}

// ---------------------------------------------------------------------------
// Tightness schedule and within-cell modulus

struct TightnessSchedule {
  std::size_t n = 0;
  double alpha = 0.0;
  double T = 1.0;
  double gamma = 0.0;
  double c_tilde = 0.0;
  double eps = 0.0;
  double chi = 0.0;
  double delta = 0.0;
  double K = 0.0;
  // T^2 |b|^4 + 2^7 sigma_bar^4
  double moment_constant = 0.0;
};

inline TightnessSchedule tightness_schedule(std::size_t n, double T, double b_sup, double sigma_bar, double alpha,
                                            double x0) {
  if (n < 3) throw DomainError("tightness_schedule: n must be >= 3");
  if (!(T > 0.0) || b_sup < 0.0 || !(sigma_bar > 0.0) || !(alpha > 0.0))
    throw DomainError("tightness_schedule: need T > 0, b_sup >= 0, sigma_bar > 0, alpha > 0");
  const double nd = static_cast<double>(n), logn = std::log(nd);
  TightnessSchedule s;
  s.n = n;
  s.alpha = alpha;
  s.T = T;
  s.gamma = 1.0 / (std::pow(nd, alpha) * logn);
  s.moment_constant = T * T * std::pow(b_sup, 4) + 128.0 * std::pow(sigma_bar, 4);
  s.c_tilde = std::pow(2.0, 0.75) * std::sqrt(T) * std::pow(s.moment_constant, 0.25);
  s.eps = s.c_tilde / (std::pow(s.gamma, 0.25) * std::sqrt(nd));
  s.chi = s.gamma * nd / T;
  s.delta = T / nd;
  s.K = (1.0 + std::fabs(x0) + T * b_sup + 2.0 * sigma_bar * std::sqrt(T * alpha)) * std::sqrt(logn);
  return s;
}

// Number of cells k with max over fine points of [t_k, t_{k+1}] of
// |X_s - X_{t_k}| >= eps.
inline std::size_t modulus_exceedances_path(std::span<const double> fine, std::size_t n, double eps) {
  const std::size_t N = fine.size() - 1, r = N / n;
  std::size_t count = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = fine[k * r];
    for (std::size_t i = k * r + 1; i <= (k + 1) * r; ++i)
      if (std::fabs(fine[i] - x) >= eps) {
        ++count;
        break;
      }
  }
  return count;
}

struct ModulusResult {
  std::uint64_t exceedances = 0;
  std::uint64_t trials = 0;
  double frequency = 0.0;
  double binomial_se = 0.0;
  double wilson_upper95 = 0.0;
  double eps = 0.0;
  double gamma = 0.0;
};

inline ModulusResult modulus_summary(std::uint64_t exceed, std::uint64_t trials, double eps, double gamma) {
  ModulusResult r;
  r.exceedances = exceed;
  r.trials = trials;
  r.eps = eps;
  r.gamma = gamma;
  if (trials == 0) return r;
  const double N = static_cast<double>(trials);
  const double p = static_cast<double>(exceed) / N;
  r.frequency = p;
  r.binomial_se = std::sqrt(p * (1.0 - p) / N);
  const double z = 1.959963984540054, z2 = z * z;
  r.wilson_upper95 = (p + z2 / (2 * N) + z * std::sqrt(p * (1 - p) / N + z2 / (4 * N * N))) / (1 + z2 / N);
  return r;
}

inline ModulusResult modulus_probability(const EmTrajectory& traj, double eps, double gamma = 0.0) {
  if (!traj.has_fine()) throw DomainError("modulus_probability: fine interpolation required");
  std::uint64_t c = 0;
  for (std::size_t j = 0; j < traj.M; ++j) c += modulus_exceedances_path(traj.fine_path(j), traj.n, eps);
  return modulus_summary(c, static_cast<std::uint64_t>(traj.M) * traj.n, eps, gamma);
}

inline ModulusResult modulus_probability(const EmTrajectory& traj, const TightnessSchedule& s) {
  if (s.n != traj.n) throw DomainError("modulus_probability: schedule built for a different n");
  return modulus_probability(traj, s.eps, s.gamma);
}

// ---------------------------------------------------------------------------
// Key-lemma integral  int_0^T E|f(X_s) - f(X_{eta(s)})|^p ds

inline double key_lemma_path(const CoefficientSpec& f, std::span<const double> fine, std::size_t n, double p,
                             double dt) {
  const std::size_t N = fine.size() - 1, r = N / n;
  double s = 0.0, f_eta = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    if (i % r == 0) {
      f_eta = f(fine[i]);
      continue;  // the integrand vanishes at grid times
    }
    const double d = std::fabs(f(fine[i]) - f_eta);
    if (d != 0.0) s += p == 1.0 ? d : p == 2.0 ? d * d : std::pow(d, p);
  }
  return s * dt;
}

struct ScalarEstimate {
  double value = 0.0;
  double se = 0.0;
  std::uint64_t samples = 0;
};

inline ScalarEstimate summarize(const MomentSum& m) { return {m.mean(), m.standard_error(), m.count}; }

inline ScalarEstimate key_lemma_integral(const CoefficientSpec& f, double p, const EmTrajectory& traj) {
  if (!(p >= 1.0)) throw DomainError("key_lemma_integral: p must be >= 1");
  if (!traj.has_fine()) throw DomainError("key_lemma_integral: fine interpolation required");
  MomentSum m;
  const double dt = traj.T / static_cast<double>(traj.N_fine);
  for (std::size_t j = 0; j < traj.M; ++j) m.add(key_lemma_path(f, traj.fine_path(j), traj.n, p, dt));
  return summarize(m);
}

// ---------------------------------------------------------------------------
// Truncation tail

inline double truncation_tail_bound(double x0, double b_sup, double sigma_bar, double T, double K) {
  const double shift = std::fabs(x0) + b_sup * T;
  if (!(K > shift)) throw DomainError("truncation_tail_bound: need K > |x0| + b_sup T");
  if (!(sigma_bar > 0.0) || !(T > 0.0)) throw DomainError("truncation_tail_bound: need sigma_bar > 0, T > 0");
  const double v = sigma_bar * sigma_bar * T;
  return 2.0 * std::exp(shift * shift / (2.0 * v)) * std::exp(-K * K / (4.0 * v));
}

/// sup over fine times of |X_t - x0 - int_0^t b(X_{eta(s)}) ds| for an EM path.
inline double stochastic_integral_sup_path(const CoefficientSpec& b, std::span<const double> fine, std::size_t n,
                                           double T) {
  const std::size_t N = fine.size() - 1, r = N / n;
  const double dt = T / static_cast<double>(N), h = T / static_cast<double>(n);
  const double x0 = fine[0];
  double drift = 0.0, bk = 0.0, sup = 0.0;
  for (std::size_t i = 0; i <= N; ++i) {
    const std::size_t j = i % r;
    if (j == 0) {
      if (i > 0) drift += bk * h;
      if (i < N) bk = b(fine[i]);
    }
    const double m = fine[i] - x0 - drift - (j == 0 ? 0.0 : bk * static_cast<double>(j) * dt);
    sup = std::max(sup, std::fabs(m));
  }
  return sup;
}

struct TailResult {
  double threshold = 0.0;  // K - |b| T - |x0|
  double bound = 0.0;
  ModulusResult frequency;  // binomial summary over paths
};

inline TailResult truncation_tail_frequency(const EmTrajectory& traj, const CoefficientSpec& b, double sigma_bar,
                                            double K) {
  if (!traj.has_fine()) throw DomainError("truncation_tail_frequency: fine interpolation required");
  TailResult t;
  t.bound = truncation_tail_bound(traj.x0, b.sup_norm, sigma_bar, traj.T, K);
  t.threshold = K - b.sup_norm * traj.T - std::fabs(traj.x0);
  std::uint64_t c = 0;
  for (std::size_t j = 0; j < traj.M; ++j)
    if (stochastic_integral_sup_path(b, traj.fine_path(j), traj.n, traj.T) >= t.threshold) ++c;
  t.frequency = modulus_summary(c, traj.M, t.threshold, 0.0);
  return t;
}

// ---------------------------------------------------------------------------
// Admissible rate exponent: 0 < alpha < beta/2 ∧ 2 kappa/(kappa+4), with
// beta the smaller Hölder exponent of (b, sigma) and kappa the smaller
// neighbourhood exponent among coefficients with a nonempty singular set.
inline double alpha_upper_bound(const CoefficientSpec& b, const CoefficientSpec& sigma) {
  const double beta = std::min(b.beta, sigma.beta);
  double bound = beta / 2.0;
  for (const CoefficientSpec* c : {&b, &sigma})
    if (!c->singular_set.is_empty()) bound = std::min(bound, 2.0 * c->kappa / (c->kappa + 4.0));
  return bound;
}

}  // namespace sdeconv
