#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "brownian.hpp"
#include "coeffs.hpp"
#include "config.hpp"
#include "drift_removal.hpp"
#include "em.hpp"
#include "estimators.hpp"
#include "rate_fit.hpp"
#include "yamada_watanabe.hpp"

namespace sdeconv {

// ---------------------------------------------------------------------------
// One streaming Monte Carlo pass. Each path is simulated from its own Philox
// stream, every requested estimator consumes it, and only the accumulators
// survive. Accumulators are exact, so the result does not depend on how paths
// are batched or distributed over workers.

struct PassPlan {
  std::vector<std::size_t> levels;  // EM resolutions compared against n_ref
  std::size_t n_ref = 0;
  bool strong_error = false;

  std::vector<double> increment_q;  // moments at every n in n_list
  std::vector<std::size_t> n_list;

  bool local_time = false;
  std::size_t lt_n = 0;
  std::vector<double> lt_theta, lt_levels;
  double lt_h = 0.0;

  bool modulus = false;
  std::size_t mod_n = 0;
  double mod_eps = 0.0;

  bool key_lemma = false;
  CoefficientSpec kl_f;
  double kl_p = 2.0;

  bool tail = false;
  double tail_threshold = 0.0;
};

struct PassState {
  std::optional<StrongErrorAccumulator> strong;
  std::vector<IncrementMomentAccumulator> increments;  // q-major, then n_list order
  std::vector<MomentSum> lt, lt_sq;                      // theta-major, then level
  std::uint64_t mod_exceed = 0;
  std::vector<MomentSum> kl;                             // n_list order
  std::uint64_t tail_exceed = 0;

  PassState(const PassPlan& plan, std::size_t N, double T) {
    if (plan.strong_error) strong.emplace(N, T, plan.levels);
    for (double q : plan.increment_q)
      for (auto n : plan.n_list) increments.emplace_back(N, T, n, q);
    if (plan.local_time) {
      lt.resize(plan.lt_theta.size() * plan.lt_levels.size());
      lt_sq.resize(lt.size());
    }
    if (plan.key_lemma) kl.resize(plan.n_list.size());
  }

  PassState& operator+=(const PassState& o) {
    if (strong) *strong += *o.strong;
    for (std::size_t i = 0; i < increments.size(); ++i) increments[i] += o.increments[i];
    for (std::size_t i = 0; i < lt.size(); ++i) {
      lt[i] += o.lt[i];
      lt_sq[i] += o.lt_sq[i];
    }
    mod_exceed += o.mod_exceed;
    for (std::size_t i = 0; i < kl.size(); ++i) kl[i] += o.kl[i];
    tail_exceed += o.tail_exceed;
    return *this;
  }
};

inline std::size_t level_index(const std::vector<std::size_t>& levels, std::size_t n) {
  return static_cast<std::size_t>(std::find(levels.begin(), levels.end(), n) - levels.begin());
}

inline PassState run_pass(const ExperimentConfig& cfg, const PassPlan& plan, unsigned workers) {
  const std::size_t N = cfg.N_fine(), M = cfg.M, batch = cfg.estimators.batch_size;
  const double T = cfg.T, dt = T / static_cast<double>(N);
  const auto& b = cfg.b.spec;
  const auto& sigma = cfg.sigma.spec;
  for (auto n : plan.levels)
    if (n == 0 || N % n != 0) throw DomainError("run_pass: every level must divide N_fine");

  workers = std::max(1u, workers);
  const std::size_t batches = (M + batch - 1) / batch;
  std::atomic<std::size_t> next{0};
  std::vector<PassState> states(workers, PassState(plan, N, T));
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto work = [&](unsigned w) {
    try {
      PassState& st = states[w];
      std::vector<double> dw(N), ref(N + 1), v(N + 1), qv(N);
      std::vector<std::vector<double>> em(plan.levels.size(), std::vector<double>(N + 1));
      std::vector<std::span<const double>> em_spans(em.begin(), em.end());
      for (std::size_t bi; (bi = next.fetch_add(1)) < batches;) {
        for (std::size_t j = bi * batch; j < std::min(M, (bi + 1) * batch); ++j) {
          generate_path_increments(cfg.seed, T, N, j, dw);
          em_fine_path(b, sigma, cfg.x0, T, dw, plan.n_ref, {}, ref, j);
          for (std::size_t l = 0; l < plan.levels.size(); ++l)
            em_fine_path(b, sigma, cfg.x0, T, dw, plan.levels[l], {}, em[l], j);

          if (st.strong) st.strong->add_path(ref, em_spans);
          for (auto& acc : st.increments) acc.add_path(em[level_index(plan.levels, acc.n())]);
          if (plan.local_time) {
            const auto& e = em[level_index(plan.levels, plan.lt_n)];
            for (std::size_t t = 0; t < plan.lt_theta.size(); ++t) {
              interpolate_path(ref, e, plan.lt_n, sigma, plan.lt_theta[t], dt, v, qv);
              for (std::size_t x = 0; x < plan.lt_levels.size(); ++x) {
                const double L = local_time_path(v, qv, plan.lt_levels[x], plan.lt_h);
                st.lt[t * plan.lt_levels.size() + x].add(L);
                st.lt_sq[t * plan.lt_levels.size() + x].add(L * L);
              }
            }
          }
          if (plan.modulus)
            st.mod_exceed += modulus_exceedances_path(em[level_index(plan.levels, plan.mod_n)], plan.mod_n, plan.mod_eps);
          if (plan.key_lemma)
            for (std::size_t i = 0; i < plan.n_list.size(); ++i)
              st.kl[i].add(key_lemma_path(plan.kl_f, em[level_index(plan.levels, plan.n_list[i])], plan.n_list[i],
                                          plan.kl_p, dt));
          if (plan.tail && stochastic_integral_sup_path(b, ref, plan.n_ref, T) >= plan.tail_threshold) ++st.tail_exceed;
        }
      }
    } catch (...) {
      std::lock_guard lock(failure_mu);
      if (!failure) failure = std::current_exception();
      next = batches;
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  if (failure) std::rethrow_exception(failure);
  for (unsigned w = 1; w < workers; ++w) states[0] += states[w];
  return std::move(states[0]);
}

// Resolutions simulated for the strong error: n_list plus n_ref/2 for the
// self-coupling floor.
inline std::vector<std::size_t> strong_error_levels(const ExperimentConfig& cfg) {
  std::vector<std::size_t> lv = cfg.n_list;
  if (cfg.n_ref % 2 == 0 && !std::count(lv.begin(), lv.end(), cfg.n_ref / 2)) lv.push_back(cfg.n_ref / 2);
  std::sort(lv.begin(), lv.end());
  return lv;
}

// ---------------------------------------------------------------------------
// Output helpers

inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ResourceError("cannot write " + p.string());
  out << s;
}

inline json config_metadata(const ExperimentConfig& cfg) {
  return json{{"seed", cfg.seed},          {"T", cfg.T},          {"x0", cfg.x0},
              {"M", cfg.M},                {"log2_N_fine", cfg.log2_N_fine},
              {"n_list", cfg.n_list},      {"n_ref", cfg.n_ref},  {"alpha", cfg.alpha},
              {"b", cfg.b.descriptor},     {"sigma", cfg.sigma.descriptor}};
}

inline json fit_to_json(const RateFit& f) {
  json j{{"model", to_string(f.model)},
         {"params", f.params},
         {"residual", f.residual},
         {"fit_space_residual", f.fit_space_residual}};
  return j;
}

// ---------------------------------------------------------------------------
// Convergence experiment

struct ConvergenceReport {
  StrongErrorResult errors;  // rows restricted to n_list
  std::vector<RateFit> fits;  // c/log n, free power law, constrained power law
  bool degenerate = false;
  std::string degenerate_reason;
  std::string preferred_model;
  json fit_json;
};

inline ConvergenceReport run_convergence(const ExperimentConfig& cfg, unsigned workers = 1) {
  PassPlan plan;
  plan.levels = strong_error_levels(cfg);
  plan.n_ref = cfg.n_ref;
  plan.strong_error = true;
  const PassState st = run_pass(cfg, plan, workers);

  ConvergenceReport rep;
  for (std::size_t l = 0; l < plan.levels.size(); ++l) {
    const SupMean s = st.strong->level(l);
    if (plan.levels[l] * 2 == cfg.n_ref) {
      rep.errors.self_coupling_floor = s.value;
      rep.errors.self_coupling_floor_se = s.se;
    }
    if (std::count(cfg.n_list.begin(), cfg.n_list.end(), plan.levels[l]))
      rep.errors.rows.push_back(make_error_row(plan.levels[l], s));
  }
  flag_floor_contamination(rep.errors);

  std::vector<RatePoint> pts;
  for (const auto& r : rep.errors.rows) pts.push_back({static_cast<double>(r.n), r.error_mean});
  json models = json::array();
  try {
    rep.fits.push_back(rate_fit(pts, RateModel::c_over_log_n));
    rep.fits.push_back(rate_fit(pts, RateModel::power_law));
    rep.fits.push_back(rate_fit(pts, RateModel::power_law, {cfg.estimators.power_law_lo, cfg.estimators.power_law_hi}));
    models.push_back(fit_to_json(rep.fits[0]));
    models.push_back(fit_to_json(rep.fits[1]));
    json c = fit_to_json(rep.fits[2]);
    c["model"] = "power_law_constrained";
    c["exponent_bounds"] = {cfg.estimators.power_law_lo, cfg.estimators.power_law_hi};
    c["exponent_clamped"] = rep.fits[2].exponent_clamped;
    models.push_back(c);
    rep.preferred_model = rep.fits[0].residual <= rep.fits[2].residual ? "c_over_log_n" : "power_law_constrained";
  } catch (const DegenerateFitError& e) {
    rep.degenerate = true;
    rep.degenerate_reason = e.what();
    rep.fits.clear();
  } catch (const DomainError& e) {
    rep.degenerate = true;
    rep.degenerate_reason = e.what();
    rep.fits.clear();
  }

  rep.fit_json = json{{"models", models},
                      {"preferred_model", rep.degenerate ? json(nullptr) : json(rep.preferred_model)},
                      {"degenerate", rep.degenerate},
                      {"degenerate_reason", rep.degenerate_reason},
                      {"self_coupling_floor", rep.errors.self_coupling_floor},
                      {"self_coupling_floor_se", rep.errors.self_coupling_floor_se},
                      {"warnings", rep.errors.warnings},
                      {"metadata", config_metadata(cfg)}};
  return rep;
}

inline std::string errors_csv(const ConvergenceReport& rep) {
  std::string s = "n,error_mean,error_se,error_times_logn,argmax_time\n";
  for (const auto& r : rep.errors.rows)
    s += std::to_string(r.n) + "," + fmt17(r.error_mean) + "," + fmt17(r.error_se) + "," + fmt17(r.error_times_logn()) +
         "," + fmt17(r.argmax_time) + "\n";
  return s;
}

inline std::string plotdata_csv(const ConvergenceReport& rep) {
  std::string s = "x,y,yerr\n";
  for (const auto& r : rep.errors.rows)
    s += std::to_string(r.n) + "," + fmt17(r.error_mean) + "," + fmt17(r.error_se) + "\n";
  return s;
}

inline void write_convergence_outputs(const ConvergenceReport& rep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "errors.csv", errors_csv(rep));
  write_text(dir / "fit.json", rep.fit_json.dump(2) + "\n");
  write_text(dir / "plotdata.csv", plotdata_csv(rep));
}

// ---------------------------------------------------------------------------
// Verification suite

inline const std::vector<std::string>& verify_selectors() {
  static const std::vector<std::string> s{"all", "3.1", "3.2", "3.4", "3.5", "3.6", "yw", "certs"};
  return s;
}

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

inline json verify_certs(const ExperimentConfig& cfg) {
  json checks = json::array();
  const auto grid = uniform_grid(-5.0, 5.0, cfg.estimators.certificate_grid);
  for (const auto* c : {&cfg.b, &cfg.sigma}) {
    const bool is_sigma = c == &cfg.sigma;
    const DiffusionCertificate* cert = is_sigma && c->cert ? &*c->cert : nullptr;
    const auto rep = check_certificates(c->spec, cert, grid);
    const bool c_ok = rep.c_beta_kappa_estimate <= c->spec.c_beta_kappa_bound * (1 + 1e-12) ||
                      c->spec.singular_set.is_empty();
    json v = json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(rep.violations.size(), 20); ++i)
      v.push_back({{"check", rep.violations[i].check}, {"x", rep.violations[i].x}, {"y", rep.violations[i].y},
                   {"lhs", rep.violations[i].lhs}, {"rhs", rep.violations[i].rhs}});
    checks.push_back({{"name", is_sigma ? "certs.sigma" : "certs.b"},
                      {"pass", rep.ok() && c_ok},
                      {"grid_points", grid.size()},
                      {"violations", rep.violations.size()},
                      {"first_violations", v},
                      {"holder_pairs_checked", rep.holder_pairs_checked},
                      {"max_holder_ratio", rep.max_holder_ratio},
                      {"holder_seminorm", c->spec.holder_seminorm},
                      {"c_beta_kappa_estimate", rep.c_beta_kappa_estimate},
                      {"c_beta_kappa_bound", c->spec.c_beta_kappa_bound}});
  }
  return checks;
}

inline json verify_yw(const ExperimentConfig& cfg) {
  json checks = json::array();
  for (const auto& p : cfg.estimators.yw) {
    const MollifierPair m(p.delta, p.eps);
    const auto rep = verify_properties(m, mollifier_grid(m, 10000));
    checks.push_back({{"name", "yw"},
                      {"delta", p.delta},
                      {"eps", p.eps},
                      {"pass", rep.ok()},
                      {"integral_slack", rep.integral_slack},
                      {"max_cap_ratio", rep.max_cap_ratio},
                      {"min_surrogate_slack", rep.min_surrogate_slack},
                      {"max_abs_phi_prime", rep.max_abs_phi_prime},
                      {"grid_points", rep.points},
                      {"violations", rep.violations.size()}});
  }
  return checks;
}

inline json verify_drift_removal_check(const ExperimentConfig& cfg) {
  if (!cfg.b.spec.in_L1)
    return json::array({{{"name", "3.5"}, {"pass", true}, {"applicable", false}, {"reason", "drift is not integrable"}}});
  const DriftRemovalTransform tr(cfg.b.spec, cfg.sigma.spec, *cfg.sigma.cert);
  const auto rep = verify_drift_removal(tr, cfg.b.spec, uniform_grid(-10.0, 10.0, 2001), 1e-5);
  return json::array({{{"name", "3.5"},
                       {"pass", rep.ok()},
                       {"applicable", true},
                       {"C0", rep.C0},
                       {"K_sigma", rep.K_sigma},
                       {"min_phi_prime", rep.min_phi_prime},
                       {"max_phi_prime", rep.max_phi_prime},
                       {"max_abs_phi_second", rep.max_abs_phi_second},
                       {"phi_second_bound", rep.phi_second_bound},
                       {"max_round_trip_error", rep.max_round_trip_error},
                       {"max_lipschitz_ratio", rep.max_lipschitz_ratio},
                       {"lipschitz_pairs", rep.lipschitz_pairs},
                       {"quadrature_error", tr.achieved_error()},
                       {"violations", rep.violations}}});
}

inline std::size_t default_small_n(const ExperimentConfig& cfg) { return cfg.n_list.front(); }

inline TightnessSchedule config_schedule(const ExperimentConfig& cfg) {
  const std::size_t n = cfg.estimators.modulus_n.value_or(default_small_n(cfg));
  return tightness_schedule(n, cfg.T, cfg.b.spec.sup_norm, cfg.sigma_bar(), cfg.alpha, cfg.x0);
}

inline double relative_gap(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(a), std::fabs(b)); }

/// Runs the requested lemma checks. Monte Carlo checks share one pass.
inline json run_verify(const ExperimentConfig& cfg, const std::string& selector, unsigned workers = 1) {
  if (!std::count(verify_selectors().begin(), verify_selectors().end(), selector))
    throw ConfigError("--lemma", "unknown selector '" + selector + "'");
  const auto want = [&](const char* s) { return selector == "all" || selector == s; };
  json checks = json::array();
  const auto append = [&](const json& arr) {
    for (const auto& c : arr) checks.push_back(c);
  };

  if (want("certs")) append(verify_certs(cfg));
  if (want("yw")) append(verify_yw(cfg));
  if (want("3.5")) append(verify_drift_removal_check(cfg));

  const bool mc = want("3.1") || want("3.2") || want("3.4") || want("3.6");
  if (mc) {
    const auto sched = config_schedule(cfg);
    PassPlan plan;
    plan.n_ref = cfg.n_ref;
    plan.n_list = cfg.n_list;
    plan.levels = cfg.n_list;
    if (want("3.1")) plan.increment_q = cfg.estimators.increment_q;
    if (want("3.2")) {
      plan.local_time = true;
      plan.lt_n = cfg.estimators.local_time.n.value_or(default_small_n(cfg));
      plan.lt_theta = cfg.estimators.local_time.theta;
      plan.lt_levels = cfg.estimators.local_time.levels;
      plan.lt_h = cfg.estimators.local_time.bandwidth.value_or(default_bandwidth(cfg.T, cfg.N_fine()));
    }
    if (want("3.4")) {
      plan.modulus = true;
      plan.mod_n = sched.n;
      plan.mod_eps = sched.eps;
    }
    double tail_K = 0.0;
    if (want("3.6")) {
      plan.key_lemma = true;
      plan.kl_f = cfg.estimators.key_lemma_f ? parse_coefficient(*cfg.estimators.key_lemma_f, "estimators.key_lemma.f").spec
                                             : cfg.sigma.spec;
      plan.kl_p = cfg.estimators.key_lemma_p;
      tail_K = cfg.estimators.tail_K.value_or(sched.K);
      if (tail_K > std::fabs(cfg.x0) + cfg.b.spec.sup_norm * cfg.T) {
        plan.tail = true;
        plan.tail_threshold = tail_K - cfg.b.spec.sup_norm * cfg.T - std::fabs(cfg.x0);
      }
    }
    const PassState st = run_pass(cfg, plan, workers);

    std::vector<double> ns;
    for (auto n : cfg.n_list) ns.push_back(static_cast<double>(n));

    if (want("3.1")) {
      for (std::size_t qi = 0; qi < plan.increment_q.size(); ++qi) {
        const double q = plan.increment_q[qi];
        json rows = json::array();
        std::vector<double> vals;
        for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
          const SupMean s = st.increments[qi * cfg.n_list.size() + i].result();
          vals.push_back(s.value);
          rows.push_back({{"n", cfg.n_list[i]}, {"value", s.value}, {"se", s.se}, {"argmax_time", s.argmax_time}});
        }
        const bool fit_ok = cfg.n_list.size() >= 2 && std::all_of(vals.begin(), vals.end(), [](double v) { return v > 0; });
        const double slope = fit_ok ? log_log_slope(ns, vals) : NAN;
        checks.push_back({{"name", "3.1"},
                          {"q", q},
                          {"rows", rows},
                          {"slope", fit_ok ? json(slope) : json(nullptr)},
                          {"expected_slope", -q / 2.0},
                          {"tolerance", 0.15},
                          {"pass", fit_ok && std::fabs(slope + q / 2.0) <= 0.15}});
      }
    }
    if (want("3.2")) {
      const double bound = local_time_bound(cfg.b.spec.sup_norm, cfg.sigma_bar(), cfg.T);
      json rows = json::array();
      bool ok = true;
      double worst = -INFINITY;
      for (std::size_t t = 0; t < plan.lt_theta.size(); ++t)
        for (std::size_t x = 0; x < plan.lt_levels.size(); ++x) {
          const auto e = summarize_local_time(st.lt[t * plan.lt_levels.size() + x], st.lt_sq[t * plan.lt_levels.size() + x]);
          const double slack = bound + 4.0 * e.second_moment_se - e.second_moment;
          ok = ok && slack >= 0.0;
          worst = std::max(worst, e.second_moment);
          rows.push_back({{"theta", plan.lt_theta[t]}, {"x", plan.lt_levels[x]}, {"mean", e.mean}, {"mean_se", e.se},
                          {"second_moment", e.second_moment}, {"second_moment_se", e.second_moment_se}, {"slack", slack}});
        }
      json warnings = json::array();
      if (bandwidth_under_resolved(plan.lt_h, cfg.sigma_bar(), cfg.T / static_cast<double>(cfg.N_fine())))
        warnings.push_back("bandwidth under-resolved: h < 3 sigma_bar sqrt(dt)");
      checks.push_back({{"name", "3.2"}, {"n", plan.lt_n}, {"bandwidth", plan.lt_h}, {"bound", bound},
                        {"max_second_moment", worst}, {"rows", rows}, {"warnings", warnings}, {"pass", ok}});
    }
    if (want("3.4")) {
      const auto m = modulus_summary(st.mod_exceed, static_cast<std::uint64_t>(cfg.M) * sched.n, sched.eps, sched.gamma);
      const double id1 = relative_gap(sched.delta * sched.chi, sched.gamma);
      const double id2 = relative_gap(std::pow(sched.eps, 4) * sched.chi / (8.0 * sched.moment_constant), sched.delta);
      const bool ids = id1 <= 1e-14 && id2 <= 1e-14;
      checks.push_back({{"name", "3.4"},
                        {"n", sched.n},
                        {"alpha", sched.alpha},
                        {"gamma", sched.gamma},
                        {"eps", sched.eps},
                        {"chi", sched.chi},
                        {"delta", sched.delta},
                        {"c_tilde", sched.c_tilde},
                        {"K", sched.K},
                        {"identity_delta_chi_rel_gap", id1},
                        {"identity_eps4_rel_gap", id2},
                        {"exceedances", m.exceedances},
                        {"trials", m.trials},
                        {"frequency", m.frequency},
                        {"binomial_se", m.binomial_se},
                        {"wilson_upper95", m.wilson_upper95},
                        {"pass", ids && m.frequency <= sched.gamma + 3.0 * m.binomial_se}});
    }
    if (want("3.6")) {
      json rows = json::array();
      std::vector<double> vals;
      for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
        const ScalarEstimate e = summarize(st.kl[i]);
        vals.push_back(e.value);
        rows.push_back({{"n", cfg.n_list[i]}, {"value", e.value}, {"se", e.se}});
      }
      const bool all_zero = std::all_of(vals.begin(), vals.end(), [](double v) { return v == 0.0; });
      const bool fit_ok = cfg.n_list.size() >= 2 && std::all_of(vals.begin(), vals.end(), [](double v) { return v > 0; });
      const double slope = fit_ok ? log_log_slope(ns, vals) : NAN;
      checks.push_back({{"name", "3.6"},
                        {"p", plan.kl_p},
                        {"alpha", cfg.alpha},
                        {"rows", rows},
                        {"slope", fit_ok ? json(slope) : json(nullptr)},
                        {"pass", all_zero || (fit_ok && slope <= -cfg.alpha)}});
      if (plan.tail) {
        const double bound = truncation_tail_bound(cfg.x0, cfg.b.spec.sup_norm, cfg.sigma_bar(), cfg.T, tail_K);
        const auto f = modulus_summary(st.tail_exceed, cfg.M, plan.tail_threshold, 0.0);
        checks.push_back({{"name", "3.6.tail"},
                          {"K", tail_K},
                          {"threshold", plan.tail_threshold},
                          {"bound", bound},
                          {"frequency", f.frequency},
                          {"binomial_se", f.binomial_se},
                          {"pass", f.frequency <= bound}});
      }
    }
  }

  bool pass = true;
  for (const auto& c : checks) pass = pass && c.at("pass").get<bool>();
  return json{{"selector", selector}, {"pass", pass}, {"checks", checks}, {"metadata", config_metadata(cfg)}};
}

// ---------------------------------------------------------------------------
// Coefficient summary

inline json coeff_info(const json& descriptor) {
  const Coefficient c = parse_coefficient(descriptor, "coefficient");
  const auto& s = c.spec;
  json j{{"name", s.name},
         {"beta", s.beta},
         {"kappa", s.kappa},
         {"sup_norm", s.sup_norm},
         {"holder_seminorm", s.holder_seminorm},
         {"holder_norm", s.holder_norm()},
         {"singular_set", s.singular_set.describe()},
         {"singular_set_empty", s.singular_set.is_empty()},
         {"c_beta_kappa_estimate", estimate_c_beta_kappa(s.singular_set, s.kappa, default_c_grid())},
         {"c_beta_kappa_bound", s.c_beta_kappa_bound},
         {"in_L1", s.in_L1},
         {"L1_norm", s.in_L1 ? json(s.L1_norm) : json(nullptr)}};
  if (c.cert) {
    j["diffusion"] = {{"sigma_lower", c.cert->sigma_lower},
                      {"sigma_upper", c.cert->sigma_upper},
                      {"has_witness", c.cert->has_witness()},
                      {"f_sigma_sup", c.cert->has_witness() ? json(c.cert->f_sigma_sup) : json(nullptr)}};
  } else {
    j["diffusion"] = nullptr;
  }
  return j;
}

}  // namespace sdeconv
