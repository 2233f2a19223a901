// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <sdeconv/sdeconv.hpp>

using namespace sdeconv;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("[%s] criterion %2d  %-44s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const json kZero = {{"kind", "constant"}, {"value", 0.0}};
const json kOne = {{"kind", "constant"}, {"value", 1.0}};
const json kStep = {{"kind", "step_sigma"}};
const json kSine = {{"kind", "piecewise"},
                    {"breakpoints", json::array()},
                    {"pieces", {{{"type", "sine"}, {"amplitude", 0.1}, {"frequency", 1.0}, {"phase", 0.0}, {"offset", 1.0}}}},
                    {"beta", 1.0},
                    {"holder_seminorm", 0.1}};

// M = 2000 paths, fine lattice 2^16, n = 2^6 .. 2^12, reference 2^16.
json profile(const json& b, const json& sigma, std::uint64_t seed) {
  return json{{"seed", seed},
              {"T", 1.0},
              {"x0", 0.0},
              {"M", 2000},
              {"log2_N_fine", 16},
              {"n_list", {64, 128, 256, 512, 1024, 2048, 4096}},
              {"n_ref", 65536},
              {"b", b},
              {"sigma", sigma}};
}

const json& find_check(const json& rep, const std::string& name) {
  for (const auto& c : rep.at("checks"))
    if (c.at("name") == name) return c;
  throw std::runtime_error("missing check " + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const unsigned kWorkers = std::max(1u, std::thread::hardware_concurrency());

}  // namespace

int main() {
  criterion(1, "log rate for the step diffusion", [] {
    auto j = profile(kZero, kStep, 20240601);
    j["alpha"] = 0.25;
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = run_convergence(parse_config(j), kWorkers);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto& r = rep.errors.rows;
    bool decreasing = true;
    for (std::size_t i = 1; i < r.size(); ++i)
      decreasing = decreasing && r[i].error_mean < r[i - 1].error_mean + 2 * std::max(r[i].error_se, r[i - 1].error_se);
    if (rep.degenerate) return Outcome{false, "degenerate fit: " + rep.degenerate_reason};
    const double res_log = rep.fits[0].residual, res_pow = rep.fits[2].residual;
    return Outcome{decreasing && res_log <= res_pow && secs <= 600,
                   fmt("e(64)=%.4f e(4096)=%.4f decreasing=%d resid c/log n=%.4f <= power[0.3,0.7]=%.4f run=%.0fs",
                       r.front().error_mean, r.back().error_mean, decreasing, res_log, res_pow, secs)};
  });

  criterion(2, "Lipschitz diffusion recovers order 1/2", [] {
    const auto rep = run_convergence(parse_config(profile(kZero, kSine, 20240602)), kWorkers);
    if (rep.degenerate) return Outcome{false, "degenerate fit: " + rep.degenerate_reason};
    const double a = rep.fits[1].params.at("a");
    return Outcome{std::fabs(a - 0.5) <= 0.1, fmt("power-law slope=-%.4f (target -0.5 +- 0.1)", a)};
  });

  criterion(3, "increment moments scale like T/n", [] {
    auto step = profile(kZero, kStep, 20240603);
    step["estimators"] = {{"increment_q", {2.0}}};
    const auto r1 = run_verify(parse_config(step), "3.1", kWorkers);
    const double slope = find_check(r1, "3.1").at("slope").get<double>();
    auto bm = profile(kZero, kOne, 20240604);
    bm["n_list"] = {64};
    const auto r2 = run_verify(parse_config(bm), "3.1", kWorkers);
    const auto& row = find_check(r2, "3.1").at("rows").at(0);
    const double v = row.at("value").get<double>(), se = row.at("se").get<double>();
    const bool bm_ok = std::fabs(v - 1.0 / 64) <= 4 * se;
    return Outcome{std::fabs(slope + 1.0) <= 0.15 && bm_ok,
                   fmt("step slope=%.4f (target -1 +- 0.15); BM n=64 value=%.6f vs T/n=%.6f (%.2f SE)", slope, v,
                       1.0 / 64, (v - 1.0 / 64) / se)};
  });

  criterion(4, "local time second moment and Brownian oracle", [] {
    const auto r1 = run_verify(parse_config(profile(kZero, kStep, 20240605)), "3.2", kWorkers);
    const auto& c = find_check(r1, "3.2");
    auto bm = profile(kZero, kOne, 20240606);
    bm["n_list"] = {64};
    bm["estimators"] = {{"local_time", {{"theta", {0.0}}, {"levels", {0.0}}}}};
    const auto r2 = run_verify(parse_config(bm), "3.2", kWorkers);
    const auto& row = find_check(r2, "3.2").at("rows").at(0);
    const double m = row.at("mean").get<double>(), se = row.at("mean_se").get<double>();
    const double target = std::sqrt(2.0 / std::numbers::pi);
    const bool oracle = std::fabs(m - target) <= 4 * se;
    return Outcome{c.at("pass").get<bool>() && c.at("bound").get<double>() == 24.0 && oracle,
                   fmt("max E[L^2]=%.4f <= 24 (15 cells); BM mean L^0_1=%.4f vs %.5f (%.2f SE)",
                       c.at("max_second_moment").get<double>(), m, target, (m - target) / se)};
  });

  criterion(5, "cell modulus exceedance below gamma_n", [] {
    json j{{"seed", 20240607}, {"M", 10000},          {"log2_N_fine", 14},
           {"n_list", {64}},   {"n_ref", 16384},      {"alpha", 0.25},
           {"b", kZero},       {"sigma", kStep},      {"estimators", {{"modulus_n", 64}}}};
    const auto rep = run_verify(parse_config(j), "3.4", kWorkers);
    const auto& c = find_check(rep, "3.4");
    return Outcome{c.at("pass").get<bool>(),
                   fmt("freq=%.3g <= gamma=%.4f + 3 SE; identity gaps %.1e, %.1e",
                       c.at("frequency").get<double>(), c.at("gamma").get<double>(),
                       c.at("identity_delta_chi_rel_gap").get<double>(), c.at("identity_eps4_rel_gap").get<double>())};
  });

  criterion(6, "drift removal for an indicator drift", [] {
    const auto b = make_indicator_interval(0.0, 1.0);
    const Coefficient sigma = parse_coefficient(kOne, "sigma");
    const DriftRemovalTransform tr(b, sigma.spec, *sigma.cert);
    const double target = (1 + std::exp(-2.0)) / 2;
    const double phi2 = tr.phi(2.0);
    std::vector<double> grid(2001);
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = -10.0 + 20.0 * static_cast<double>(i) / 2000.0;
    const auto rep = verify_drift_removal(tr, b, grid, 1e-5);
    const double e2 = std::exp(2.0);
    const bool c0 = std::fabs(tr.C0() - e2) <= 1e-12 * e2;
    const bool range = rep.min_phi_prime >= 1 / e2 && rep.max_phi_prime <= e2;
    return Outcome{std::fabs(phi2 - target) <= 1e-6 && c0 && range && rep.ok(),
                   fmt("phi(2)-target=%.1e; phi' in [%.4f, %.4f]; round trip %.1e; Lipschitz ratio %.4f <= C0=%.4f",
                       phi2 - target, rep.min_phi_prime, rep.max_phi_prime, rep.max_round_trip_error,
                       rep.max_lipschitz_ratio, tr.C0())};
  });

  criterion(7, "key lemma integral decays like n^-1/2", [] {
    auto j = profile(kZero, kOne, 20240608);
    j["estimators"] = {{"key_lemma", {{"f", {{"kind", "indicator_interval"}, {"a", 0.0}, {"b", 1e300}}}, {"p", 2}}}};
    const auto rep = run_verify(parse_config(j), "3.6", kWorkers);
    const auto& c = find_check(rep, "3.6");
    const double slope = c.at("slope").is_null() ? NAN : c.at("slope").get<double>();
    auto k = j;
    k["M"] = 200;
    k["estimators"]["key_lemma"]["f"] = {{"kind", "constant"}, {"value", 0.7}};
    const auto rc = run_verify(parse_config(k), "3.6", kWorkers);
    bool zero = true;
    for (const auto& row : find_check(rc, "3.6").at("rows")) zero = zero && row.at("value").get<double>() == 0.0;
    return Outcome{std::fabs(slope + 0.5) <= 0.15 && zero,
                   fmt("step f slope=%.4f (target -0.5 +- 0.15); constant f exactly zero=%d", slope, zero)};
  });

  criterion(8, "Yamada-Watanabe mollifier properties", [] {
    json j{{"seed", 1}, {"M", 2}, {"log2_N_fine", 10}, {"n_list", {64}}, {"n_ref", 1024}, {"b", kZero}, {"sigma", kOne}};
    const auto rep = run_verify(parse_config(j), "yw");
    std::string d;
    bool ok = rep.at("checks").size() == 3;
    for (const auto& c : rep.at("checks")) {
      ok = ok && c.at("pass").get<bool>() && c.at("violations").get<std::size_t>() == 0 &&
           c.at("integral_slack").get<double>() <= 1e-6 && c.at("grid_points").get<std::size_t>() >= 10000;
      d += fmt("(%.4g,%.4g): |int-1|=%.1e ", c.at("delta").get<double>(), c.at("eps").get<double>(),
               c.at("integral_slack").get<double>());
    }
    return Outcome{ok, d + "zero violations on 1e4-point grids"};
  });

  criterion(9, "H^{beta,kappa} certificates for zeta", [] {
    const Diffusion z = make_zeta(0.5, 0.5);
    std::vector<double> grid(1000);
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = -5.0 + 10.0 * static_cast<double>(i) / 999.0;
    const auto rep = check_certificates(z.spec, &z.cert, grid);
    const double c = estimate_c_beta_kappa(z.spec.singular_set, 0.5, default_c_grid());

    // Riemann oracle over cells of width w: nearest singular point is 0 or k^{-2}.
    const double w = 1e-4;
    double worst = 0.0;
    for (double K : {1.0, 2.0})
      for (double eps : {0.3, 0.1, 0.03, 0.01}) {
        const long cells = std::lround(2 * K / w);
        long hits = 0;
        for (long i = 0; i < cells; ++i) {
          const double x = -K + (static_cast<double>(i) + 0.5) * w;
          double d = std::fabs(x);
          if (x > 0) {
            const double k0 = std::floor(1 / std::sqrt(x));
            for (double k = std::max(1.0, k0 - 1); k <= k0 + 2; ++k) d = std::min(d, std::fabs(x - 1 / (k * k)));
          }
          hits += d < eps;
        }
        worst = std::max(worst, std::fabs(neighborhood_measure(z.spec.singular_set, eps, K) - hits * w));
      }

    double lo = INFINITY, hi = -INFINITY;
    for (long i = 0; i <= 200000; ++i) {
      const double x = -10.0 + 20.0 * static_cast<double>(i) / 200000.0;
      lo = std::min(lo, z.spec(x));
      hi = std::max(hi, z.spec(x));
    }
    for (int k = 1; k <= 1000; ++k)
      for (double t : {-1e-12, 0.0, 1e-12}) {
        const double v = z.spec(1.0 / (k * static_cast<double>(k)) + t);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    const bool ok = rep.ok() && c <= 3.0 && worst <= w && lo > 0.5 && hi < 3.0;
    return Outcome{ok, fmt("violations=%zu; C est=%.4f <= 3; oracle gap=%.1e <= w=%.0e; zeta in [%.4f, %.4f]",
                           rep.violations.size(), c, worst, w, lo, hi)};
  });

  criterion(10, "byte-identical outputs for workers 1 and 4", [] {
    auto j = profile(kZero, kStep, 20240610);
    j["M"] = 300;
    j["log2_N_fine"] = 14;
    j["n_list"] = {64, 128, 256, 512};
    j["n_ref"] = 16384;
    j["estimators"] = {{"batch_size", 16}};
    const auto cfg = parse_config(j);
    const auto dir = std::filesystem::temp_directory_path() / "sdeconv_acceptance_determinism";
    std::filesystem::remove_all(dir);
    write_convergence_outputs(run_convergence(cfg, 1), dir / "w1");
    write_convergence_outputs(run_convergence(cfg, 4), dir / "w4");
    bool same = true;
    for (const char* f : {"errors.csv", "fit.json", "plotdata.csv"})
      same = same && !slurp(dir / "w1" / f).empty() && slurp(dir / "w1" / f) == slurp(dir / "w4" / f);
    j["M"] = 100;
    const auto v1 = run_verify(parse_config(j), "all", 1).dump();
    const auto v4 = run_verify(parse_config(j), "all", 4).dump();
    std::filesystem::remove_all(dir);
    return Outcome{same && v1 == v4, fmt("run outputs identical=%d; verify report identical=%d", same, v1 == v4)};
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
