#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "coeffs.hpp"
#include "errors.hpp"
#include "estimators.hpp"

namespace sdeconv {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Strict JSON field access: every key read is recorded, leftovers are errors.

class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }
  const json& raw(const std::string& key) {
    if (!has(key)) throw ConfigError(at(key), "missing required field");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  // Parsed text yields unsigned values; JSON built in code may hold signed ones.
  static bool nonnegative_integer(const json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
  }

  std::uint64_t uinteger(const std::string& key) {
    const json& v = raw(key);
    if (!nonnegative_integer(v)) throw ConfigError(at(key), "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }
  std::uint64_t uinteger(const std::string& key, std::uint64_t fallback) { return has(key) ? uinteger(key) : fallback; }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(at(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) { return has(key) ? string(key) : fallback; }

  std::vector<double> numbers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(at(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }
  std::vector<std::size_t> uintegers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(at(key), "expected an array of integers");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!nonnegative_integer(v[i]))
        throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected a nonnegative integer");
      out.push_back(v[i].get<std::size_t>());
    }
    return out;
  }

  // Rejects keys that were never asked for.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// ---------------------------------------------------------------------------
// Coefficient descriptors
//
//   {"kind": "constant", "value": c}
//   {"kind": "step_sigma"}                                  1 + 1{x >= 0}
//   {"kind": "zeta", "beta_hat": bh, "kappa": k}
//   {"kind": "indicator_interval", "a": a, "b": b}          1{a <= x < b}
//   {"kind": "piecewise", "breakpoints": [...], "pieces": [...],
//    "beta": 1, "holder_seminorm": L}
//     piece: {"type": "constant", "value": c}
//            {"type": "linear", "slope": s, "intercept": c}
//            {"type": "sine", "amplitude": a, "frequency": w, "phase": p, "offset": o}

struct Coefficient {
  CoefficientSpec spec;
  std::optional<DiffusionCertificate> cert;  // present when sigma-admissible
  json descriptor;
};

inline Piece parse_piece(const json& j, const std::string& path) {
  Fields f(j, path);
  const std::string type = f.string("type");
  Piece p;
  if (type == "constant") {
    p = piece::constant(f.number("value"));
  } else if (type == "linear") {
    p = piece::linear(f.number("slope"), f.number("intercept", 0.0));
  } else if (type == "sine") {
    p = piece::sine(f.number("amplitude"), f.number("frequency", 1.0), f.number("phase", 0.0), f.number("offset", 0.0));
  } else {
    throw ConfigError(f.at("type"), "unknown piece type '" + type + "'");
  }
  f.finish();
  return p;
}

inline Coefficient parse_coefficient(const json& j, const std::string& path) {
  Fields f(j, path);
  const std::string kind = f.string("kind");
  Coefficient c;
  c.descriptor = j;
  try {
    if (kind == "constant") {
      const double v = f.number("value");
      c.spec = make_constant(v);
      if (v > 0.0) {
        // Constant diffusion: any bounded increasing function is a witness.
        DiffusionCertificate cert;
        cert.sigma_lower = cert.sigma_upper = v;
        cert.f_sigma = [](double x) { return std::atan(x) / std::numbers::pi + 0.5; };
        cert.f_sigma_sup = 1.0;
        c.cert = cert;
      }
    } else if (kind == "step_sigma") {
      auto d = make_step_sigma();
      c.spec = d.spec;
      c.cert = d.cert;
    } else if (kind == "zeta") {
      auto d = make_zeta(f.number("beta_hat"), f.number("kappa"));
      c.spec = d.spec;
      c.cert = d.cert;
    } else if (kind == "indicator_interval") {
      const double a = f.number("a"), b = f.number("b");
      if (!(a < b)) throw ConfigError(f.at("b"), "need a < b");
      c.spec = make_indicator_interval(a, b);
    } else if (kind == "piecewise") {
      const auto bps = f.has("breakpoints") ? f.numbers("breakpoints") : std::vector<double>{};
      const json& pj = f.raw("pieces");
      if (!pj.is_array()) throw ConfigError(f.at("pieces"), "expected an array");
      std::vector<Piece> pieces;
      for (std::size_t i = 0; i < pj.size(); ++i) pieces.push_back(parse_piece(pj[i], f.at("pieces") + "[" + std::to_string(i) + "]"));
      if (pieces.size() != bps.size() + 1) throw ConfigError(f.at("pieces"), "need one more piece than breakpoints");
      const double beta = f.number("beta", 1.0);
      double L = 0.0;
      for (const auto& p : pieces) L = std::max(L, p.lipschitz);
      if (f.has("holder_seminorm")) {
        L = f.number("holder_seminorm");
      } else if (beta < 1.0 && L > 0.0) {
        // Lipschitz pieces are beta-Hölder with constant max(L, 2 sup|f|).
        c.spec = make_piecewise_holder(bps, pieces, 1.0, L);
        L = std::max(L, 2.0 * c.spec.sup_norm);
      }
      c.spec = make_piecewise_holder(bps, pieces, beta, L);
      try {
        c.cert = make_piecewise_diffusion_certificate(bps, pieces);
      } catch (const DomainError&) {
        // not elliptic: usable as a drift only
      }
    } else {
      throw ConfigError(f.at("kind"), "unknown coefficient kind '" + kind + "'");
    }
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
  f.finish();
  return c;
}

// ---------------------------------------------------------------------------
// Experiment configuration

struct LocalTimeOptions {
  std::vector<double> theta{0.0, 0.5, 1.0};
  std::vector<double> levels{-1.0, -0.5, 0.0, 0.5, 1.0};
  std::optional<double> bandwidth;  // default (T/N_fine)^{1/3}
  std::optional<std::size_t> n;      // default: smallest n in n_list
};

struct YwPair {
  double delta;
  double eps;
};

struct EstimatorOptions {
  std::vector<double> increment_q{2.0};
  LocalTimeOptions local_time;
  std::optional<std::size_t> modulus_n;  // default: smallest n in n_list
  std::optional<json> key_lemma_f;       // default: sigma
  double key_lemma_p = 2.0;
  std::optional<double> tail_K;          // default: the schedule's K_n at modulus n
  std::vector<YwPair> yw;                // default: three standard pairs
  double power_law_lo = 0.3;
  double power_law_hi = 0.7;
  std::size_t batch_size = 64;
  std::size_t certificate_grid = 1000;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  double T = 1.0;
  double x0 = 0.0;
  std::size_t M = 2000;
  unsigned log2_N_fine = 16;
  std::vector<std::size_t> n_list;
  std::size_t n_ref = 0;
  double alpha = 0.0;
  bool alpha_given = false;
  Coefficient b;
  Coefficient sigma;
  EstimatorOptions estimators;
  std::string output_dir;

  std::size_t N_fine() const { return std::size_t{1} << log2_N_fine; }
  double sigma_bar() const { return sigma.cert->sigma_upper; }
};

inline std::vector<YwPair> default_yw_pairs() {
  const double n = 1024.0;
  return {{std::exp(2.0), 0.5}, {10.0, 0.1}, {std::pow(n, 0.25), 1.0 / std::log(n)}};
}

inline EstimatorOptions parse_estimators(const json& j, const std::string& path) {
  Fields f(j, path);
  EstimatorOptions o;
  if (f.has("increment_q")) o.increment_q = f.numbers("increment_q");
  for (double q : o.increment_q)
    if (!(q > 0.0)) throw ConfigError(f.at("increment_q"), "q must be positive");
  if (f.has("local_time")) {
    Fields l(f.raw("local_time"), f.at("local_time"));
    if (l.has("theta")) o.local_time.theta = l.numbers("theta");
    for (std::size_t i = 0; i < o.local_time.theta.size(); ++i)
      if (!(o.local_time.theta[i] >= 0.0 && o.local_time.theta[i] <= 1.0))
        throw ConfigError(l.at("theta") + "[" + std::to_string(i) + "]", "theta must lie in [0,1]");
    if (l.has("levels")) o.local_time.levels = l.numbers("levels");
    if (l.has("bandwidth")) {
      o.local_time.bandwidth = l.number("bandwidth");
      if (!(*o.local_time.bandwidth > 0.0)) throw ConfigError(l.at("bandwidth"), "must be positive");
    }
    if (l.has("n")) o.local_time.n = l.uinteger("n");
    l.finish();
  }
  if (f.has("modulus_n")) o.modulus_n = f.uinteger("modulus_n");
  if (f.has("key_lemma")) {
    Fields k(f.raw("key_lemma"), f.at("key_lemma"));
    if (k.has("f")) {
      parse_coefficient(k.raw("f"), k.at("f"));  // validate early
      o.key_lemma_f = k.raw("f");
    }
    o.key_lemma_p = k.number("p", 2.0);
    if (!(o.key_lemma_p >= 1.0)) throw ConfigError(k.at("p"), "p must be >= 1");
    k.finish();
  }
  if (f.has("tail_K")) o.tail_K = f.number("tail_K");
  if (f.has("yw")) {
    const json& arr = f.raw("yw");
    if (!arr.is_array()) throw ConfigError(f.at("yw"), "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Fields y(arr[i], f.at("yw") + "[" + std::to_string(i) + "]");
      YwPair p{y.number("delta"), y.number("eps")};
      if (!(p.delta > 1.0)) throw ConfigError(y.at("delta"), "delta must exceed 1");
      if (!(p.eps > 0.0 && p.eps < 1.0)) throw ConfigError(y.at("eps"), "eps must lie in (0,1)");
      y.finish();
      o.yw.push_back(p);
    }
  } else {
    o.yw = default_yw_pairs();
  }
  if (f.has("power_law_bounds")) {
    const auto b = f.numbers("power_law_bounds");
    if (b.size() != 2 || !(b[0] <= b[1])) throw ConfigError(f.at("power_law_bounds"), "expected [lo, hi] with lo <= hi");
    o.power_law_lo = b[0];
    o.power_law_hi = b[1];
  }
  o.batch_size = f.uinteger("batch_size", 64);
  if (o.batch_size == 0) throw ConfigError(f.at("batch_size"), "must be positive");
  o.certificate_grid = f.uinteger("certificate_grid", 1000);
  if (o.certificate_grid < 2) throw ConfigError(f.at("certificate_grid"), "need at least 2 points");
  f.finish();
  return o;
}

inline ExperimentConfig parse_config(const json& j) {
  Fields f(j, "");
  ExperimentConfig c;
  c.seed = f.uinteger("seed");
  c.T = f.number("T", 1.0);
  if (!(c.T > 0.0)) throw ConfigError("T", "must be positive");
  c.x0 = f.number("x0", 0.0);
  c.M = f.uinteger("M");
  if (c.M < 2) throw ConfigError("M", "need at least 2 paths");
  const auto l2 = f.uinteger("log2_N_fine");
  if (l2 < 2 || l2 > 30) throw ConfigError("log2_N_fine", "must lie in [2, 30]");
  c.log2_N_fine = static_cast<unsigned>(l2);
  c.n_list = f.uintegers("n_list");
  if (c.n_list.empty()) throw ConfigError("n_list", "must be nonempty");
  c.n_ref = f.uinteger("n_ref");
  const std::size_t N = c.N_fine();
  for (std::size_t i = 0; i < c.n_list.size(); ++i) {
    const std::string p = "n_list[" + std::to_string(i) + "]";
    if (c.n_list[i] < 3) throw ConfigError(p, "every n must be >= 3");
    if (N % c.n_list[i] != 0) throw ConfigError(p, "must divide 2^log2_N_fine");
    if (i > 0 && !(c.n_list[i - 1] < c.n_list[i])) throw ConfigError(p, "n_list must be strictly increasing");
  }
  if (N % c.n_ref != 0 || c.n_ref == 0) throw ConfigError("n_ref", "must divide 2^log2_N_fine");
  if (c.n_ref <= c.n_list.back()) throw ConfigError("n_ref", "must exceed every n in n_list");

  c.b = parse_coefficient(f.raw("b"), "b");
  c.sigma = parse_coefficient(f.raw("sigma"), "sigma");
  if (!c.sigma.cert) throw ConfigError("sigma", "diffusion must be bounded and uniformly positive");

  const double bound = alpha_upper_bound(c.b.spec, c.sigma.spec);
  if (f.has("alpha")) {
    c.alpha = f.number("alpha");
    c.alpha_given = true;
    if (!(c.alpha > 0.0 && c.alpha < bound))
      throw ConfigError("alpha", "must lie in (0, " + std::to_string(bound) + ") for these coefficients");
  } else {
    c.alpha = bound / 2.0;
  }
  c.estimators = f.has("estimators") ? parse_estimators(f.raw("estimators"), "estimators") : parse_estimators(json::object(), "estimators");
  if (c.estimators.local_time.n && !std::count(c.n_list.begin(), c.n_list.end(), *c.estimators.local_time.n))
    throw ConfigError("estimators.local_time.n", "must be one of n_list");
  if (c.estimators.modulus_n && !std::count(c.n_list.begin(), c.n_list.end(), *c.estimators.modulus_n))
    throw ConfigError("estimators.modulus_n", "must be one of n_list");
  c.output_dir = f.string("output_dir", "");
  f.finish();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace sdeconv
