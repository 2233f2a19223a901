#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "errors.hpp"

namespace sdeconv {

struct RatePoint {
  double n;
  double error;
};

enum class RateModel { c_over_log_n, power_law };

inline std::string to_string(RateModel m) { return m == RateModel::c_over_log_n ? "c_over_log_n" : "power_law"; }

struct RateFit {
  RateModel model;
  std::map<std::string, double> params;  // c_over_log_n: {c}; power_law: {c, a} with e = c n^{-a}
  // Euclidean norm of log(e_i) - log(model_i); comparable across models.
  double residual = 0.0;
  // Norm in the model's own least-squares space (e log n for c_over_log_n, log e for power_law).
  double fit_space_residual = 0.0;
  bool exponent_clamped = false;

  double predict(double n) const {
    return model == RateModel::c_over_log_n ? params.at("c") / std::log(n)
                                            : params.at("c") * std::pow(n, -params.at("a"));
  }
};

struct ExponentBounds {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

/// Least-squares fit of e(n) ~ c / log n (on e log n = c) or e(n) ~ c n^{-a}
/// (on log e = log c - a log n, with a optionally restricted to [lo, hi]).
inline RateFit rate_fit(const std::vector<RatePoint>& rows, RateModel model, ExponentBounds bounds = {}) {
  if (rows.size() < 3) throw DomainError("rate_fit: need at least 3 rows");
  for (const auto& r : rows)
    if (!(r.error > 0.0) || !(r.n > 1.0)) throw DegenerateFitError("rate_fit: errors must be positive and n > 1");
  if (std::all_of(rows.begin(), rows.end(), [&](const RatePoint& r) { return r.error == rows.front().error; }))
    throw DegenerateFitError("rate_fit: all errors equal");

  RateFit fit;
  fit.model = model;
  const double m = static_cast<double>(rows.size());
  if (model == RateModel::c_over_log_n) {
    double c = 0.0;
    for (const auto& r : rows) c += r.error * std::log(r.n);
    c /= m;
    fit.params["c"] = c;
    double fs = 0.0;
    for (const auto& r : rows) fs += std::pow(r.error * std::log(r.n) - c, 2);
    fit.fit_space_residual = std::sqrt(fs);
  } else {
    double sx = 0, sy = 0;
    for (const auto& r : rows) {
      sx += std::log(r.n);
      sy += std::log(r.error);
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0;
    for (const auto& r : rows) {
      sxx += (std::log(r.n) - mx) * (std::log(r.n) - mx);
      sxy += (std::log(r.n) - mx) * (std::log(r.error) - my);
    }
    double a = -sxy / sxx;
    // The objective is a convex quadratic in a after profiling out log c, so
    // clamping the unconstrained optimum solves the box-constrained problem.
    const double clamped = std::clamp(a, bounds.lo, bounds.hi);
    fit.exponent_clamped = clamped != a;
    a = clamped;
    const double logc = my + a * mx;
    fit.params["a"] = a;
    fit.params["c"] = std::exp(logc);
    double fs = 0.0;
    for (const auto& r : rows) fs += std::pow(std::log(r.error) - (logc - a * std::log(r.n)), 2);
    fit.fit_space_residual = std::sqrt(fs);
  }
  double res = 0.0;
  for (const auto& r : rows) res += std::pow(std::log(r.error) - std::log(fit.predict(r.n)), 2);
  fit.residual = std::sqrt(res);
  return fit;
}

// Plain least-squares slope of log y against log x.
inline double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("log_log_slope: need matching inputs of size >= 2");
  const double m = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]) / m;
    my += std::log(y[i]) / m;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
  }
  return sxy / sxx;
}

}  // namespace sdeconv
