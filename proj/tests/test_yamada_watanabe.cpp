#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include <sdeconv/yamada_watanabe.hpp>

using namespace sdeconv;

namespace {

// Composite Simpson in z on [a, b] with n (even) panels.
template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

// Oracle for phi by direct double integration of psi in the original z
// variable, on a geometric partition so each piece is smooth enough.
double phi_oracle(const MollifierPair& m, double x) {
  const double y = std::fabs(x);
  const double a0 = m.eps() / m.delta();
  if (y <= a0) return 0.0;
  const int pieces = 400;
  const double top = std::min(y, m.eps());
  double total = 0.0, inner = 0.0;
  double lo = a0;
  for (int i = 1; i <= pieces; ++i) {
    const double hi = a0 * std::pow(top / a0, static_cast<double>(i) / pieces);
    // phi contribution on [lo, hi]: int (inner + int_lo^s psi) ds
    total += simpson([&](double s) { return inner + simpson([&](double z) { return m.psi(z); }, lo, s, 16); }, lo, hi, 16);
    inner += simpson([&](double z) { return m.psi(z); }, lo, hi, 16);
    lo = hi;
  }
  if (y > m.eps()) total += inner * (y - m.eps());
  return total;
}

std::vector<std::pair<double, double>> standard_pairs() {
  const double n = 1024.0;
  return {{std::exp(2.0), 0.5}, {10.0, 0.1}, {std::pow(n, 0.25), 1.0 / std::log(n)}};
}

}  // namespace

TEST(Mollifier, NormalizationAndCapsOnStandardPairs) {
  for (const auto& [d, e] : standard_pairs()) {
    const MollifierPair m(d, e);
    const auto g = mollifier_grid(m, 10000);
    EXPECT_EQ(g.size(), 10000u);
    const auto rep = verify_properties(m, g);
    EXPECT_TRUE(rep.ok()) << "delta=" << d << " eps=" << e << " " << (rep.violations.empty() ? "" : rep.violations[0]);
    EXPECT_LT(rep.integral_slack, 1e-6);
    EXPECT_LE(rep.max_cap_ratio, 1.0);
    EXPECT_GE(rep.min_surrogate_slack, 0.0);
    EXPECT_LE(rep.max_abs_phi_prime, 1.0 + 1e-9);
  }
}

TEST(Mollifier, IntegralByIndependentQuadrature) {
  for (const auto& [d, e] : standard_pairs()) {
    const MollifierPair m(d, e);
    const double a0 = e / d;
    // Geometric partition in z, Simpson on each piece.
    double s = 0.0, lo = a0;
    for (int i = 1; i <= 2000; ++i) {
      const double hi = a0 * std::pow(d, i / 2000.0);
      s += simpson([&](double z) { return m.psi(z); }, lo, hi, 8);
      lo = hi;
    }
    EXPECT_NEAR(s, 1.0, 1e-6) << "delta=" << d;
    EXPECT_NEAR(m.psi_cumulative(e), 1.0, 1e-15);
  }
}

TEST(Mollifier, PhiMatchesDoubleQuadratureOracle) {
  const MollifierPair m(std::exp(2.0), 0.5);
  for (double x : {0.07, 0.1, 0.2, 0.3, 0.45, 0.5, 0.8, -0.25, -1.5}) EXPECT_NEAR(m.phi(x), phi_oracle(m, x), 1e-7) << x;
  const MollifierPair m2(10.0, 0.1);
  for (double x : {0.012, 0.03, 0.06, 0.099, 0.5}) EXPECT_NEAR(m2.phi(x), phi_oracle(m2, x), 1e-7) << x;
}

TEST(Mollifier, SupportAndSlopes) {
  const MollifierPair m(std::exp(2.0), 0.5);
  const double a0 = 0.5 * std::exp(-2.0);
  for (double x : {0.0, a0 * 0.5, -a0, a0}) EXPECT_EQ(m.phi(x), 0.0);
  for (double x : {0.5, 0.7, 3.0}) {
    EXPECT_EQ(m.phi_prime(x), 1.0);
    EXPECT_EQ(m.phi_prime(-x), -1.0);
  }
  EXPECT_EQ(m.phi_second(0.01), 0.0);
  EXPECT_EQ(m.phi_second(0.6), 0.0);
  EXPECT_EQ(m.phi_second(-0.2), m.psi(0.2));
  // |x| - phi(x) <= eps at x = 2 eps
  EXPECT_LE(1.0 - m.phi(1.0), 0.5);
  EXPECT_LE(0.0, 0.5 + m.phi(0.0));
}

TEST(Mollifier, DerivativesAgreeWithFiniteDifferences) {
  const MollifierPair m(10.0, 0.1);
  for (int i = 1; i < 1000; ++i) {
    const double x = -0.2 + 0.4 * i / 1000.0;
    const double h = 1e-6;
    EXPECT_NEAR((m.phi(x + h) - m.phi(x - h)) / (2 * h), m.phi_prime(x), 1e-6) << x;
    if (std::fabs(x) > 0.0101 && std::fabs(x) < 0.0999) {
      EXPECT_NEAR((m.phi_prime(x + h) - m.phi_prime(x - h)) / (2 * h), m.phi_second(x), 1e-3 * m.phi_second(x) + 1e-6) << x;
    }
  }
}

TEST(Mollifier, DerivativeBoundOnThousandPoints) {
  for (const auto& [d, e] : standard_pairs()) {
    const MollifierPair m(d, e);
    double mx = 0.0;
    for (int i = 0; i < 1000; ++i) mx = std::max(mx, std::fabs(m.phi_prime(-3 * e + 6 * e * i / 999.0)));
    EXPECT_LE(mx, 1.0 + 1e-9);
  }
}

TEST(Mollifier, DomainErrors) {
  EXPECT_THROW(MollifierPair(1.0, 0.5), DomainError);
  EXPECT_THROW(MollifierPair(2.0, 1.5), DomainError);
  EXPECT_THROW(MollifierPair(2.0, 0.5, 0.0), DomainError);
  EXPECT_THROW(MollifierPair(2.0, 0.5, 0.3), DomainError);
  EXPECT_NO_THROW(build_mollifier(2.0, 0.5, 0.25));
}
