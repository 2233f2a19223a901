#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include <sdeconv/coeffs.hpp>

using namespace sdeconv;

namespace {

// Independent evaluation of zeta: locate the band n with
// (n+1)^{-1/(1-k)} <= x < n^{-1/(1-k)} by direct search.
double zeta_oracle(double x, double bh, double k) {
  if (x <= 0) return (x - 1) / (2 * x - 1);
  if (x >= 1) return (3 * x + 1) / (x + 1);
  const double a = 1.0 / (1.0 - k);
  long n = 1;
  while (!(std::pow(n + 1.0, -a) <= x)) ++n;
  return 1.0 + std::log(2.0) / std::log(n + 1.0) * std::pow(x, bh);
}

// Riemann oracle: midpoint count of cells of width w within eps of S.
double riemann_measure(const std::vector<double>& pts, double seq_exp, double eps, double K, double w) {
  const long cells = std::lround(2 * K / w);
  long hits = 0;
  for (long i = 0; i < cells; ++i) {
    const double x = -K + (i + 0.5) * w;
    double d = std::numeric_limits<double>::infinity();
    for (double p : pts) d = std::min(d, std::fabs(x - p));
    if (seq_exp > 0) {
      // nearest points of {k^{-seq_exp}} around x, plus the accumulation at 0
      if (x <= 0) {
        d = std::min(d, -x);
      } else {
        const double k0 = std::floor(std::pow(x, -1.0 / seq_exp));
        for (double k = std::max(1.0, k0 - 1); k <= k0 + 2; ++k) d = std::min(d, std::fabs(x - std::pow(k, -seq_exp)));
        d = std::min(d, x);  // inf over the tail k -> infinity
      }
    }
    if (d < eps) ++hits;
  }
  return hits * w;
}

}  // namespace

TEST(StepSigma, ValuesAndWitness) {
  const auto d = make_step_sigma();
  EXPECT_EQ(d.spec(-1.0), 1.0);
  EXPECT_EQ(d.spec(0.0), 2.0);
  EXPECT_EQ(d.spec(-1e-300), 1.0);
  EXPECT_EQ(d.spec.beta, 1.0);
  EXPECT_EQ(d.spec.kappa, 1.0);
  EXPECT_EQ(d.spec.singular_set.finite_points(), std::vector<double>{0.0});
  ASSERT_TRUE(d.cert.has_witness());
  const double jump = d.cert.f_sigma(0.0) - d.cert.f_sigma(-1e-12);
  EXPECT_GE(jump, 1.0);
  EXPECT_EQ(d.cert.sigma_lower, 1.0);
  EXPECT_EQ(d.cert.sigma_upper, 2.0);
  const auto rep = check_certificates(d.spec, &d.cert, {-2, -1, -0.5, 0.5, 1, 2});
  EXPECT_TRUE(rep.ok());
}

TEST(Zeta, ReferenceValues) {
  EXPECT_DOUBLE_EQ(zeta_value(0.0, 0.5, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(zeta_value(1.0, 0.5, 0.5), 2.0);
  EXPECT_NEAR(zeta_value(0.5, 0.5, 0.5), 1.0 + std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(zeta_value(0.5, 0.5, 0.5), 1.70711, 1e-5);
  const auto z = make_zeta(0.5, 0.5);
  EXPECT_NEAR(z.spec.beta, 2.0 / 3.0, 1e-15);
  EXPECT_THROW(make_zeta(0.0, 0.5), DomainError);
  EXPECT_THROW(make_zeta(0.5, 1.0), DomainError);
  EXPECT_THROW(make_zeta(1.2, 0.5), DomainError);
}

TEST(Zeta, MatchesBranchOracleAndBounds) {
  for (double bh : {0.25, 0.5, 0.75})
    for (double k : {0.25, 0.5, 0.75}) {
      double prev = -INFINITY;
      for (int i = 0; i <= 4000; ++i) {
        const double x = -5.0 + 10.0 * i / 4000.0;
        const double v = zeta_value(x, bh, k);
        EXPECT_NEAR(v, zeta_oracle(x, bh, k), 1e-12) << x;
        EXPECT_GT(v, 0.5);
        EXPECT_LT(v, 3.0);
        EXPECT_GT(v, prev) << "zeta must be strictly increasing at " << x;
        prev = v;
      }
    }
}

TEST(Zeta, CertificatesPassOnThousandPointGrid) {
  const auto z = make_zeta(0.5, 0.5);
  std::vector<double> grid;
  for (int i = 0; i < 1000; ++i) grid.push_back(-3.0 + 6.0 * (i + 0.5) / 1000.0);
  const auto rep = check_certificates(z.spec, &z.cert, grid);
  EXPECT_TRUE(rep.ok()) << (rep.violations.empty() ? "" : rep.violations[0].check);
  EXPECT_GT(rep.holder_pairs_checked, 1000u);
  EXPECT_LE(rep.c_beta_kappa_estimate, 3.0);
  // Dense grid inside (0,1) where the bands are short.
  std::vector<double> dense;
  for (int i = 1; i < 20000; ++i) dense.push_back(i / 20000.0);
  EXPECT_TRUE(check_certificates(z.spec, &z.cert, dense).ok());
}

TEST(PiecewiseHolder, PlainLipschitzAndIndicator) {
  const auto s = make_piecewise_holder({}, {piece::sine(1.0, 1.0, 0.0, 0.0)}, 1.0, 1.0);
  EXPECT_TRUE(s.singular_set.is_empty());
  EXPECT_DOUBLE_EQ(s.sup_norm, 1.0);
  EXPECT_FALSE(s.in_L1);

  const auto b = make_indicator_interval(0.0, 1.0);
  EXPECT_EQ(b.singular_set.finite_points(), (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(b.c_beta_kappa_bound, 4.0);
  EXPECT_TRUE(b.in_L1);
  EXPECT_DOUBLE_EQ(b.L1_norm, 1.0);
  EXPECT_EQ(b(0.0), 1.0);
  EXPECT_EQ(b(1.0), 0.0);
  EXPECT_EQ(b(0.999), 1.0);
  EXPECT_EQ(b(-0.5), 0.0);
  const auto rep = check_certificates(b, nullptr, {-1.0, -0.5});
  EXPECT_TRUE(rep.ok());
  EXPECT_GE(rep.holder_pairs_checked, 1u);
}

TEST(PiecewiseHolder, RejectsBadInput) {
  EXPECT_THROW(make_piecewise_holder({1.0, 0.0}, {piece::constant(0), piece::constant(1), piece::constant(0)}, 1, 0),
               DomainError);
  EXPECT_THROW(make_piecewise_holder({0.0}, {piece::constant(0)}, 1, 0), DomainError);
  EXPECT_THROW(make_piecewise_holder({}, {piece::linear(1.0, 0.0)}, 1, 1), DomainError);  // unbounded
}

TEST(PiecewiseHolder, ForcedViolationCarriesWitness) {
  auto s = make_piecewise_holder({}, {piece::sine(1.0, 1.0, 0.0, 0.0)}, 1.0, 1.0);
  s.holder_seminorm = 0.0;
  const auto rep = check_certificates(s, nullptr, {0.0, 0.1, 0.2});
  ASSERT_FALSE(rep.ok());
  EXPECT_EQ(rep.violations[0].check, "holder");
  EXPECT_LT(rep.violations[0].x, rep.violations[0].y);
  EXPECT_GT(rep.violations[0].lhs, 0.0);
}

TEST(PiecewiseDiffusion, SineHasNoWitnessButIsElliptic) {
  std::vector<Piece> p{piece::sine(0.1, 1.0, 0.0, 1.0)};
  const auto c = make_piecewise_diffusion_certificate({}, p);
  EXPECT_FALSE(c.has_witness());
  EXPECT_DOUBLE_EQ(c.sigma_lower, 0.9);
  EXPECT_DOUBLE_EQ(c.sigma_upper, 1.1);
  EXPECT_THROW(make_piecewise_diffusion_certificate({}, {piece::sine(1.0, 1.0, 0.0, 0.5)}), DomainError);
}

TEST(PiecewiseDiffusion, MultiJumpWitness) {
  std::vector<double> bp{-1.0, 0.5, 2.0};
  std::vector<Piece> p{piece::constant(1.0), piece::constant(3.0), piece::constant(1.5), piece::constant(2.5)};
  Diffusion d{make_piecewise_holder(bp, p, 1.0, 0.0), make_piecewise_diffusion_certificate(bp, p)};
  std::vector<double> grid;
  for (int i = 0; i <= 600; ++i) grid.push_back(-3.0 + i / 100.0);
  for (double s : bp) grid.push_back(std::nextafter(s, -INFINITY));
  std::sort(grid.begin(), grid.end());
  EXPECT_TRUE(check_certificates(d.spec, &d.cert, grid).ok());
}

TEST(NeighborhoodMeasure, HandExamples) {
  EXPECT_NEAR(neighborhood_measure(SingularSet::finite({0.0}), 0.1, 1.0), 0.2, 1e-15);
  EXPECT_NEAR(neighborhood_measure(SingularSet::finite({0.0, 0.15}), 0.1, 1.0), 0.35, 1e-15);
  // {k^-2}: blob [-0.01, 0.05] plus 1/4, 1/9, 1/16 (0.02 each) plus the
  // interval around 1 clipped to [0.99, 1].
  EXPECT_NEAR(neighborhood_measure(SingularSet::inverse_power(0.5), 0.01, 1.0), 0.13, 1e-12);
  EXPECT_EQ(neighborhood_measure(SingularSet::empty(), 0.1, 1.0), 0.0);
  EXPECT_THROW(neighborhood_measure(SingularSet::finite({0.0}), 0.0, 1.0), DomainError);
  EXPECT_THROW(neighborhood_measure(SingularSet::finite({0.0}), 0.1, 0.5), DomainError);
}

TEST(NeighborhoodMeasure, MatchesRiemannOracle) {
  const double w = 1e-5;
  for (double eps : {0.3, 0.1, 0.03, 0.01, 0.003})
    for (double K : {1.0, 2.0}) {
      const double zeta_m = neighborhood_measure(SingularSet::inverse_power(0.5), eps, K);
      const double zeta_o = riemann_measure({}, 2.0, eps, K, w);
      EXPECT_NEAR(zeta_m, zeta_o, w) << "eps=" << eps << " K=" << K;
      const std::vector<double> pts{-1.5, -0.2, 0.0, 0.33, 0.4, 1.9};
      const double fin_m = neighborhood_measure(SingularSet::finite(pts), eps, K);
      EXPECT_NEAR(fin_m, riemann_measure(pts, 0.0, eps, K, w), w) << "eps=" << eps << " K=" << K;
    }
}

TEST(EstimateC, Examples) {
  EXPECT_NEAR(estimate_c_beta_kappa(SingularSet::finite({0.0}), 1.0, {{1.0, 0.1}}), 2.0, 1e-14);
  EXPECT_EQ(estimate_c_beta_kappa(SingularSet::empty(), 0.5, default_c_grid()), 0.0);
  const auto S = SingularSet::inverse_power(0.5);
  EXPECT_GE(estimate_c_beta_kappa(S, 0.5, {{1.0, 0.01}}), 1.3 - 1e-12);
  const double full = estimate_c_beta_kappa(S, 0.5, default_c_grid());
  EXPECT_GE(full, 1.3);
  EXPECT_LE(full, 3.0);
}

TEST(Combine, SumOfDiffusionsKeepsCertificates) {
  const auto s = combine(0.5, make_step_sigma(), 0.5, make_zeta(0.5, 0.5));
  EXPECT_NEAR(s.spec.beta, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(s.spec.kappa, 0.5);
  EXPECT_DOUBLE_EQ(s.cert.sigma_lower, 0.75);
  EXPECT_DOUBLE_EQ(s.cert.sigma_upper, 2.5);
  EXPECT_FALSE(s.spec.singular_set.is_empty());
  std::vector<double> grid;
  for (int i = 0; i < 1000; ++i) grid.push_back(-3.0 + 6.0 * (i + 0.5) / 1000.0);
  const auto rep = check_certificates(s.spec, &s.cert, grid);
  EXPECT_TRUE(rep.ok()) << (rep.violations.empty() ? "" : rep.violations[0].check);
  EXPECT_THROW(combine(-1.0, make_step_sigma(), 1.0, make_step_sigma()), DomainError);
}

TEST(Constant, EmptySingularSetZeroSeminorm) {
  const auto c = make_constant(2.5);
  EXPECT_TRUE(c.singular_set.is_empty());
  EXPECT_EQ(c.holder_seminorm, 0.0);
  EXPECT_FALSE(c.in_L1);
  EXPECT_TRUE(make_constant(0.0).in_L1);
}
