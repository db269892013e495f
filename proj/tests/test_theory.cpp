#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "conductors/theory.hpp"
#include "generators.hpp"

using namespace conductors;

namespace {

// F_Delta by the beta-form: for fixed beta, alpha must exceed
// cbrt(-(lambda + 432 beta^2) / 64). The integrand is even in beta and smooth
// between the clamp points and the cube-root cusp, so tanh-sinh runs per piece.
double f_delta_beta_form(double lambda) {
  auto g = [&](double beta) { return (1 - std::clamp(std::cbrt(-(lambda + 432 * beta * beta) / 64), -1.0, 1.0)) / 2; };
  std::vector<double> cuts{0, 1};
  for (double c : {-lambda / 432, -(lambda + 64) / 432, (64 - lambda) / 432})
    if (c > 0 && c < 1) cuts.push_back(std::sqrt(c));
  std::sort(cuts.begin(), cuts.end());
  boost::math::quadrature::tanh_sinh<double> ts;
  double acc = 0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) acc += ts.integrate(g, cuts[i], cuts[i + 1], 1e-14);
  return acc;
}

// Area fraction by crude Monte Carlo over the box.
double f_delta_monte_carlo(double lambda, int n) {
  int inside = 0;
  for (int i = 0; i < n; ++i) {
    const double a = gen::uniform_real(-1, 1), b = gen::uniform_real(-1, 1);
    if (-16 * (4 * a * a * a + 27 * b * b) < lambda) ++inside;
  }
  return double(inside) / n;
}

const double kF0 = 1 - 2 / (15 * std::sqrt(3.0));

}  // namespace

TEST(FDelta, SaturationAndClosedForm) {
  EXPECT_NEAR(f_delta(64), 1.0, 1e-9);
  EXPECT_NEAR(f_delta(-496), 0.0, 1e-9);
  EXPECT_NEAR(f_delta(1e6), 1.0, 1e-12);
  EXPECT_NEAR(f_delta(-1e6), 0.0, 1e-12);
  EXPECT_NEAR(f_delta(0), kF0, 1e-10);
}

TEST(FDelta, MatchesBetaFormOracle) {
  for (double l : {-495.0, -400.0, -200.0, -50.0, -5.0, -0.1, 0.0, 0.1, 3.0, 20.0, 50.0, 63.0, 63.99})
    EXPECT_NEAR(f_delta(l), f_delta_beta_form(l), 1e-10) << l;
}

TEST(FDelta, MatchesMonteCarlo) {
  for (double l : {-300.0, -30.0, 10.0}) EXPECT_NEAR(f_delta(l), f_delta_monte_carlo(l, 400000), 5e-3) << l;
}

TEST(FDelta, MonotoneOnFineGrid) {
  double prev = -1;
  for (int i = 0; i <= 10000; ++i) {
    const double l = -500 + 570.0 * i / 10000;
    const double v = f_delta(l);
    ASSERT_GE(v, prev - 1e-12) << l;
    ASSERT_GE(v, 0);
    ASSERT_LE(v, 1);
    prev = v;
  }
}

TEST(FDelta, SymmetricDifferenceScalesLikeFiveSixths) {
  for (double e = -6; e <= std::log10(64.0); e += 0.25) {
    const double l = std::pow(10.0, e);
    const double ratio = (f_delta(l) - f_delta(-l)) / std::pow(l, 5.0 / 6);
    EXPECT_GE(ratio, 0.01) << l;
    EXPECT_LE(ratio, 10) << l;
  }
}

TEST(Rho, TableValues) {
  EXPECT_TRUE(rho(2, 15) == Rational(1, 2));
  EXPECT_TRUE(rho(2, 2) == Rational(1, 4));
  EXPECT_TRUE(rho(2, 12) == Rational(1, 4));
  EXPECT_TRUE(rho(2, 8) == 0);
  EXPECT_TRUE(rho(3, 3) == 0);
  EXPECT_TRUE(rho(3, 10) == 1);
  EXPECT_TRUE(rho(5, 5) == Rational(4, 125));
  EXPECT_TRUE(rho(5, 7) == Rational(24, 25));
  EXPECT_TRUE(rho(7, 7 * 7 * 7) == Rational(6 * 6, 7 * 7 * 7 * 7 * 7 * 7));
  EXPECT_THROW(rho(4, 2), std::domain_error);
  EXPECT_THROW(rho(5, 0), std::domain_error);
}

TEST(Rho, LargeExponentRow) {
  for (u64 p : {5, 7, 13})
    for (int n = 9; n < 15; ++n) {
      const Rational P(static_cast<long long>(p));
      Rational pn1 = 1;
      for (int i = 0; i <= n; ++i) pn1 *= P;
      EXPECT_TRUE(rho_prime_power(p, n) == (1 - 1 / P) * (2 - 2 / P) / pn1);
    }
}

TEST(Rho, RowSums) {
  EXPECT_TRUE(rho_tail_sum(2, 0) == 1);
  EXPECT_TRUE(rho_tail_sum(3, 0) == 1);
  for (u64 p : {5, 7, 11, 101}) {
    const Rational P(static_cast<long long>(p));
    Rational p10 = 1;
    for (int i = 0; i < 10; ++i) p10 *= P;
    EXPECT_TRUE(rho_tail_sum(p, 0) == 1 - 1 / p10) << p;
    Rational direct = 0, p390 = 1;
    for (int n = 3; n < 400; ++n) direct += rho_prime_power(p, n);
    for (int i = 0; i < 390; ++i) p390 *= P;
    const Rational rest = rho_tail_sum(p, 3) - direct;
    EXPECT_TRUE(rest > 0 && rest < 1 / p390) << p;
  }
}

TEST(ZetaRatio, MatchesClosedForm) {
  const double want = 228811 * std::pow(std::numbers::pi, 8) / 2380855680.0;
  EXPECT_NEAR(zeta_ratio(), want, 1e-13);
}

TEST(Mass, Examples) {
  EXPECT_EQ(mass(3), 0.0);
  EXPECT_EQ(mass(24), 0.0);
  EXPECT_NEAR(mass(1), 0.455945374714632872905823609103, 1e-14);
  EXPECT_NEAR(mass(2), 0.455945374714632872905823609103 / 2, 1e-14);
  EXPECT_THROW(mass(0), std::domain_error);
}

TEST(Mass, CoefficientFormsAgreeExactly) {
  for (u64 m = 1; m <= 10000; ++m) ASSERT_TRUE(coefficient_product_form(m) == coefficient_divisor_form(m)) << m;
}

TEST(Mass, TableMatchesDirectEvaluation) {
  const MassTable t(5000);
  for (u64 m = 1; m <= 5000; m += 7) EXPECT_NEAR(t[m], mass(m), 1e-15) << m;
}

TEST(Mass, ProbabilityMassWithCertifiedTail) {
  const MassTable t(1000000);
  EXPECT_LE(t.partial_sum(1000000), 1.0 + 1e-12);
  EXPECT_GE(t.partial_sum(1000000), 1.0 - 1e-3);
  for (u64 M : {100, 10000, 1000000}) {
    EXPECT_GE(mass_tail_majorant(M), t.residual(M)) << M;
    EXPECT_GT(mass_tail_majorant(M), 0);
  }
  EXPECT_LT(mass_tail_majorant(1000000), mass_tail_majorant(10000));
}

TEST(MainTerm, Normalization) {
  EXPECT_NEAR(main_term(0, 496), 1.0, 1e-6);
  EXPECT_NEAR(main_term(0, 1000), 1.0, 1e-6);
}

TEST(MainTerm, DomainErrors) {
  EXPECT_THROW(main_term(-1, 2), std::domain_error);
  EXPECT_THROW(main_term(2, 2), std::domain_error);
  EXPECT_THROW(main_term(3, 2), std::domain_error);
  EXPECT_THROW(main_term(0, 2, 0), std::domain_error);
}

TEST(MainTerm, TelescopesAcrossSplitPoints) {
  for (int i = 0; i < 40; ++i) {
    double x[3] = {gen::uniform_real(0.5, 400), gen::uniform_real(0.5, 400), gen::uniform_real(0.5, 400)};
    std::sort(x, x + 3);
    if (x[1] - x[0] < 1e-3 || x[2] - x[1] < 1e-3) continue;
    const double lhs = main_term(x[0], x[1]) + main_term(x[1], x[2]);
    EXPECT_NEAR(lhs, main_term(x[0], x[2]), 2e-9) << x[0] << " " << x[1] << " " << x[2];
    EXPECT_NEAR(main_term(0, x[2]) - main_term(0, x[0]), main_term(x[0], x[2]), 2e-9);
  }
}

TEST(MainTerm, CdfModeMatchesDirectSeriesWhereItConverges) {
  // For lambda1 small the direct series sum_m w(m)(F(m l) - F(-m l)) plus the
  // lower limit's vanishing contribution is summable over the table.
  const MassTable t(200000);
  for (double l : {5.0, 50.0, 300.0}) {
    long double direct = 0;
    for (u64 m = 1; m <= t.size(); ++m) direct += t[m] * (f_delta(double(m) * l) - f_delta(-double(m) * l));
    const double bound = t.residual(t.size());
    EXPECT_NEAR(main_term(0, l), double(direct), bound + 1e-9) << l;
  }
}

TEST(MainTerm, NondecreasingCdf) {
  double prev = 0;
  for (double l = 0.5; l <= 500; l += 2.5) {
    const double v = main_term(0, l);
    ASSERT_GE(v, prev - 1e-10) << l;
    prev = v;
  }
}

TEST(TheoryGrid, SharedTableMatchesPointwise) {
  const std::vector<double> ls{-1, 0, 0.496, 4.96, 49.6, 496};
  const auto g = theory_cdf_grid(ls, 1e-9, 2);
  EXPECT_EQ(g.cdf[0], 0.0);
  EXPECT_EQ(g.cdf[1], 0.0);
  for (size_t i = 2; i < ls.size(); ++i) EXPECT_NEAR(g.cdf[i], main_term(0, ls[i]), 1e-12);
  EXPECT_EQ(theory_cdf_grid(ls, 1e-9, 1).cdf, g.cdf);
}

TEST(Pdf, LinearAndConstantCdfs) {
  DistributionGrid lin, flat;
  for (int i = 0; i <= 1000; ++i) {
    lin.lambdas.push_back(0.496 * i);
    lin.cdf.push_back(0.496 * i / 496);
    flat.lambdas.push_back(0.496 * i);
    flat.cdf.push_back(0.3);
  }
  for (auto [x, d] : pdf_numeric(lin, 0.496)) EXPECT_NEAR(d, 1.0 / 496, 1e-12) << x;
  for (auto [x, d] : pdf_numeric(flat, 0.992)) EXPECT_EQ(d, 0.0) << x;
  EXPECT_THROW(pdf_numeric(lin, 0.3), std::domain_error);
  EXPECT_THROW(pdf_numeric(lin, 0.2), std::domain_error);
}

TEST(Pdf, TheoryDensityIntegratesToOne) {
  std::vector<double> ls;
  for (int i = 0; i <= 1000; ++i) ls.push_back(0.496 * i);
  const auto g = theory_cdf_grid(ls);
  const auto d = pdf_numeric(g, 0.496);
  double integral = 0;
  for (size_t i = 1; i < d.size(); ++i) {
    ASSERT_GE(d[i].second, -1e-9);
    integral += 0.5 * (d[i].second + d[i - 1].second) * (d[i].first - d[i - 1].first);
  }
  EXPECT_NEAR(integral, 1.0, 0.01);
}

TEST(RadEuler, AgreesWithinTailBudget) {
  auto r = identity_rad_euler(2, 100000, 100000);
  EXPECT_LE(std::fabs(r.lhs - r.rhs), r.lhs_tail + r.rhs_tail);
  EXPECT_LE(r.lhs_tail + r.rhs_tail, 1e-3);
  r = identity_rad_euler(10, 1000, 1000);
  EXPECT_NEAR(r.lhs, r.rhs, 1e-9);
  r = identity_rad_euler(3, 1, 2);
  EXPECT_DOUBLE_EQ(r.lhs, 1.0);
  EXPECT_THROW(identity_rad_euler(1, 10, 10), std::domain_error);
}

TEST(EulerRatio, ConvergesLikeOneOverQ) {
  double prev_scaled = 1e9;
  for (u64 q : {100, 1000, 10000}) {
    const double dev = std::fabs(euler_ratio_check(q) - 1);
    EXPECT_LE(dev, 10.0 / double(q)) << q;
    EXPECT_LE(dev * double(q), prev_scaled * 1.05) << q;
    prev_scaled = dev * double(q);
  }
  EXPECT_THROW(euler_ratio_check(5), std::domain_error);
  const double single = (1 - 1.0 / 25) / (1 - std::pow(5.0, -10));
  const double limit = (1 - std::pow(2.0, -10)) * (1 - std::pow(3.0, -10)) / (0.75 * (8.0 / 9)) *
                       zeta_primes_removed(10, 1, 1e-16) / zeta_primes_removed(2, 1, 1e-16);
  EXPECT_NEAR(euler_ratio_check(7), single / limit, 1e-14);
}

TEST(DiscWindow, MainTermFormula) {
  const double H = 1e6;
  EXPECT_NEAR(disc_window_main_term(H, 1, 6, -496, 0), 4 * std::pow(H, 5.0 / 6) / 36 * kF0, 1e-6);
}
