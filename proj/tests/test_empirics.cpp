#include <gtest/gtest.h>

#include <cmath>

#include "conductors/empirics.hpp"
#include "generators.hpp"

using namespace conductors;

namespace {

const ConductorSummary& summary_1e6() {
  static const ConductorSummary s = summarize(FamilySpec::make(1e6, 1, 1));
  return s;
}

}  // namespace

TEST(Records, InvariantsHoldOnEverySpec) {
  for (auto [r, t] : admissible_residues()) {
    const double H = 3e5;
    for (const auto& rec : collect_records(FamilySpec::make(H, r, t))) {
      ASSERT_TRUE(u128(rec.ratio) * rec.conductor == abs_u128(rec.delta));
      ASSERT_GE(rec.ratio, 1u);
      ASSERT_LE(double(rec.conductor), 496 * H);
      ASSERT_NE(rec.ratio % 3, 0u);
      ASSERT_NE(rec.ratio % 8, 0u);
    }
  }
}

TEST(Summary, MergeIsIndependentOfSharding) {
  const auto spec = FamilySpec::make(5e5, 2, 5);
  const auto a = summarize(spec, {1, 1});
  const auto b = summarize(spec, {3, 11});
  EXPECT_EQ(a.count, b.count);
  EXPECT_EQ(a.conductors, b.conductors);
  EXPECT_EQ(a.ratio_counts, b.ratio_counts);
  EXPECT_TRUE(std::is_sorted(a.conductors.begin(), a.conductors.end()));
}

TEST(EmpiricalCdf, BoundaryValuesAndMonotonicity) {
  const auto& s = summary_1e6();
  const double H = 1e6;
  std::vector<double> ls{0.5 / H, 1e-3, 0.1, 1, 10, 100, 496, 496 * 1.01};
  const auto g = empirical_cdf(s, H, ls);
  EXPECT_EQ(g.cdf.front(), 0.0);
  EXPECT_EQ(g.cdf.back(), 1.0);
  EXPECT_TRUE(std::is_sorted(g.cdf.begin(), g.cdf.end()));
  EXPECT_EQ(g.source, DistributionGrid::Source::empirical);
}

TEST(EmpiricalCdf, CloseToTheoryAtModerateHeight) {
  std::vector<double> ls;
  for (int i = 1; i <= 100; ++i) ls.push_back(4.96 * i);
  const auto e = empirical_cdf(summary_1e6(), 1e6, ls);
  EXPECT_LE(sup_distance(e, theory_cdf_grid(ls)), 0.03);
}

TEST(CountBelow, EndpointsAndMonotonicity) {
  const double H = 2e5;
  const auto spec = FamilySpec::make(H, 1, 1);
  const auto s = summarize(spec);
  EXPECT_EQ(count_conductor_below(spec, 1), 0u);
  EXPECT_EQ(count_conductor_below(spec, 496 * H + 1), family_size(spec));
  EXPECT_THROW(count_conductor_below(spec, 0.5), std::domain_error);
  u64 prev = 0;
  for (double X = 1; X < 496 * H; X *= 1.7) {
    const u64 c = s.count_below(X);
    ASSERT_GE(c, prev);
    prev = c;
  }
}

TEST(CountBelow, NestedHeightsAreMonotone) {
  const auto small = summarize(FamilySpec::make(1e5, 4, 1));
  const auto big = summarize(FamilySpec::make(4e5, 4, 1));
  for (double X : {1e3, 1e5, 1e6, 1e7}) EXPECT_LE(small.count_below(X), big.count_below(X)) << X;
}

TEST(CountBelow, DominatesTheSubfamilyOfHeightLambdaHOver496) {
  // F(H') is inside F(H) for H' <= H, and every member has N <= |Delta| <= 496 H'.
  const double H = 1e6;
  const auto& s = summary_1e6();
  for (double l : {12.4, 49.6, 99.2, 496.0}) {
    const u64 sub = family_size(FamilySpec::make(std::max(1.0, l * H / 496), 1, 1));
    EXPECT_GE(s.count_below(l * H + 1), sub) << l;
  }
}

TEST(MassHistogram, FrequenciesSumToOneAndVanishOnForbiddenRatios) {
  const auto h = mass_histogram(summary_1e6(), 200);
  double total = h.overflow;
  for (auto [m, f] : h.freq) {
    total += f;
    if (m % 3 == 0 || m % 8 == 0) {
      EXPECT_EQ(f, 0.0) << m;
    }
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(h.freq.at(1), mass(1), 0.02);
  EXPECT_THROW(mass_histogram(summary_1e6(), 0), std::domain_error);
}

TEST(PowerLaw, ExactPowers) {
  std::vector<std::pair<double, double>> pts;
  for (double x : {1.0, 2.0, 5.0, 10.0, 40.0}) pts.emplace_back(x, std::pow(x, 5.0 / 6));
  EXPECT_NEAR(power_law_fit(pts), 5.0 / 6, 1e-12);
  for (auto& [x, y] : pts) y *= 17.5;
  EXPECT_NEAR(power_law_fit(pts), 5.0 / 6, 1e-12);
}

TEST(PowerLaw, Errors) {
  EXPECT_THROW(power_law_fit({{1, 1}, {2, 2}}), std::domain_error);
  EXPECT_THROW(power_law_fit({{1, 1}, {2, 0}, {3, 3}}), std::domain_error);
  EXPECT_THROW(power_law_fit({{-1, 1}, {2, 2}, {3, 3}}), std::domain_error);
  EXPECT_THROW(power_law_fit({{2, 1}, {2, 2}, {2, 3}}), std::domain_error);
}

TEST(PowerLaw, RandomPowersRecovered) {
  for (int i = 0; i < 200; ++i) {
    const double k = gen::uniform_real(-3, 3), c = gen::uniform_real(0.1, 10);
    std::vector<std::pair<double, double>> pts;
    for (int j = 0; j < 6; ++j) {
      const double x = gen::uniform_real(0.01, 100);
      pts.emplace_back(x, c * std::pow(x, k));
    }
    EXPECT_NEAR(power_law_fit(pts), k, 1e-9);
  }
}

TEST(SupDistance, Basics) {
  DistributionGrid a, b;
  a.lambdas = b.lambdas = {1, 2, 3};
  a.cdf = {0.1, 0.5, 0.9};
  b.cdf = {0.2, 0.6, 1.0};
  EXPECT_DOUBLE_EQ(sup_distance(a, a), 0.0);
  EXPECT_NEAR(sup_distance(a, b), 0.1, 1e-15);
  b.lambdas = {1, 2, 4};
  EXPECT_THROW(sup_distance(a, b), std::domain_error);
}

TEST(Compare, ReportFieldsAreConsistent) {
  std::vector<double> ls;
  for (int i = 1; i <= 20; ++i) ls.push_back(24.8 * i);
  const auto rep = compare(FamilySpec::make(2e5, 1, 1), ls, 1e-9, 30);
  EXPECT_DOUBLE_EQ(rep.sup_distance, sup_distance(rep.empirical, rep.theory));
  EXPECT_EQ(rep.mass_theory.size(), 30u);
  EXPECT_EQ(rep.counts.size(), default_slope_lambdas().size());
  EXPECT_TRUE(std::isfinite(rep.slope));
}
