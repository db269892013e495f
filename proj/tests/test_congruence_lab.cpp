#include <gtest/gtest.h>

#include "conductors/congruence_lab.hpp"

using namespace conductors;

namespace {

BigInt sq(u64 x) { return BigInt(x) * x; }

}  // namespace

TEST(Plan, SmallQ) {
  auto p = build_plan(7);
  EXPECT_EQ(p.Q, 1500u);
  EXPECT_EQ(p.C, 20u);
  p = build_plan(6);
  EXPECT_EQ(p.Q, 1500u);
  EXPECT_EQ(p.C, 20u);
  p = build_plan(11);
  EXPECT_EQ(p.Q, 12u * 125 * 343);
  EXPECT_EQ(p.C, 4u * 5 * 7);
  p = build_plan(19);
  EXPECT_EQ(p.C, 4u * 5 * 7 * 11 * 13 * 17);
  EXPECT_THROW(build_plan(23), std::domain_error);  // Q would pass 2^63
  EXPECT_THROW(build_plan(5), std::domain_error);
  EXPECT_THROW(build_plan(2), std::domain_error);
}

TEST(Plan, Divisibility) {
  for (u64 q : {6, 7, 11, 13, 19}) {
    const auto p = build_plan(q);
    EXPECT_EQ(p.Q % p.C, 0u) << q;
    EXPECT_EQ(p.Q % 12, 0u) << q;
  }
}

TEST(SQm, CountsAtQ7) {
  const auto plan = build_plan(7);
  const auto spec = FamilySpec::make(1, 1, 1);
  EXPECT_TRUE(build_SQm(plan, spec, 1).cardinality() == 30000);
  BigInt total = 0;
  for (u64 m : divisors(plan.C)) total += build_SQm(plan, spec, m).cardinality();
  EXPECT_TRUE(total == 62500);
  EXPECT_THROW(build_SQm(plan, spec, 3), std::domain_error);
  EXPECT_THROW(build_SQm(plan, spec, 0), std::domain_error);
}

TEST(SQm, DirectScanAgreesWithLocalFactors) {
  const auto plan = build_plan(7);
  for (auto [r, t] : {std::pair{1, 1}, {2, 5}, {5, 3}}) {
    const auto spec = FamilySpec::make(1, r, t);
    const auto scan = scan_SQ_partition(plan, spec, 11);
    for (u64 m : divisors(plan.C)) {
      const auto S = build_SQm(plan, spec, m, 5);
      EXPECT_TRUE(BigInt(scan.at(m)) == S.cardinality()) << "m=" << m << " r=" << r << " t=" << t;
    }
  }
}

TEST(SQm, MembershipOfKnownCurves) {
  const auto plan = build_plan(7);
  const auto spec = FamilySpec::make(1, 1, 1);
  const auto S5 = build_SQm(plan, spec, 5);
  // Delta(1,1) = -2^4 31 with type II at 2; Delta(7,1) = -2^4 1399 with type IV at 2.
  EXPECT_FALSE(S5.contains(1, 1));
  EXPECT_TRUE(build_SQm(plan, spec, 1).contains(1, 1));
  EXPECT_TRUE(build_SQm(plan, spec, 4).contains(7, 1));
}

TEST(SQm, PartitionIsDisjointAndCoversTheCongruenceSet) {
  const auto plan = build_plan(7);
  const auto spec = FamilySpec::make(1, 5, 1);
  std::vector<ResidueSet> sets;
  for (u64 m : divisors(plan.C)) sets.push_back(build_SQm(plan, spec, m));
  u64 covered = 0;
  for (i64 a = 0; a < 1500; ++a)
    for (i64 b = 0; b < 1500; ++b) {
      int hits = 0;
      for (const auto& s : sets) hits += s.contains(a, b);
      ASSERT_LE(hits, 1);
      const bool congruent = mod_floor(a, 6) == 5 && mod_floor(b, 6) == 1;
      ASSERT_EQ(hits == 1, congruent) << a << " " << b;
      covered += hits;
    }
  EXPECT_EQ(covered, 62500u);
}

TEST(SQm, CorrectedDensityIsExactAtQ7AndQ11) {
  for (u64 q : {7, 11}) {
    const auto plan = build_plan(q);
    const auto spec = FamilySpec::make(1, 1, 1);
    const Rational Q2(sq(plan.Q));
    BigInt total = 0;
    for (u64 m : divisors(plan.C)) {
      const BigInt c = build_SQm(plan, spec, m).cardinality();
      total += c;
      EXPECT_TRUE(Rational(c) == density_corrected(plan, m) * Q2) << "q=" << q << " m=" << m;
    }
    EXPECT_TRUE(Rational(total) == union_density(plan) * Q2);
  }
}

TEST(SQm, UncorrectedFormsDifferOnlyAtBoundaryValuations) {
  const auto plan = build_plan(7);
  for (u64 m : divisors(plan.C)) {
    const bool boundary = m % 5 == 0;
    EXPECT_EQ(density_tail_form(plan, m) == density_corrected(plan, m), !boundary) << m;
    if (m % 5 != 0 && m % 4 != 0) {
      EXPECT_TRUE(density_product_form(plan, m) == density_corrected(plan, m)) << m;
    }
  }
  EXPECT_TRUE(density_corrected(plan, 1) * Rational(sq(1500)) == 30000);
}

TEST(NoD, RestrictedRegimeHoldsAtQ7AndQ11) {
  for (u64 q : {7, 11}) {
    const auto plan = build_plan(q);
    const auto spec = FamilySpec::make(1, 1, 1);
    for (u64 m : divisors(plan.C)) {
      bool interior = true;
      for (const auto& [p, k] : plan.primes) interior = interior && int(detail::vp(m, p)) < k;
      if (!interior) continue;
      EXPECT_TRUE(verify_no_d_property(build_SQm(plan, spec, m), plan)) << "q=" << q << " m=" << m;
    }
  }
}

TEST(NoD, BoundaryValuationsAdmitAWitness) {
  // (0, 0) mod 125 lifts to I0* or deeper at 5, whose capped 5-part is 5.
  const auto plan = build_plan(7);
  const auto spec = FamilySpec::make(1, 1, 1);
  for (u64 m : {5, 10, 20}) {
    const auto w = find_no_d_witness(build_SQm(plan, spec, m));
    ASSERT_TRUE(w.has_value()) << m;
    EXPECT_EQ(w->d, 5u);
    EXPECT_EQ(w->modulus, 125u);
    EXPECT_EQ(w->a % 125, 0u);
    EXPECT_EQ(w->b % 125, 0u);
  }
}

TEST(NoD, SyntheticSets) {
  const auto plan = build_plan(7);
  EXPECT_FALSE(verify_no_d_property(ResidueSet::from_pairs(1500, {{0, 0}}), plan));
  EXPECT_FALSE(verify_no_d_property(ResidueSet::from_pairs(1500, {{125 * 7, 125 * 3}}), plan));
  EXPECT_TRUE(verify_no_d_property(ResidueSet::from_pairs(1500, {{125, 25}}), plan));
  EXPECT_TRUE(verify_no_d_property(ResidueSet::from_pairs(1500, {{1, 1}, {7, 13}}), plan));
  // 2-part: gcd(16, 1500) = 4 | a and gcd(64, 1500) = 4 | b.
  EXPECT_FALSE(verify_no_d_property(ResidueSet::from_pairs(1500, {{4, 8}}), plan));
  EXPECT_THROW(verify_no_d_property(ResidueSet::from_pairs(36, {{1, 1}}), plan), std::domain_error);
}

TEST(LocalTypeCounts, PrimeFiveUpToModulus625) {
  const auto counts = local_type_counts(5, 4, 1);
  std::map<std::string, u64> got;
  for (const auto& c : counts) {
    EXPECT_EQ(c.counted, c.expected) << c.type.str() << " mod 5^" << c.eta;
    got[c.type.str()] = c.counted;
  }
  EXPECT_EQ(got["I0"], 20u);
  EXPECT_EQ(got["I1"], 80u);
  EXPECT_EQ(got["II"], 20u);
  EXPECT_EQ(got["III"], 4u);
  EXPECT_EQ(got["IV"], 20u);
  EXPECT_EQ(got["I0*"], 100u);
  EXPECT_EQ(got["I2"], 400u);
  EXPECT_EQ(got["I3"], 2000u);
}

TEST(LocalTypeCounts, PrimeSevenUpToModulus343) {
  for (const auto& c : local_type_counts(7, 3, 2))
    EXPECT_EQ(c.counted, c.expected) << c.type.str() << " mod 7^" << c.eta;
  EXPECT_THROW(local_type_counts(3, 2), std::domain_error);
  EXPECT_THROW(local_type_counts(11, 5), std::domain_error);
}

TEST(Divisors, Basic) {
  EXPECT_EQ(divisors(20), (std::vector<u64>{1, 2, 4, 5, 10, 20}));
  EXPECT_EQ(divisors(1), (std::vector<u64>{1}));
  EXPECT_EQ(divisors(140).size(), 12u);
}
