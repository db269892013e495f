#pragma once

// Residue sets S_{Q,m} in (Z/QZ)^2: the family congruences mod 6, a fixed
// value m of gcd(|Delta|/N, C), and minimality at primes p with p^6 | Q.

#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "conductors/family.hpp"
#include "conductors/integer_kernel.hpp"
#include "conductors/local_reduction.hpp"
#include "conductors/residue_set.hpp"
#include "conductors/theory.hpp"

namespace conductors {

struct QCPlan {
  u64 q = 0;
  u64 Q = 1;
  u64 C = 1;
  std::vector<PrimePower> primes;  // 5 <= p < q with k = floor(log q / log p)
};

inline QCPlan build_plan(u64 q) {
  if (q <= 5) throw std::domain_error("build_plan: requires q > 5");
  QCPlan plan;
  plan.q = q;
  u128 Q = 12, C = 4;
  for (u64 p : small_primes()) {
    if (p >= q) break;
    if (p < 5) continue;
    int k = 0;
    for (u128 pk = p; pk <= q; pk *= p) ++k;
    plan.primes.push_back({p, k});
    for (int i = 0; i < k + 2; ++i) Q *= p;
    for (int i = 0; i < k; ++i) C *= p;
    if (Q >> 63) throw std::domain_error("build_plan: Q exceeds 63 bits");
  }
  plan.Q = u64(Q);
  plan.C = u64(C);
  return plan;
}

inline std::vector<u64> divisors(u64 n) {
  std::vector<u64> ds{1};
  for (const auto& f : factor(i128(n)).factors) {
    const size_t base = ds.size();
    u64 pk = 1;
    for (int e = 1; e <= f.exponent; ++e) {
      pk *= f.prime;
      for (size_t i = 0; i < base; ++i) ds.push_back(ds[i] * pk);
    }
  }
  std::sort(ds.begin(), ds.end());
  return ds;
}

namespace detail {

inline u64 upow(u64 p, int k) {
  u64 r = 1;
  for (int i = 0; i < k; ++i) r *= p;
  return r;
}

inline constexpr u64 kLiftSpan = u64(1) << 20;

// 2-part of gcd(|Delta|/N, 4) for a family pair, as an exponent in {0, 1, 2}.
inline int capped_ratio_at_2(i64 a, i64 b, const FamilySpec& spec) {
  return std::min(reduction_at_2(a, b, spec).v_ratio, 2);
}

// Exponent of p in gcd(|Delta|/N, p^k) for a pair minimal at p.
inline int capped_ratio_at_p(i64 a, i64 b, u64 p, int k) {
  return std::min(reduction_at_p(a, b, p).v_ratio, k);
}

// A random integer pair congruent to (a, b) mod M, nonsingular and with
// no p^4 | a, p^6 | b.
inline std::pair<i64, i64> minimal_lift(u64 a, u64 b, u64 M, u64 p, std::mt19937_64& rng) {
  std::uniform_int_distribution<u64> digit(0, kLiftSpan - 1);
  const u64 p4 = upow(p, 4), p6 = upow(p, 6);
  for (int attempt = 0; attempt < 64; ++attempt) {
    const i64 x = i64(a + M * digit(rng)), y = i64(b + M * digit(rng));
    if (discriminant(x, y) == 0) continue;
    if (u64(x) % p4 == 0 && u64(y) % p6 == 0) continue;
    return {x, y};
  }
  throw std::logic_error("minimal_lift: no minimal lift found");
}

// CRT lift of a mod 4 and r mod 3 to a mod 12.
inline u64 crt12(u64 x4, u64 x3) {
  for (u64 x = 0; x < 12; ++x)
    if (x % 4 == x4 && x % 3 == x3) return x;
  return 0;
}

}  // namespace detail

/// S_{Q,m} as a CRT product of local factors mod 4, mod 3 and mod p^(k+2).
/// Each local value of gcd(|Delta|/N, C) is read off two independent random
/// lifts; disagreement means the residue does not determine it.
inline ResidueSet build_SQm(const QCPlan& plan, const FamilySpec& spec, u64 m, u64 seed = 1) {
  if (m == 0 || plan.C % m != 0) throw std::domain_error("build_SQm: m must divide C");
  std::mt19937_64 rng(seed);
  std::vector<ResidueSet::Factor> factors;

  {
    ResidueSet::Factor f2;
    f2.modulus = 4;
    f2.member.assign(16, 0);
    const int want = detail::vp(m, 2);
    for (u64 a = 0; a < 4; ++a)
      for (u64 b = 0; b < 4; ++b) {
        if (a % 2 != u64(spec.r % 2) || b % 2 != u64(spec.t % 2)) continue;
        const u64 a12 = detail::crt12(a, u64(spec.r % 3)), b12 = detail::crt12(b, u64(spec.t % 3));
        std::uniform_int_distribution<i64> digit(0, 1 << 20);
        const int v1 = detail::capped_ratio_at_2(i64(a12) + 12 * digit(rng), i64(b12) + 12 * digit(rng), spec);
        const int v2 = detail::capped_ratio_at_2(i64(a12) + 12 * digit(rng), i64(b12) + 12 * digit(rng), spec);
        if (v1 != v2) throw std::logic_error("build_SQm: lifts disagree at p = 2");
        f2.member[a * 4 + b] = v1 == want;
      }
    factors.push_back(std::move(f2));
  }
  {
    ResidueSet::Factor f3;
    f3.modulus = 3;
    f3.member.assign(9, 0);
    f3.member[u64(spec.r % 3) * 3 + u64(spec.t % 3)] = 1;
    factors.push_back(std::move(f3));
  }
  for (const auto& [p, k] : plan.primes) {
    ResidueSet::Factor fp;
    const int e = k + 2;
    const u64 M = detail::upow(p, e);
    const u64 p4 = detail::upow(p, std::min(4, e)), p6 = detail::upow(p, std::min(6, e));
    fp.modulus = M;
    fp.member.assign(M * M, 0);
    const int want = detail::vp(m, p);
    for (u64 a = 0; a < M; ++a)
      for (u64 b = 0; b < M; ++b) {
        if (e >= 6 && a % p4 == 0 && b % p6 == 0) continue;
        auto [x1, y1] = detail::minimal_lift(a, b, M, p, rng);
        auto [x2, y2] = detail::minimal_lift(a, b, M, p, rng);
        const int v1 = detail::capped_ratio_at_p(x1, y1, p, k);
        const int v2 = detail::capped_ratio_at_p(x2, y2, p, k);
        if (v1 != v2)
          throw std::logic_error("build_SQm: lifts disagree at p = " + std::to_string(p));
        fp.member[a * M + b] = v1 == want;
      }
    factors.push_back(std::move(fp));
  }
  return ResidueSet::product(std::move(factors));
}

/// Largest Q admitted by the direct (Z/QZ)^2 scan.
inline constexpr u64 kMaxScanModulus = 10'000;

/// Scans every (a, b) mod Q directly, evaluating all local data on two
/// random lifts mod Q, and returns #S_{Q,m} for every m | C. Independent of
/// the local-factor construction in build_SQm().
inline std::map<u64, u64> scan_SQ_partition(const QCPlan& plan, const FamilySpec& spec, u64 seed = 1) {
  if (plan.Q > kMaxScanModulus) throw std::domain_error("scan_SQ_partition: Q too large for a direct scan");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<i64> digit(0, 1 << 16);
  const i64 Q = i64(plan.Q);
  std::map<u64, u64> counts;
  for (u64 m : divisors(plan.C)) counts[m] = 0;
  auto gcd_part = [&](i64 x, i64 y) {
    u64 g = detail::upow(2, detail::capped_ratio_at_2(x, y, spec));
    for (const auto& [p, k] : plan.primes) g *= detail::upow(p, detail::capped_ratio_at_p(x, y, p, k));
    return g;
  };
  for (i64 a = 0; a < Q; ++a) {
    if (mod_floor(a, 6) != spec.r) continue;
    for (i64 b = 0; b < Q; ++b) {
      if (mod_floor(b, 6) != spec.t) continue;
      bool excluded = false;
      for (const auto& [p, k] : plan.primes)
        if (k + 2 >= 6 && a % i64(detail::upow(p, 4)) == 0 && b % i64(detail::upow(p, 6)) == 0) excluded = true;
      if (excluded) continue;
      u64 g[2];
      for (u64& gi : g) {
        i64 x, y;
        do {
          x = a + Q * digit(rng);
          y = b + Q * digit(rng);
        } while (discriminant(x, y) == 0 || !is_minimal_pair(x, y));
        gi = gcd_part(x, y);
      }
      if (g[0] != g[1]) throw std::logic_error("scan_SQ_partition: lifts disagree");
      ++counts[g[0]];
    }
  }
  return counts;
}

/// #{(a, b) mod Q satisfying the congruences mod 6 and minimality at p^6 | Q}.
inline Rational union_density(const QCPlan& plan) {
  Rational d(1, 36);
  for (const auto& [p, k] : plan.primes)
    if (k + 2 >= 6) d *= 1 - Rational(1) / Rational(BigInt(detail::upow(p, 10)));
  return d;
}

/// #S_{Q,m} / Q^2 with the boundary valuations v_p(m) = v_p(C) aggregated:
/// the local factor is the complement of the lower rows, minus the
/// non-minimal mass p^-10 only where p^6 | Q excludes it.
inline Rational density_corrected(const QCPlan& plan, u64 m) {
  if (m == 0 || plan.C % m != 0) throw std::domain_error("density_corrected: m must divide C");
  auto local = [&](u64 p, int k, bool minimal) {
    const int v = detail::vp(m, p);
    if (v < k) return rho_prime_power(p, v);
    Rational d = 1;
    for (int n = 0; n < k; ++n) d -= rho_prime_power(p, n);
    if (minimal) d -= Rational(1) / Rational(BigInt(detail::upow(p, 10)));
    return d;
  };
  Rational d(1, 36);
  d *= local(2, 2, false);
  for (const auto& [p, k] : plan.primes) d *= local(p, k, k + 2 >= 6);
  return d;
}

/// The same product with boundary factors sum_{n >= v_p(C)} rho(p, p^n).
inline Rational density_tail_form(const QCPlan& plan, u64 m) {
  if (m == 0 || plan.C % m != 0) throw std::domain_error("density_tail_form: m must divide C");
  auto local = [&](u64 p, int k) {
    const int v = detail::vp(m, p);
    return v < k ? rho_prime_power(p, v) : rho_tail_sum(p, k);
  };
  Rational d(1, 36);
  d *= local(2, 2);
  for (const auto& [p, k] : plan.primes) d *= local(p, k);
  return d;
}

/// (1/36) prod_{p < q} rho(p, m), the uncorrected product.
inline Rational density_product_form(const QCPlan& plan, u64 m) {
  Rational d(1, 36);
  d *= rho(2, m);
  for (const auto& [p, k] : plan.primes) d *= rho(p, m);
  return d;
}

struct NoDWitness {
  u64 d;           // a prime dividing Q
  u64 modulus;     // local modulus the residues live in
  u64 a, b;        // residues mod `modulus` of a member
};

/// A member (a, b) and prime d | Q with gcd(d^4, Q) | a and gcd(d^6, Q) | b,
/// if one exists. A composite d works only if one of its primes does.
inline std::optional<NoDWitness> find_no_d_witness(const ResidueSet& set) {
  for (const auto& f : set.factors())
    if (f.count() == 0) return std::nullopt;
  for (const auto& f : set.factors()) {
    for (const auto& pf : factor(i128(f.modulus)).factors) {
      const u64 p = pf.prime;
      const u64 pa = detail::upow(p, std::min(4, pf.exponent)), pb = detail::upow(p, std::min(6, pf.exponent));
      for (u64 a = 0; a < f.modulus; a += pa)
        for (u64 b = 0; b < f.modulus; b += pb)
          if (f.contains(a, b)) return NoDWitness{p, f.modulus, a, b};
    }
  }
  return std::nullopt;
}

inline bool verify_no_d_property(const ResidueSet& set, const QCPlan& plan) {
  if (set.modulus() != plan.Q) throw std::domain_error("verify_no_d_property: set modulus differs from Q");
  return !find_no_d_witness(set).has_value();
}

struct LocalTypeCount {
  ReductionType type;
  int eta = 0;
  u64 counted = 0;   // residue pairs mod p^eta whose sampled lifts all have this type
  u64 expected = 0;  // listed density times p^(2 eta)
};

/// For each type whose listed modulus is p^eta with eta <= max_eta, counts
/// residue pairs mod p^eta whose `lifts` random minimal lifts all have that
/// type under tate_oracle. Pairs whose lifts disagree are left uncounted.
inline std::vector<LocalTypeCount> local_type_counts(u64 p, int max_eta, u64 seed = 1, int lifts = 2) {
  if (p < 5 || !is_prime(p)) throw std::domain_error("local_type_counts: p must be a prime >= 5");
  if (max_eta < 1 || detail::upow(p, max_eta) > 10'000)
    throw std::domain_error("local_type_counts: p^max_eta must lie in [p, 10^4]");
  std::vector<LocalTypeCount> out;
  for (int n = 0; n <= max_eta + 8; ++n)
    for (const auto& e : ratio_valuation_row(p, n)) {
      if (e.modulus_exponent > max_eta) continue;
      const Rational scaled = e.density * Rational(BigInt(detail::upow(p, 2 * e.modulus_exponent)));
      if (denominator(scaled) != 1) throw std::logic_error("local_type_counts: non-integral expected count");
      out.push_back({e.type, e.modulus_exponent, 0, numerator(scaled).convert_to<u64>()});
    }
  std::mt19937_64 rng(seed);
  for (int eta = 1; eta <= max_eta; ++eta) {
    const u64 M = detail::upow(p, eta);
    for (u64 a = 0; a < M; ++a)
      for (u64 b = 0; b < M; ++b) {
        std::optional<ReductionType> common;
        bool agree = true;
        for (int i = 0; i < lifts && agree; ++i) {
          auto [x, y] = detail::minimal_lift(a, b, M, p, rng);
          const ReductionType t = tate_oracle(x, y, p).type;
          if (!common)
            common = t;
          else if (!(*common == t))
            agree = false;
        }
        if (!agree) continue;
        for (auto& c : out)
          if (c.eta == eta && c.type == *common) ++c.counted;
      }
  }
  return out;
}

}  // namespace conductors
