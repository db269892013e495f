#pragma once

// The height-ordered family y^2 = x^3 + a x + b with a = r (mod 6),
// b = t (mod 6), |a| <= H^(1/3), |b| <= H^(1/2) and no prime p with
// p^4 | a and p^6 | b.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "conductors/integer_kernel.hpp"
#include "conductors/residue_set.hpp"

namespace conductors {

inline i64 mod_floor(i64 x, i64 m) { return ((x % m) + m) % m; }

struct FamilySpec {
  double height = 1;
  int r = 1;  // a mod 6, 3 does not divide r
  int t = 1;  // b mod 6, odd

  static FamilySpec make(double height, i64 r, i64 t) {
    if (!(height >= 1) || !std::isfinite(height))
      throw std::domain_error("FamilySpec: height must be a finite real >= 1");
    FamilySpec s;
    s.height = height;
    s.r = int(mod_floor(r, 6));
    s.t = int(mod_floor(t, 6));
    if (s.r % 3 == 0) throw std::domain_error("FamilySpec: r must not be divisible by 3");
    if (s.t % 2 == 0) throw std::domain_error("FamilySpec: t must be odd");
    return s;
  }

  /// floor(H): both box bounds are exact integer roots of this.
  u64 height_floor() const { return u64(std::floor(height)); }
  i64 a_bound() const { return i64(iroot(height_floor(), 3)); }
  i64 b_bound() const { return i64(iroot(height_floor(), 2)); }

  friend bool operator==(const FamilySpec&, const FamilySpec&) = default;
};

/// The twelve admissible (r, t) residue pairs.
inline std::vector<std::pair<int, int>> admissible_residues() {
  std::vector<std::pair<int, int>> out;
  for (int r : {1, 2, 4, 5})
    for (int t : {1, 3, 5}) out.emplace_back(r, t);
  return out;
}

struct CurveParams {
  i64 a = 0;
  i64 b = 0;
  FamilySpec spec;
};

inline i128 discriminant(i64 a, i64 b) {
  const i128 A = a, B = b;
  return -16 * (4 * A * A * A + 27 * B * B);
}

/// True unless some prime p has p^4 | a and p^6 | b (with 0 divisible by everything).
inline bool is_minimal_pair(i64 a, i64 b) {
  if (a == 0 && b == 0) return false;
  const u64 ua = u64(a < 0 ? -a : a), ub = u64(b < 0 ? -b : b);
  u64 limit = ~u64(0);
  if (a != 0) limit = std::min(limit, iroot(ua, 4));
  if (b != 0) limit = std::min(limit, iroot(ub, 6));
  for (u64 p : small_primes()) {
    if (p > limit) break;
    const u64 p4 = p * p * p * p, p6 = p4 * p * p;
    if (ua % p4 == 0 && ub % p6 == 0) return false;
  }
  return true;
}

inline bool is_member(const FamilySpec& spec, i64 a, i64 b) {
  if (std::abs(a) > spec.a_bound() || std::abs(b) > spec.b_bound()) return false;
  if (mod_floor(a, 6) != spec.r || mod_floor(b, 6) != spec.t) return false;
  if (discriminant(a, b) == 0) return false;
  return is_minimal_pair(a, b);
}

struct EnumerateOptions {
  unsigned threads = 1;
  unsigned shards = 0;  // 0: one shard per thread
};

namespace detail {

inline std::vector<i64> progression(i64 bound, int residue) {
  std::vector<i64> xs;
  i64 x = -bound + mod_floor(residue - (-bound), 6);
  for (; x <= bound; x += 6) xs.push_back(x);
  return xs;
}

}  // namespace detail

/// Enumerates F(H) with the b-range split into contiguous shards. Returns
/// one accumulator per shard, in shard order; within a shard pairs are
/// visited in (b, a) lexicographic order.
template <class Acc, class Visit>
std::vector<Acc> enumerate_sharded(const FamilySpec& spec, const EnumerateOptions& opts,
                                   const Acc& init, Visit visit) {
  const auto as = detail::progression(spec.a_bound(), spec.r);
  const auto bs = detail::progression(spec.b_bound(), spec.t);
  const unsigned threads = std::max(1u, opts.threads);
  const unsigned shards = std::max(1u, opts.shards ? opts.shards : threads);
  std::vector<Acc> acc(shards, init);

  auto run_shard = [&](unsigned s) {
    const size_t lo = bs.size() * s / shards, hi = bs.size() * (s + 1) / shards;
    for (size_t j = lo; j < hi; ++j) {
      const i64 b = bs[j];
      for (i64 a : as) {
        if (discriminant(a, b) == 0 || !is_minimal_pair(a, b)) continue;
        visit(acc[s], CurveParams{a, b, spec});
      }
    }
  };

  if (threads == 1) {
    for (unsigned s = 0; s < shards; ++s) run_shard(s);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (unsigned s = w; s < shards; s += threads) run_shard(s);
      });
  }
  return acc;
}

/// Visits every member of F(H) once. With threads > 1 the visitor runs
/// concurrently and must be thread-safe.
inline u64 enumerate(const FamilySpec& spec, const std::function<void(const CurveParams&)>& visitor,
                     const EnumerateOptions& opts = {}) {
  auto counts = enumerate_sharded<u64>(spec, opts, 0, [&](u64& n, const CurveParams& c) {
    visitor(c);
    ++n;
  });
  u64 total = 0;
  for (u64 n : counts) total += n;
  return total;
}

inline u64 family_size(const FamilySpec& spec, const EnumerateOptions& opts = {}) {
  auto counts = enumerate_sharded<u64>(spec, opts, 0, [](u64& n, const CurveParams&) { ++n; });
  u64 total = 0;
  for (u64 n : counts) total += n;
  return total;
}

namespace detail {

// #{x in [-L, L] : c x = r (mod 6)}
inline i64 count_scaled_progression(i64 L, i64 c, int r) {
  i64 total = 0;
  for (i64 x0 = 0; x0 < 6; ++x0) {
    if (mod_floor(x0 * c, 6) != r) continue;
    // x = x0 + 6k within [-L, L]
    auto floor_div = [](i64 n, i64 d) { return n >= 0 ? n / d : -((-n + d - 1) / d); };
    const i64 kmin = -floor_div(-(-L - x0), 6);  // ceil((-L - x0) / 6)
    const i64 kmax = floor_div(L - x0, 6);
    if (kmax >= kmin) total += kmax - kmin + 1;
  }
  return total;
}

}  // namespace detail

/// #F(H) via sum_d mu(d) #{(alpha, beta) : |alpha d^4| <= A, |beta d^6| <= B,
/// congruences on (alpha d^4, beta d^6)} -- counts only, no minimality tests.
inline i64 moebius_sieve_count(const FamilySpec& spec) {
  const i64 A = spec.a_bound(), B = spec.b_bound();
  const u64 dmax = std::max(iroot(u64(A), 4), iroot(u64(B), 6));
  i64 total = 0;
  for (u64 d = 1; d <= std::max<u64>(dmax, 1); ++d) {
    const int mu = moebius(d);
    if (mu == 0) continue;
    const i64 d4 = i64(d * d * d * d), d6 = d4 * i64(d * d);
    const i64 na = detail::count_scaled_progression(A / d4, d4, spec.r);
    const i64 nb = detail::count_scaled_progression(B / d6, d6, spec.t);
    total += mu * na * nb;
  }
  return total;
}

/// Brute-force count of pairs with |a| < H^(1/3), |b| < H^(1/2),
/// (a, b) mod Q in S and lambda0 < Delta / H < lambda1.
inline u64 count_disc_window(double H, const ResidueSet& S, double lambda0, double lambda1) {
  if (!(lambda0 < lambda1)) throw std::domain_error("count_disc_window: need lambda0 < lambda1");
  if (!(H >= 1)) throw std::domain_error("count_disc_window: need H >= 1");
  // largest integer strictly below H
  const u64 below = u64(std::ceil(H)) - 1;
  const i64 A = i64(iroot(below, 3)), B = i64(iroot(below, 2));
  const long double lo = (long double)lambda0 * H, hi = (long double)lambda1 * H;
  u64 count = 0;
  for (i64 a = -A; a <= A; ++a)
    for (i64 b = -B; b <= B; ++b) {
      if (!S.contains(a, b)) continue;
      const long double d = (long double)discriminant(a, b);
      if (lo < d && d < hi) ++count;
    }
  return count;
}

}  // namespace conductors
