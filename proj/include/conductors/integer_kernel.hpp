#pragma once

// Exact integer primitives: factorization, valuations, Moebius, and zeta
// with Euler factors removed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace conductors {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;
using u128 = unsigned __int128;

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline std::string to_string(i128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  u128 x = neg ? u128(0) - u128(v) : u128(v);
  std::string s;
  while (x > 0) {
    s.push_back(char('0' + int(x % 10)));
    x /= 10;
  }
  if (neg) s.push_back('-');
  std::reverse(s.begin(), s.end());
  return s;
}

inline u128 abs_u128(i128 v) { return v < 0 ? u128(0) - u128(v) : u128(v); }

struct PrimePower {
  u64 prime;
  int exponent;
  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// Canonical factorization of a nonzero integer. `factors` holds the primes
/// of |value| in increasing order; the sign lives only in `value`.
struct FactoredInteger {
  i128 value = 1;
  std::vector<PrimePower> factors;

  u128 magnitude() const { return abs_u128(value); }

  int exponent_of(u64 p) const {
    for (const auto& f : factors)
      if (f.prime == p) return f.exponent;
    return 0;
  }
};

namespace detail {

inline u64 mulmod(u64 a, u64 b, u64 m) { return u64(u128(a) * b % m); }

inline u64 powmod(u64 a, u64 e, u64 m) {
  u64 r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

inline std::vector<u64> sieve_primes(u64 bound) {
  std::vector<bool> composite(bound + 1, false);
  std::vector<u64> primes;
  for (u64 i = 2; i <= bound; ++i) {
    if (composite[i]) continue;
    primes.push_back(i);
    for (u64 j = i * i; j <= bound; j += i) composite[j] = true;
  }
  return primes;
}

}  // namespace detail

/// Trial-division bound used by factor(); primes below it are tabulated once.
inline constexpr u64 kTrialDivisionBound = 1'000'000;

/// Largest |n| accepted by factor(): the rho stage works in 64-bit residues.
inline constexpr u128 kFactorMagnitudeBound = u128(1) << 64;

inline const std::vector<u64>& small_primes() {
  static const std::vector<u64> table = detail::sieve_primes(kTrialDivisionBound);
  return table;
}

/// Deterministic Miller-Rabin for 64-bit inputs.
inline bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u, 37u}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u, 37u}) {
    u64 x = detail::powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int r = 1; r < s; ++r) {
      x = detail::mulmod(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

namespace detail {

// Brent's variant; n must be odd, composite and not a prime power of a tiny prime.
inline u64 pollard_rho(u64 n) {
  if (n % 2 == 0) return 2;
  for (u64 c = 1;; ++c) {
    auto f = [&](u64 x) { return u64((u128(mulmod(x, x, n)) + c) % n); };
    u64 y = 2, x = 2, g = 1, q = 1, ys = 2;
    u64 r = 1;
    const u64 m = 128;
    while (g == 1) {
      x = y;
      for (u64 i = 0; i < r; ++i) y = f(y);
      u64 k = 0;
      while (k < r && g == 1) {
        ys = y;
        for (u64 i = 0; i < std::min(m, r - k); ++i) {
          y = f(y);
          q = mulmod(q, x > y ? x - y : y - x, n);
        }
        g = std::gcd(q, n);
        k += m;
      }
      r <<= 1;
    }
    if (g == n) {
      do {
        ys = f(ys);
        g = std::gcd(x > ys ? x - ys : ys - x, n);
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

inline void factor_large(u64 n, std::vector<u64>& out) {
  if (n == 1) return;
  if (is_prime(n)) {
    out.push_back(n);
    return;
  }
  u64 d = pollard_rho(n);
  factor_large(d, out);
  factor_large(n / d, out);
}

}  // namespace detail

/// Factors a nonzero integer with |n| < 2^64: trial division by the tabulated
/// primes, then Pollard rho on whatever cofactor remains.
inline FactoredInteger factor(i128 n) {
  if (n == 0) throw std::domain_error("factor: zero has no factorization");
  u128 mag = abs_u128(n);
  if (mag >= kFactorMagnitudeBound)
    throw std::domain_error("factor: |n| exceeds the 2^64 magnitude bound");
  FactoredInteger out;
  out.value = n;
  u64 rest = u64(mag);
  for (u64 p : small_primes()) {
    if (p * p > rest) break;
    if (rest % p) continue;
    int e = 0;
    while (rest % p == 0) {
      rest /= p;
      ++e;
    }
    out.factors.push_back({p, e});
  }
  if (rest > 1) {
    std::vector<u64> big;
    detail::factor_large(rest, big);
    std::sort(big.begin(), big.end());
    for (u64 p : big) {
      if (!out.factors.empty() && out.factors.back().prime == p)
        ++out.factors.back().exponent;
      else
        out.factors.push_back({p, 1});
    }
  }
  return out;
}

namespace detail {

// v_p(n) without argument checks; n == 0 maps to a large sentinel.
inline constexpr int kInfiniteValuation = 1 << 20;

template <class Int>
inline int vp(Int n, u64 p) {
  if (n == 0) return kInfiniteValuation;
  int k = 0;
  const Int pp = Int(p);
  while (n % pp == 0) {
    n /= pp;
    ++k;
  }
  return k;
}

}  // namespace detail

inline int valuation(i128 n, u64 p) {
  if (n == 0) throw std::domain_error("valuation: n must be nonzero");
  if (!is_prime(p)) throw std::domain_error("valuation: p must be prime");
  return detail::vp(n, p);
}

/// gcd(|n|, p^infinity).
inline u128 p_part(i128 n, u64 p) {
  int k = valuation(n, p);
  u128 r = 1;
  for (int i = 0; i < k; ++i) r *= p;
  return r;
}

inline int moebius(u64 d) {
  if (d == 0) throw std::domain_error("moebius: d must be positive");
  int mu = 1;
  for (const auto& f : factor(i128(d)).factors) {
    if (f.exponent > 1) return 0;
    mu = -mu;
  }
  return mu;
}

/// Distinct prime divisors of m > 0.
inline std::vector<u64> prime_support(u64 m) {
  std::vector<u64> ps;
  for (const auto& f : factor(i128(m)).factors) ps.push_back(f.prime);
  return ps;
}

namespace detail {

// Riemann zeta for real s > 1 by a direct head sum plus the Euler-Maclaurin
// tail; the remainder is bounded by the first omitted correction term.
inline long double zeta_real(long double s, long double tol) {
  static constexpr long double kBernoulli[] = {
      1.0L / 6,        -1.0L / 30,     1.0L / 42,          -1.0L / 30,
      5.0L / 66,       -691.0L / 2730, 7.0L / 6,           -3617.0L / 510,
      43867.0L / 798,  -174611.0L / 330};
  constexpr int kTerms = 9;
  for (long N = 16;; N *= 2) {
    long double sum = 0;
    for (long n = N - 1; n >= 1; --n) sum += std::pow((long double)n, -s);
    const long double Nl = N;
    sum += std::pow(Nl, 1 - s) / (s - 1) + std::pow(Nl, -s) / 2;
    long double rising = s;  // s (s+1) ... (s+2k-2)
    long double fact = 2;    // (2k)!
    long double bound = 0;
    for (int k = 1; k <= kTerms + 1; ++k) {
      long double term = kBernoulli[k - 1] / fact * rising * std::pow(Nl, -s - 2 * k + 1);
      if (k <= kTerms)
        sum += term;
      else
        bound = std::fabs(term);
      rising *= (s + 2 * k - 1) * (s + 2 * k);
      fact *= (2 * k + 1) * (2 * k + 2);
    }
    if (bound < tol / 4 || N > (1L << 20)) return sum;
  }
}

}  // namespace detail

/// zeta(s) * prod_{p | m} (1 - p^-s), accurate to `tol` (absolute) for s > 1.
inline double zeta_primes_removed(double s, u64 m, double tol) {
  if (!(s > 1)) throw std::domain_error("zeta_primes_removed: requires s > 1");
  if (m == 0) throw std::domain_error("zeta_primes_removed: m must be positive");
  if (!(tol > 0)) throw std::domain_error("zeta_primes_removed: tol must be positive");
  long double z = detail::zeta_real(s, std::max<long double>(tol, 1e-18L) / 4);
  for (u64 p : prime_support(m)) z *= 1 - std::pow((long double)p, -(long double)s);
  return double(z);
}

/// floor(n^(1/k)) computed exactly.
inline u64 iroot(u64 n, int k) {
  if (k <= 0) throw std::domain_error("iroot: k must be positive");
  if (k == 1 || n < 2) return n;
  auto pow_le = [&](u64 x) {
    u128 acc = 1;
    for (int i = 0; i < k; ++i) {
      acc *= x;
      if (acc > n) return false;
    }
    return true;
  };
  u64 x = u64(std::pow(double(n), 1.0 / k));
  while (x > 0 && !pow_le(x)) --x;
  while (pow_le(x + 1)) ++x;
  return x;
}

}  // namespace conductors
