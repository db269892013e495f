#pragma once

// Local reduction data of y^2 = x^3 + a x + b: fast classifiers for the
// family (table lookups at 2 and 3, valuation rules at p >= 5) and a full
// Tate's algorithm used as the reference path.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "conductors/family.hpp"
#include "conductors/integer_kernel.hpp"

namespace conductors {

enum class Kodaira { I, II, III, IV, I_star, IV_star, III_star, II_star };

struct ReductionType {
  Kodaira kind = Kodaira::I;
  int n = 0;  // only meaningful for I_n and I_n*

  static constexpr ReductionType good() { return {Kodaira::I, 0}; }
  static constexpr ReductionType In(int n) { return {Kodaira::I, n}; }
  static constexpr ReductionType In_star(int n) { return {Kodaira::I_star, n}; }
  static constexpr ReductionType of(Kodaira k) { return {k, 0}; }

  bool additive() const { return !(kind == Kodaira::I); }

  friend bool operator==(const ReductionType& x, const ReductionType& y) {
    if (x.kind != y.kind) return false;
    return (x.kind == Kodaira::I || x.kind == Kodaira::I_star) ? x.n == y.n : true;
  }

  std::string str() const {
    switch (kind) {
      case Kodaira::I: return "I" + std::to_string(n);
      case Kodaira::II: return "II";
      case Kodaira::III: return "III";
      case Kodaira::IV: return "IV";
      case Kodaira::I_star: return "I" + std::to_string(n) + "*";
      case Kodaira::IV_star: return "IV*";
      case Kodaira::III_star: return "III*";
      case Kodaira::II_star: return "II*";
    }
    return "?";
  }
};

struct LocalInvariants {
  u64 p = 0;
  ReductionType type;
  int v_delta = 0;
  int f = 0;
  int v_ratio = 0;  // v_p(Delta / N) = v_delta - f

  friend bool operator==(const LocalInvariants& x, const LocalInvariants& y) {
    return x.p == y.p && x.type == y.type && x.v_delta == y.v_delta && x.f == y.f &&
           x.v_ratio == y.v_ratio;
  }
};

struct CurveInvariants {
  FactoredInteger delta;
  u64 conductor = 1;
  std::vector<LocalInvariants> locals;  // one entry per prime dividing Delta

  u64 ratio() const { return u64(delta.magnitude() / conductor); }
};

// ---------------------------------------------------------------------------
// Table of reduction types at p >= 5, grouped by the p-part of Delta / N.

struct RatioRowEntry {
  ReductionType type;
  int modulus_exponent;  // least eta with membership decided mod p^eta
  Rational density;      // proportion of residue pairs mod p^eta
};

inline std::vector<RatioRowEntry> ratio_valuation_row(u64 p, int n) {
  if (p < 5 || !is_prime(p)) throw std::domain_error("ratio_valuation_row: p must be a prime >= 5");
  if (n < 0) throw std::domain_error("ratio_valuation_row: n must be nonnegative");
  const Rational P(static_cast<long long>(p));
  const Rational q1 = P - 1;
  auto pw = [&](int k) {
    Rational r = 1;
    for (int i = 0; i < k; ++i) r *= P;
    return r;
  };
  using K = Kodaira;
  switch (n) {
    case 0:
      return {{ReductionType::good(), 1, q1 / P},
              {ReductionType::In(1), 2, q1 * q1 / pw(3)},
              {ReductionType::of(K::II), 2, q1 / pw(3)}};
    case 1:
      return {{ReductionType::In(2), 3, q1 * q1 / pw(4)}, {ReductionType::of(K::III), 2, q1 / pw(4)}};
    case 2:
      return {{ReductionType::In(3), 4, q1 * q1 / pw(5)}, {ReductionType::of(K::IV), 3, q1 / pw(5)}};
    case 3:
      return {{ReductionType::In(4), 5, q1 * q1 / pw(6)}};
    case 4:
      return {{ReductionType::In(5), 6, q1 * q1 / pw(7)}, {ReductionType::In_star(0), 4, q1 / pw(6)}};
    case 5:
      return {{ReductionType::In(6), 7, q1 * q1 / pw(8)},
              {ReductionType::In_star(1), 5, q1 * q1 / pw(8)}};
    case 6:
      return {{ReductionType::In(7), 8, q1 * q1 / pw(9)},
              {ReductionType::In_star(2), 6, q1 * q1 / pw(9)},
              {ReductionType::of(K::IV_star), 5, q1 / pw(8)}};
    case 7:
      return {{ReductionType::In(8), 9, q1 * q1 / pw(10)},
              {ReductionType::In_star(3), 7, q1 * q1 / pw(10)},
              {ReductionType::of(K::III_star), 5, q1 / pw(9)}};
    case 8:
      return {{ReductionType::In(9), 10, q1 * q1 / pw(11)},
              {ReductionType::In_star(4), 8, q1 * q1 / pw(11)},
              {ReductionType::of(K::II_star), 6, q1 / pw(10)}};
    default:
      return {{ReductionType::In(n + 1), n + 2, q1 * q1 / pw(n + 3)},
              {ReductionType::In_star(n - 4), n, q1 * q1 / pw(n + 3)}};
  }
}

// ---------------------------------------------------------------------------
// Fast classifiers.

namespace detail {

// Reduction type at 2 keyed by (r, t, a mod 12, b mod 12) for r in {1, 2}.
struct TwoAdicRow {
  int r, t, a12, b12;
  Kodaira kind;
};

inline constexpr std::array<TwoAdicRow, 24> kTwoAdicRows = {{
    {1, 1, 1, 1, Kodaira::II},  {1, 1, 1, 7, Kodaira::III}, {1, 1, 7, 1, Kodaira::IV},
    {1, 1, 7, 7, Kodaira::II},  {1, 3, 1, 3, Kodaira::III}, {1, 3, 1, 9, Kodaira::II},
    {1, 3, 7, 3, Kodaira::II},  {1, 3, 7, 9, Kodaira::IV},  {1, 5, 1, 5, Kodaira::II},
    {1, 5, 1, 11, Kodaira::III}, {1, 5, 7, 5, Kodaira::IV}, {1, 5, 7, 11, Kodaira::II},
    {2, 1, 2, 1, Kodaira::III}, {2, 1, 2, 7, Kodaira::II},  {2, 1, 8, 1, Kodaira::IV},
    {2, 1, 8, 7, Kodaira::II},  {2, 3, 2, 3, Kodaira::II},  {2, 3, 2, 9, Kodaira::III},
    {2, 3, 8, 3, Kodaira::II},  {2, 3, 8, 9, Kodaira::IV},  {2, 5, 2, 5, Kodaira::III},
    {2, 5, 2, 11, Kodaira::II}, {2, 5, 8, 5, Kodaira::IV},  {2, 5, 8, 11, Kodaira::II},
}};

inline void check_family_congruences(i64 a, i64 b, const FamilySpec& spec, const char* who) {
  if (mod_floor(a, 6) != spec.r || mod_floor(b, 6) != spec.t)
    throw std::domain_error(std::string(who) + ": (a, b) does not satisfy the family congruences");
}

}  // namespace detail

inline LocalInvariants reduction_at_2(i64 a, i64 b, const FamilySpec& spec) {
  detail::check_family_congruences(a, b, spec, "reduction_at_2");
  int r = spec.r;
  i64 a12 = mod_floor(a, 12);
  // r = 5 reads the r = 1 block shifted by 4, r = 4 the r = 2 block shifted by 8
  if (r == 5) {
    r = 1;
    a12 = mod_floor(a12 - 4, 12);
  } else if (r == 4) {
    r = 2;
    a12 = mod_floor(a12 - 8, 12);
  }
  const i64 b12 = mod_floor(b, 12);
  for (const auto& row : detail::kTwoAdicRows) {
    if (row.r != r || row.t != spec.t || row.a12 != a12 || row.b12 != b12) continue;
    const int v = detail::vp(discriminant(a, b), 2);
    if (v != 4) throw std::logic_error("reduction_at_2: family member with v_2(Delta) != 4");
    LocalInvariants li;
    li.p = 2;
    li.type = ReductionType::of(row.kind);
    li.v_delta = 4;
    li.f = row.kind == Kodaira::II ? 4 : row.kind == Kodaira::III ? 3 : 2;
    li.v_ratio = li.v_delta - li.f;
    return li;
  }
  throw std::logic_error("reduction_at_2: no table entry");
}

inline LocalInvariants reduction_at_3(i64 a, i64 b, const FamilySpec& spec) {
  if (mod_floor(a, 3) == 0) throw std::domain_error("reduction_at_3: 3 divides a");
  detail::check_family_congruences(a, b, spec, "reduction_at_3");
  LocalInvariants li;
  li.p = 3;
  li.v_delta = detail::vp(discriminant(a, b), 3);
  if (li.v_delta != 0) throw std::logic_error("reduction_at_3: 3 divides Delta although 3 does not divide a");
  return li;
}

inline LocalInvariants reduction_at_p(i64 a, i64 b, u64 p) {
  if (p < 5 || !is_prime(p)) throw std::domain_error("reduction_at_p: p must be a prime >= 5");
  const i128 delta = discriminant(a, b);
  if (delta == 0) throw std::domain_error("reduction_at_p: singular curve");
  LocalInvariants li;
  li.p = p;
  li.v_delta = detail::vp(delta, p);
  if (li.v_delta == 0) return li;
  const int va = detail::vp(i128(a), p);
  const int v = li.v_delta;
  if (va == 0) {
    li.type = ReductionType::In(v);
    li.f = 1;
  } else {
    using K = Kodaira;
    std::optional<ReductionType> t;
    if (3 * va < v) {
      if (va == 2 && v >= 7) t = ReductionType::In_star(v - 6);
    } else {
      switch (v) {
        case 2: t = ReductionType::of(K::II); break;
        case 3: t = ReductionType::of(K::III); break;
        case 4: t = ReductionType::of(K::IV); break;
        case 6: t = ReductionType::In_star(0); break;
        case 8: t = ReductionType::of(K::IV_star); break;
        case 9: t = ReductionType::of(K::III_star); break;
        case 10: t = ReductionType::of(K::II_star); break;
        default: break;
      }
    }
    if (!t) throw std::logic_error("reduction_at_p: additive valuations fit no type (non-minimal model?)");
    li.type = *t;
    li.f = 2;
  }
  li.v_ratio = li.v_delta - li.f;
  bool listed = false;
  for (const auto& e : ratio_valuation_row(p, li.v_ratio)) listed = listed || e.type == li.type;
  if (!listed) throw std::logic_error("reduction_at_p: type " + li.type.str() + " outside its table row");
  return li;
}

// ---------------------------------------------------------------------------
// Tate's algorithm on a general integral model.

namespace detail {

struct Model {
  i128 a1 = 0, a2 = 0, a3 = 0, a4 = 0, a6 = 0;

  i128 b2() const { return a1 * a1 + 4 * a2; }
  i128 b4() const { return 2 * a4 + a1 * a3; }
  i128 b6() const { return a3 * a3 + 4 * a6; }
  i128 b8() const { return a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4; }
  i128 c4() const { return b2() * b2() - 24 * b4(); }
  i128 c6() const { return -b2() * b2() * b2() + 36 * b2() * b4() - 216 * b6(); }
  i128 disc() const {
    const i128 B2 = b2(), B4 = b4(), B6 = b6(), B8 = b8();
    return -B2 * B2 * B8 - 8 * B4 * B4 * B4 - 27 * B6 * B6 + 9 * B2 * B4 * B6;
  }

  // x = x' + r, y = y' + s x' + t
  void rst(i128 r, i128 s, i128 t) {
    const i128 n1 = a1 + 2 * s;
    const i128 n2 = a2 - s * a1 + 3 * r - s * s;
    const i128 n3 = a3 + r * a1 + 2 * t;
    const i128 n4 = a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t;
    const i128 n6 = a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1;
    a1 = n1, a2 = n2, a3 = n3, a4 = n4, a6 = n6;
  }
};

inline i128 modp(i128 x, u64 p) {
  const i128 P = i128(p);
  return ((x % P) + P) % P;
}

inline i128 inv_modp(i128 x, u64 p) {
  const i128 a = modp(x, p);
  if (a == 0) throw std::logic_error("tate: inverting a multiple of p");
  return i128(powmod(u64(a), p - 2, p));
}

inline bool divides(u64 p, i128 x) { return modp(x, p) == 0; }

}  // namespace detail

/// Full Tate's algorithm on y^2 = x^3 + a x + b at any prime p. Requires a
/// model minimal at p; a non-minimal model is reported as a domain error.
inline LocalInvariants tate_oracle(i64 a, i64 b, u64 p) {
  if (!is_prime(p)) throw std::domain_error("tate_oracle: p must be prime");
  if (std::abs(a) >= (i64(1) << 36) || std::abs(b) >= (i64(1) << 54))
    throw std::domain_error("tate_oracle: coefficients exceed the 128-bit working range");
  using detail::divides;
  using detail::modp;
  using detail::vp;
  detail::Model E;
  E.a4 = a;
  E.a6 = b;
  const i128 delta = E.disc();
  if (delta == 0) throw std::domain_error("tate_oracle: singular curve");

  LocalInvariants li;
  li.p = p;
  const int v = vp(delta, p);
  li.v_delta = v;
  auto done = [&](ReductionType t, int f) {
    li.type = t;
    li.f = f;
    li.v_ratio = v - f;
    return li;
  };
  if (v == 0) return done(ReductionType::good(), 0);

  const i128 P = i128(p);
  const i128 half = p == 2 ? 0 : i128((p + 1) / 2);
  auto proot = [&](i128 x) { return modp(x, p); };  // square/cube roots mod 2/3 are the identity

  // Move the singular point to (0, 0) so that p | a3, a4, a6.
  {
    i128 r, t;
    if (p == 2) {
      if (divides(p, E.b2())) {
        r = proot(E.a4);
        t = proot(((r + E.a2) * r + E.a4) * r + E.a6);
      } else {
        const i128 inv = detail::inv_modp(E.a1, p);
        r = inv * E.a3;
        t = inv * (E.a4 + r * r);
      }
    } else if (p == 3) {
      r = divides(p, E.b2()) ? proot(-E.b6()) : -detail::inv_modp(E.b2(), p) * E.b4();
      t = E.a1 * r + E.a3;
    } else {
      const i128 c4 = E.c4();
      r = divides(p, c4) ? -detail::inv_modp(12, p) * E.b2()
                         : -detail::inv_modp(12 * modp(c4, p), p) * (E.c6() + E.b2() * c4);
      t = -half * (E.a1 * r + E.a3);
    }
    E.rst(modp(r, p), 0, modp(t, p));
  }
  if (!divides(p, E.a3) || !divides(p, E.a4) || !divides(p, E.a6))
    throw std::logic_error("tate_oracle: singular point not moved to the origin");

  if (!divides(p, E.c4())) return done(ReductionType::In(v), 1);
  if (vp(E.a6, p) < 2) return done(ReductionType::of(Kodaira::II), v);
  if (vp(E.b8(), p) < 3) return done(ReductionType::of(Kodaira::III), v - 1);
  if (vp(E.b6(), p) < 3) return done(ReductionType::of(Kodaira::IV), v - 2);

  // Arrange p | a1, a2; p^2 | a3, a4; p^3 | a6.
  {
    i128 s, t;
    if (p == 2) {
      s = proot(E.a2);
      t = P * proot(E.a6 / (P * P));
    } else if (p == 3) {
      s = E.a1;
      t = E.a3;
    } else {
      s = -E.a1 * half;
      t = -E.a3 * half;
    }
    E.rst(0, s, t);
  }
  if (!divides(p, E.a1) || !divides(p, E.a2) || vp(E.a3, p) < 2 || vp(E.a4, p) < 2 || vp(E.a6, p) < 3)
    throw std::logic_error("tate_oracle: second change of coordinates failed");

  // Roots of T^3 + b T^2 + c T + d mod p.
  const i128 cb = E.a2 / P, cc = E.a4 / (P * P), cd = E.a6 / (P * P * P);
  const i128 w = 27 * cd * cd - cb * cb * cc * cc + 4 * cb * cb * cb * cd - 18 * cb * cc * cd + 4 * cc * cc * cc;
  const i128 x = 3 * cc - cb * cb;
  const int sw = divides(p, w) ? (divides(p, x) ? 3 : 2) : 1;

  if (sw == 1) return done(ReductionType::In_star(0), v - 4);

  if (sw == 2) {
    // Move the double root to T = 0.
    i128 r;
    if (p == 2)
      r = proot(cc);
    else if (p == 3)
      r = cc * detail::inv_modp(cb, p);
    else
      r = (cb * cc - 9 * cd) * detail::inv_modp(2 * x, p);
    E.rst(P * modp(r, p), 0, 0);
    int ix = 3, iy = 3;
    i128 mx = P * P, my = P * P;
    for (;;) {
      i128 a2t = E.a2 / P, a3t = E.a3 / my, a4t = E.a4 / (P * mx), a6t = E.a6 / (mx * my);
      if (!divides(p, a3t * a3t + 4 * a6t)) break;
      const i128 t = p == 2 ? my * proot(a6t) : my * modp(-a3t * half, p);
      E.rst(0, 0, t);
      my *= P;
      ++iy;
      a2t = E.a2 / P, a3t = E.a3 / my, a4t = E.a4 / (P * mx), a6t = E.a6 / (mx * my);
      if (!divides(p, a4t * a4t - 4 * a6t * a2t)) break;
      const i128 r2 = p == 2 ? mx * proot(a6t * detail::inv_modp(a2t, p))
                             : mx * modp(-a4t * detail::inv_modp(2 * a2t, p), p);
      E.rst(r2, 0, 0);
      mx *= P;
      ++ix;
    }
    return done(ReductionType::In_star(ix + iy - 5), v - ix - iy + 1);
  }

  // Triple root: move it to T = 0.
  {
    i128 r;
    if (p == 2)
      r = cb;
    else if (p == 3)
      r = proot(-cd);
    else
      r = -cb * detail::inv_modp(3, p);
    E.rst(P * modp(r, p), 0, 0);
  }
  const i128 P2 = P * P;
  const i128 a3t = modp(E.a3 / P2, p), a6t = modp(E.a6 / (P2 * P2), p);
  if (!divides(p, a3t * a3t + 4 * a6t)) return done(ReductionType::of(Kodaira::IV_star), v - 6);
  {
    const i128 t = p == 2 ? -P2 * proot(a6t) : P2 * modp(-a3t * half, p);
    E.rst(0, 0, t);
  }
  if (vp(E.a4, p) < 4) return done(ReductionType::of(Kodaira::III_star), v - 7);
  if (vp(E.a6, p) < 6) return done(ReductionType::of(Kodaira::II_star), v - 8);
  throw std::domain_error("tate_oracle: model is not minimal at p");
}

/// Discriminant, conductor and per-prime local data of a family member,
/// using the fast classifiers.
inline CurveInvariants conductor(const CurveParams& c) {
  CurveInvariants out;
  out.delta = factor(discriminant(c.a, c.b));
  if (out.delta.exponent_of(3) != 0) throw std::logic_error("conductor: 3 divides Delta for a family member");
  for (const auto& pf : out.delta.factors) {
    LocalInvariants li = pf.prime == 2 ? reduction_at_2(c.a, c.b, c.spec) : reduction_at_p(c.a, c.b, pf.prime);
    if (li.v_delta != pf.exponent) throw std::logic_error("conductor: valuation mismatch");
    for (int i = 0; i < li.f; ++i) out.conductor *= pf.prime;
    out.locals.push_back(li);
  }
  if (out.delta.exponent_of(2) != 4) throw std::logic_error("conductor: v_2(Delta) != 4 for a family member");
  return out;
}

/// Same assembly with every prime routed through tate_oracle.
inline CurveInvariants conductor_by_oracle(i64 a, i64 b) {
  CurveInvariants out;
  out.delta = factor(discriminant(a, b));
  for (const auto& pf : out.delta.factors) {
    LocalInvariants li = tate_oracle(a, b, pf.prime);
    for (int i = 0; i < li.f; ++i) out.conductor *= pf.prime;
    out.locals.push_back(li);
  }
  return out;
}

}  // namespace conductors
