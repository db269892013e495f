#pragma once

// Analytic side of the conductor distribution: the limiting discriminant
// CDF F_Delta, the local densities rho(p, m), the mass function
// w(m) = zeta^(6)(10) prod_p rho(p, m), and the main term built from them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "conductors/integer_kernel.hpp"

namespace conductors {

/// |Delta| / H is at most 496 on the family box and Delta / H at most 64.
inline constexpr double kDeltaLower = -496.0;
inline constexpr double kDeltaUpper = 64.0;

namespace detail {

template <class F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15 * tol) return left + right + delta / 15;
  return simpson_step(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 48) {
  if (a == b) return 0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// F_Delta(lambda): area fraction of [-1,1]^2 where -16(4 alpha^3 + 27 beta^2) < lambda.
///
/// For fixed alpha the admissible beta satisfy beta^2 > R(alpha) with
/// R = -(lambda + 64 alpha^3) / 432, so the inner measure is explicit and only
/// the alpha-integral of sqrt(R) remains. With alpha = alpha0 - u^2, where
/// R(alpha0) = 0, the square-root endpoint singularity disappears.
inline double f_delta(double lambda, double tol = 1e-11) {
  const double alpha0 = std::cbrt(-lambda / 64);
  const double alpha1 = std::cbrt(-(lambda + 432) / 64);
  const double lo = std::clamp(alpha1, -1.0, 1.0);
  const double hi = std::clamp(alpha0, -1.0, 1.0);
  double root_integral = 0;
  if (hi > lo) {
    auto integrand = [alpha0](double u) {
      const double alpha = alpha0 - u * u;
      const double q = alpha0 * alpha0 + alpha0 * alpha + alpha * alpha;
      return 2 * u * u * std::sqrt(std::max(0.0, 4.0 / 27.0 * q));
    };
    root_integral = adaptive_simpson(integrand, std::sqrt(alpha0 - hi), std::sqrt(alpha0 - lo), tol);
  }
  return std::clamp(0.5 * ((1 - lo) - root_integral), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Local densities rho(p, m); they depend on m only through gcd(m, p^inf).

inline Rational rho_prime_power(u64 p, int n) {
  if (!is_prime(p)) throw std::domain_error("rho: p must be prime");
  if (n < 0) throw std::domain_error("rho: exponent must be nonnegative");
  if (p == 2) return n == 0 ? Rational(1, 2) : n <= 2 ? Rational(1, 4) : Rational(0);
  if (p == 3) return n == 0 ? Rational(1) : Rational(0);
  const Rational P(static_cast<long long>(p));
  const Rational inv = 1 / P;
  Rational pk = 1;  // p^(n+1)
  for (int i = 0; i <= n; ++i) pk *= P;
  const Rational base = (1 - inv) / pk;
  switch (n) {
    case 0: return 1 - inv * inv;
    case 1:
    case 2: return base;
    case 3: return base * (1 - inv);
    case 4: return base * (2 - inv);
    case 5: return base * (2 - 2 * inv);
    case 6:
    case 7:
    case 8: return base * (3 - 2 * inv);
    default: return base * (2 - 2 * inv);
  }
}

inline Rational rho(u64 p, u64 m) {
  if (m == 0) throw std::domain_error("rho: m must be positive");
  return rho_prime_power(p, detail::vp(m, p));
}

/// sum_{n >= n0} rho(p, p^n), exact (closed-form geometric tail for p >= 5).
inline Rational rho_tail_sum(u64 p, int n0) {
  if (n0 < 0) n0 = 0;
  Rational s = 0;
  if (p == 2 || p == 3) {
    for (int n = n0; n < 3; ++n) s += rho_prime_power(p, n);
    return s;
  }
  for (int n = n0; n < 9; ++n) s += rho_prime_power(p, n);
  const int k = std::max(n0, 9);
  const Rational P(static_cast<long long>(p));
  Rational pk = 1;
  for (int i = 0; i <= k; ++i) pk *= P;
  return s + 2 * (1 - 1 / P) / pk;
}

inline double rho_double(u64 p, int n) {
  if (p == 2) return n == 0 ? 0.5 : n <= 2 ? 0.25 : 0.0;
  if (p == 3) return n == 0 ? 1.0 : 0.0;
  const double inv = 1.0 / double(p);
  const double base = (1 - inv) * std::pow(inv, n + 1);
  switch (n) {
    case 0: return 1 - inv * inv;
    case 1:
    case 2: return base;
    case 3: return base * (1 - inv);
    case 4: return base * (2 - inv);
    case 5: return base * (2 - 2 * inv);
    case 6:
    case 7:
    case 8: return base * (3 - 2 * inv);
    default: return base * (2 - 2 * inv);
  }
}

/// zeta^(6)(10) / zeta^(6)(2).
inline double zeta_ratio(double tol = 1e-15) {
  return zeta_primes_removed(10, 6, tol) / zeta_primes_removed(2, 6, tol);
}

/// Rational part of w(m) as a ratio of products:
/// [prod_{p | 6m} rho(p, m)] / [prod_{p | m, p >= 5} (1 - p^-2)].
inline Rational coefficient_product_form(u64 m) {
  Rational num = rho(2, m) * rho(3, m), den = 1;
  for (u64 p : prime_support(m)) {
    if (p < 5) continue;
    num *= rho(p, m);
    den *= 1 - Rational(1, static_cast<long long>(p * p));
  }
  return num / den;
}

/// Rational part of w(m) exactly as the series coefficient is written:
/// rho(2,m) rho(3,m) prod_{p >= 5, p | m} rho(p,m) / (1 - p^-2).
inline Rational coefficient_divisor_form(u64 m) {
  Rational c = rho(2, m) * rho(3, m);
  for (u64 p : prime_support(m))
    if (p >= 5) c *= rho(p, m) / (1 - Rational(1, static_cast<long long>(p * p)));
  return c;
}

/// w(m) = zeta^(6)(10) prod_p rho(p, m): limiting frequency of |Delta| / N = m.
inline double mass(u64 m, double tol = 1e-14) {
  if (m == 0) throw std::domain_error("mass: m must be positive");
  return zeta_ratio(std::min(tol, 1e-14)) * coefficient_divisor_form(m).convert_to<double>();
}

/// w(1..M) tabulated with a smallest-prime-factor sieve, plus prefix sums.
class MassTable {
 public:
  explicit MassTable(u64 M) : w_(M + 1, 0.0), prefix_(M + 1, 0.0L) {
    std::vector<std::uint32_t> spf(M + 1, 0);
    for (u64 i = 2; i <= M; ++i)
      if (spf[i] == 0)
        for (u64 j = i; j <= M; j += i)
          if (spf[j] == 0) spf[j] = std::uint32_t(i);
    const double c0 = zeta_ratio();
    for (u64 m = 1; m <= M; ++m) {
      double c = 1;
      bool even = false, three = false;
      u64 x = m;
      while (x > 1) {
        const u64 p = spf[x];
        int k = 0;
        while (x % p == 0) {
          x /= p;
          ++k;
        }
        if (p == 2) {
          even = true;
          c *= rho_double(2, k);
        } else if (p == 3) {
          three = true;
          c *= rho_double(3, k);
        } else {
          c *= rho_double(p, k) / (1 - 1.0 / double(p * p));
        }
      }
      if (!even) c *= rho_double(2, 0);
      if (!three) c *= rho_double(3, 0);
      w_[m] = c0 * c;
      prefix_[m] = prefix_[m - 1] + w_[m];
    }
  }

  u64 size() const { return w_.size() - 1; }
  double operator[](u64 m) const { return w_[m]; }
  double partial_sum(u64 M) const { return double(prefix_[std::min(M, size())]); }
  /// 1 - sum_{m <= M} w(m); the unsummed mass since the w(m) sum to 1.
  double residual(u64 M) const { return std::max(0.0, double(1.0L - prefix_[std::min(M, size())])); }

 private:
  std::vector<double> w_;
  std::vector<long double> prefix_;
};

namespace detail {

// Upper bound for prod_p (1 + 3 / (p (p^sigma - 1))), product over p <= P
// plus a bound on the log of the remaining factors.
inline double rad_euler_product_upper(double sigma, u64 P) {
  long double log_prod = 0;
  for (u64 p : small_primes()) {
    if (p > P) break;
    log_prod += std::log1p(3.0L / (p * (std::pow((long double)p, sigma) - 1)));
  }
  const double ps = std::pow(double(P), -sigma);
  return double(std::exp(log_prod + 3.0 / (1 - ps) * ps / sigma));
}

}  // namespace detail

/// sum_{m > M} w(m) <= K sum_{m > M} (1/m) prod_{p | m} 3/p, bounded by
/// Rankin's trick against the Euler product of the comparison series.
/// K = (2/3) zeta^(6)(10) / zeta^(6)(2) is the largest local ratio.
inline double mass_tail_majorant(u64 M, u64 P = 100000) {
  const double K = 2.0 / 3.0 * zeta_ratio();
  double best = std::numeric_limits<double>::infinity();
  for (double sigma = 0.05; sigma < 0.999; sigma += 0.05)
    best = std::min(best, std::pow(double(M), sigma - 1) * detail::rad_euler_product_upper(sigma, P));
  return K * best;
}

struct MainTermResult {
  double value = 0;
  double error_bound = 0;  // truncation error only
  u64 terms = 0;
};

/// Default cap on the number of series terms evaluated in main_term().
inline constexpr u64 kMaxSeriesTerms = 2'000'000;

/// Main term of the conductor distribution on (lambda0, lambda1).
///
/// lambda0 > 0 sums the finitely many nonzero terms m < 496 / lambda0.
/// lambda0 = 0 evaluates the complement 1 - sum_m w(m) (1 - F(m l1) + F(-m l1)),
/// whose terms vanish for m l1 >= 496; when that support exceeds the table
/// the unsummed mass R is split, giving error at most R / 2.
inline MainTermResult main_term_detailed(double lambda0, double lambda1, double tol,
                                         const MassTable* table = nullptr) {
  if (!(lambda0 >= 0)) throw std::domain_error("main_term: lambda0 must be >= 0");
  if (!(lambda1 > lambda0)) throw std::domain_error("main_term: lambda1 must exceed lambda0");
  if (!(tol > 0)) throw std::domain_error("main_term: tol must be positive");
  const double lead = lambda0 > 0 ? lambda0 : lambda1;
  // largest m with m * lead < 496
  double support = std::ceil(-kDeltaLower / lead) - 1;
  if (support * lead >= -kDeltaLower) support -= 1;
  const u64 needed = support < 1 ? 0 : u64(std::min(support, double(kMaxSeriesTerms)));

  std::optional<MassTable> local;
  if (!table || table->size() < needed) {
    local.emplace(needed);
    table = &*local;
  }
  const double quad_tol = std::min(1e-11, tol / 16);
  MainTermResult out;
  out.terms = needed;
  long double sum = 0;
  for (u64 m = 1; m <= needed; ++m) {
    const double md = double(m);
    if (lambda0 > 0) {
      const double d = f_delta(md * lambda1, quad_tol) - f_delta(md * lambda0, quad_tol) +
                       f_delta(-md * lambda0, quad_tol) - f_delta(-md * lambda1, quad_tol);
      sum += (*table)[m] * d;
    } else {
      const double inside = f_delta(md * lambda1, quad_tol) - f_delta(-md * lambda1, quad_tol);
      sum += (*table)[m] * (1 - inside);
    }
  }
  const bool truncated = support > double(needed);
  const double R = truncated ? table->residual(needed) : 0.0;
  if (lambda0 > 0) {
    out.value = double(sum) + R / 2;
  } else {
    out.value = 1 - double(sum) - R / 2;
  }
  out.error_bound = R / 2;
  out.value = std::clamp(out.value, 0.0, 1.0);
  return out;
}

inline double main_term(double lambda0, double lambda1, double tol = 1e-9) {
  auto r = main_term_detailed(lambda0, lambda1, tol);
  if (r.error_bound > tol)
    throw std::domain_error("main_term: tolerance not reachable within the series term cap");
  return r.value;
}

struct DistributionGrid {
  enum class Source { theory, empirical };
  std::vector<double> lambdas;
  std::vector<double> cdf;
  Source source = Source::theory;
  std::vector<std::pair<std::string, double>> meta;
};

/// Theory CDF lambda -> main_term(0, lambda) on a grid; lambda <= 0 maps to 0.
inline DistributionGrid theory_cdf_grid(const std::vector<double>& lambdas, double tol = 1e-9,
                                        unsigned threads = 1) {
  DistributionGrid g;
  g.lambdas = lambdas;
  g.cdf.assign(lambdas.size(), 0.0);
  g.source = DistributionGrid::Source::theory;
  double smallest = std::numeric_limits<double>::infinity();
  for (double l : lambdas)
    if (l > 0) smallest = std::min(smallest, l);
  u64 need = 1;
  if (std::isfinite(smallest)) need = u64(std::min(std::ceil(-kDeltaLower / smallest), double(kMaxSeriesTerms)));
  const MassTable table(need);
  double worst = 0;
  auto eval = [&](size_t i) {
    if (lambdas[i] <= 0) return 0.0;
    auto r = main_term_detailed(0, lambdas[i], tol, &table);
    return r.value;
  };
  threads = std::max(1u, threads);
  if (threads == 1) {
    for (size_t i = 0; i < lambdas.size(); ++i) g.cdf[i] = eval(i);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (size_t i = w; i < lambdas.size(); i += threads) g.cdf[i] = eval(i);
      });
  }
  for (size_t i = 0; i < lambdas.size(); ++i)
    if (lambdas[i] > 0) worst = std::max(worst, table.residual(table.size()) / 2);
  g.meta = {{"tol", tol}, {"series_terms", double(table.size())}, {"max_truncation_error", worst}};
  return g;
}

/// Central finite differences of a uniformly spaced CDF grid, offset dlambda
/// (one-sided at the ends).
inline std::vector<std::pair<double, double>> pdf_numeric(const DistributionGrid& grid, double dlambda) {
  const auto& x = grid.lambdas;
  const auto& y = grid.cdf;
  if (x.size() != y.size() || x.size() < 2) throw std::domain_error("pdf_numeric: need at least two grid points");
  if (!(dlambda > 0)) throw std::domain_error("pdf_numeric: dlambda must be positive");
  const double step = x[1] - x[0];
  for (size_t i = 1; i < x.size(); ++i)
    if (std::fabs((x[i] - x[i - 1]) - step) > 1e-9 * std::max(1.0, std::fabs(step)))
      throw std::domain_error("pdf_numeric: grid is not uniformly spaced");
  const double ratio = dlambda / step;
  const long k = std::lround(ratio);
  if (k < 1 || std::fabs(ratio - double(k)) > 1e-6)
    throw std::domain_error("pdf_numeric: grid too coarse for the requested dlambda");
  std::vector<std::pair<double, double>> out;
  const long n = long(x.size());
  for (long i = 0; i < n; ++i) {
    const long lo = std::max(0L, i - k), hi = std::min(n - 1, i + k);
    out.emplace_back(x[i], (y[hi] - y[lo]) / (x[hi] - x[lo]));
  }
  return out;
}

/// Lattice-window main term 4 H^(5/6) (#S / Q^2) (F(l1) - F(l0)).
inline double disc_window_main_term(double H, double set_size, double Q, double lambda0, double lambda1) {
  return 4 * std::pow(H, 5.0 / 6.0) * set_size / (Q * Q) * (f_delta(lambda1) - f_delta(lambda0));
}

struct RadEulerIdentity {
  double lhs = 0;       // partial series, m <= M
  double rhs = 0;       // partial product, p <= P
  double lhs_tail = 0;  // bound on the omitted series terms
  double rhs_tail = 0;  // bound on the omitted product factors
};

/// Both sides of sum_m m^-s prod_{p | m} 3/p = prod_p (1 + 3 / (p (p^s - 1))),
/// with certified tail bounds.
inline RadEulerIdentity identity_rad_euler(double s, u64 M, u64 P) {
  if (!(s > 1)) throw std::domain_error("identity_rad_euler: requires s > 1");
  if (M < 1 || P < 2) throw std::domain_error("identity_rad_euler: M and P must be positive");
  if (P > kTrialDivisionBound) throw std::domain_error("identity_rad_euler: P exceeds the prime table");
  RadEulerIdentity out;
  // g(m) = prod_{p | m} 3/p via a multiplicative sieve
  std::vector<double> g(M + 1, 1.0);
  std::vector<bool> composite(M + 1, false);
  for (u64 p = 2; p <= M; ++p) {
    if (composite[p]) continue;
    for (u64 j = p; j <= M; j += p) {
      if (j > p) composite[j] = true;
      g[j] *= 3.0 / double(p);
    }
  }
  long double lhs = 0;
  for (u64 m = M; m >= 1; --m) lhs += g[m] * std::pow((long double)m, -s);
  out.lhs = double(lhs);
  double best = std::numeric_limits<double>::infinity();
  for (double sigma = 0.05; sigma < s - 1e-9; sigma += 0.05)
    best = std::min(best, std::pow(double(M), sigma - s) * detail::rad_euler_product_upper(sigma, kTrialDivisionBound));
  out.lhs_tail = best;

  long double log_rhs = 0;
  for (u64 p : small_primes()) {
    if (p > P) break;
    log_rhs += std::log1p(3.0L / (p * (std::pow((long double)p, s) - 1)));
  }
  out.rhs = double(std::exp(log_rhs));
  const double ps = std::pow(double(P), -s);
  out.rhs_tail = out.rhs * std::expm1(3.0 / (1 - ps) * ps / s);
  return out;
}

/// prod_{5 <= p < q} (1 - p^-2)/(1 - p^-10) divided by its limit
/// (1 - 2^-10)(1 - 3^-10) / ((1 - 2^-2)(1 - 3^-2)) * zeta(10) / zeta(2).
inline double euler_ratio_check(u64 q) {
  if (q <= 5) throw std::domain_error("euler_ratio_check: requires q > 5");
  if (q > kTrialDivisionBound) throw std::domain_error("euler_ratio_check: q exceeds the prime table");
  long double prod = 1;
  for (u64 p : small_primes()) {
    if (p >= q) break;
    if (p < 5) continue;
    const long double pl = p;
    prod *= (1 - std::pow(pl, -2.0L)) / (1 - std::pow(pl, -10.0L));
  }
  const long double limit = (1 - std::pow(2.0L, -10.0L)) * (1 - std::pow(3.0L, -10.0L)) /
                            ((1 - std::pow(2.0L, -2.0L)) * (1 - std::pow(3.0L, -2.0L))) *
                            zeta_primes_removed(10, 1, 1e-16) / zeta_primes_removed(2, 1, 1e-16);
  return double(prod / limit);
}

}  // namespace conductors
