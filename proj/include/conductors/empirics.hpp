#pragma once

// Empirical side: conductor records from enumeration, aggregated into a
// mergeable summary, and compared against the theory grids.

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "conductors/family.hpp"
#include "conductors/local_reduction.hpp"
#include "conductors/theory.hpp"

namespace conductors {

struct ConductorRecord {
  i64 a = 0;
  i64 b = 0;
  i128 delta = 0;
  u64 conductor = 1;
  u64 ratio = 1;  // |delta| / conductor
};

inline ConductorRecord make_record(const CurveParams& c) {
  const CurveInvariants inv = conductor(c);
  return {c.a, c.b, inv.delta.value, inv.conductor, inv.ratio()};
}

/// Monoid over family members: sorted conductors and the |Delta|/N histogram.
struct ConductorSummary {
  u64 count = 0;
  std::vector<u64> conductors;
  std::map<u64, u64> ratio_counts;

  void add(const ConductorRecord& r) {
    ++count;
    conductors.push_back(r.conductor);
    ++ratio_counts[r.ratio];
  }

  void merge(const ConductorSummary& o) {
    count += o.count;
    const size_t mid = conductors.size();
    conductors.insert(conductors.end(), o.conductors.begin(), o.conductors.end());
    std::inplace_merge(conductors.begin(), conductors.begin() + std::ptrdiff_t(mid), conductors.end());
    for (auto [m, n] : o.ratio_counts) ratio_counts[m] += n;
  }

  /// #{N < X}; conductors must be sorted.
  u64 count_below(long double X) const {
    auto it = std::partition_point(conductors.begin(), conductors.end(),
                                   [X](u64 n) { return (long double)n < X; });
    return u64(it - conductors.begin());
  }
};

/// One enumeration pass; shards are summarized independently and merged in
/// shard order, so the result does not depend on the thread count.
inline ConductorSummary summarize(const FamilySpec& spec, const EnumerateOptions& opts = {}) {
  auto shards = enumerate_sharded<ConductorSummary>(spec, opts, ConductorSummary{},
                                                    [](ConductorSummary& s, const CurveParams& c) {
                                                      s.add(make_record(c));
                                                    });
  ConductorSummary total;
  for (auto& s : shards) {
    std::sort(s.conductors.begin(), s.conductors.end());
    total.merge(s);
  }
  return total;
}

inline std::vector<ConductorRecord> collect_records(const FamilySpec& spec, const EnumerateOptions& opts = {}) {
  auto shards = enumerate_sharded<std::vector<ConductorRecord>>(
      spec, opts, {}, [](std::vector<ConductorRecord>& v, const CurveParams& c) { v.push_back(make_record(c)); });
  std::vector<ConductorRecord> out;
  for (auto& s : shards) out.insert(out.end(), s.begin(), s.end());
  return out;
}

/// Fraction of F(H) with N / H < lambda at each grid point.
inline DistributionGrid empirical_cdf(const ConductorSummary& s, double H, const std::vector<double>& lambdas) {
  DistributionGrid g;
  g.lambdas = lambdas;
  g.source = DistributionGrid::Source::empirical;
  g.meta = {{"H", H}, {"count", double(s.count)}};
  for (double l : lambdas)
    g.cdf.push_back(s.count ? double(s.count_below((long double)l * H)) / double(s.count) : 0.0);
  return g;
}

inline DistributionGrid empirical_cdf(const FamilySpec& spec, const std::vector<double>& lambdas,
                                      const EnumerateOptions& opts = {}) {
  return empirical_cdf(summarize(spec, opts), spec.height, lambdas);
}

inline u64 count_conductor_below(const FamilySpec& spec, double X, const EnumerateOptions& opts = {}) {
  if (!(X >= 1)) throw std::domain_error("count_conductor_below: X must be >= 1");
  return summarize(spec, opts).count_below(X);
}

struct MassHistogram {
  std::map<u64, double> freq;  // m -> frequency, m <= Mmax
  double overflow = 0;         // frequency of |Delta|/N > Mmax
};

inline MassHistogram mass_histogram(const ConductorSummary& s, u64 Mmax) {
  if (Mmax < 1) throw std::domain_error("mass_histogram: Mmax must be >= 1");
  MassHistogram h;
  for (u64 m = 1; m <= Mmax; ++m) h.freq[m] = 0;
  if (s.count == 0) return h;
  for (auto [m, n] : s.ratio_counts) {
    const double f = double(n) / double(s.count);
    if (m <= Mmax)
      h.freq[m] = f;
    else
      h.overflow += f;
  }
  return h;
}

inline MassHistogram mass_histogram(const FamilySpec& spec, u64 Mmax, const EnumerateOptions& opts = {}) {
  return mass_histogram(summarize(spec, opts), Mmax);
}

/// Least-squares slope of log y against log x.
inline double power_law_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw std::domain_error("power_law_fit: needs at least 3 points");
  double mx = 0, my = 0;
  bool spread = false;
  for (auto [x, y] : points) {
    if (!(x > 0) || !(y > 0)) throw std::domain_error("power_law_fit: points must be positive");
    spread = spread || x != points.front().first;
    mx += std::log(x);
    my += std::log(y);
  }
  if (!spread) throw std::domain_error("power_law_fit: x values must not all coincide");
  mx /= double(points.size());
  my /= double(points.size());
  double sxx = 0, sxy = 0;
  for (auto [x, y] : points) {
    const double dx = std::log(x) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y) - my);
  }
  return sxy / sxx;
}

inline double sup_distance(const DistributionGrid& a, const DistributionGrid& b) {
  if (a.lambdas != b.lambdas || a.cdf.size() != b.cdf.size() || a.cdf.size() != a.lambdas.size())
    throw std::domain_error("sup_distance: grids differ");
  double d = 0;
  for (size_t i = 0; i < a.cdf.size(); ++i) d = std::max(d, std::fabs(a.cdf[i] - b.cdf[i]));
  return d;
}

struct ComparisonReport {
  FamilySpec spec;
  std::vector<double> lambdas;
  DistributionGrid empirical;
  DistributionGrid theory;
  double sup_distance = 0;
  MassHistogram mass_hist;
  std::vector<double> mass_theory;                // w(m), index m - 1
  std::vector<std::pair<double, u64>> counts;     // X -> #{N < X}
  std::vector<double> slope_lambdas;
  double slope = 0;
};

/// Slope grid lambda = 12.4 * 2^k up to 396.8.
inline std::vector<double> default_slope_lambdas() { return {12.4, 24.8, 49.6, 99.2, 198.4, 396.8}; }

inline ComparisonReport compare(const FamilySpec& spec, const std::vector<double>& lambdas, double tol, u64 Mmax,
                                const EnumerateOptions& opts = {}) {
  ComparisonReport rep;
  rep.spec = spec;
  rep.lambdas = lambdas;
  const ConductorSummary s = summarize(spec, opts);
  rep.empirical = empirical_cdf(s, spec.height, lambdas);
  rep.theory = theory_cdf_grid(lambdas, tol, opts.threads);
  rep.sup_distance = sup_distance(rep.empirical, rep.theory);
  rep.mass_hist = mass_histogram(s, Mmax);
  for (u64 m = 1; m <= Mmax; ++m) rep.mass_theory.push_back(mass(m));
  rep.slope_lambdas = default_slope_lambdas();
  std::vector<std::pair<double, double>> pts;
  for (double l : rep.slope_lambdas) {
    const double X = l * spec.height;
    const u64 c = s.count_below(X);
    rep.counts.emplace_back(X, c);
    if (c > 0) pts.emplace_back(l, double(c) / double(s.count));
  }
  rep.slope = pts.size() >= 3 ? power_law_fit(pts) : std::nan("");
  return rep;
}

}  // namespace conductors
