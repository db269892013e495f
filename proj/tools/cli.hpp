#pragma once

// Command-line front end. run_cli() is the whole program minus process
// setup, so tests can drive it with captured streams.
//
// Exit codes: 0 ok, 1 a check failed, 2 usage error, 3 over budget.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "conductors/conductors.hpp"

namespace conductors::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kBudget = 3 };

/// Largest H accepted by `enumerate`.
inline constexpr double kEnumerateBudget = 1e10;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void check_budget(double H) {
  if (H > kEnumerateBudget) throw BudgetError("H = " + std::to_string(H) + " exceeds the enumeration budget 1e10");
}

inline std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

struct GridSpec {
  double start = 0, stop = 496, step = 0.496;
};

inline GridSpec parse_grid(const std::string& text) {
  GridSpec g;
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("grid: cannot parse '" + item + "'");
    }
  }
  if (parts.size() != 3) throw UsageError("grid: expected start:stop:step");
  g = {parts[0], parts[1], parts[2]};
  if (!std::isfinite(g.start) || !std::isfinite(g.stop) || !std::isfinite(g.step))
    throw UsageError("grid: values must be finite");
  if (g.start < 0) throw UsageError("grid: lambda must be nonnegative");
  if (!(g.step > 0)) throw UsageError("grid: step must be positive");
  if (g.stop < g.start) throw UsageError("grid: stop must not precede start");
  if ((g.stop - g.start) / g.step > 1e6) throw UsageError("grid: more than 10^6 points");
  return g;
}

inline std::vector<double> grid_points(const GridSpec& g) {
  const long n = long(std::floor((g.stop - g.start) / g.step + 1e-9)) + 1;
  std::vector<double> xs;
  for (long i = 0; i < n; ++i) xs.push_back(g.start + double(i) * g.step);
  return xs;
}

struct RunConfig {
  double H = 1e7;
  int r = 1, t = 1;
  std::string grid = "0:496:0.496";
  bool pdf = false;
  double dlambda = 0.496;
  std::string dump;
  std::string out;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::uint64_t seed = 1;
  double tol = 1e-9;
  std::uint64_t q = 7;
  std::uint64_t mmax = 50;
};

// Writes to PREFIX + suffix, or to `fallback` when no prefix was given.
class Sink {
 public:
  Sink(const std::string& prefix, const std::string& suffix, std::ostream& fallback) {
    if (prefix.empty()) {
      os_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(prefix + suffix);
      if (!*file_) throw UsageError("cannot open " + prefix + suffix);
      os_ = file_.get();
    }
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

inline FamilySpec family_from(const RunConfig& c) {
  try {
    return FamilySpec::make(c.H, c.r, c.t);
  } catch (const std::domain_error& e) {
    throw UsageError(e.what());
  }
}

inline int cmd_theory(const RunConfig& c, std::ostream& out) {
  const auto lambdas = grid_points(parse_grid(c.grid));
  if (!(c.tol > 0)) throw UsageError("tol must be positive");
  const DistributionGrid g = theory_cdf_grid(lambdas, c.tol, c.threads);
  std::vector<std::pair<double, double>> density;
  if (c.pdf) {
    try {
      density = pdf_numeric(g, c.dlambda);
    } catch (const std::domain_error& e) {
      throw UsageError(e.what());
    }
  }
  {
    Sink s(c.out, ".cdf.csv", out);
    *s << "lambda,cdf\n";
    for (size_t i = 0; i < lambdas.size(); ++i) *s << fmt(lambdas[i]) << ',' << fmt(g.cdf[i]) << '\n';
  }
  if (c.pdf) {
    Sink s(c.out, ".pdf.csv", out);
    if (c.out.empty()) *s << '\n';
    *s << "lambda,density\n";
    for (auto [x, d] : density) *s << fmt(x) << ',' << fmt(d) << '\n';
  }
  return kOk;
}

inline int cmd_enumerate(const RunConfig& c, std::ostream& out) {
  check_budget(c.H);
  const FamilySpec spec = family_from(c);
  EnumerateOptions opts{c.threads, 0};
  u64 count = 0;
  if (!c.dump.empty()) {
    std::ofstream dump(c.dump);
    if (!dump) throw UsageError("cannot open " + c.dump);
    dump << "a,b,delta,conductor\n";
    for (const auto& rec : collect_records(spec, opts)) {
      dump << rec.a << ',' << rec.b << ',' << to_string(rec.delta) << ',' << rec.conductor << '\n';
      ++count;
    }
  } else {
    count = family_size(spec, opts);
  }
  const double z10 = zeta_primes_removed(10, 6, 1e-15);
  const double scaled = double(count) / std::pow(c.H, 5.0 / 6.0);
  nlohmann::json j = {{"H", c.H},
                      {"r", spec.r},
                      {"t", spec.t},
                      {"count", count},
                      {"count_over_H56", scaled},
                      {"reference", 1 / (9 * z10)},
                      {"ratio_to_reference", scaled * 9 * z10}};
  Sink s(c.out, ".json", out);
  *s << j.dump(2) << '\n';
  return kOk;
}

inline int cmd_compare(const RunConfig& c, std::ostream& out) {
  check_budget(c.H);
  const FamilySpec spec = family_from(c);
  const auto lambdas = grid_points(parse_grid(c.grid));
  const ComparisonReport rep = compare(spec, lambdas, c.tol, c.mmax, EnumerateOptions{c.threads, 0});
  {
    Sink s(c.out, ".report.csv", out);
    *s << "lambda,cdf_empirical,cdf_theory,abs_diff\n";
    for (size_t i = 0; i < lambdas.size(); ++i)
      *s << fmt(lambdas[i]) << ',' << fmt(rep.empirical.cdf[i]) << ',' << fmt(rep.theory.cdf[i]) << ','
         << fmt(std::fabs(rep.empirical.cdf[i] - rep.theory.cdf[i])) << '\n';
  }
  {
    Sink s(c.out, ".mass.csv", out);
    if (c.out.empty()) *s << '\n';
    *s << "m,freq_empirical,w_theory\n";
    for (u64 m = 1; m <= c.mmax; ++m)
      *s << m << ',' << fmt(rep.mass_hist.freq.at(m)) << ',' << fmt(rep.mass_theory[m - 1]) << '\n';
  }
  {
    Sink s(c.out, ".counts.csv", out);
    if (c.out.empty()) *s << '\n';
    *s << "X,count\n";
    for (auto [X, n] : rep.counts) *s << fmt(X) << ',' << n << '\n';
  }
  const double f1 = rep.mass_hist.freq.at(1), w1 = rep.mass_theory[0];
  nlohmann::json j = {{"H", c.H},
                      {"r", spec.r},
                      {"t", spec.t},
                      {"count", u64(rep.empirical.meta[1].second)},
                      {"sup_distance", rep.sup_distance},
                      {"mass1", {{"empirical", f1}, {"theory", w1}, {"abs_diff", std::fabs(f1 - w1)}}},
                      {"mass_overflow", rep.mass_hist.overflow},
                      {"slope", rep.slope},
                      {"slope_lambdas", rep.slope_lambdas}};
  Sink s(c.out, ".json", out);
  if (c.out.empty()) *s << '\n';
  *s << j.dump(2) << '\n';
  return kOk;
}

struct Check {
  std::string name;
  nlohmann::json computed, expected;
  bool pass;
};

inline std::string str(const Rational& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

inline std::vector<Check> identity_checks(const RunConfig& c) {
  std::vector<Check> checks;
  auto add = [&](std::string name, nlohmann::json computed, nlohmann::json expected, bool pass) {
    checks.push_back({std::move(name), std::move(computed), std::move(expected), pass});
  };
  const double pi8 = std::pow(std::numbers::pi, 8);
  const double zr = zeta_ratio(), zr_ref = 228811 * pi8 / 2380855680.0;
  add("zeta_ratio", zr, zr_ref, std::fabs(zr - zr_ref) <= 1e-12);

  const auto norm = main_term_detailed(0, 496, c.tol);
  add("main_term_normalization", norm.value, 1.0, std::fabs(norm.value - 1) <= std::max(1e-6, c.tol));

  for (u64 p : {2, 3, 5, 7}) {
    const Rational s = rho_tail_sum(p, 0);
    const Rational want = p < 5 ? Rational(1) : 1 - Rational(1) / Rational(BigInt(detail::upow(p, 10)));
    add("rho_sum[p=" + std::to_string(p) + "]", str(s), str(want), s == want);
  }
  for (u64 p : {5, 7}) {
    bool ok = true;
    for (int n = 0; n < 12; ++n) {
      Rational row = 0;
      for (const auto& e : ratio_valuation_row(p, n)) row += e.density;
      ok = ok && row == rho_prime_power(p, n);
    }
    add("ratio_row_sums[p=" + std::to_string(p) + "]", ok, true, ok);
  }

  const auto rad = identity_rad_euler(2, 100000, 100000);
  const double gap = std::fabs(rad.lhs - rad.rhs), budget = rad.lhs_tail + rad.rhs_tail;
  add("rad_euler[s=2]", gap, budget, gap <= budget && budget <= 1e-3);

  for (u64 q : {100, 1000, 10000}) {
    const double dev = std::fabs(euler_ratio_check(q) - 1);
    add("euler_ratio[q=" + std::to_string(q) + "]", dev, 10.0 / double(q), dev <= 10.0 / double(q));
  }

  for (auto [p, eta] : {std::pair<u64, int>{5, 4}, {7, 4}})
    for (const auto& tc : local_type_counts(p, eta, c.seed))
      add("local_type_count[p=" + std::to_string(p) + "," + tc.type.str() + ",mod p^" + std::to_string(tc.eta) + "]",
          tc.counted, tc.expected, tc.counted == tc.expected);

  const QCPlan plan = build_plan(c.q);
  const FamilySpec spec = family_from(c);
  const BigInt Q2 = BigInt(plan.Q) * plan.Q;
  std::map<u64, u64> scan;
  if (plan.Q <= kMaxScanModulus) scan = scan_SQ_partition(plan, spec, c.seed);
  BigInt total = 0;
  const std::string tag = "[Q=" + std::to_string(plan.Q) + ",m=";
  for (u64 m : divisors(plan.C)) {
    const ResidueSet S = build_SQm(plan, spec, m, c.seed);
    const BigInt card = S.cardinality();
    total += card;
    const Rational want = density_corrected(plan, m) * Rational(Q2);
    add("SQm_count" + tag + std::to_string(m) + "]", card.str(), str(want), Rational(card) == want);
    if (!scan.empty())
      add("SQm_scan" + tag + std::to_string(m) + "]", scan.at(m), card.str(), BigInt(scan.at(m)) == card);
    add("no_d_property" + tag + std::to_string(m) + "]", verify_no_d_property(S, plan), true,
        verify_no_d_property(S, plan));
  }
  const Rational want_total = union_density(plan) * Rational(Q2);
  add("SQm_total[Q=" + std::to_string(plan.Q) + "]", total.str(), str(want_total), Rational(total) == want_total);
  return checks;
}

inline int cmd_identities(const RunConfig& c, std::ostream& out) {
  if (c.q <= 5) throw UsageError("q must exceed 5");
  if (c.q > 13) throw UsageError("q above 13 exceeds the exhaustive residue budget");
  const auto checks = identity_checks(c);
  nlohmann::json arr = nlohmann::json::array();
  bool all = true;
  for (const auto& ch : checks) {
    arr.push_back({{"check", ch.name}, {"computed", ch.computed}, {"expected", ch.expected}, {"pass", ch.pass}});
    all = all && ch.pass;
  }
  Sink s(c.out, ".json", out);
  *s << nlohmann::json{{"all_pass", all}, {"checks", arr}}.dump(2) << '\n';
  return all ? kOk : kCheckFailed;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conductor statistics for y^2 = x^3 + a x + b ordered by height"};
  app.require_subcommand(1);
  RunConfig c;

  auto add_family = [&](CLI::App* sub) {
    sub->add_option("--H", c.H, "height bound")->capture_default_str();
    sub->add_option("--r", c.r, "a mod 6")->capture_default_str();
    sub->add_option("--t", c.t, "b mod 6")->capture_default_str();
  };
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", c.out, "output path prefix (default: stdout)");
    sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--tol", c.tol, "absolute tolerance for theory values")->capture_default_str();
  };

  auto* theory = app.add_subcommand("theory", "main-term CDF (and density) on a lambda grid");
  theory->add_option("--grid", c.grid, "start:stop:step")->capture_default_str();
  theory->add_flag("--pdf", c.pdf, "also emit finite-difference density");
  theory->add_option("--dlambda", c.dlambda, "finite-difference offset")->capture_default_str();
  add_common(theory);

  auto* enumerate = app.add_subcommand("enumerate", "enumerate F(H) and summarize");
  add_family(enumerate);
  enumerate->add_option("--dump", c.dump, "per-curve CSV a,b,delta,conductor");
  add_common(enumerate);

  auto* cmp = app.add_subcommand("compare", "empirical vs theory distribution");
  add_family(cmp);
  cmp->add_option("--grid", c.grid, "start:stop:step")->capture_default_str();
  cmp->add_option("--mmax", c.mmax, "largest |Delta|/N bucket")->check(CLI::PositiveNumber)->capture_default_str();
  add_common(cmp);

  auto* ident = app.add_subcommand("identities", "exact identity checks");
  ident->add_option("--q", c.q, "congruence-lab parameter q")->capture_default_str();
  ident->add_option("--seed", c.seed, "seed for randomized lifts")->capture_default_str();
  ident->add_option("--r", c.r, "a mod 6")->capture_default_str();
  ident->add_option("--t", c.t, "b mod 6")->capture_default_str();
  add_common(ident);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*theory) return cmd_theory(c, out);
    if (*enumerate) return cmd_enumerate(c, out);
    if (*cmp) return cmd_compare(c, out);
    return cmd_identities(c, out);
  } catch (const BudgetError& e) {
    err << "error: " << e.what() << '\n';
    return kBudget;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace conductors::cli
