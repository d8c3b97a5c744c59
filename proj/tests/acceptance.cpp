// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. References come from GMP and MPFR only.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "function_oracle.hpp"
#include "mpelem/argtables.hpp"
#include "mpelem/cli.hpp"
#include "mpelem/prover.hpp"
#include "mpelem/series.hpp"
#include "oracle.hpp"

using namespace mpelem;
using namespace mpelem::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Verdict {
  bool pass = true;
  long failures = 0;
  std::string detail;
  std::string first_failure;

  void fail(const std::string& why) {
    if (pass) first_failure = why;
    pass = false;
    ++failures;
  }
};

std::string describe(Function f, const BigFloat& x, long p) {
  return std::string(to_string(f)) + "(" + x.to_hex() + ") p=" + std::to_string(p);
}

Verdict series_prover() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto reports = prove_all();
  const double t = seconds_since(t0);
  int passed = 0;
  for (const auto& r : reports) {
    if (r.passed) {
      ++passed;
    } else {
      v.fail(r.summary());
    }
  }
  if (reports.size() != 10) v.fail(fmt("expected 10 proofs, got %zu", reports.size()));
  if (t >= 60) v.fail(fmt("took %.1f s", t));
  v.detail = fmt("%d/%zu kernels proved over N=3..%d in %.1f s", passed, reports.size(), kMaxTerms, t);
  return v;
}

Verdict denominator_breaks() {
  Verdict v;
  struct Row {
    const char* name;
    const DenomTable& table;
    std::vector<int> first;
    std::vector<int> contains;
  };
  const Row rows[] = {
      {"odd/32", odd_table(32), {12, 18, 24, 29}, {226, 229}},
      {"odd/64", odd_table(64), {23, 35, 46, 56}, {225, 232}},
      {"factorial/32", factorial_table(32), {12, 19, 26}, {264, 267}},
      {"factorial/64", factorial_table(64), {20, 33, 45}, {266, 273}},
  };
  for (const auto& r : rows) {
    const auto& b = r.table.breaks;
    if (b.size() < r.first.size() || !std::equal(r.first.begin(), r.first.end(), b.begin())) {
      v.fail(std::string(r.name) + " leading break points differ");
    }
    for (int k : r.contains) {
      if (std::find(b.begin(), b.end(), k) == b.end()) v.fail(fmt("%s lacks a break at %d", r.name, k));
    }
  }
  // Mean width of v_k over k < 300, odd tables.
  auto mean_width = [](const DenomTable& t) {
    double sum = 0;
    for (int k = 0; k < kMaxTerms; ++k) sum += std::bit_width(t.v[std::size_t(k)]);
    return sum / kMaxTerms;
  };
  const double w32 = mean_width(odd_table(32)), w64 = mean_width(odd_table(64));
  const double f32 = mean_width(factorial_table(32)), f64 = mean_width(factorial_table(64));
  if (std::abs(w32 - 28) > 1) v.fail(fmt("odd/32 mean v_k width %.2f bits", w32));
  if (std::abs(w64 - 61) > 1) v.fail(fmt("odd/64 mean v_k width %.2f bits", w64));
  v.detail = fmt("listed break points checked; mean v_k width odd %.2f/%.2f, factorial %.2f/%.2f bits", w32, w64, f32,
                 f64);
  return v;
}

template <LimbType Limb>
FixedPoint<Limb> eval_kernel(SeriesKind kind, const FixedPoint<Limb>& x, int n_terms) {
  const auto& table = default_table(kind, kLimbBits<Limb>);
  if (kind == SeriesKind::kSin) return eval_sin_cos_series(x, n_terms, table, Want::kSin).sin;
  if (kind == SeriesKind::kCos) return eval_sin_cos_series(x, n_terms, table, Want::kCos).cos;
  return eval_series(kind, x, n_terms, table);
}

template <LimbType Limb>
long rational_oracle_pass(std::mt19937_64& rng, Verdict& v) {
  const SeriesKind kinds[] = {SeriesKind::kAtan, SeriesKind::kAtanh, SeriesKind::kExp,
                              SeriesKind::kSin,  SeriesKind::kCos,   SeriesKind::kSinh};
  long checked = 0;
  for (SeriesKind kind : kinds) {
    for (int n_terms = 3; n_terms < kMaxTerms; ++n_terms) {
      for (int i = 0; i < 20; ++i) {
        const auto x = random_small<Limb>(rng, 2, 4, false);
        const auto y = eval_kernel<Limb>(kind, x, n_terms);
        const int frac_bits = kLimbBits<Limb> * x.nfrac();
        if (!series_within_ulps(kind, to_mpz<Limb>(x.limbs()), frac_bits, n_terms, to_mpz<Limb>(y.limbs()), 2)) {
          v.fail(fmt("%s B=%d N=%d off by more than 2 ulp", to_string(kind), kLimbBits<Limb>, n_terms));
        }
        ++checked;
      }
    }
  }
  return checked;
}

Verdict rational_oracle() {
  Verdict v;
  std::mt19937_64 rng(31);
  const auto t0 = Clock::now();
  const long n = rational_oracle_pass<std::uint32_t>(rng, v) + rational_oracle_pass<std::uint64_t>(rng, v);
  const double t = seconds_since(t0);
  if (t >= 300) v.fail(fmt("took %.1f s", t));
  v.detail = fmt("%ld evaluations checked against the exact sum in %.1f s", n, t);
  return v;
}

Verdict table_structure() {
  Verdict v;
  struct Row {
    TableFunction f;
    Band b;
    std::array<int, 2> counts;
  };
  const Row rows[] = {
      {TableFunction::kExp, Band::kFast, {178, 0}},    {TableFunction::kExp, Band::kEconomical, {23, 32}},
      {TableFunction::kSin, Band::kFast, {203, 0}},    {TableFunction::kSin, Band::kEconomical, {26, 32}},
      {TableFunction::kCos, Band::kFast, {203, 0}},    {TableFunction::kCos, Band::kEconomical, {26, 32}},
      {TableFunction::kLog, Band::kFast, {128, 128}},  {TableFunction::kLog, Band::kEconomical, {32, 32}},
      {TableFunction::kAtan, Band::kFast, {256, 0}},   {TableFunction::kAtan, Band::kEconomical, {32, 32}},
  };
  long bits = 0;
  for (const auto& r : rows) {
    const TableSpec& s = table_spec(r.f, r.b);
    const std::string name = std::string(to_string(r.f)) + "/" + to_string(r.b);
    if (s.counts != r.counts) v.fail(name + " entry counts differ");
    const long want_precision = r.b == Band::kFast ? 512 : 4608;
    if (s.precision != want_precision) v.fail(name + " precision differs");
    if (long(builtin_table(r.f, r.b).entries().size()) != s.total_entries()) v.fail(name + " embedded size differs");
    bits += s.payload_bits();
  }
  const double exp_fast = double(table_spec(TableFunction::kExp, Band::kFast).payload_bits()) / 8 / 1024;
  if (exp_fast != 11.125) v.fail(fmt("exp fast table is %.4f KiB", exp_fast));
  const double total = double(bits) / 8 / 1024;
  if (total > 256) v.fail(fmt("tables total %.4f KiB", total));
  v.detail = fmt("10 tables, exp fast %.3f KiB, total %.4f KiB", exp_fast, total);
  return v;
}

Verdict containment() {
  Verdict v;
  constexpr long kCases = 100000;
  std::mt19937_64 rng(20240);
  Mpfr ref(2);
  long evaluated = 0, rejected = 0, paired = 0;
  while (evaluated < kCases) {
    const Function f = kFunctions[rng() % 5];
    const long p = random_precision(rng);
    const BigFloat x = random_input(rng, f, p);
    const bool narrow = evaluated % 2 == 0;
    Ball b;
    try {
      b = narrow ? eval_ball<std::uint32_t>(f, x, p) : eval_ball<std::uint64_t>(f, x, p);
    } catch (const EvalError& err) {
      if (!acceptable_error(err)) v.fail(describe(f, x, p) + ": " + err.what());
      ++rejected;
      continue;
    }
    ++evaluated;
    reference_for(f, x, b, p, ref);
    if (!ball_contains(b, ref)) v.fail(describe(f, x, p) + " ball misses the reference");
    Ball hi;
    try {
      hi = eval_ball(f, x, p + 32);
    } catch (const EvalError& err) {
      if (!acceptable_error(err)) v.fail(describe(f, x, p + 32) + ": " + err.what());
      continue;
    }
    ++paired;
    if (!balls_intersect(b, hi)) v.fail(describe(f, x, p) + " balls at p and p+32 are disjoint");
    if (b.mid.is_finite() && !(hi.rad <= b.rad)) v.fail(describe(f, x, p) + " p+32 ball is wider");
  }

  std::mt19937_64 eq_rng(4242);
  auto moderate = [&](Function f, long p) {
    BigFloat x = random_input(eq_rng, f, p, true);
    return f == Function::kLog ? x.abs() : x;
  };
  long identities = 0;
  for (int i = 0; i < 2000; ++i) {
    const long p = random_precision(eq_rng);
    const std::function<std::string()> checks[] = {
        [&] { return check_atan_reflection(moderate(Function::kAtan, p).abs(), p); },
        [&] { return check_exp_additivity(moderate(Function::kExp, p), moderate(Function::kExp, p), p); },
        [&] { return check_log_multiplicativity(moderate(Function::kLog, p), moderate(Function::kLog, p), p); },
        [&] { return check_pythagoras(moderate(Function::kSin, p), p); },
    };
    for (const auto& check : checks) {
      try {
        const std::string why = check();
        if (!why.empty()) v.fail(why + fmt(" at p=%ld", p));
        ++identities;
      } catch (const EvalError& err) {
        if (!acceptable_error(err)) v.fail(std::string("identity check: ") + err.what());
      }
    }
  }
  v.detail = fmt("%ld cases evaluated (%ld rejected for precision), %ld p/p+32 pairs, %ld identities", evaluated,
                 rejected, paired, identities);
  return v;
}

Verdict radius_quality() {
  Verdict v;
  constexpr int kPerFunction = 10000;
  std::mt19937_64 rng(515);
  long absolute = 0, rejected = 0;
  for (Function f : kFunctions) {
    int done = 0;
    while (done < kPerFunction) {
      const long p = random_precision(rng);
      const BigFloat x = random_input(rng, f, p, true);
      EvalInfo info;
      Ball b;
      try {
        b = eval_ball(f, x, p, &info);
      } catch (const EvalError& err) {
        if (!acceptable_error(err)) v.fail(describe(f, x, p) + ": " + err.what());
        ++rejected;
        continue;
      }
      ++done;
      if (radius_relative_ok(b, p)) continue;
      // sin and cos fall back to an absolute 2^-p once the relative retry
      // reaches the working-precision cap or the argument is beyond pi/4 storage.
      const bool trig = f == Function::kSin || f == Function::kCos;
      const bool capped = info.w >= kMaxWorkingBits || info.path == "whole-range";
      if (trig && capped && radius_absolute_ok(b, p)) {
        ++absolute;
        continue;
      }
      v.fail(describe(f, x, p) + " radius " + b.rad.to_hex() + " for " + b.mid.to_hex());
    }
  }
  v.detail = fmt("%d per function (%ld by the absolute sin/cos rule, %ld rejected for precision)", kPerFunction,
                 absolute, rejected);
  return v;
}

Verdict special_cases() {
  Verdict v;
  std::mt19937_64 rng(808);
  const BigFloat pi2 = builtin_constant(Constant::kPiOver2), pi4 = builtin_constant(Constant::kPiOver4);
  long checked = 0;
  auto path_of = [](const BigFloat& x, long p, EvalInfo& info) {
    try {
      atan_ball(x, p, &info);
      return info.path;
    } catch (const EvalError& err) {
      return std::string("error");
    }
  };
  for (int i = 0; i < 400; ++i) {
    const long p = 2 + long(rng() % 4095);
    const bool neg = rng() & 1;
    const long bits = 1 + long(rng() % std::uint64_t(p + 8));
    EvalInfo info;

    // largest e with e < -p/2 - 2
    const std::int64_t e_tiny = -(p + 5 + 1) / 2;
    const BigFloat tiny = random_float(rng, bits, e_tiny, neg);
    if (path_of(tiny, p, info) != "tiny" || info.unrounded.mid != tiny ||
        info.unrounded.rad != Radius::pow2(3 * e_tiny)) {
      v.fail(fmt("atan tiny branch at p=%ld e=%lld", p, (long long)e_tiny));
    }
    if (path_of(random_float(rng, bits, e_tiny + 1, neg), p, info) == "tiny") {
      v.fail(fmt("atan tiny branch taken at p=%ld e=%lld", p, (long long)(e_tiny + 1)));
    }

    const std::int64_t e_huge = p + 3;
    const BigFloat huge = random_float(rng, bits, e_huge, neg);
    if (path_of(huge, p, info) != "huge" || info.unrounded.mid != (neg ? -pi2 : pi2) ||
        info.unrounded.rad != Radius::pow2(1 - e_huge)) {
      v.fail(fmt("atan huge branch at p=%ld", p));
    }
    if (path_of(random_float(rng, bits, p + 2, neg), p, info) == "huge") {
      v.fail(fmt("atan huge branch taken at p=%ld e=%ld", p, p + 2));
    }

    const BigFloat one = BigFloat::from_int(neg ? -1 : 1);
    if (path_of(one, p, info) != "unit" || info.unrounded.mid != (neg ? -pi4 : pi4) || !info.unrounded.rad.is_zero()) {
      v.fail(fmt("atan(+-1) at p=%ld", p));
    }
    checked += 5;
  }

  // Working precision above 4608 bits is rejected; at or below it is served.
  auto code_of = [](Function f, const BigFloat& x, long p, EvalInfo& info) -> std::optional<ErrorCode> {
    try {
      eval_ball(f, x, p, &info);
      return std::nullopt;
    } catch (const EvalError& err) {
      return err.code();
    }
  };
  long rejected = 0;
  for (int i = 0; i < 200; ++i) {
    for (Function f : kFunctions) {
      const long p = 4000 + long(rng() % 1200);
      BigFloat x = random_input(rng, f, 64, true);
      if (f == Function::kLog) x = x.abs();
      if (i % 10 == 0) x = f == Function::kLog ? BigFloat::from_int(1) + BigFloat::from_int(1).mul_pow2(-long(rng() % 700))
                                               : x.mul_pow2(-long(rng() % 700));
      EvalInfo info;
      const auto code = code_of(f, x, p, info);
      if (code) {
        if (*code != ErrorCode::kUnsupportedPrecision) v.fail(describe(f, x, p) + " wrong error");
        ++rejected;
      } else if (info.w > kMaxWorkingBits) {
        v.fail(describe(f, x, p) + fmt(" served with w=%ld", info.w));
      } else if (p + 4 > kMaxWorkingBits && info.path == "pipeline") {
        v.fail(describe(f, x, p) + " should need w > 4608");
      }
      ++checked;
    }
  }
  v.detail = fmt("%ld checks; %ld evaluations rejected for w > 4608", checked, rejected);
  return v;
}

Verdict bench_scaling() {
  Verdict v;
  const cli::BenchConfig config;
  const auto rows = cli::run_bench(config);
  std::map<Function, std::vector<cli::BenchRow>> by_function;
  for (const auto& r : rows) by_function[r.function].push_back(r);
  std::string ratios;
  for (Function f : config.functions) {
    auto& pts = by_function[f];
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.precision < b.precision; });
    double t256 = 0, t4096 = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (pts[i].precision == 256) t256 = pts[i].ns_per_call;
      if (pts[i].precision == 4096) t4096 = pts[i].ns_per_call;
      if (i > 0 && pts[i].ns_per_call < 0.9 * pts[i - 1].ns_per_call) {
        v.fail(fmt("%s: %.0f ns at p=%ld after %.0f ns at p=%ld", to_string(f), pts[i].ns_per_call, pts[i].precision,
                   pts[i - 1].ns_per_call, pts[i - 1].precision));
      }
    }
    const double ratio = t4096 / t256;
    if (!(ratio >= 3 && ratio <= 200)) v.fail(fmt("%s: time(4096)/time(256) = %.1f", to_string(f), ratio));
    ratios += fmt("%s%s %.1fx", ratios.empty() ? "" : ", ", to_string(f), ratio);
  }
  v.detail = "time(4096)/time(256): " + ratios;
  return v;
}

}  // namespace

int main() {
  const std::pair<const char*, Verdict (*)()> criteria[] = {
      {"series-prover", series_prover},     {"denominator-breaks", denominator_breaks},
      {"rational-oracle", rational_oracle}, {"table-structure", table_structure},
      {"containment", containment},         {"radius-quality", radius_quality},
      {"special-cases", special_cases},     {"bench-scaling", bench_scaling},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    if (!v.pass) v.detail += fmt("; %ld failures, first: ", v.failures) + v.first_failure;
    std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
    failures += !v.pass;
  }
  return failures == 0 ? 0 : 1;
}
