#include "mpelem/cli.hpp"

#include <sched.h>
#include <time.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "mpelem/prover.hpp"

namespace mpelem::cli {

namespace {

Ball evaluate(Function f, const BigFloat& x, long p) { return eval_ball(f, x, p); }

// Keeps the bench loop on the CPU it started on.
void pin_to_current_cpu() {
  const int cpu = sched_getcpu();
  if (cpu < 0) return;
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(cpu, &set);
  sched_setaffinity(0, sizeof set, &set);
}

// CPU time of this thread, so time the scheduler gives to others is not counted.
double thread_seconds() {
  timespec ts;
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return double(ts.tv_sec) + double(ts.tv_nsec) * 1e-9;
}

double time_per_call(Function f, const BigFloat& x, long p, double min_seconds) {
  volatile std::int64_t sink = 0;
  // untimed warm-up: caches and allocator state left by the previous point
  const double warm = thread_seconds();
  while (thread_seconds() - warm < min_seconds / 4) sink = sink + evaluate(f, x, p).mid.exponent();
  long calls = 0;
  const double start = thread_seconds();
  double elapsed = 0;
  do {
    for (int i = 0; i < 16; ++i) sink = sink + evaluate(f, x, p).mid.exponent();
    calls += 16;
    elapsed = thread_seconds() - start;
  } while (elapsed < min_seconds);
  return elapsed * 1e9 / double(calls);
}

// Ball arithmetic on exact midpoints with upward-rounded radii.
Ball add(const Ball& a, const Ball& b) { return {a.mid + b.mid, a.rad + b.rad}; }
Ball neg(const Ball& a) { return {-a.mid, a.rad}; }
Ball mul(const Ball& a, const Ball& b) {
  return {a.mid * b.mid, Radius::above(a.mid) * b.rad + Radius::above(b.mid) * a.rad + a.rad * b.rad};
}
bool has_zero(const Ball& a) { return Radius::above(a.mid) <= a.rad; }
bool overlap(const Ball& a, const Ball& b) { return has_zero(add(a, neg(b))); }

BigFloat random_input(std::mt19937_64& rng, Function f, long bits) {
  std::uniform_int_distribution<int> exps(f == Function::kExp ? -12 : -20, f == Function::kExp ? 5 : 20);
  std::vector<std::uint64_t> w(std::size_t((bits + 63) / 64));
  for (auto& v : w) v = rng();
  w.back() |= std::uint64_t(1) << 63;
  const bool negative = f != Function::kLog && (rng() & 1);
  return BigFloat::from_integer(negative, w, exps(rng) - std::int64_t(64 * w.size()));
}

std::string check_pair(Function f, const BigFloat& x, long p) {
  const Ball lo = evaluate(f, x, p), hi = evaluate(f, x, p + 32);
  if (!overlap(lo, hi)) return "precision " + std::to_string(p) + " and " + std::to_string(p + 32) + " disagree";
  if (lo.rad < hi.rad) return "higher precision gave a wider ball";
  return "";
}

std::string check_identity(Function f, const BigFloat& a, const BigFloat& b, long p) {
  switch (f) {
    case Function::kAtan: {
      // atan(2^k) + atan(2^-k) = pi/2
      const std::int64_t k = a.exponent() % 40;
      const BigFloat one = BigFloat::from_int(1);
      const Ball half_pi{builtin_constant(Constant::kPiOver2), Radius::pow2(-kConstantBits)};
      const Ball d = add(add(atan_ball(one.mul_pow2(k), p), atan_ball(one.mul_pow2(-k), p)), neg(half_pi));
      return has_zero(d) ? "" : "atan(2^k) + atan(2^-k) != pi/2";
    }
    case Function::kExp:
      return has_zero(add(mul(exp_ball(a, p), exp_ball(b, p)), neg(exp_ball(a + b, p)))) ? ""
                                                                                          : "exp(a) exp(b) != exp(a + b)";
    case Function::kLog:
      return has_zero(add(add(log_ball(a, p), log_ball(b, p)), neg(log_ball(a * b, p)))) ? ""
                                                                                         : "log a + log b != log(ab)";
    case Function::kSin:
    case Function::kCos: {
      const SinCosBall sc = sin_cos_ball(a, p);
      const Ball one{BigFloat::from_int(1), Radius()};
      return has_zero(add(add(mul(sc.sin, sc.sin), mul(sc.cos, sc.cos)), neg(one))) ? "" : "sin^2 + cos^2 != 1";
    }
  }
  return "";
}

std::string function_header(std::istream& in, Function* f, long* count) {
  std::string line;
  if (!std::getline(in, line)) return "empty vector file";
  std::istringstream is(line);
  std::string hash, magic, version, fn, cnt;
  is >> hash >> magic >> version >> fn >> cnt;
  if (hash != "#" || magic != "mpelem-vectors" || version != "v1" || fn.rfind("function=", 0) != 0 ||
      cnt.rfind("count=", 0) != 0) {
    return "bad vector file header: " + line;
  }
  const auto parsed = parse_function(fn.substr(9));
  if (!parsed) return "unknown function in header: " + fn.substr(9);
  *f = *parsed;
  try {
    *count = std::stol(cnt.substr(6));
  } catch (const std::exception&) {
    return "bad count in header: " + cnt;
  }
  return "";
}

}  // namespace

std::string BenchConfig::validate() const {
  if (functions.empty()) return "no functions selected";
  if (precisions.empty()) return "empty precision ladder";
  for (long p : precisions) {
    if (p < 2 || p + 4 > kMaxWorkingBits) return "precision " + std::to_string(p) + " outside [2, 4604]";
  }
  if (!(min_seconds > 0)) return "loop time must be positive";
  if (repetitions < 1) return "at least one repetition is needed";
  try {
    BigFloat::parse(input);
  } catch (const std::invalid_argument&) {
    return "cannot parse input " + input;
  }
  return "";
}

std::vector<BenchRow> run_bench(const BenchConfig& config) {
  pin_to_current_cpu();
  const BigFloat x = BigFloat::parse(config.input);
  std::vector<BenchRow> rows;
  for (Function f : config.functions) {
    // Each repetition sweeps the function's whole ladder, so slow drifts in
    // machine speed affect its points alike.
    // The median keeps one unusually fast or slow run from setting a point.
    std::vector<std::vector<double>> samples(config.precisions.size());
    for (int rep = 0; rep < config.repetitions; ++rep) {
      for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i].push_back(time_per_call(f, x, config.precisions[i], config.min_seconds));
      }
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
      auto& s = samples[i];
      std::sort(s.begin(), s.end());
      const std::size_t m = s.size() / 2;
      rows.push_back({f, config.precisions[i], s.size() % 2 ? s[m] : (s[m - 1] + s[m]) / 2});
    }
  }
  return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "function,precision_bits,ns_per_call\n";
  for (const auto& r : rows) {
    out << to_string(r.function) << ',' << r.precision << ',' << std::fixed << std::setprecision(1) << r.ns_per_call
        << '\n';
  }
  out.unsetf(std::ios::floatfield);
}

std::vector<BenchRow> parse_bench_csv(std::istream& in) {
  std::vector<BenchRow> rows;
  std::string line;
  if (!std::getline(in, line) || line != "function,precision_bits,ns_per_call") {
    throw std::invalid_argument("missing bench CSV header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string name, prec, ns;
    if (!std::getline(is, name, ',') || !std::getline(is, prec, ',') || !std::getline(is, ns)) {
      throw std::invalid_argument("malformed bench row: " + line);
    }
    const auto f = parse_function(name);
    if (!f) throw std::invalid_argument("unknown function in bench row: " + line);
    rows.push_back({*f, std::stol(prec), std::stod(ns)});
  }
  return rows;
}

int cmd_eval(Function f, const std::string& text, long p, std::ostream& out, std::ostream& err) {
  BigFloat x;
  try {
    x = BigFloat::parse(text);
  } catch (const std::invalid_argument& e) {
    err << "error: cannot parse '" << text << "': " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    EvalInfo info;
    const Ball b = eval_ball(f, x, p, &info);
    out << "function " << to_string(f) << '\n'
        << "precision " << p << '\n'
        << "mid " << b.mid.to_hex() << '\n'
        << "mid_decimal " << b.mid.to_decimal(int(std::min<long>(p * 30103 / 100000 + 2, 1300))) << '\n'
        << "radius " << b.rad.to_hex() << '\n'
        << "path " << info.path << '\n';
    return kExitOk;
  } catch (const EvalError& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return kExitFailure;
  }
}

int cmd_eval_batch(std::istream& vectors, std::ostream& out, std::ostream& err) {
  Function f = Function::kAtan;
  long count = 0;
  if (auto problem = function_header(vectors, &f, &count); !problem.empty()) {
    err << "error: " << problem << '\n';
    return kExitUsage;
  }
  std::ostringstream body;
  long seen = 0;
  std::string line;
  while (std::getline(vectors, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    long p = 0;
    std::string x_text, y_ref;
    if (!(is >> p >> x_text >> y_ref)) {
      err << "error: malformed vector line: " << line << '\n';
      return kExitUsage;
    }
    BigFloat x;
    try {
      x = BigFloat::parse(x_text);
    } catch (const std::invalid_argument&) {
      err << "error: cannot parse input on line: " << line << '\n';
      return kExitUsage;
    }
    ++seen;
    try {
      const Ball b = eval_ball(f, x, p);
      body << p << ' ' << b.mid.to_hex() << ' ' << b.rad.to_hex() << '\n';
    } catch (const EvalError& e) {
      body << p << " error " << to_string(e.code()) << '\n';
    }
  }
  if (seen != count) {
    err << "error: header announces " << count << " vectors, file holds " << seen << '\n';
    return kExitUsage;
  }
  out << "# mpelem-balls v1 function=" << to_string(f) << " count=" << count << '\n' << body.str();
  return kExitOk;
}

int cmd_bench(const BenchConfig& config, std::ostream& out, std::ostream& err) {
  if (auto problem = config.validate(); !problem.empty()) {
    err << "error: " << problem << '\n';
    return kExitUsage;
  }
  write_bench_csv(out, run_bench(config));
  return kExitOk;
}

int cmd_gen_tables(const std::string& dump_dir, std::ostream& out, std::ostream& err) {
  bool ok = true;
  for (auto f : kTableFunctions) {
    for (auto b : kBands) {
      const ArgRedTable t = gen_argred_table(f, b);
      const std::string name = std::string(to_string(f)) + "_" + to_string(b);
      if (!dump_dir.empty()) {
        std::filesystem::create_directories(dump_dir);
        const auto path = std::filesystem::path(dump_dir) / (name + ".txt");
        std::ofstream file(path);
        file << dump(t);
        if (!file) {
          err << "error: cannot write " << path.string() << '\n';
          return kExitFailure;
        }
        out << "wrote " << path.string() << '\n';
        continue;
      }
      const bool same = t == builtin_table(f, b);
      ok = ok && same;
      const TableSpec& s = t.spec();
      out << name << " entries=" << s.total_entries() << " precision=" << s.precision
          << " bytes=" << s.payload_bits() / 8 << " embedded=" << (same ? "match" : "DIFFER") << '\n';
    }
  }
  return ok ? kExitOk : kExitFailure;
}

int cmd_verify(const std::string& what, const std::string& reference_dir, std::ostream& out, std::ostream& err) {
  if (what != "all" && what != "tables" && what != "series") {
    err << "error: verify target must be all, tables or series\n";
    return kExitUsage;
  }
  bool ok = true;
  if (what != "series") {
    try {
      for (const auto& r : verify_tables(reference_dir)) {
        out << "table " << to_string(r.function) << ' ' << to_string(r.band) << " entries=" << r.entries_checked
            << ' ' << (r.ok() ? "PASS" : "FAIL") << '\n';
        for (std::size_t i = 0; i < std::min<std::size_t>(r.mismatches.size(), 3); ++i) {
          const auto& m = r.mismatches[i];
          out << "  mismatch table " << m.which << " index " << m.index << ": stored " << m.stored << " reference "
              << m.reference << '\n';
        }
        ok = ok && r.ok();
      }
    } catch (const std::runtime_error& e) {
      err << "error: reference tables unavailable in " << reference_dir << ": " << e.what() << '\n';
      return kExitFailure;
    }
  }
  if (what != "tables") {
    for (const auto& r : prove_all()) {
      out << "series " << to_string(r.kind) << " B=" << r.limb_bits << " max_error=" << std::setprecision(17)
          << r.worst_final_error.get_d() << " ulp " << (r.passed ? "PASS" : "FAIL") << '\n';
      if (!r.passed) out << "  " << r.summary() << '\n';
      ok = ok && r.passed;
    }
  }
  return ok ? kExitOk : kExitFailure;
}

int cmd_selftest(int count, unsigned long seed, std::ostream& out) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> precisions(2, 2048);
  bool ok = true;
  for (Function f : kFunctions) {
    int failures = 0, skipped = 0;
    std::string first;
    for (int i = 0; i < count; ++i) {
      const long p = precisions(rng);
      const BigFloat a = random_input(rng, f, p), b = random_input(rng, f, p);
      std::string problem;
      try {
        problem = check_pair(f, a, p);
        if (problem.empty()) problem = check_identity(f, a, b, p);
      } catch (const EvalError& e) {
        if (e.code() != ErrorCode::kUnsupportedPrecision) problem = e.what();
        else ++skipped;
      }
      if (!problem.empty()) {
        if (failures++ == 0) first = problem + " at x=" + a.to_hex() + " p=" + std::to_string(p);
      }
    }
    out << to_string(f) << " cases=" << count << " skipped=" << skipped << " failures=" << failures << ' '
        << (failures == 0 ? "PASS" : "FAIL") << '\n';
    if (failures) out << "  first: " << first << '\n';
    ok = ok && failures == 0;
  }
  return ok ? kExitOk : kExitFailure;
}

}  // namespace mpelem::cli
