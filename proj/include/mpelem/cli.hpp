#pragma once
// Subcommands of the mpelem command-line tool. Each returns the process exit
// status: 0 success, 1 evaluation or verification failure, 2 usage or parse
// error.

#include <iosfwd>
#include <string>
#include <vector>

#include "mpelem/functions.hpp"

namespace mpelem::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Default benchmark argument, close to sqrt(2) + 1.
inline constexpr const char* kBenchInput = "2.4142135623730950488016887242096980785696718753769";

struct BenchConfig {
  std::vector<Function> functions{std::begin(kFunctions), std::end(kFunctions)};
  std::vector<long> precisions{32, 53, 64, 128, 256, 512, 1024, 2048, 4096};
  std::string input = kBenchInput;
  double min_seconds = 0.1;
  int repetitions = 5;

  /// Empty when valid, else the reason.
  std::string validate() const;
};

struct BenchRow {
  Function function;
  long precision;
  double ns_per_call;
};

/// Median over repetitions of the mean time per call for every (function, precision).
std::vector<BenchRow> run_bench(const BenchConfig& config);
/// "function,precision_bits,ns_per_call" header and one row per entry.
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);
std::vector<BenchRow> parse_bench_csv(std::istream& in);

int cmd_eval(Function f, const std::string& x, long p, std::ostream& out, std::ostream& err);

/// Reads a vector file and writes one ball per vector:
///   in:  "# mpelem-vectors v1 function=<f> count=<n>" then "p x y_ref" lines
///   out: "# mpelem-balls v1 function=<f> count=<n>" then "p y z" lines, or
///        "p error <code>" when the evaluation is rejected.
int cmd_eval_batch(std::istream& vectors, std::ostream& out, std::ostream& err);

int cmd_bench(const BenchConfig& config, std::ostream& out, std::ostream& err);

/// Regenerates every table. With `dump_dir` set, writes "<function>_<band>.txt"
/// dumps there; otherwise prints one line per table and fails when a
/// regenerated table differs from the embedded one.
int cmd_gen_tables(const std::string& dump_dir, std::ostream& out, std::ostream& err);

/// what: "all", "tables" or "series". Tables are checked against the dumps in
/// `reference_dir`.
int cmd_verify(const std::string& what, const std::string& reference_dir, std::ostream& out, std::ostream& err);

/// Internal consistency checks with no external reference: p against p + 32
/// and the functional equations, on `count` random inputs per function.
int cmd_selftest(int count, unsigned long seed, std::ostream& out);

}  // namespace mpelem::cli
