// mpelem: evaluate, benchmark, regenerate and verify.
//
//   mpelem eval atan 1 53
//   mpelem eval --batch vectors.txt
//   mpelem bench [--functions exp,log] [--precisions 53,4096] [--seconds 0.1] [--reps 5] [--input x]
//   mpelem gen-tables [--dump] [--out dir]
//   mpelem verify [all|tables|series]
//   mpelem selftest [--count n] [--seed s]

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "mpelem/cli.hpp"

using namespace mpelem;

int main(int argc, char** argv) {
  CLI::App app{"Ball-valued atan, exp, log, sin and cos at arbitrary precision"};
  app.require_subcommand(1);

  auto* eval = app.add_subcommand("eval", "Evaluate one function, or a vector file with --batch");
  std::string fname, x, batch;
  long p = 53;
  eval->add_option("function", fname, "atan, exp, log, sin or cos");
  eval->add_option("x", x, "argument, hex float or decimal");
  eval->add_option("p", p, "precision in bits");
  eval->add_option("--batch", batch, "vector file; balls are written to stdout");

  auto* bench = app.add_subcommand("bench", "Time every function along a precision ladder (CSV)");
  cli::BenchConfig config;
  std::vector<std::string> bench_functions;
  bench->add_option("--functions", bench_functions, "subset of functions")->delimiter(',');
  bench->add_option("--precisions", config.precisions, "precision ladder")->delimiter(',');
  bench->add_option("--input", config.input, "argument");
  bench->add_option("--seconds", config.min_seconds, "minimum loop time per run");
  bench->add_option("--reps", config.repetitions, "runs per point, median kept");

  auto* gen = app.add_subcommand("gen-tables", "Regenerate the lookup tables");
  bool dump = false;
  std::string out_dir = ".";
  gen->add_flag("--dump", dump, "write table dumps instead of comparing with the embedded tables");
  gen->add_option("--out", out_dir, "directory for --dump");

  auto* verify = app.add_subcommand("verify", "Audit the tables and prove the series kernels");
  std::string target = "all";
  verify->add_option("target", target, "all, tables or series")->check(CLI::IsMember({"all", "tables", "series"}));

  auto* selftest = app.add_subcommand("selftest", "Precision and functional-equation consistency checks");
  int count = 200;
  unsigned long seed = 1;
  selftest->add_option("--count", count, "inputs per function")->check(CLI::PositiveNumber);
  selftest->add_option("--seed", seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? 0 : cli::kExitUsage;
  }

  if (eval->parsed()) {
    if (!batch.empty()) {
      std::ifstream in(batch);
      if (!in) {
        std::cerr << "error: cannot read " << batch << '\n';
        return cli::kExitUsage;
      }
      return cli::cmd_eval_batch(in, std::cout, std::cerr);
    }
    const auto f = parse_function(fname);
    if (!f || x.empty()) {
      std::cerr << "usage: mpelem eval <atan|exp|log|sin|cos> <x> <p>\n";
      return cli::kExitUsage;
    }
    return cli::cmd_eval(*f, x, p, std::cout, std::cerr);
  }
  if (bench->parsed()) {
    if (!bench_functions.empty()) {
      config.functions.clear();
      for (const auto& name : bench_functions) {
        const auto f = parse_function(name);
        if (!f) {
          std::cerr << "error: unknown function " << name << '\n';
          return cli::kExitUsage;
        }
        config.functions.push_back(*f);
      }
    }
    return cli::cmd_bench(config, std::cout, std::cerr);
  }
  if (gen->parsed()) return cli::cmd_gen_tables(dump ? out_dir : "", std::cout, std::cerr);
  if (verify->parsed()) return cli::cmd_verify(target, default_reference_dir(), std::cout, std::cerr);
  return cli::cmd_selftest(count, seed, std::cout);
}
