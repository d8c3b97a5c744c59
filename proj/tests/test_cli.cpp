#include <gtest/gtest.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "function_oracle.hpp"
#include "mpelem/cli.hpp"

using namespace mpelem;
using namespace mpelem::testing;
namespace fs = std::filesystem;

namespace {

const fs::path kGolden = MPELEM_GOLDEN_DIR;

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> fields(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string key, value;
  while (in >> key >> value) out[key] = value;
  return out;
}

struct Outcome {
  int status;
  std::string out, err;
};

template <class Fn>
Outcome run(Fn&& fn) {
  std::ostringstream out, err;
  const int status = fn(out, err);
  return {status, out.str(), err.str()};
}

// Half an ulp of the last place of a reference given in hex at `prec` bits.
Radius half_ulp(const BigFloat& ref, long prec) { return Radius::pow2(ref.exponent() - prec - 1); }

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mpelem_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(CliEval, MatchesGoldenOutput) {
  const struct {
    Function f;
    const char* x;
    long p;
    const char* file;
  } cases[] = {
      {Function::kAtan, "1", 53, "eval_atan_1_53.txt"},
      {Function::kExp, "0.1", 256, "eval_exp_0.1_256.txt"},
      {Function::kLog, "0x1.8p+1", 128, "eval_log_3_128.txt"},
      {Function::kSin, "-0x1.921fb54442d18p+1", 64, "eval_sin_negpi_64.txt"},
      {Function::kCos, "1e10", 100, "eval_cos_1e10_100.txt"},
  };
  for (const auto& c : cases) {
    const Outcome r = run([&](auto& out, auto& err) { return cli::cmd_eval(c.f, c.x, c.p, out, err); });
    EXPECT_EQ(r.status, cli::kExitOk);
    EXPECT_EQ(r.out, slurp(kGolden / c.file)) << c.file;
  }
}

TEST(CliEval, GoldenBallsContainMpfrValues) {
  const struct {
    Function f;
    const char* x;
    const char* file;
  } cases[] = {
      {Function::kAtan, "1", "eval_atan_1_53.txt"},
      {Function::kExp, "0.1", "eval_exp_0.1_256.txt"},
      {Function::kLog, "0x1.8p+1", "eval_log_3_128.txt"},
      {Function::kSin, "-0x1.921fb54442d18p+1", "eval_sin_negpi_64.txt"},
      {Function::kCos, "1e10", "eval_cos_1e10_100.txt"},
  };
  Mpfr ref(2);
  for (const auto& c : cases) {
    auto g = fields(slurp(kGolden / c.file));
    const long p = std::stol(g["precision"]);
    const Ball b{BigFloat::parse(g["mid"]), Radius::above(BigFloat::parse(g["radius"]))};
    reference_for(c.f, BigFloat::parse(c.x), b, p, ref);
    EXPECT_TRUE(ball_contains(b, ref)) << c.file;
    EXPECT_TRUE(radius_relative_ok(b, p)) << c.file;
  }
}

TEST(CliEval, AtanOneIsQuarterPi) {
  auto g = fields(slurp(kGolden / "eval_atan_1_53.txt"));
  EXPECT_EQ(g["mid"], "0x1.921fb54442d18p-1");
  EXPECT_EQ(g["path"], "unit");
}

TEST(CliEval, ErrorsAndExitStatus) {
  Outcome r = run([](auto& out, auto& err) { return cli::cmd_eval(Function::kLog, "0", 53, out, err); });
  EXPECT_EQ(r.status, cli::kExitFailure);
  EXPECT_NE(r.err.find("DomainError"), std::string::npos);
  EXPECT_TRUE(r.out.empty());

  r = run([](auto& out, auto& err) { return cli::cmd_eval(Function::kExp, "0x1.g", 53, out, err); });
  EXPECT_EQ(r.status, cli::kExitUsage);

  r = run([](auto& out, auto& err) { return cli::cmd_eval(Function::kAtan, "0.7", 4605, out, err); });
  EXPECT_EQ(r.status, cli::kExitFailure);
  EXPECT_NE(r.err.find("UnsupportedPrecision"), std::string::npos);
}

TEST(CliBatch, MatchesGoldenAndContainsReferences) {
  std::ifstream vectors(kGolden / "vectors_exp.txt");
  const Outcome r = run([&](auto& out, auto& err) { return cli::cmd_eval_batch(vectors, out, err); });
  ASSERT_EQ(r.status, cli::kExitOk) << r.err;
  EXPECT_EQ(r.out, slurp(kGolden / "balls_exp.txt"));

  // every finite reference at p + 64 bits lies in its ball
  std::istringstream in_vec(slurp(kGolden / "vectors_exp.txt")), in_out(r.out);
  std::string vline, bline;
  std::getline(in_vec, vline);
  std::getline(in_out, bline);
  EXPECT_EQ(bline, "# mpelem-balls v1 function=exp count=4");
  int checked = 0;
  while (std::getline(in_vec, vline) && std::getline(in_out, bline)) {
    std::istringstream v(vline), b(bline);
    long p, q;
    std::string x, yref, mid, rad;
    v >> p >> x >> yref;
    b >> q >> mid >> rad;
    EXPECT_EQ(p, q);
    if (mid == "error") continue;
    const BigFloat y = BigFloat::parse(yref), m = BigFloat::parse(mid);
    const Radius slack = Radius::above(BigFloat::parse(rad));
    EXPECT_TRUE(Radius::above(y - m) + half_ulp(y, p + 64) <= slack) << vline;
    ++checked;
  }
  EXPECT_EQ(checked, 3);
}

TEST(CliBatch, RejectsMalformedFiles) {
  auto status = [](const std::string& text) {
    std::istringstream in(text);
    return run([&](auto& out, auto& err) { return cli::cmd_eval_batch(in, out, err); }).status;
  };
  EXPECT_EQ(status(""), cli::kExitUsage);
  EXPECT_EQ(status("# mpelem-vectors v2 function=exp count=0\n"), cli::kExitUsage);
  EXPECT_EQ(status("# mpelem-vectors v1 function=tan count=0\n"), cli::kExitUsage);
  EXPECT_EQ(status("# mpelem-vectors v1 function=exp count=2\n53 0x1p-1 0x1p0\n"), cli::kExitUsage);
  EXPECT_EQ(status("# mpelem-vectors v1 function=exp count=1\n53 zz 0x1p0\n"), cli::kExitUsage);
  EXPECT_EQ(status("# mpelem-vectors v1 function=exp count=1\n53 0x1p-1\n"), cli::kExitUsage);
  EXPECT_EQ(status("# mpelem-vectors v1 function=log count=1\n# comment\n\n53 0x1p+1 0x1p0\n"), cli::kExitOk);
}

TEST(CliBench, DefaultConfigCoversTheLadder) {
  const cli::BenchConfig config;
  EXPECT_EQ(config.validate(), "");
  EXPECT_EQ(config.functions.size() * config.precisions.size(), 45u);
  EXPECT_EQ(config.precisions, (std::vector<long>{32, 53, 64, 128, 256, 512, 1024, 2048, 4096}));
  EXPECT_EQ(config.repetitions, 5);
  EXPECT_DOUBLE_EQ(config.min_seconds, 0.1);
  EXPECT_EQ(BigFloat::parse(config.input).to_double(), 2.414213562373095);
}

TEST(CliBench, CsvSchemaRoundTrips) {
  cli::BenchConfig config;
  config.precisions = {53, 256};
  config.min_seconds = 0.002;
  config.repetitions = 1;
  const Outcome r = run([&](auto& out, auto& err) { return cli::cmd_bench(config, out, err); });
  ASSERT_EQ(r.status, cli::kExitOk);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "function,precision_bits,ns_per_call");
  std::istringstream in(r.out);
  const auto rows = cli::parse_bench_csv(in);
  ASSERT_EQ(rows.size(), 10u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].function, kFunctions[i / 2]);
    EXPECT_EQ(rows[i].precision, i % 2 ? 256 : 53);
    EXPECT_GT(rows[i].ns_per_call, 0);
  }
}

TEST(CliBench, RejectsBadConfigs) {
  auto status = [](cli::BenchConfig c) {
    return run([&](auto& out, auto& err) { return cli::cmd_bench(c, out, err); }).status;
  };
  cli::BenchConfig c;
  c.precisions = {1};
  EXPECT_EQ(status(c), cli::kExitUsage);
  c = {};
  c.precisions = {4605};
  EXPECT_EQ(status(c), cli::kExitUsage);
  c = {};
  c.min_seconds = 0;
  EXPECT_EQ(status(c), cli::kExitUsage);
  c = {};
  c.functions.clear();
  EXPECT_EQ(status(c), cli::kExitUsage);
  c = {};
  c.input = "pi";
  EXPECT_EQ(status(c), cli::kExitUsage);
}

TEST(CliTables, GenTablesMatchesEmbeddedAndGolden) {
  const Outcome r = run([](auto& out, auto& err) { return cli::cmd_gen_tables("", out, err); });
  EXPECT_EQ(r.status, cli::kExitOk);
  EXPECT_EQ(r.out, slurp(kGolden / "gen_tables.txt"));
}

TEST(CliTables, DumpsEqualTheIndependentReference) {
  const fs::path dir = scratch_dir("dump");
  const Outcome r = run([&](auto& out, auto& err) { return cli::cmd_gen_tables(dir.string(), out, err); });
  ASSERT_EQ(r.status, cli::kExitOk) << r.err;
  int files = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    EXPECT_EQ(slurp(entry.path()), slurp(fs::path(default_reference_dir()) / entry.path().filename()))
        << entry.path().filename();
    ++files;
  }
  EXPECT_EQ(files, 10);
  fs::remove_all(dir);
}

TEST(CliVerify, PristineTablesPass) {
  const Outcome r = run([](auto& out, auto& err) { return cli::cmd_verify("tables", default_reference_dir(), out, err); });
  EXPECT_EQ(r.status, cli::kExitOk) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 10);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(CliVerify, CorruptedReferenceFails) {
  const fs::path dir = scratch_dir("corrupt");
  for (const auto& entry : fs::directory_iterator(default_reference_dir())) {
    fs::copy_file(entry.path(), dir / entry.path().filename());
  }
  // flip one hex digit of the third exp entry
  std::string text = slurp(dir / "exp_fast.txt");
  std::size_t at = 0;
  for (int line = 0; line < 3; ++line) at = text.find('\n', at) + 1;
  text[at] = text[at] == '0' ? '1' : '0';
  std::ofstream(dir / "exp_fast.txt") << text;

  const Outcome r = run([&](auto& out, auto& err) { return cli::cmd_verify("tables", dir.string(), out, err); });
  EXPECT_EQ(r.status, cli::kExitFailure);
  EXPECT_NE(r.out.find("table exp fast entries=178 FAIL"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("mismatch"), std::string::npos);
  fs::remove_all(dir);
}

TEST(CliVerify, MissingReferenceIsReportedDistinctly) {
  const Outcome r = run([](auto& out, auto& err) { return cli::cmd_verify("tables", "/nonexistent/mpelem", out, err); });
  EXPECT_EQ(r.status, cli::kExitFailure);
  EXPECT_NE(r.err.find("reference tables unavailable"), std::string::npos);
}

TEST(CliVerify, SeriesDoesNotReadReferenceFiles) {
  const Outcome r = run([](auto& out, auto& err) { return cli::cmd_verify("series", "/nonexistent/mpelem", out, err); });
  EXPECT_EQ(r.status, cli::kExitOk) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 10);
  EXPECT_EQ(r.out.find("table"), std::string::npos);
}

TEST(CliVerify, UnknownTargetIsUsageError) {
  const Outcome r = run([](auto& out, auto& err) { return cli::cmd_verify("everything", ".", out, err); });
  EXPECT_EQ(r.status, cli::kExitUsage);
}

TEST(CliSelftest, Passes) {
  std::ostringstream out;
  EXPECT_EQ(cli::cmd_selftest(40, 7, out), cli::kExitOk) << out.str();
  const std::string text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}
