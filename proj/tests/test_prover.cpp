#include "mpelem/prover.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"

namespace mpelem {
namespace {

DenomTable with_breaks_recomputed(DenomTable t) {
  t.breaks.clear();
  for (std::size_t i = 0; i + 1 < t.v.size(); ++i) {
    if (t.v[i] != t.v[i + 1]) t.breaks.push_back(int(i));
  }
  return t;
}

TEST(Prover, GenuineTablesPass) {
  const auto atan64 = prove_series(SeriesKind::kAtan, 64, odd_table(64), 300);
  EXPECT_TRUE(atan64.passed) << atan64.summary();
  EXPECT_LE(atan64.worst_final_error, 2);
  EXPECT_EQ(atan64.final_error.size(), 298u);
  const auto exp32 = prove_series(SeriesKind::kExp, 32, factorial_table(32), 300);
  EXPECT_TRUE(exp32.passed) << exp32.summary();
  for (int bits : {32, 64}) {
    const auto sinh = prove_series(SeriesKind::kSinh, bits, factorial_table(bits));
    EXPECT_TRUE(sinh.passed) << sinh.summary();
  }
}

TEST(Prover, ProveAllCoversTenConfigurations) {
  const auto reports = prove_all();
  ASSERT_EQ(reports.size(), 10u);
  for (const auto& r : reports) {
    EXPECT_TRUE(r.passed) << r.summary();
    EXPECT_LE(r.worst_final_error, 2);
    EXPECT_GT(r.checks.count(SeriesLine::kAddMul), 0u);
  }
}

TEST(Prover, SingleTermCountIsTrivial) {
  const auto reports = prove_all(3);
  ASSERT_EQ(reports.size(), 10u);
  for (const auto& r : reports) {
    EXPECT_TRUE(r.passed) << r.summary();
    EXPECT_EQ(r.final_error.size(), 1u);
  }
}

TEST(Prover, NearMaximalDenominatorOverflows) {
  auto t = odd_table(64);
  t.v[5] = ~std::uint64_t(0);
  const auto r = prove_series(SeriesKind::kAtan, 64, with_breaks_recomputed(t), 300);
  ASSERT_FALSE(r.passed);
  ASSERT_TRUE(r.failure.has_value());
  ASSERT_TRUE(r.failure->line.has_value());
  const auto line = *r.failure->line;
  EXPECT_TRUE(line == SeriesLine::kDenomAdd || line == SeriesLine::kDenomMul || line == SeriesLine::kDenomDiv ||
              line == SeriesLine::kDenomSub)
      << r.summary();
  EXPECT_TRUE(r.failure->check == ProofCheck::kMagnitude || r.failure->check == ProofCheck::kProductWidth ||
              r.failure->check == ProofCheck::kNonnegative)
      << r.summary();
}

TEST(Prover, CoefficientOffByOneIsCaught) {
  for (auto kind : {SeriesKind::kAtan, SeriesKind::kExp, SeriesKind::kCos}) {
    for (int bits : {32, 64}) {
      auto t = default_table(kind, bits);
      t.u[7] += 1;
      const auto r = prove_series(kind, bits, t, 300);
      EXPECT_FALSE(r.passed) << to_string(kind) << bits;
      ASSERT_TRUE(r.failure.has_value());
      EXPECT_TRUE(r.failure->check == ProofCheck::kFinalError || r.failure->check == ProofCheck::kIdentity);
    }
  }
}

TEST(Prover, Deterministic) {
  const auto a = prove_series(SeriesKind::kCos, 32, factorial_table(32), 60);
  const auto b = prove_series(SeriesKind::kCos, 32, factorial_table(32), 60);
  EXPECT_EQ(a.final_error, b.final_error);
  EXPECT_EQ(a.checks, b.checks);
}

TEST(Prover, RejectsMismatchedTable) {
  EXPECT_THROW(prove_series(SeriesKind::kExp, 64, odd_table(64)), std::invalid_argument);
  EXPECT_THROW(prove_series(SeriesKind::kAtan, 32, odd_table(64)), std::invalid_argument);
}

// Exact replay of the evaluator: the value S would hold at each traced point
// if every operation were exact and X were known exactly.
std::vector<mpq_class> exact_replay(SeriesKind kind, const mpq_class& x, int n_terms, const DenomTable& t) {
  const bool alternating = kind == SeriesKind::kAtan || kind == SeriesKind::kSin || kind == SeriesKind::kCos;
  const mpq_class base = kind == SeriesKind::kExp ? x : mpq_class(x * x);
  const int m = splitting_parameter(n_terms);
  std::vector<mpq_class> pw(std::size_t(m) + 1, 1);
  for (int j = 1; j <= m; ++j) pw[std::size_t(j)] = pw[std::size_t(j - 1)] * base;
  auto q = [](std::uint64_t v) { return mpq_class(mpz_class(std::to_string(v))); };
  std::vector<mpq_class> out;
  mpq_class s = 0;
  for (int k = n_terms - 1; k >= 0; --k) {
    const int idx = coeff_index(kind, k);
    const bool negative = alternating && k % 2 == 0;
    if (k < n_terms - 1) {
      const int idx_next = coeff_index(kind, k + 1);
      if (t.kind == DenomKind::kOdd && t.v[std::size_t(idx)] != t.v[std::size_t(idx_next)]) {
        const mpq_class vn = q(t.v[std::size_t(idx)]), vo = q(t.v[std::size_t(idx_next)]);
        if (negative) out.push_back(s += vo);
        out.push_back(s *= vn);
        out.push_back(s /= vo);
        if (negative) out.push_back(s -= vn);
      } else if (t.kind == DenomKind::kFactorial) {
        for (int b = idx_next - 1; b >= idx; --b) {
          if (!t.is_break(std::size_t(b))) continue;
          const mpq_class vo = q(t.v[std::size_t(b + 1)]);
          if (negative) out.push_back(s += vo);
          out.push_back(s /= vo);
          if (negative) out.push_back(s -= 1);
        }
      }
    }
    const mpq_class u = q(t.u[std::size_t(idx)]);
    const bool sub = alternating && k % 2 == 1;
    if (k % m == 0) {
      out.push_back(s += sub ? mpq_class(-u) : u);
      if (k != 0) out.push_back(s *= pw[std::size_t(m)]);
    } else {
      out.push_back(s += (sub ? mpq_class(-u) : u) * pw[std::size_t(k % m)]);
    }
  }
  out.push_back(s /= q(t.v[std::size_t(coeff_index(kind, 0))]));
  if (kind != SeriesKind::kExp && kind != SeriesKind::kCos) out.push_back(s *= x);
  return out;
}

// The representative of the traced limbs closest to `near`.
template <LimbType Limb>
mpq_class traced_value(const std::vector<Limb>& limbs, int nfrac, const mpq_class& near) {
  const int bits = kLimbBits<Limb> * int(limbs.size());
  const mpq_class modulus(mpz_class(1) << (bits - kLimbBits<Limb> * nfrac));
  mpq_class v = testing::limbs_to_mpq<Limb>(std::span<const Limb>(limbs), nfrac, false);
  while (v - near > modulus / 2) v -= modulus;
  while (near - v > modulus / 2) v += modulus;
  return v;
}

template <LimbType Limb>
void spot_check(std::mt19937_64& rng, int& executions) {
  constexpr SeriesKind kinds[] = {SeriesKind::kAtan, SeriesKind::kAtanh, SeriesKind::kExp,
                                  SeriesKind::kSin,  SeriesKind::kCos,   SeriesKind::kSinh};
  const SeriesKind kind = kinds[rng() % 6];
  const int n = 1 + int(rng() % 6);
  const int n_terms = 3 + int(rng() % (kMaxTerms - 2));
  const auto& table = default_table(kind, kLimbBits<Limb>);
  auto x = testing::random_small<Limb>(rng, n, 4, rng() % 3 == 0);
  if (rng() % 10 == 0) {  // largest admissible argument
    for (auto& l : x.limbs()) l = ~Limb(0);
    x = fx_shift(x, -4);
  }

  SeriesTrace<Limb> trace;
  if (kind == SeriesKind::kSin) {
    eval_sin_cos_series(x, n_terms, table, Want::kSin, &trace, static_cast<SeriesTrace<Limb>*>(nullptr));
  } else if (kind == SeriesKind::kCos) {
    eval_sin_cos_series(x, n_terms, table, Want::kCos, static_cast<SeriesTrace<Limb>*>(nullptr), &trace);
  } else {
    eval_series(kind, x, n_terms, table, &trace);
  }
  const auto bounds = series_point_bounds(kind, kLimbBits<Limb>, table, n_terms);
  const auto exact = exact_replay(kind, testing::to_mpq(x), n_terms, table);
  ASSERT_EQ(trace.points.size(), bounds.size()) << to_string(kind) << " N=" << n_terms;
  ASSERT_EQ(exact.size(), bounds.size());
  const mpq_class ulp = testing::ulp_of(kLimbBits<Limb>, n);
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    const auto& p = trace.points[i];
    ASSERT_EQ(p.line, bounds[i].line);
    ASSERT_EQ(p.k, bounds[i].k);
    const mpq_class got = traced_value<Limb>(p.s, n, exact[i]);
    const mpq_class err = abs(got - exact[i]) / ulp;
    ASSERT_LE(abs(exact[i]), bounds[i].value.max_magnitude)
        << to_string(kind) << " N=" << n_terms << " point " << i << " " << to_string(p.line) << " k=" << p.k;
    ASSERT_LE(err, bounds[i].value.max_error)
        << to_string(kind) << " N=" << n_terms << " point " << i << " " << to_string(p.line) << " k=" << p.k;
    ASSERT_LE(abs(got), bounds[i].value.computed_bound(ulp));
  }
  ++executions;
}

TEST(ProverSoundness, ConcreteRunsStayWithinBounds) {
  std::mt19937_64 rng(2024);
  int executions = 0;
  for (int it = 0; it < 1000; ++it) {
    if (it % 2) spot_check<std::uint32_t>(rng, executions);
    else spot_check<std::uint64_t>(rng, executions);
    if (::testing::Test::HasFatalFailure()) return;
  }
  EXPECT_EQ(executions, 1000);
}

}  // namespace
}  // namespace mpelem
