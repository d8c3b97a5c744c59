#include <gtest/gtest.h>
#include <mpfr.h>

#include <cmath>
#include <cstring>
#include <random>
#include <string>

#include "mpelem/bigfloat.hpp"
#include "oracle.hpp"

namespace mpelem {
namespace {

using testing::Mpfr;

// Exact conversion through the hex form.
void to_mpfr(mpfr_ptr out, const BigFloat& x) {
  ASSERT_TRUE(x.is_finite());
  mpfr_set_prec(out, std::max<long>(x.bit_length(), 2));
  char* end = nullptr;
  const std::string hex = x.to_hex();
  const int inexact = mpfr_strtofr(out, hex.c_str(), &end, 0, MPFR_RNDN);
  ASSERT_EQ(inexact, 0) << hex;
  ASSERT_EQ(*end, '\0') << hex;
}

std::string random_decimal(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(1, 60), digit(0, 9), exp(-400, 400);
  std::string s = (rng() & 1) ? "-" : "";
  const int n = len(rng);
  const int point = std::uniform_int_distribution<int>(0, n)(rng);
  for (int i = 0; i < n; ++i) {
    if (i == point) s += '.';
    s += char('0' + digit(rng));
  }
  if (rng() & 1) s += "e" + std::to_string(exp(rng));
  return s;
}

TEST(BigFloat, DecimalParseRoundsLikeMpfr) {
  std::mt19937_64 rng(11);
  for (long prec : {24L, 53L, 64L, 200L, 512L, 4608L}) {
    for (int it = 0; it < 400; ++it) {
      const std::string text = random_decimal(rng);
      const BigFloat got = BigFloat::parse(text, prec);
      Mpfr want(prec), have(2);
      mpfr_set_str(want, text.c_str(), 10, MPFR_RNDN);
      if (mpfr_zero_p(want.get())) {
        EXPECT_TRUE(got.is_zero()) << text;
        continue;
      }
      ASSERT_LE(got.bit_length(), prec) << text;
      to_mpfr(have, got);
      EXPECT_EQ(mpfr_cmp(want, have), 0) << text << " at " << prec << " bits: " << got.to_hex();
    }
  }
}

TEST(BigFloat, HalfwayDecimalTiesToEven) {
  // 2^53 + 1 and 2^53 + 3 sit halfway between 53-bit neighbours.
  EXPECT_EQ(BigFloat::parse("9007199254740993", 53), BigFloat::parse("9007199254740992", 53));
  EXPECT_EQ(BigFloat::parse("9007199254740995", 53), BigFloat::parse("9007199254740996", 53));
  EXPECT_EQ(BigFloat::parse("0.1", 53).to_double(), 0.1);
  EXPECT_EQ(BigFloat::parse("-2.5e-300", 53).to_double(), -2.5e-300);
}

TEST(BigFloat, HexIsExact) {
  const BigFloat a = BigFloat::parse("0x1.8p-3");
  EXPECT_EQ(a.to_double(), 0.1875);
  EXPECT_EQ(a.to_hex(), "0x1.8p-3");
  EXPECT_EQ(BigFloat::parse("-0X.Ap+2").to_double(), -2.5);
  EXPECT_EQ(BigFloat::parse("0x0p+0").to_hex(), "0");
  EXPECT_EQ(BigFloat::parse("0x1p+0").to_hex(), "0x1p+0");

  std::mt19937_64 rng(12);
  for (int it = 0; it < 500; ++it) {
    std::vector<std::uint64_t> limbs(1 + rng() % 80);
    for (auto& l : limbs) l = rng();
    const BigFloat x = BigFloat::from_integer(rng() & 1, limbs, std::int64_t(rng() % 20000) - 10000);
    const BigFloat y = BigFloat::parse(x.to_hex(), 10);  // hex ignores the precision
    EXPECT_EQ(x, y);
    Mpfr m(2);
    to_mpfr(m, x);
  }
}

TEST(BigFloat, SpecialValues) {
  EXPECT_TRUE(BigFloat::parse("inf").is_inf());
  EXPECT_TRUE(BigFloat::parse("-Infinity").negative());
  EXPECT_TRUE(BigFloat::parse("nan").is_nan());
  EXPECT_TRUE(BigFloat::parse("-0").negative());
  EXPECT_TRUE(BigFloat::parse("0.000e5").is_zero());
  for (const char* bad : {"", "-", "0x", "1.2.3", "1e", "abc", "0x1p", "1e+x", "0xg"}) {
    EXPECT_THROW(BigFloat::parse(bad), std::invalid_argument) << bad;
  }
}

TEST(BigFloat, DoubleRoundTrip) {
  std::mt19937_64 rng(13);
  for (int it = 0; it < 10000; ++it) {
    double d;
    std::uint64_t bits = rng();
    std::memcpy(&d, &bits, sizeof d);
    if (!std::isfinite(d) || std::fpclassify(d) == FP_SUBNORMAL) continue;
    EXPECT_EQ(BigFloat::from_double(d).to_double(), d);
  }
}

TEST(BigFloat, RoundedMatchesMpfrAndReportsError) {
  std::mt19937_64 rng(14);
  for (int it = 0; it < 2000; ++it) {
    std::vector<std::uint64_t> limbs(1 + rng() % 40);
    for (auto& l : limbs) l = rng();
    if (it % 3 == 0) limbs[0] = std::uint64_t(1) << 63;  // exact ties
    const BigFloat x = BigFloat::from_integer(rng() & 1, limbs, -std::int64_t(rng() % 3000));
    const long p = 2 + long(rng() % 2600);
    Radius err;
    const BigFloat r = x.rounded(p, &err);
    ASSERT_LE(r.bit_length(), p);

    Mpfr mx(2), want(p), have(2), diff(8000);
    to_mpfr(mx, x);
    mpfr_set(want, mx.get(), MPFR_RNDN);
    to_mpfr(have, r);
    EXPECT_EQ(mpfr_cmp(want, have), 0);

    mpfr_sub(diff, mx, have, MPFR_RNDN);
    mpfr_abs(diff, diff, MPFR_RNDN);
    Mpfr bound(2);
    to_mpfr(bound, err.to_bigfloat());
    EXPECT_LE(mpfr_cmp(diff, bound), 0);
  }
}

TEST(BigFloat, ScaledFloor) {
  const BigFloat x = BigFloat::parse("0x3.5p+0");  // 3.3125
  EXPECT_EQ(x.scaled_floor(0), std::vector<std::uint64_t>{3});
  EXPECT_EQ(x.scaled_floor(4), std::vector<std::uint64_t>{53});
  EXPECT_FALSE(x.scaled_exact(3));
  EXPECT_TRUE(x.scaled_exact(4));
  EXPECT_EQ(BigFloat::parse("0x1p+70").scaled_floor(0), (std::vector<std::uint64_t>{0, 64}));
  EXPECT_TRUE(BigFloat::parse("0x1p-70").scaled_floor(0).empty());
}

TEST(BigFloat, Compare) {
  const auto v = [](const char* s) { return BigFloat::parse(s); };
  EXPECT_TRUE(compare(v("-2"), v("-1")) < 0);
  EXPECT_TRUE(compare(v("-1"), v("0")) < 0);
  EXPECT_TRUE(compare(v("0"), v("-0")) == 0);
  EXPECT_TRUE(compare(v("1.0000000000000000000001"), v("1")) > 0);
  EXPECT_TRUE(compare_abs(v("0.5"), v("-0.75")) < 0);
  EXPECT_TRUE(compare(v("0x1.8p0"), v("1.5")) == 0);
}

TEST(BigFloat, DecimalOutput) {
  EXPECT_EQ(BigFloat::parse("1.25e-3").to_decimal(3), "1.25e-3");
  EXPECT_EQ(BigFloat::parse("-123456").to_decimal(4), "-1.234e+5");
  EXPECT_EQ(BigFloat::parse("0x1p+0").to_decimal(1), "1e+0");
  EXPECT_EQ(BigFloat::parse("9.99999").to_decimal(3), "9.99e+0");
  EXPECT_EQ(BigFloat::parse("3.14159265358979323846264338327950288", 4608).to_decimal(30),
            "3.14159265358979323846264338327e+0");
}

TEST(BigFloat, ExactArithmeticMatchesMpfr) {
  std::mt19937_64 rng(16);
  for (int it = 0; it < 3000; ++it) {
    auto make = [&] {
      std::vector<std::uint64_t> limbs(1 + rng() % 6);
      for (auto& l : limbs) l = rng();
      if (rng() % 8 == 0) return BigFloat::zero(rng() & 1);
      return BigFloat::from_integer(rng() & 1, limbs, std::int64_t(rng() % 600) - 300);
    };
    const BigFloat a = make(), b = make();
    Mpfr ma(2), mb(2), sum(4000), diff(4000), prod(4000), got(2);
    to_mpfr(ma, a);
    to_mpfr(mb, b);
    ASSERT_EQ(mpfr_add(sum, ma, mb, MPFR_RNDN), 0);
    ASSERT_EQ(mpfr_sub(diff, ma, mb, MPFR_RNDN), 0);
    ASSERT_EQ(mpfr_mul(prod, ma, mb, MPFR_RNDN), 0);
    const BigFloat s = a + b, d = a - b, p = a * b;
    if (s.is_zero()) EXPECT_TRUE(mpfr_zero_p(sum.get()));
    else { to_mpfr(got, s); EXPECT_EQ(mpfr_cmp(got, sum), 0); }
    if (d.is_zero()) EXPECT_TRUE(mpfr_zero_p(diff.get()));
    else { to_mpfr(got, d); EXPECT_EQ(mpfr_cmp(got, diff), 0); }
    if (p.is_zero()) EXPECT_TRUE(mpfr_zero_p(prod.get()));
    else { to_mpfr(got, p); EXPECT_EQ(mpfr_cmp(got, prod), 0); }
  }
}

TEST(Radius, RoundsUpward) {
  std::mt19937_64 rng(15);
  for (int it = 0; it < 20000; ++it) {
    const std::uint64_t a = rng() >> (rng() % 64), b = rng() >> (rng() % 64);
    const std::int64_t ea = std::int64_t(rng() % 200) - 100, eb = std::int64_t(rng() % 200) - 100;
    const Radius ra = Radius::from_ulps(a, ea), rb = Radius::from_ulps(b, eb);
    Mpfr exact_a(64), exact_b(64), s(512), p(512), got(2);
    mpfr_set_ui_2exp(exact_a, a, ea, MPFR_RNDN);
    mpfr_set_ui_2exp(exact_b, b, eb, MPFR_RNDN);
    to_mpfr(got, ra.to_bigfloat());
    EXPECT_GE(mpfr_cmp(got, exact_a), 0);
    mpfr_add(s, exact_a, exact_b, MPFR_RNDN);
    to_mpfr(got, (ra + rb).to_bigfloat());
    EXPECT_GE(mpfr_cmp(got, s), 0);
    mpfr_mul(p, exact_a, exact_b, MPFR_RNDN);
    to_mpfr(got, (ra * rb).to_bigfloat());
    EXPECT_GE(mpfr_cmp(got, p), 0);
    // no worse than a few relative units at 32 bits
    if (!mpfr_zero_p(s.get())) {
      Mpfr lim(512);
      mpfr_mul_d(lim, s, 1.0 + std::ldexp(1.0, -30), MPFR_RNDU);
      to_mpfr(got, (ra + rb).to_bigfloat());
      EXPECT_LE(mpfr_cmp(got, lim), 0);
    }
  }
  const BigFloat x = BigFloat::parse("-0x1.ffffffff0000000001p+5");
  const Radius above = Radius::above(x);
  EXPECT_TRUE(compare(above.to_bigfloat(), x.abs()) > 0);
  EXPECT_THROW(Radius::above(BigFloat::inf()), std::invalid_argument);
}

}  // namespace
}  // namespace mpelem
