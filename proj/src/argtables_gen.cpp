// Table and constant generation with the library's own kernels.
//
// Each value is first reduced by exact or error-tracked steps to an argument
// below 2^-4, summed with the series evaluators, then expanded back:
//   exp:      x/2^k, then k squarings
//   sin, cos: x/2^k, then k double-angle steps
//   atan:     k halvings u <- u/(1 + sqrt(1 + u^2)), then times 2^k
//   log(1+x): k square roots of 1 + x, then 2^(k+1) atanh((a-1)/(a+1))
// Every step carries an error bound in ulps. The result interval is rounded
// at both ends; if the ends disagree the computation restarts with 64 more
// bits.

#include <cmath>
#include <stdexcept>

#include "mpelem/argtables.hpp"
#include "mpelem/series.hpp"

namespace mpelem {

namespace {

using Limb = std::uint64_t;
using Fx = FixedPoint<Limb>;
constexpr int kB = 64;

// Fixed-point value with one integral limb and an error bound in ulps.
struct Approx {
  Fx v;
  std::uint64_t err = 0;
};

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return a > UINT64_MAX - b ? UINT64_MAX : a + b; }

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  const unsigned __int128 p = (unsigned __int128)a * b;
  return p >> 64 ? UINT64_MAX : std::uint64_t(p);
}

// Upper bound of the value in whole units.
std::uint64_t ceil_units(const Fx& v) { return v[std::size_t(v.nfrac())] + 1; }

Fx dyadic(std::uint64_t num, int shift, int n) {
  if (shift > kB * n) throw std::invalid_argument("dyadic argument finer than the working precision");
  Fx r = Fx::integer(0, n, 1);
  // num * 2^(64n - shift) as a multi-limb integer
  const long pos = long(kB) * n - shift;
  const std::size_t limb = std::size_t(pos / kB);
  const int bit = int(pos % kB);
  r[limb] = num << bit;
  if (bit != 0 && limb + 1 < std::size_t(r.size())) r[limb + 1] = num >> (kB - bit);
  return r;
}

Fx one(int n) { return Fx::integer(1, n, 1); }

Approx mul(const Approx& a, const Approx& b) {
  Fx p = fx_mul(a.v, b.v);
  if (p[std::size_t(p.size() - 1)] != 0) throw std::logic_error("generator product overflow");
  std::uint64_t e = sat_add(sat_mul(ceil_units(a.v), b.err), sat_mul(ceil_units(b.v), a.err));
  e = sat_add(e, 2);  // e_a * e_b * ulp and the truncation
  return {p.resized(a.v.nfrac(), 1), e};
}

// a / b for b >= 2 (so the true divisor exceeds 1 despite its error).
Approx div(const Approx& a, const Approx& b) {
  if (b.v[std::size_t(b.v.nfrac())] < 2) throw std::logic_error("generator divisor below 2");
  Approx r{fx_div(a.v, b.v, a.v.nfrac(), 1), 0};
  r.err = sat_add(sat_add(a.err, sat_mul(ceil_units(a.v), b.err)), 1);
  return r;
}

// sqrt(a) for a >= 1: the derivative is at most 1/2, fx_sqrt truncates.
Approx sqrt_ge1(const Approx& a) {
  if (a.v[std::size_t(a.v.nfrac())] < 1) throw std::logic_error("generator sqrt argument below 1");
  return {fx_sqrt(a.v), sat_add(a.err / 2 + 1, 1)};
}

Approx scale_pow2(const Approx& a, int k) {
  return {fx_shift(a.v, k), sat_mul(a.err, std::uint64_t(1) << k)};
}

// Leading fractional zero bits of (value + err ulp), a rigorous bound for
// the true value: true < 2^-result.
long bound_lz(const Approx& a) {
  Fx hi = a.v;
  mpn::add_1<Limb>(hi.limbs(), hi.limbs(), a.err);
  return hi.frac_leading_zeros();
}

double log2_factorial(int n) { return std::lgamma(double(n) + 1) / std::log(2.0); }

// Smallest N >= 3 with 2^(-lz * step(N)) / den(N) <= 2^-(bits) where step and
// den describe the tail of each series; 0 if none up to kMaxTerms.
int terms_for(SeriesKind kind, long lz, long bits) {
  for (int n = 3; n <= kMaxTerms; ++n) {
    double log2_tail = 0;
    switch (kind) {
      case SeriesKind::kExp: log2_tail = -double(lz) * n - log2_factorial(n) + 1; break;
      case SeriesKind::kSin:
      case SeriesKind::kCos: log2_tail = -double(lz) * 2 * n - log2_factorial(2 * n); break;
      case SeriesKind::kAtan: log2_tail = -double(lz) * (2 * n + 1); break;
      case SeriesKind::kAtanh: log2_tail = -double(lz) * (2 * n + 1) + 1; break;
      case SeriesKind::kSinh: log2_tail = -double(lz) * (2 * n + 1) - log2_factorial(2 * n + 1) + 1; break;
    }
    if (log2_tail <= -double(bits) - 1) return n;
  }
  return 0;
}

Approx gen_exp(std::uint64_t num, int shift, int n) {
  const long bits = long(kB) * n;
  int k = 4, terms;
  Fx s;
  for (;; ++k) {
    s = dyadic(num, shift + k, n).resized(n, 0);
    const long lz = s.frac_leading_zeros();
    if (lz >= 4 && (terms = terms_for(SeriesKind::kExp, lz, bits)) != 0) break;
  }
  Approx r{eval_exp_series(s, terms, factorial_table(kB)), 3};
  for (int i = 0; i < k; ++i) r = mul(r, r);
  return r;
}

std::pair<Approx, Approx> gen_sin_cos(std::uint64_t num, int shift, int n) {
  const long bits = long(kB) * n;
  int k = 4, terms;
  Fx s;
  for (;; ++k) {
    s = dyadic(num, shift + k, n).resized(n, 0);
    const long lz = s.frac_leading_zeros();
    if (lz >= 4 && (terms = terms_for(SeriesKind::kSin, lz, bits)) != 0) break;
  }
  auto sc = eval_sin_cos_series(s, terms, factorial_table(kB), Want::kBoth);
  Approx sin{sc.sin.resized(n, 1), 3}, cos{sc.cos, 3};
  for (int i = 0; i < k; ++i) {
    Approx twice = mul(sin, cos);
    Approx next_sin = scale_pow2(twice, 1);
    Approx sq = mul(sin, sin);
    Approx next_cos{fx_sub(one(n), fx_shift(sq.v, 1)).value, sat_mul(sq.err, 2)};
    sin = next_sin;
    cos = next_cos;
  }
  return {sin, cos};
}

Approx gen_atan(std::uint64_t num, int shift, int n) {
  const long bits = long(kB) * n;
  Approx u{dyadic(num, shift, n), 0};
  int k = 0;
  long lz;
  while ((lz = bound_lz(u)) < 4 || terms_for(SeriesKind::kAtan, lz, bits) == 0) {
    Approx q = mul(u, u);
    q.v = fx_add(q.v, one(n)).value;
    Approx d = sqrt_ge1(q);
    d.v = fx_add(d.v, one(n)).value;
    u = div(u, d);
    ++k;
  }
  const int terms = terms_for(SeriesKind::kAtan, lz, bits);
  Approx r{eval_atan_series(u.v.resized(n, 0), terms, odd_table(kB)).resized(n, 1), sat_add(u.err, 3)};
  return scale_pow2(r, k);
}

Approx gen_log1p(std::uint64_t num, int shift, int n) {
  const long bits = long(kB) * n;
  Approx a{fx_add(dyadic(num, shift, n), one(n)).value, 0};
  int k = 0;
  for (;;) {
    Approx y_num{fx_sub(a.v, one(n)).value, a.err};
    Approx den{fx_add(a.v, one(n)).value, a.err};
    Approx y = div(y_num, den);
    const long lz = bound_lz(y);
    if (lz >= 4 && terms_for(SeriesKind::kAtanh, lz, bits) != 0) {
      const int terms = terms_for(SeriesKind::kAtanh, lz, bits);
      // atanh' <= 1/(1 - y^2) <= 2 on y < 2^-4
      Approx r{eval_atanh_series(y.v.resized(n, 0), terms, odd_table(kB)).resized(n, 1),
               sat_add(sat_mul(y.err, 2), 3)};
      return scale_pow2(r, k + 1);
    }
    a = sqrt_ge1(a);
    ++k;
  }
}

BigFloat to_bigfloat(const Fx& v, std::int64_t offset_ulps) {
  std::vector<Limb> w(v.limbs().begin(), v.limbs().end());
  w.push_back(0);
  bool negative = false;
  if (offset_ulps >= 0) {
    mpn::add_1<Limb>(w, w, Limb(offset_ulps));
  } else if (mpn::sub_1<Limb>(w, w, Limb(-offset_ulps)) != 0) {
    // below zero: the magnitude is the two's complement
    for (auto& limb : w) limb = ~limb;
    mpn::add_1<Limb>(w, w, 1);
    negative = true;
  }
  return BigFloat::from_integer(negative, w, -std::int64_t(kB) * v.nfrac());
}

// Rounds the interval [v - err, v + err] to `bits`; nullopt when the ends
// round differently.
std::optional<BigFloat> decide(const Approx& a, long bits) {
  if (a.err >= (std::uint64_t(1) << 62)) return std::nullopt;
  const std::int64_t e = std::int64_t(a.err);
  const BigFloat lo = to_bigfloat(a.v, -e).rounded(bits);
  const BigFloat hi = to_bigfloat(a.v, e).rounded(bits);
  if (lo != hi) return std::nullopt;
  return lo;
}

Approx approx_value(TableFunction f, std::uint64_t num, int shift, int n) {
  switch (f) {
    case TableFunction::kExp: return gen_exp(num, shift, n);
    case TableFunction::kSin: return gen_sin_cos(num, shift, n).first;
    case TableFunction::kCos: return gen_sin_cos(num, shift, n).second;
    case TableFunction::kLog: return gen_log1p(num, shift, n);
    case TableFunction::kAtan: return gen_atan(num, shift, n);
  }
  throw std::logic_error("unknown table function");
}

}  // namespace

BigFloat gen_function_value(TableFunction f, std::uint64_t num, int shift, long bits) {
  if (bits < 2) throw std::invalid_argument("precision below 2 bits");
  if (shift < 0 || shift > 62 || num > (std::uint64_t(1) << shift)) {
    throw std::invalid_argument("argument outside [0, 1]");
  }
  if (num == 0) {
    const bool is_one = f == TableFunction::kExp || f == TableFunction::kCos;
    return is_one ? BigFloat::from_int(1) : BigFloat::zero();
  }
  for (long w = bits + 64; w <= bits + 64 * 8; w += 64) {
    const int n = int((w + kB - 1) / kB);
    if (auto r = decide(approx_value(f, num, shift, n), bits)) return *r;
  }
  throw std::runtime_error("table generation failed to converge");
}

BigFloat gen_constant(Constant c, long bits) {
  switch (c) {
    case Constant::kPiOver4: return gen_function_value(TableFunction::kAtan, 1, 0, bits);
    case Constant::kPiOver2: return gen_function_value(TableFunction::kAtan, 1, 0, bits).mul_pow2(1);
    case Constant::kLog2: return gen_function_value(TableFunction::kLog, 1, 0, bits);
  }
  throw std::logic_error("unknown constant");
}

ArgRedTable gen_argred_table(TableFunction f, Band b) {
  const TableSpec& spec = table_spec(f, b);
  std::vector<BigFloat> entries;
  entries.reserve(std::size_t(spec.total_entries()));
  for (int which = 1; which <= spec.chain_count; ++which) {
    for (int i = 0; i < spec.counts[std::size_t(which - 1)]; ++i) {
      entries.push_back(gen_function_value(f, std::uint64_t(i), spec.grid_shift(which), spec.precision));
    }
  }
  return ArgRedTable(spec, std::move(entries));
}

}  // namespace mpelem
