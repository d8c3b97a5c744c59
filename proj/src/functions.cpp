#include "mpelem/functions.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace mpelem {

namespace {

template <LimbType Limb>
using Fx = FixedPoint<Limb>;

// Extra bits of working precision beyond w. They absorb the ulp counts of
// the longer reduction chains so that Z * 2^-(Bn) + tail <= 10 * 2^-w.
constexpr long kExpHeadroom = 3;
constexpr long kLogHeadroom = 3;
constexpr long kSinCosHeadroom = 4;

[[noreturn]] void fail(ErrorCode code, const std::string& what) { throw EvalError(code, what); }

void check_precision(long p) {
  if (p < 2) fail(ErrorCode::kInvalidInput, "precision below 2 bits");
}

long limbs_for(long bits, int b) { return (bits + b - 1) / b; }

template <LimbType Limb>
int working_limbs(long w, long headroom) {
  constexpr int B = kLimbBits<Limb>;
  return int(std::min(limbs_for(w + headroom, B), kMaxWorkingBits / B));
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return a > UINT64_MAX - b ? UINT64_MAX : a + b; }

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  const unsigned __int128 p = (unsigned __int128)a * b;
  return p >> 64 ? UINT64_MAX : std::uint64_t(p);
}

template <LimbType Limb>
Fx<Limb> from_words(const std::vector<std::uint64_t>& words, int nfrac, int nint) {
  constexpr int B = kLimbBits<Limb>;
  Fx<Limb> r(nfrac, nint);
  const auto limbs = r.limbs();
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (int h = 0; h < 64 / B; ++h) {
      const std::size_t at = i * std::size_t(64 / B) + std::size_t(h);
      const Limb part = Limb(words[i] >> (B * h % 64));
      if (at < limbs.size()) limbs[at] = part;
      else if (part != 0) throw std::logic_error("value does not fit the fixed-point layout");
    }
  }
  return r;
}

// floor(|a| * 2^(B*nfrac)) as a fixed-point number.
template <LimbType Limb>
Fx<Limb> to_fixed(const BigFloat& a, int nfrac, int nint) {
  return from_words<Limb>(a.scaled_floor(std::int64_t(kLimbBits<Limb>) * nfrac), nfrac, nint);
}

template <LimbType Limb>
BigFloat to_bigfloat(const Fx<Limb>& v, bool negative) {
  constexpr int B = kLimbBits<Limb>;
  std::vector<std::uint64_t> words((std::size_t(v.size()) * B + 63) / 64, 0);
  for (std::size_t i = 0; i < std::size_t(v.size()); ++i) {
    words[i * B / 64] |= std::uint64_t(v[i]) << (i * B % 64);
  }
  return BigFloat::from_integer(negative, words, -std::int64_t(B) * v.nfrac());
}

template <LimbType Limb>
Fx<Limb> constant_fixed(Constant c, int nfrac) {
  if (long(kLimbBits<Limb>) * nfrac > kConstantBits) {
    fail(ErrorCode::kUnsupportedPrecision, std::string("constant ") + to_string(c) + " requested beyond its stored precision");
  }
  return to_fixed<Limb>(builtin_constant(c), nfrac, 1);
}

// Fixed-point value with one integral limb (or none) and an error in ulps.
template <LimbType Limb>
struct Approx {
  Fx<Limb> v;
  std::uint64_t err = 0;
};

template <LimbType Limb>
std::uint64_t ceil_units(const Fx<Limb>& v) {
  return v.nint() == 0 ? 1 : std::uint64_t(v[std::size_t(v.nfrac())]) + 1;
}

// Truncated product with both layouts widened to one integral limb.
template <LimbType Limb>
Approx<Limb> mul(const Approx<Limb>& a, const Approx<Limb>& b) {
  const int n = a.v.nfrac();
  Fx<Limb> p = fx_mul(a.v.resized(n, 1), b.v.resized(n, 1));
  if (p[std::size_t(n + 1)] != 0) throw std::logic_error("fixed-point product overflow");
  std::uint64_t e = sat_add(sat_mul(ceil_units(a.v), b.err), sat_mul(ceil_units(b.v), a.err));
  e = sat_add(e, (a.err != 0 && b.err != 0) ? 2 : 1);  // e_a * e_b ulp^2 and the truncation
  return {p.resized(n, 1), e};
}

template <LimbType Limb>
Approx<Limb> add(const Approx<Limb>& a, const Approx<Limb>& b) {
  const int n = a.v.nfrac();
  return {fx_add(a.v.resized(n, 1), b.v.resized(n, 1)).value, sat_add(a.err, b.err)};
}

// a - b for a >= b.
template <LimbType Limb>
Approx<Limb> sub(const Approx<Limb>& a, const Approx<Limb>& b) {
  const int n = a.v.nfrac();
  auto d = fx_sub(a.v.resized(n, 1), b.v.resized(n, 1));
  if (d.carry != 0) throw std::logic_error("fixed-point difference below zero");
  return {d.value, sat_add(a.err, b.err)};
}

// Removes floor(2^shift * X) from X in [0, 1) and returns it; exact.
template <LimbType Limb>
std::uint64_t split_index(Fx<Limb>& x, int shift) {
  const int n = x.nfrac();
  Fx<Limb> wide = fx_shift(x.resized(n, 1), shift);
  const std::uint64_t idx = wide[std::size_t(n)];
  wide[std::size_t(n)] = 0;
  x = fx_shift(wide, -shift).resized(n, 0);
  return idx;
}

// Sum over 2 <= i <= k of floor(log2 i), a lower bound for log2(k!).
long log2_factorial_floor(long k) {
  long s = 0;
  for (long i = 2; i <= k; ++i) s += std::bit_width(std::uint64_t(i)) - 1;
  return s;
}

struct TermChoice {
  int terms = 0;
  long tail_exp = 0;  // truncation error <= 2^-tail_exp
};

// Smallest N >= 3 whose tail bound on X < 2^-r is at most 2^-target.
TermChoice choose_terms(SeriesKind kind, long r, long target) {
  for (int n = 3; n < kMaxTerms; ++n) {
    long e = 0;
    switch (kind) {
      case SeriesKind::kExp: e = r * n + log2_factorial_floor(n) - 1; break;
      case SeriesKind::kSin: e = r * (2 * n + 1) + log2_factorial_floor(2 * n + 1); break;
      case SeriesKind::kCos: e = r * 2 * n + log2_factorial_floor(2 * n); break;
      case SeriesKind::kSinh: e = r * (2 * n + 1) + log2_factorial_floor(2 * n + 1) - 1; break;
      case SeriesKind::kAtan: e = r * (2 * n + 1); break;
      case SeriesKind::kAtanh: e = r * (2 * n + 1) - 1; break;
    }
    if (e >= target) return {n, e};
  }
  throw std::logic_error("series would need more terms than the proven range");
}

Ball finish(const BigFloat& mid, const Radius& rad, long p, EvalInfo* info, const Radius& stored_error = {}) {
  if (info) info->unrounded = {mid, rad};
  Radius err = rad + stored_error;
  BigFloat y = mid.rounded(p, &err);
  return {std::move(y), err};
}

Ball exact(const BigFloat& v, EvalInfo* info, const char* path) {
  if (info) {
    info->path = path;
    info->unrounded = {v, Radius()};
  }
  return {v, Radius()};
}

// Half an ulp of a stored constant of magnitude below 2^e.
Radius stored_half_ulp(std::int64_t e) { return Radius::pow2(e - kConstantBits - 1); }

template <LimbType Limb>
void record(EvalInfo* info, const char* path, long w, int n, long r, int terms, std::uint64_t z, const Radius& tail) {
  if (!info) return;
  info->path = path;
  info->w = w;
  info->limb_bits = kLimbBits<Limb>;
  info->limbs = n;
  info->r = r;
  info->terms = terms;
  info->ulps = z;
  info->tail = tail;
}

}  // namespace

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnsupportedPrecision: return "UnsupportedPrecision";
    case ErrorCode::kUnsupportedArgument: return "UnsupportedArgument";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kInvalidInput: return "InvalidInput";
  }
  return "?";
}

const char* to_string(Function f) {
  switch (f) {
    case Function::kAtan: return "atan";
    case Function::kExp: return "exp";
    case Function::kLog: return "log";
    case Function::kSin: return "sin";
    case Function::kCos: return "cos";
  }
  return "?";
}

std::optional<Function> parse_function(std::string_view s) {
  for (auto f : kFunctions) {
    if (s == to_string(f)) return f;
  }
  return std::nullopt;
}

template <LimbType Limb>
FixedPoint<Limb> get_constant(Constant c, long w) {
  if (w < 1) throw std::invalid_argument("constant precision below 1 bit");
  return constant_fixed<Limb>(c, int(limbs_for(w, kLimbBits<Limb>)));
}

template FixedPoint<std::uint32_t> get_constant(Constant, long);
template FixedPoint<std::uint64_t> get_constant(Constant, long);

namespace detail {

// atan: special cases, then |x| or 1/|x| in fixed point, up to two table
// reductions X <- (2^s X - p)/(2^s + p X), the series, the table values
// added back and pi/2 - Y for |x| > 1. Each truncation is one ulp in Z.
template <LimbType Limb>
Ball atan_ball(const BigFloat& x, long p, EvalInfo* info) {
  constexpr int B = kLimbBits<Limb>;
  check_precision(p);
  if (x.is_nan()) fail(ErrorCode::kInvalidInput, "atan of NaN");
  if (x.is_zero()) return exact(x, info, "exact");
  const BigFloat& half_pi = builtin_constant(Constant::kPiOver2);
  const BigFloat& quarter_pi = builtin_constant(Constant::kPiOver4);
  const bool neg = x.negative();
  if (x.is_inf()) {
    const BigFloat y = (neg ? -half_pi : half_pi).rounded(p);
    if (info) {
      info->path = "inf";
      info->unrounded = {y, Radius::pow2(1 - p)};
    }
    return {y, Radius::pow2(1 - p)};
  }
  const std::int64_t e = x.exponent();
  if (2 * e < -p - 4) {
    record<Limb>(info, "tiny", 0, 0, 0, 0, 0, Radius());
    return finish(x, Radius::pow2(3 * e), p, info);
  }
  if (e > p + 2) {
    record<Limb>(info, "huge", 0, 0, 0, 0, 0, Radius());
    return finish(neg ? -half_pi : half_pi, Radius::pow2(1 - e), p, info, stored_half_ulp(1));
  }
  const bool above_one = e > 0;
  if (compare_abs(x, BigFloat::from_int(1)) == 0) {
    record<Limb>(info, "unit", 0, 0, 0, 0, 0, Radius());
    return finish(neg ? -quarter_pi : quarter_pi, Radius(), p, info, stored_half_ulp(0));
  }

  const long w = p - std::min<std::int64_t>(0, e) + 4;
  if (w > kMaxWorkingBits) fail(ErrorCode::kUnsupportedPrecision, "atan needs more than 4608 working bits");
  const int n = int(limbs_for(w, B));
  const long bn = long(B) * n;

  Fx<Limb> X;
  if (!above_one) {
    X = to_fixed<Limb>(x, n, 0);
  } else {
    // truncating |x| first moves 1/|x| up by less than an ulp and the division
    // moves it down by less than an ulp
    const Fx<Limb> xf = to_fixed<Limb>(x, n, int(limbs_for(e, B)));
    if (xf == Fx<Limb>::integer(1, n, xf.nint())) {
      // 1 < |x| < 1 + ulp: 1/|x| is within an ulp below 1
      X = Fx<Limb>(n, 0);
      for (auto& l : X.limbs()) l = ~Limb(0);
    } else {
      X = fx_div(Fx<Limb>::integer(1, n, 1), xf, n, 0);
    }
  }
  std::uint64_t z = 1;

  const Band band = band_for(w);
  const TableSpec& spec = table_spec(TableFunction::kAtan, band);
  const ArgRedTable& table = builtin_table(TableFunction::kAtan, band);
  std::uint64_t idx[2] = {0, 0};
  for (int which = 1; which <= spec.chain_count; ++which) {
    const int s = spec.grid_shift(which);
    const Fx<Limb> before = X;
    const std::uint64_t pk = split_index(X, s);
    idx[which - 1] = pk;
    if (pk == 0) continue;
    Fx<Limb> den = before.resized(n, 1);
    fx_mul_limb(den, before.resized(n, 1), Limb(pk), MulMode::kSet);
    den = fx_add(den, Fx<Limb>::integer(Limb(1) << s, n, 1)).value;
    X = fx_div(fx_shift(X, s), den, n, 0);
    ++z;
  }

  const long r = std::max<long>(spec.grid_shift(spec.chain_count), X.frac_leading_zeros());
  const long N = std::max<long>(0, (w - r + 2 * r - 1) / (2 * r));
  Fx<Limb> Y(n, 1);
  if (N <= 2) {
    if (N >= 1) Y = X.resized(n, 1);
    if (N == 2) {
      const Fx<Limb> cube = fx_mul(fx_mul(X, X), X);
      Y = fx_sub(Y, fx_div_limb(cube, Limb(3)).resized(n, 1)).value;
    }
    z += 3;
  } else {
    Y = eval_atan_series(X, int(N), odd_table(B)).resized(n, 1);
    z += 2;
  }
  // entries of the atan tables and pi/2 stored at 4672 bits are below 1 and
  // 2 respectively, so their truncation to n <= P/B limbs is within one ulp
  for (int which = 1; which <= spec.chain_count; ++which) {
    if (idx[which - 1] == 0) continue;
    Y = fx_add(Y, lookup<Limb>(table, which, int(idx[which - 1]), n)).value;
    ++z;
  }
  if (above_one) {
    Y = fx_sub(constant_fixed<Limb>(Constant::kPiOver2, n), Y).value;
    ++z;
  }
  const Radius tail = Radius::pow2(-r * (2 * N + 1));
  record<Limb>(info, "pipeline", w, n, r, int(N), z, tail);
  return finish(to_bigfloat(Y, neg), tail + Radius::from_ulps(z, -bn), p, info);
}

// exp: x = m log 2 + t with t in [0, log 2), then t = i/2^8 + X or
// t = i/2^5 + j/2^10 + X, exp(t) = table values times exp(X), scaled by 2^m.
template <LimbType Limb>
Ball exp_ball(const BigFloat& x, long p, EvalInfo* info) {
  constexpr int B = kLimbBits<Limb>;
  check_precision(p);
  if (x.is_nan()) fail(ErrorCode::kInvalidInput, "exp of NaN");
  if (x.is_inf()) return exact(x.negative() ? BigFloat::zero() : x, info, "exact");
  if (x.is_zero()) return exact(BigFloat::from_int(1), info, "exact");
  const std::int64_t e = x.exponent();
  if (e > kExpMaxExponent) fail(ErrorCode::kUnsupportedArgument, "exp argument of magnitude 2^24 or more");
  // exp(t) lies in [1, 2), so absolute accuracy at w bits is relative accuracy
  const long w = p + 4;
  if (w > kMaxWorkingBits) fail(ErrorCode::kUnsupportedPrecision, "exp needs more than 4608 working bits");
  const int n = working_limbs<Limb>(w, kExpHeadroom);
  const long bn = long(B) * n;
  const Band band = band_for(bn);

  // m log 2 carries |m| < 2^(e+1) times the constant's error, so the
  // reduction runs with e + 4 extra bits
  const int nf = n + int(limbs_for(std::max<std::int64_t>(e, 0) + 4, B));
  const Fx<Limb> L = constant_fixed<Limb>(Constant::kLog2, nf);
  const Fx<Limb> xf = to_fixed<Limb>(x, nf, 1);
  const bool neg = x.negative();
  std::int64_t q = std::int64_t(std::floor(std::fabs(x.to_double()) / std::log(2.0)));
  if (neg) ++q;
  auto times_l = [&](std::int64_t k) {
    Fx<Limb> prod(nf, 1);
    fx_mul_limb(prod, L, Limb(k), MulMode::kSet);
    return prod;
  };
  auto cmp = [](const Fx<Limb>& a, const Fx<Limb>& b) { return mpn::cmp<Limb>(a.limbs(), b.limbs()); };
  Fx<Limb> t;
  if (!neg) {
    // q log 2 <= x < (q + 1) log 2
    while (q > 0 && cmp(times_l(q), xf) > 0) --q;
    while (cmp(fx_sub(xf, times_l(q)).value, L) >= 0) ++q;
    t = fx_sub(xf, times_l(q)).value;
  } else {
    // (q - 1) log 2 < |x| <= q log 2
    while (cmp(times_l(q), xf) < 0) ++q;
    while (q > 0 && cmp(fx_sub(times_l(q), xf).value, L) >= 0) --q;
    t = fx_sub(times_l(q), xf).value;
  }
  const std::int64_t m = neg ? -q : q;
  Fx<Limb> X = t.resized(n, 0);
  // t is within 2 ulp of x - m log 2 and exp' < 2.01 on the reduced range
  std::uint64_t z = 5;

  const TableSpec& spec = table_spec(TableFunction::kExp, band);
  const ArgRedTable& table = builtin_table(TableFunction::kExp, band);
  std::optional<Approx<Limb>> factor;
  for (int which = 1; which <= spec.chain_count; ++which) {
    const std::uint64_t i = split_index(X, spec.grid_shift(which));
    if (i == 0) continue;
    Approx<Limb> f{lookup<Limb>(table, which, int(i), n), 2};
    factor = factor ? mul(*factor, f) : f;
  }

  const long r = std::max<long>(spec.grid_shift(spec.chain_count), X.frac_leading_zeros());
  Approx<Limb> ex{Fx<Limb>::integer(1, n, 1), 0};
  Radius tail;
  int terms = 0;
  if (!X.is_zero()) {
    if (w > kExpFromSinhBits) {
      // exp(X) = sinh(X) + sqrt(1 + sinh(X)^2): half the terms
      const TermChoice tc = choose_terms(SeriesKind::kSinh, r, bn);
      terms = tc.terms;
      const Fx<Limb> s = eval_sinh_series(X, terms, factorial_table(B)).resized(n, 1);
      const Fx<Limb> sq = fx_mul(s, s).resized(n, 1);
      const Fx<Limb> c = fx_sqrt(fx_add(sq, Fx<Limb>::integer(1, n, 1)).value);
      // s: 2 ulp; c: the square's ulp and s's error shrink by 1/2, plus < 1 ulp
      ex = {fx_add(s, c).value, 4};
      tail = Radius::pow2(1 - tc.tail_exp);
    } else {
      const TermChoice tc = choose_terms(SeriesKind::kExp, r, bn);
      terms = tc.terms;
      ex = {eval_exp_series(X, terms, factorial_table(B)), 2};
      tail = Radius::pow2(-tc.tail_exp);
    }
  }
  const Approx<Limb> y = factor ? mul(*factor, ex) : ex;
  z = sat_add(z, y.err);
  tail = tail.mul_pow2(2);  // times the table factors, below 2.01
  record<Limb>(info, "pipeline", w, n, r, terms, z, tail);
  return finish(to_bigfloat(y.v, false).mul_pow2(m), (tail + Radius::from_ulps(z, -bn)).mul_pow2(m), p, info);
}

// log: x = 2^(e-1) (1 + f), log(1 + f) = log(1 + i/2^s) + log(1 + f1) with
// f1 = (2^s f - i)/(2^s + i), applied twice, then 2 atanh(f2/(2 + f2)).
template <LimbType Limb>
Ball log_ball(const BigFloat& x, long p, EvalInfo* info) {
  constexpr int B = kLimbBits<Limb>;
  check_precision(p);
  if (x.is_nan()) fail(ErrorCode::kInvalidInput, "log of NaN");
  if (x.is_zero() || x.negative()) fail(ErrorCode::kDomainError, "log of a non-positive number");
  if (x.is_inf()) return exact(x, info, "exact");
  const BigFloat one = BigFloat::from_int(1);
  if (x == one) return exact(BigFloat::zero(), info, "exact");
  const std::int64_t e = x.exponent();

  // Near 1 the result is about x - 1, so the absolute accuracy must follow
  // its exponent: |log x| >= |x - 1| / 2.
  long comp = 0;
  if (e == 0 || e == 1) {
    const BigFloat d = x - one;
    const std::int64_t ed = d.exponent();
    if (ed <= -p - 3) {
      // |log(1 + d) - d| <= d^2
      record<Limb>(info, "tiny", 0, 0, 0, 0, 0, Radius());
      return finish(d, Radius::pow2(2 * ed), p, info);
    }
    comp = 1 - ed;
  }
  const long w = p + 4 + comp;
  if (w > kMaxWorkingBits) fail(ErrorCode::kUnsupportedPrecision, "log needs more than 4608 working bits");
  const int n = working_limbs<Limb>(w, kLogHeadroom);
  const long bn = long(B) * n;
  const Band band = band_for(bn);

  const BigFloat fb = x.mul_pow2(1 - e) - one;
  Fx<Limb> f = to_fixed<Limb>(fb, n, 0);
  std::uint64_t z = fb.scaled_exact(bn) ? 0 : 1;

  const TableSpec& spec = table_spec(TableFunction::kLog, band);
  const ArgRedTable& table = builtin_table(TableFunction::kLog, band);
  Approx<Limb> y{Fx<Limb>(n, 1), 0};
  for (int which = 1; which <= spec.chain_count; ++which) {
    const int s = spec.grid_shift(which);
    const std::uint64_t i = split_index(f, s);
    if (i == 0) continue;
    f = fx_div_limb(fx_shift(f, s), Limb((std::uint64_t(1) << s) + i));
    z = sat_add(z, 1);
    y = add(y, Approx<Limb>{lookup<Limb>(table, which, int(i), n), 2});
  }

  const long r0 = spec.grid_shift(spec.chain_count) + 1;  // v < f / 2 < 2^-(s+1)
  long r = r0;
  int terms = 0;
  Radius tail;
  if (!f.is_zero()) {
    const Fx<Limb> v = fx_div(f, fx_add(f.resized(n, 1), Fx<Limb>::integer(2, n, 1)).value, n, 0);
    r = std::max<long>(r0, v.frac_leading_zeros());
    const TermChoice tc = choose_terms(SeriesKind::kAtanh, r, bn);
    terms = tc.terms;
    const Fx<Limb> s = eval_atanh_series(v, terms, odd_table(B)).resized(n, 1);
    // doubled: 2 * 2 ulp from the series, 2 * (1 + v^2) * 1 ulp from v
    y = add(y, Approx<Limb>{fx_shift(s, 1), 7});
    tail = Radius::pow2(1 - tc.tail_exp);
  }
  z = sat_add(z, y.err);
  BigFloat mid = to_bigfloat(y.v, false);
  Radius rad = tail + Radius::from_ulps(z, -bn);
  if (e != 1) {
    const BigFloat l2 = to_bigfloat(constant_fixed<Limb>(Constant::kLog2, n), false);
    mid = BigFloat::from_int(e - 1) * l2 + mid;
    const std::uint64_t k = e > 1 ? std::uint64_t(e - 1) : std::uint64_t(1 - e);
    rad = rad + Radius::from_ulps(k, -bn);
  }
  record<Limb>(info, "pipeline", w, n, r, terms, z, tail);
  return finish(mid, rad, p, info);
}

namespace {

struct SinCosFixed {
  Ball sin, cos;
  int n = 0;
  long r = 0;
  int terms = 0;
  std::uint64_t z = 0;
  Radius tail;
};

// sin and cos at working precision w, or nullopt when x/(pi/4) needs more of
// pi/4 than is stored. Absolute error bounds.
template <LimbType Limb>
std::optional<SinCosFixed> sin_cos_fixed(const BigFloat& x, long w) {
  constexpr int B = kLimbBits<Limb>;
  const int n = working_limbs<Limb>(w, kSinCosHeadroom);
  const long bn = long(B) * n;
  const Band band = band_for(bn);
  const std::int64_t e = x.exponent();

  // q pi/4 carries q < 2^(e+1) times the constant's error: e + 4 extra bits
  const int nf = n + int(limbs_for(std::max<std::int64_t>(e, 0) + 4, B));
  if (long(B) * nf > kConstantBits) return std::nullopt;
  const int nint = int(limbs_for(std::max<std::int64_t>(e, 1), B));
  const Fx<Limb> C = constant_fixed<Limb>(Constant::kPiOver4, nf);
  const Fx<Limb> xf = to_fixed<Limb>(x, nf, nint);
  const Fx<Limb> q = fx_div(xf, C, 0, int(limbs_for(std::max<std::int64_t>(e, 1) + 1, B)));
  Fx<Limb> t = xf;
  {
    LimbBuffer<Limb> prod(std::size_t(q.size() + C.size()));
    if (q.size() >= C.size()) mpn::mul<Limb>(std::span<Limb>(prod), q.limbs(), C.limbs());
    else mpn::mul<Limb>(std::span<Limb>(prod), C.limbs(), q.limbs());
    const auto tl = t.limbs();
    if (mpn::sub_n<Limb>(tl, std::span<const Limb>(xf.limbs()), std::span<const Limb>(prod).subspan(0, tl.size())) != 0) {
      throw std::logic_error("octant reduction below zero");
    }
  }
  const unsigned oct = unsigned(q[0] & 7);
  const bool odd = oct & 1;
  const unsigned quadrant = ((oct + (odd ? 1 : 0)) / 2) & 3;
  // |x| = quadrant pi/2 + t  or  quadrant pi/2 - (pi/4 - t)
  if (odd) t = fx_sub(C, t.resized(nf, 1)).value;
  Fx<Limb> X = t.resized(n, 0);
  // the residual is within 1.25 ulp; sin and cos are 1-Lipschitz
  std::uint64_t z = 2;

  const TableSpec& spec = table_spec(TableFunction::kSin, band);
  std::uint64_t idx[2] = {0, 0};
  for (int which = 1; which <= spec.chain_count; ++which) idx[which - 1] = split_index(X, spec.grid_shift(which));

  const long r = std::max<long>(spec.grid_shift(spec.chain_count), X.frac_leading_zeros());
  Approx<Limb> s{Fx<Limb>(n, 1), 0}, c{Fx<Limb>::integer(1, n, 1), 0};
  Radius tail;
  int terms = 0;
  if (!X.is_zero()) {
    if (w > kCosFromSinBits) {
      const TermChoice tc = choose_terms(SeriesKind::kSin, r, bn);
      terms = tc.terms;
      s = {eval_sin_cos_series(X, terms, factorial_table(B), Want::kSin).sin.resized(n, 1), 2};
      // cos = sqrt(1 - sin^2) on X < 2^-8: the square's error shrinks by
      // 2 sin / (2 cos) < 2^-7, the root adds < 1 ulp
      const Fx<Limb> sq = fx_mul(s.v, s.v).resized(n, 1);
      c = {fx_sqrt(fx_sub(Fx<Limb>::integer(1, n, 1), sq).value), 2};
      tail = Radius::pow2(-tc.tail_exp);
    } else {
      const TermChoice tc = choose_terms(SeriesKind::kCos, r, bn);
      terms = tc.terms;
      auto sc = eval_sin_cos_series(X, terms, factorial_table(B), Want::kBoth);
      s = {sc.sin.resized(n, 1), 2};
      c = {sc.cos, 2};
      tail = Radius::pow2(-tc.tail_exp);
    }
  }
  // sin(a + b) = sin a cos b + cos a sin b, cos(a + b) = cos a cos b - sin a sin b
  const ArgRedTable& sin_table = builtin_table(TableFunction::kSin, band);
  const ArgRedTable& cos_table = builtin_table(TableFunction::kCos, band);
  for (int which = spec.chain_count; which >= 1; --which) {
    const std::uint64_t i = idx[which - 1];
    if (i == 0) continue;
    const Approx<Limb> ts{lookup<Limb>(sin_table, which, int(i), n), 2};
    const Approx<Limb> tc{lookup<Limb>(cos_table, which, int(i), n), 2};
    const Approx<Limb> ns = add(mul(ts, c), mul(tc, s));
    const Approx<Limb> nc = sub(mul(tc, c), mul(ts, s));
    s = ns;
    c = nc;
    tail = tail.mul_pow2(1);  // (sin a + cos a) <= sqrt 2
  }
  z = sat_add(z, std::max(s.err, c.err));
  const Radius rad = tail + Radius::from_ulps(z, -bn);

  // (sin, cos) of quadrant pi/2 + u for u = t or u = -(pi/4 - t)
  const BigFloat sb = to_bigfloat(s.v, odd), cb = to_bigfloat(c.v, false);
  BigFloat so, co;
  switch (quadrant) {
    case 0: so = sb; co = cb; break;
    case 1: so = cb; co = -sb; break;
    case 2: so = -sb; co = -cb; break;
    default: so = -cb; co = sb; break;
  }
  if (x.negative()) so = -so;
  SinCosFixed out;
  out.sin = {so, rad};
  out.cos = {co, rad};
  out.n = n;
  out.r = r;
  out.terms = terms;
  out.z = z;
  out.tail = tail;
  return out;
}

// Working precision that makes the ball's radius relative for a result
// whose midpoint is y.
long relative_bits(const BigFloat& y, long p) {
  if (y.is_zero()) return kMaxWorkingBits + 1;
  return p + 4 + std::max<std::int64_t>(0, 1 - y.exponent());
}

}  // namespace

// sin/cos: |x| = q pi/4 + t, octant symmetry, up to two table steps and the
// simultaneous series. The error bound is absolute; when a result is small
// the evaluation is repeated with enough extra bits to make it relative, as
// long as the constants and tables allow.
template <LimbType Limb>
SinCosBall sin_cos_ball(const BigFloat& x, long p, Want want, EvalInfo* info) {
  check_precision(p);
  if (x.is_nan() || x.is_inf()) fail(ErrorCode::kInvalidInput, "sin/cos of a non-finite value");
  const bool want_sin = want != Want::kCos, want_cos = want != Want::kSin;
  const Ball unused{BigFloat::zero(), Radius()};
  if (x.is_zero()) {
    if (info) {
      info->path = "exact";
      info->unrounded = {x, Radius()};
      info->unrounded_cos = {BigFloat::from_int(1), Radius()};
    }
    return {want_sin ? Ball{x, Radius()} : unused, want_cos ? Ball{BigFloat::from_int(1), Radius()} : unused};
  }
  const std::int64_t e = x.exponent();
  if (2 * e < -p - 4) {
    // |sin x - x| <= |x|^3 / 6, |cos x - 1| <= x^2 / 2
    record<Limb>(info, "tiny", 0, 0, 0, 0, 0, Radius());
    EvalInfo cos_info;
    const Ball sb = finish(x, Radius::pow2(3 * e), p, info);
    const Ball cb = finish(BigFloat::from_int(1), Radius::pow2(2 * e - 1), p, &cos_info);
    if (info) info->unrounded_cos = cos_info.unrounded;
    return {want_sin ? sb : unused, want_cos ? cb : unused};
  }
  // |sin x| >= 2^(e-2) for small x; one more bit keeps typical results from
  // needing a second pass
  long w = p + 5 + std::max<std::int64_t>(0, 1 - e);
  if (w > kMaxWorkingBits) fail(ErrorCode::kUnsupportedPrecision, "sin/cos needs more than 4608 working bits");
  std::optional<SinCosFixed> res;
  for (int attempt = 0; attempt < 3; ++attempt) {
    auto next = sin_cos_fixed<Limb>(x, w);
    if (!next) break;
    res = std::move(next);
    long need = w;
    if (want_sin) need = std::max(need, relative_bits(res->sin.mid, p));
    if (want_cos) need = std::max(need, relative_bits(res->cos.mid, p));
    need = std::min(need, kMaxWorkingBits);
    if (need <= w) break;
    w = need;
  }
  if (!res) {
    // beyond the stored pi/4: the whole range is still an enclosure
    const Ball whole{BigFloat::zero(), Radius::pow2(0) + Radius::pow2(-p)};
    if (info) {
      info->path = "whole-range";
      info->unrounded = info->unrounded_cos = whole;
    }
    return {want_sin ? whole : unused, want_cos ? whole : unused};
  }
  record<Limb>(info, "pipeline", w, res->n, res->r, res->terms, res->z, res->tail);
  EvalInfo cos_info;
  const Ball sb = finish(res->sin.mid, res->sin.rad, p, info);
  const Ball cb = finish(res->cos.mid, res->cos.rad, p, &cos_info);
  if (info) info->unrounded_cos = cos_info.unrounded;
  return {want_sin ? sb : unused, want_cos ? cb : unused};
}

template Ball atan_ball<std::uint32_t>(const BigFloat&, long, EvalInfo*);
template Ball atan_ball<std::uint64_t>(const BigFloat&, long, EvalInfo*);
template Ball exp_ball<std::uint32_t>(const BigFloat&, long, EvalInfo*);
template Ball exp_ball<std::uint64_t>(const BigFloat&, long, EvalInfo*);
template Ball log_ball<std::uint32_t>(const BigFloat&, long, EvalInfo*);
template Ball log_ball<std::uint64_t>(const BigFloat&, long, EvalInfo*);
template SinCosBall sin_cos_ball<std::uint32_t>(const BigFloat&, long, Want, EvalInfo*);
template SinCosBall sin_cos_ball<std::uint64_t>(const BigFloat&, long, Want, EvalInfo*);

}  // namespace detail

}  // namespace mpelem
