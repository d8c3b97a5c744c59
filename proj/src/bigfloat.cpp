#include "mpelem/bigfloat.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "mpelem/limb.hpp"

namespace mpelem {

namespace {

using Nat = std::vector<std::uint64_t>;  // little-endian natural number
using U128 = unsigned __int128;

void trim(Nat& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

long nat_bits(const Nat& a) {
  if (a.empty()) return 0;
  return long(a.size()) * 64 - std::countl_zero(a.back());
}

bool nat_bit(const Nat& a, long i) {
  if (i < 0 || std::size_t(i / 64) >= a.size()) return false;
  return (a[std::size_t(i / 64)] >> (i % 64)) & 1;
}

// Any bit set strictly below position i?
bool nat_any_below(const Nat& a, long i) {
  if (i <= 0) return false;
  const std::size_t full = std::min(a.size(), std::size_t(i / 64));
  for (std::size_t j = 0; j < full; ++j) {
    if (a[j]) return true;
  }
  if (std::size_t(i / 64) < a.size() && (i % 64)) {
    return (a[std::size_t(i / 64)] & ((std::uint64_t(1) << (i % 64)) - 1)) != 0;
  }
  return false;
}

Nat nat_shl(const Nat& a, long s) {
  if (a.empty()) return {};
  Nat r(a.size() + std::size_t(s / 64) + 1, 0);
  std::span<std::uint64_t> dst(r.data() + s / 64, a.size());
  r[a.size() + std::size_t(s / 64)] = mpn::lshift<std::uint64_t>(dst, a, int(s % 64));
  trim(r);
  return r;
}

Nat nat_shr(const Nat& a, long s) {
  if (std::size_t(s / 64) >= a.size()) return {};
  Nat src(a.begin() + s / 64, a.end());
  Nat r(src.size());
  mpn::rshift<std::uint64_t>(r, src, int(s % 64));
  trim(r);
  return r;
}

void nat_mul_small_add(Nat& a, std::uint64_t m, std::uint64_t add) {
  std::uint64_t carry = add;
  for (auto& limb : a) {
    const U128 t = U128(limb) * m + carry;
    limb = std::uint64_t(t);
    carry = std::uint64_t(t >> 64);
  }
  if (carry) a.push_back(carry);
}

Nat nat_mul(const Nat& a, const Nat& b) {
  if (a.empty() || b.empty()) return {};
  Nat r(a.size() + b.size());
  mpn::mul<std::uint64_t>(r, a, b);
  trim(r);
  return r;
}

// Returns quotient; sets *rem_nonzero.
Nat nat_div(const Nat& a, const Nat& d, bool* rem_nonzero) {
  if (a.size() < d.size()) {
    *rem_nonzero = !a.empty();
    return {};
  }
  Nat q(a.size() - d.size() + 1), r(d.size());
  mpn::divrem<std::uint64_t>(q, r, a, d);
  *rem_nonzero = !mpn::is_zero<std::uint64_t>(r);
  trim(q);
  return q;
}

Nat nat_pow10(std::uint64_t e) {
  Nat result{1}, base{10};
  while (e) {
    if (e & 1) result = nat_mul(result, base);
    e >>= 1;
    if (e) base = nat_mul(base, base);
  }
  return result;
}

int nat_cmp(const Nat& a, const Nat& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  return mpn::cmp<std::uint64_t>(a, b);
}

// Nearest p-bit rounding of integer a (ties to even), returning the rounded
// integer and the shift applied (value = result * 2^shift).
Nat round_nat(const Nat& a, long p, bool sticky_below, long* shift) {
  const long bits = nat_bits(a);
  *shift = 0;
  if (bits <= p) return a;  // any sticky bits lie below the last kept bit
  const long s = bits - p;
  Nat r = nat_shr(a, s);
  const bool half = nat_bit(a, s - 1);
  const bool rest = nat_any_below(a, s - 1) || sticky_below;
  const bool odd = !r.empty() && (r[0] & 1);
  if (half && (rest || odd)) {
    nat_mul_small_add(r, 1, 1);
  }
  *shift = s;
  return r;
}

std::string nat_to_decimal(Nat a) {
  if (a.empty()) return "0";
  std::string out;
  constexpr std::uint64_t kChunk = 10000000000000000000ull;  // 10^19
  while (!a.empty()) {
    Nat q(a.size());
    const std::uint64_t rem = mpn::divrem_1<std::uint64_t>(q, a, kChunk);
    trim(q);
    std::string part = std::to_string(rem);
    if (!q.empty()) part = std::string(19 - part.size(), '0') + part;
    out = part + out;
    a = std::move(q);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- Radius

void Radius::normalize_up(U128 m, std::int64_t e) {
  while (m >> 32) {
    const int bits = (m >> 64) ? 128 - std::countl_zero(std::uint64_t(m >> 64))
                               : 64 - std::countl_zero(std::uint64_t(m));
    const int k = bits - 32;
    const bool lost = (m & ((U128(1) << k) - 1)) != 0;
    m >>= k;
    e += k;
    if (lost) ++m;
  }
  mant_ = std::uint32_t(m);
  exp_ = mant_ ? e : 0;
}

Radius Radius::from_ulps(std::uint64_t count, std::int64_t e) {
  Radius r;
  r.normalize_up(count, e);
  return r;
}

Radius Radius::above(const BigFloat& x) {
  if (!x.is_finite()) throw std::invalid_argument("Radius::above: non-finite value");
  Radius r;
  if (x.is_zero()) return r;
  const auto m = x.mantissa();
  const std::uint64_t top = m.back();
  bool lost = (top & 0xffffffffull) != 0;
  for (std::size_t i = 0; i + 1 < m.size(); ++i) lost |= m[i] != 0;
  // |x| < (top32 + lost) * 2^(exponent - 32)
  r.normalize_up(U128(top >> 32) + (lost ? 1 : 0), x.exponent() - 32);
  return r;
}

Radius Radius::operator+(const Radius& o) const {
  if (is_zero()) return o;
  if (o.is_zero()) return *this;
  const Radius& hi = exp_ >= o.exp_ ? *this : o;
  const Radius& lo = exp_ >= o.exp_ ? o : *this;
  const std::int64_t d = hi.exp_ - lo.exp_;
  Radius r;
  if (d > 64) {
    // lo < 2^(lo.exp + 32) <= 2^(hi.exp - 32): one unit of hi.mant << 32 covers it.
    r.normalize_up((U128(hi.mant_) << 32) + 1, hi.exp_ - 32);
  } else {
    r.normalize_up((U128(hi.mant_) << d) + lo.mant_, lo.exp_);
  }
  return r;
}

Radius Radius::operator*(const Radius& o) const {
  if (is_zero() || o.is_zero()) return {};
  Radius r;
  r.normalize_up(U128(mant_) * o.mant_, exp_ + o.exp_);
  return r;
}

BigFloat Radius::to_bigfloat() const {
  if (is_zero()) return BigFloat::zero();
  const std::uint64_t m = mant_;
  return BigFloat::from_integer(false, std::span<const std::uint64_t>(&m, 1), exp_);
}

double Radius::to_double() const { return std::ldexp(double(mant_), int(std::clamp<std::int64_t>(exp_, -100000, 100000))); }

std::string Radius::to_hex() const { return to_bigfloat().to_hex(); }

std::strong_ordering Radius::operator<=>(const Radius& o) const { return compare(to_bigfloat(), o.to_bigfloat()); }

// ---------------------------------------------------------------- BigFloat

BigFloat BigFloat::zero(bool negative) {
  BigFloat r;
  r.negative_ = negative;
  return r;
}

BigFloat BigFloat::inf(bool negative) {
  BigFloat r;
  r.kind_ = Kind::kInf;
  r.negative_ = negative;
  return r;
}

BigFloat BigFloat::nan() {
  BigFloat r;
  r.kind_ = Kind::kNaN;
  return r;
}

BigFloat BigFloat::from_integer(bool negative, std::span<const std::uint64_t> limbs, std::int64_t scale) {
  BigFloat r;
  r.negative_ = negative;
  r.mant_.assign(limbs.begin(), limbs.end());
  trim(r.mant_);
  if (r.mant_.empty()) return zero(negative);
  r.kind_ = Kind::kFinite;
  r.exp_ = scale + nat_bits(r.mant_);
  // left-align so the top bit of the top limb is set
  const int s = std::countl_zero(r.mant_.back());
  if (s) mpn::lshift<std::uint64_t>(r.mant_, r.mant_, s);
  r.normalize();
  return r;
}

BigFloat BigFloat::from_int(std::int64_t v) {
  const std::uint64_t mag = v < 0 ? std::uint64_t(0) - std::uint64_t(v) : std::uint64_t(v);
  return from_integer(v < 0, std::span<const std::uint64_t>(&mag, 1), 0);
}

BigFloat BigFloat::from_double(double d) {
  if (std::isnan(d)) return nan();
  if (std::isinf(d)) return inf(d < 0);
  if (d == 0) return zero(std::signbit(d));
  int e;
  const double f = std::frexp(std::fabs(d), &e);  // f in [1/2, 1)
  const std::uint64_t m = std::uint64_t(std::ldexp(f, 53));
  return from_integer(d < 0, std::span<const std::uint64_t>(&m, 1), std::int64_t(e) - 53);
}

void BigFloat::normalize() {
  // strip zero low limbs; mantissa is already left-aligned
  std::size_t lo = 0;
  while (lo < mant_.size() && mant_[lo] == 0) ++lo;
  if (lo == mant_.size()) {
    kind_ = Kind::kZero;
    mant_.clear();
    exp_ = 0;
    return;
  }
  mant_.erase(mant_.begin(), mant_.begin() + std::ptrdiff_t(lo));
}

long BigFloat::bit_length() const {
  if (mant_.empty()) return 0;
  return long(mant_.size()) * 64 - std::countr_zero(mant_.front());
}

BigFloat BigFloat::operator-() const {
  BigFloat r = *this;
  if (kind_ != Kind::kNaN) r.negative_ = !negative_;
  return r;
}

BigFloat BigFloat::abs() const {
  BigFloat r = *this;
  r.negative_ = false;
  return r;
}

BigFloat BigFloat::mul_pow2(std::int64_t k) const {
  BigFloat r = *this;
  if (kind_ == Kind::kFinite) r.exp_ += k;
  return r;
}

BigFloat operator+(const BigFloat& a, const BigFloat& b) {
  if (!a.is_finite() || !b.is_finite()) throw std::invalid_argument("BigFloat addition of a non-finite value");
  if (a.is_zero()) return b.is_zero() ? BigFloat::zero(a.negative_ && b.negative_) : b;
  if (b.is_zero()) return a;
  // integers at the common scale
  const std::int64_t sa = a.exp_ - std::int64_t(64 * a.mant_.size());
  const std::int64_t sb = b.exp_ - std::int64_t(64 * b.mant_.size());
  const std::int64_t s = std::min(sa, sb);
  Nat x = nat_shl(a.mant_, long(sa - s)), y = nat_shl(b.mant_, long(sb - s));
  const std::size_t len = std::max(x.size(), y.size()) + 1;
  x.resize(len, 0);
  y.resize(len, 0);
  Nat r(len);
  bool negative = a.negative_;
  if (a.negative_ == b.negative_) {
    mpn::add_n<std::uint64_t>(r, x, y);
  } else if (mpn::cmp<std::uint64_t>(x, y) >= 0) {
    mpn::sub_n<std::uint64_t>(r, x, y);
  } else {
    mpn::sub_n<std::uint64_t>(r, y, x);
    negative = b.negative_;
  }
  return BigFloat::from_integer(negative, r, s);
}

BigFloat operator-(const BigFloat& a, const BigFloat& b) { return a + (-b); }

BigFloat operator*(const BigFloat& a, const BigFloat& b) {
  if (!a.is_finite() || !b.is_finite()) throw std::invalid_argument("BigFloat product of a non-finite value");
  const bool negative = a.negative_ != b.negative_;
  if (a.is_zero() || b.is_zero()) return BigFloat::zero(negative);
  const Nat p = nat_mul(a.mant_, b.mant_);
  return BigFloat::from_integer(negative, p, a.exp_ + b.exp_ - std::int64_t(64 * (a.mant_.size() + b.mant_.size())));
}

BigFloat BigFloat::rounded(long p, Radius* error) const {
  if (kind_ != Kind::kFinite || bit_length() <= p) return *this;
  // integer view: value = M * 2^(exp - 64*size)
  const Nat& m = mant_;
  const std::int64_t scale = exp_ - std::int64_t(64 * m.size());
  long shift;
  Nat r = round_nat(m, p, false, &shift);
  BigFloat out = from_integer(negative_, r, scale + shift);
  if (error) {
    // |x - out| = |M - r * 2^shift| * 2^scale
    Nat back = nat_shl(r, shift);
    Nat diff(std::max(back.size(), m.size()) + 1, 0), a = m, b = back;
    if (nat_cmp(a, b) < 0) std::swap(a, b);
    a.resize(diff.size(), 0);
    b.resize(diff.size(), 0);
    mpn::sub_n<std::uint64_t>(diff, a, b);
    trim(diff);
    *error = *error + Radius::above(from_integer(false, diff, scale));
  }
  return out;
}

std::vector<std::uint64_t> BigFloat::scaled_floor(std::int64_t k) const {
  if (kind_ != Kind::kFinite) return {};
  // |x| * 2^k = M * 2^(exp + k - 64*size)
  const std::int64_t s = exp_ + k - std::int64_t(64 * mant_.size());
  if (s >= 0) return nat_shl(mant_, long(s));
  return nat_shr(mant_, long(-s));
}

bool BigFloat::scaled_exact(std::int64_t k) const {
  if (kind_ != Kind::kFinite) return kind_ == Kind::kZero;
  const std::int64_t s = exp_ + k - std::int64_t(64 * mant_.size());
  return s >= 0 || !nat_any_below(mant_, long(-s));
}

std::string BigFloat::to_hex() const {
  switch (kind_) {
    case Kind::kNaN: return "nan";
    case Kind::kInf: return negative_ ? "-inf" : "inf";
    case Kind::kZero: return negative_ ? "-0" : "0";
    case Kind::kFinite: break;
  }
  // 1.fff * 2^(exp - 1)
  const long bits = bit_length();
  const long scale = long(mant_.size()) * 64 - bits;
  Nat m = nat_shr(mant_, scale);  // integer with `bits` bits
  long frac_bits = bits - 1;
  const long pad = (4 - frac_bits % 4) % 4;
  m = nat_shl(m, pad);
  frac_bits += pad;
  std::string digits;
  for (long i = frac_bits / 4 - 1; i >= 0; --i) {
    int d = 0;
    for (int b = 3; b >= 0; --b) d = d * 2 + (nat_bit(m, i * 4 + b) ? 1 : 0);
    digits += "0123456789abcdef"[d];
  }
  std::string out = negative_ ? "-0x1" : "0x1";
  if (!digits.empty()) out += "." + digits;
  out += "p" + std::string(exp_ - 1 >= 0 ? "+" : "") + std::to_string(exp_ - 1);
  return out;
}

std::string BigFloat::to_decimal(int digits) const {
  switch (kind_) {
    case Kind::kNaN: return "nan";
    case Kind::kInf: return negative_ ? "-inf" : "inf";
    case Kind::kZero: return negative_ ? "-0" : "0";
    case Kind::kFinite: break;
  }
  digits = std::max(digits, 1);
  // decimal exponent estimate, then integer N = floor(|x| * 10^(digits - 1 - e10))
  long e10 = long(std::floor(double(exp_ - 1) * 0.30102999566398120));
  std::string s;
  for (int attempt = 0; attempt < 3; ++attempt) {
    const long k = digits - 1 - e10;
    const std::int64_t scale = exp_ - std::int64_t(64 * mant_.size());
    Nat num = mant_, den{1};
    if (k >= 0) num = nat_mul(num, nat_pow10(std::uint64_t(k)));
    else den = nat_mul(den, nat_pow10(std::uint64_t(-k)));
    if (scale >= 0) num = nat_shl(num, long(scale));
    else den = nat_shl(den, long(-scale));
    bool rem;
    s = nat_to_decimal(nat_div(num, den, &rem));
    if (long(s.size()) == digits) break;
    e10 += long(s.size()) - digits;
  }
  std::string out = negative_ ? "-" : "";
  out += s.substr(0, 1);
  if (s.size() > 1) out += "." + s.substr(1);
  out += "e" + std::string(e10 >= 0 ? "+" : "") + std::to_string(e10);
  return out;
}

double BigFloat::to_double() const {
  switch (kind_) {
    case Kind::kNaN: return std::nan("");
    case Kind::kInf: return negative_ ? -HUGE_VAL : HUGE_VAL;
    case Kind::kZero: return negative_ ? -0.0 : 0.0;
    case Kind::kFinite: break;
  }
  const double top = std::ldexp(double(mant_.back() >> 11), -53);
  const double v = std::ldexp(top, int(std::clamp<std::int64_t>(exp_, -2000, 2000)));
  return negative_ ? -v : v;
}

std::strong_ordering compare_abs(const BigFloat& a, const BigFloat& b) {
  if (a.is_zero() || b.is_zero()) {
    return (a.is_zero() ? 0 : 1) <=> (b.is_zero() ? 0 : 1);
  }
  if (a.exp_ != b.exp_) return a.exp_ <=> b.exp_;
  const std::size_t n = std::max(a.mant_.size(), b.mant_.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t x = i < a.mant_.size() ? a.mant_[a.mant_.size() - 1 - i] : 0;
    const std::uint64_t y = i < b.mant_.size() ? b.mant_[b.mant_.size() - 1 - i] : 0;
    if (x != y) return x <=> y;
  }
  return std::strong_ordering::equal;
}

std::strong_ordering compare(const BigFloat& a, const BigFloat& b) {
  const int sa = a.is_zero() ? 0 : (a.negative_ ? -1 : 1);
  const int sb = b.is_zero() ? 0 : (b.negative_ ? -1 : 1);
  if (sa != sb) return sa <=> sb;
  if (sa == 0) return std::strong_ordering::equal;
  const auto c = compare_abs(a, b);
  return sa > 0 ? c : 0 <=> c;
}

// ---------------------------------------------------------------- parsing

namespace {

std::int64_t parse_exponent(std::string_view s) {
  if (s.empty()) throw std::invalid_argument("missing exponent digits");
  bool neg = false;
  if (s[0] == '+' || s[0] == '-') {
    neg = s[0] == '-';
    s.remove_prefix(1);
  }
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw std::invalid_argument("bad exponent");
  if (v > (std::int64_t(1) << 40)) throw std::invalid_argument("exponent out of range");
  return neg ? -v : v;
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  c = char(std::tolower(static_cast<unsigned char>(c)));
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

}  // namespace

BigFloat BigFloat::parse(std::string_view text, long precision) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw std::invalid_argument("empty number");
  bool negative = false;
  if (text[0] == '+' || text[0] == '-') {
    negative = text[0] == '-';
    text.remove_prefix(1);
  }
  std::string lower(text);
  for (auto& c : lower) c = char(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "inf" || lower == "infinity") return inf(negative);
  if (lower == "nan") return nan();

  if (lower.size() > 2 && lower[0] == '0' && lower[1] == 'x') {
    std::string_view body(lower);
    body.remove_prefix(2);
    std::int64_t exp2 = 0;
    if (auto p = body.find('p'); p != std::string_view::npos) {
      exp2 = parse_exponent(body.substr(p + 1));
      body = body.substr(0, p);
    }
    Nat m;
    long frac_digits = 0;
    bool seen_point = false, any = false;
    for (char c : body) {
      if (c == '.') {
        if (seen_point) throw std::invalid_argument("two radix points");
        seen_point = true;
        continue;
      }
      const int d = hex_digit(c);
      if (d < 0) throw std::invalid_argument("bad hex digit");
      any = true;
      nat_mul_small_add(m, 16, std::uint64_t(d));
      if (seen_point) ++frac_digits;
    }
    if (!any) throw std::invalid_argument("no digits");
    trim(m);
    if (m.empty()) return zero(negative);
    return from_integer(negative, m, exp2 - 4 * frac_digits);
  }

  // decimal: digits [. digits] [e exponent]
  std::string_view body(lower);
  std::int64_t exp10 = 0;
  if (auto p = body.find('e'); p != std::string_view::npos) {
    exp10 = parse_exponent(body.substr(p + 1));
    body = body.substr(0, p);
  }
  Nat d;
  bool seen_point = false, any = false;
  for (char c : body) {
    if (c == '.') {
      if (seen_point) throw std::invalid_argument("two radix points");
      seen_point = true;
      continue;
    }
    if (c < '0' || c > '9') throw std::invalid_argument("bad decimal digit");
    any = true;
    nat_mul_small_add(d, 10, std::uint64_t(c - '0'));
    if (seen_point) --exp10;
  }
  if (!any) throw std::invalid_argument("no digits");
  trim(d);
  if (d.empty()) return zero(negative);
  if (exp10 > 1000000 || exp10 < -1000000) throw std::invalid_argument("decimal exponent out of range");
  if (exp10 >= 0) {
    Nat v = nat_mul(d, nat_pow10(std::uint64_t(exp10)));
    long shift;
    Nat r = round_nat(v, precision, false, &shift);
    return from_integer(negative, r, shift);
  }
  // d / 10^k: scale the numerator so the quotient has at least precision + 2 bits
  const Nat den = nat_pow10(std::uint64_t(-exp10));
  const long extra = std::max<long>(0, precision + 2 - (nat_bits(d) - nat_bits(den)) + 1);
  bool rem;
  Nat q = nat_div(nat_shl(d, extra), den, &rem);
  long shift;
  Nat r = round_nat(q, precision, rem, &shift);
  return from_integer(negative, r, shift - extra);
}

}  // namespace mpelem
