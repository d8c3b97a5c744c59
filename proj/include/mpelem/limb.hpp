#pragma once
// limb.hpp - Low-level limb array kernels.
//
// All arrays are little-endian sequences of unsigned B-bit words (B = 32 or
// 64). The routines mirror the classic mpn layer: they operate on caller
// provided storage, report carries and borrows, and never allocate unless
// noted (divrem and isqrt use call-local scratch).

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <absl/container/inlined_vector.h>

namespace mpelem {

template <class T>
concept LimbType = std::same_as<T, std::uint32_t> || std::same_as<T, std::uint64_t>;

template <LimbType Limb>
struct LimbTraits;

template <>
struct LimbTraits<std::uint32_t> {
  using Wide = std::uint64_t;
  static constexpr int kBits = 32;
};

template <>
struct LimbTraits<std::uint64_t> {
  using Wide = unsigned __int128;
  static constexpr int kBits = 64;
};

template <LimbType Limb>
inline constexpr int kLimbBits = LimbTraits<Limb>::kBits;

/// Limb storage; operands up to 1280 bits stay off the heap.
template <LimbType Limb>
using LimbBuffer = absl::InlinedVector<Limb, std::size_t(1280 / kLimbBits<Limb>)>;

template <LimbType Limb>
using WideOf = typename LimbTraits<Limb>::Wide;

namespace mpn {

template <LimbType Limb>
inline int clz(Limb x) {
  return std::countl_zero(x);
}

template <LimbType Limb>
inline void zero(std::span<Limb> r) {
  std::fill(r.begin(), r.end(), Limb{0});
}

template <LimbType Limb>
inline bool is_zero(std::span<const Limb> a) {
  return std::all_of(a.begin(), a.end(), [](Limb x) { return x == 0; });
}

// Number of limbs after stripping high zero limbs.
template <LimbType Limb>
inline std::size_t normalized_size(std::span<const Limb> a) {
  std::size_t n = a.size();
  while (n > 0 && a[n - 1] == 0) --n;
  return n;
}

// Compares equal-length arrays.
template <LimbType Limb>
inline int cmp(std::span<const Limb> a, std::span<const Limb> b) {
  assert(a.size() == b.size());
  for (std::size_t i = a.size(); i-- > 0;) {
    if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
  }
  return 0;
}

// r = a + b, all of length n. Returns carry out.
template <LimbType Limb>
inline Limb add_n(std::span<Limb> r, std::span<const Limb> a, std::span<const Limb> b) {
  assert(a.size() == r.size() && b.size() == r.size());
  Limb carry = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Limb s = a[i] + carry;
    const Limb c1 = s < carry;
    const Limb t = s + b[i];
    const Limb c2 = t < s;
    r[i] = t;
    carry = c1 | c2;
  }
  return carry;
}

// r = a - b, all of length n. Returns borrow out.
template <LimbType Limb>
inline Limb sub_n(std::span<Limb> r, std::span<const Limb> a, std::span<const Limb> b) {
  assert(a.size() == r.size() && b.size() == r.size());
  Limb borrow = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Limb ai = a[i];
    const Limb d = ai - b[i];
    const Limb b1 = d > ai;
    const Limb e = d - borrow;
    const Limb b2 = e > d;
    r[i] = e;
    borrow = b1 | b2;
  }
  return borrow;
}

// r = a + c for a single limb c. Returns carry out.
template <LimbType Limb>
inline Limb add_1(std::span<Limb> r, std::span<const Limb> a, Limb c) {
  assert(a.size() == r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Limb s = a[i] + c;
    c = s < c;
    r[i] = s;
  }
  return c;
}

// r = a - c for a single limb c. Returns borrow out.
template <LimbType Limb>
inline Limb sub_1(std::span<Limb> r, std::span<const Limb> a, Limb c) {
  assert(a.size() == r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Limb ai = a[i];
    r[i] = ai - c;
    c = ai < c;
  }
  return c;
}

// r = a * c. Returns the high limb.
template <LimbType Limb>
inline Limb mul_1(std::span<Limb> r, std::span<const Limb> a, Limb c) {
  using W = WideOf<Limb>;
  assert(a.size() == r.size());
  Limb carry = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const W p = W(a[i]) * c + carry;
    r[i] = Limb(p);
    carry = Limb(p >> kLimbBits<Limb>);
  }
  return carry;
}

// r += a * c. Returns the high limb (carry out of r).
template <LimbType Limb>
inline Limb addmul_1(std::span<Limb> r, std::span<const Limb> a, Limb c) {
  using W = WideOf<Limb>;
  assert(a.size() == r.size());
  Limb carry = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const W p = W(a[i]) * c + r[i] + carry;
    r[i] = Limb(p);
    carry = Limb(p >> kLimbBits<Limb>);
  }
  return carry;
}

// r -= a * c. Returns the borrow limb.
template <LimbType Limb>
inline Limb submul_1(std::span<Limb> r, std::span<const Limb> a, Limb c) {
  using W = WideOf<Limb>;
  assert(a.size() == r.size());
  Limb borrow = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const W p = W(a[i]) * c + borrow;
    const Limb lo = Limb(p);
    Limb hi = Limb(p >> kLimbBits<Limb>);
    const Limb ri = r[i];
    r[i] = ri - lo;
    hi += ri < lo;
    borrow = hi;
  }
  return borrow;
}

// q = a / c (truncated), returns remainder. q and a have equal length.
template <LimbType Limb>
inline Limb divrem_1(std::span<Limb> q, std::span<const Limb> a, Limb c) {
  using W = WideOf<Limb>;
  assert(c != 0 && q.size() == a.size());
  Limb rem = 0;
  for (std::size_t i = a.size(); i-- > 0;) {
    const W num = (W(rem) << kLimbBits<Limb>) | a[i];
    q[i] = Limb(num / c);
    rem = Limb(num % c);
  }
  return rem;
}

// r = a << s for 0 <= s < B. Returns bits shifted out.
template <LimbType Limb>
inline Limb lshift(std::span<Limb> r, std::span<const Limb> a, int s) {
  assert(a.size() == r.size() && s >= 0 && s < kLimbBits<Limb>);
  if (s == 0) {
    std::copy_backward(a.begin(), a.end(), r.end());
    return 0;
  }
  Limb out = 0;
  for (std::size_t i = a.size(); i-- > 0;) {
    const Limb ai = a[i];
    if (i + 1 == a.size()) out = ai >> (kLimbBits<Limb> - s);
    Limb v = ai << s;
    if (i > 0) v |= a[i - 1] >> (kLimbBits<Limb> - s);
    r[i] = v;
  }
  return out;
}

// r = a >> s for 0 <= s < B. Returns bits shifted out (in the high bits).
template <LimbType Limb>
inline Limb rshift(std::span<Limb> r, std::span<const Limb> a, int s) {
  assert(a.size() == r.size() && s >= 0 && s < kLimbBits<Limb>);
  if (s == 0) {
    std::copy(a.begin(), a.end(), r.begin());
    return 0;
  }
  const Limb out = a.empty() ? 0 : a[0] << (kLimbBits<Limb> - s);
  for (std::size_t i = 0; i < a.size(); ++i) {
    Limb v = a[i] >> s;
    if (i + 1 < a.size()) v |= a[i + 1] << (kLimbBits<Limb> - s);
    r[i] = v;
  }
  return out;
}

namespace detail {

inline constexpr std::size_t kKaratsubaThreshold = 32;

template <LimbType Limb>
void mul_basecase(std::span<Limb> r, std::span<const Limb> a, std::span<const Limb> b) {
  const std::size_t an = a.size(), bn = b.size();
  r[an] = mul_1<Limb>(r.subspan(0, an), a, b[0]);
  for (std::size_t j = 1; j < bn; ++j) {
    r[an + j] = addmul_1<Limb>(r.subspan(j, an), a, b[j]);
  }
}

// Karatsuba on equal halves; a.size() == b.size() == n, r.size() == 2n.
template <LimbType Limb>
void mul_karatsuba(std::span<Limb> r, std::span<const Limb> a, std::span<const Limb> b) {
  const std::size_t n = a.size();
  if (n < kKaratsubaThreshold) {
    mul_basecase<Limb>(r, a, b);
    return;
  }
  const std::size_t lo = n / 2, hi = n - lo;
  auto a0 = a.subspan(0, lo), a1 = a.subspan(lo);
  auto b0 = b.subspan(0, lo), b1 = b.subspan(lo);

  // r = a0*b0 + a1*b1 * beta^(2lo)
  mul_karatsuba<Limb>(r.subspan(0, 2 * lo), a0, b0);
  mul_karatsuba<Limb>(r.subspan(2 * lo, 2 * hi), a1, b1);

  // sa = a0 + a1, sb = b0 + b1 with hi + 1 limbs
  LimbBuffer<Limb> sa(hi + 1, 0), sb(hi + 1, 0), mid(2 * hi + 2, 0);
  std::copy(a1.begin(), a1.end(), sa.begin());
  std::copy(b1.begin(), b1.end(), sb.begin());
  sa[hi] = add_n<Limb>(std::span<Limb>(sa).subspan(0, lo), std::span<const Limb>(sa).subspan(0, lo), a0);
  if (sa[hi] && hi > lo) sa[hi] = add_1<Limb>(std::span<Limb>(sa).subspan(lo, hi - lo), std::span<const Limb>(sa).subspan(lo, hi - lo), 1);
  sb[hi] = add_n<Limb>(std::span<Limb>(sb).subspan(0, lo), std::span<const Limb>(sb).subspan(0, lo), b0);
  if (sb[hi] && hi > lo) sb[hi] = add_1<Limb>(std::span<Limb>(sb).subspan(lo, hi - lo), std::span<const Limb>(sb).subspan(lo, hi - lo), 1);
  mul_karatsuba<Limb>(std::span<Limb>(mid), std::span<const Limb>(sa), std::span<const Limb>(sb));

  // mid -= a0*b0 + a1*b1
  std::span<Limb> m(mid);
  Limb bw = sub_n<Limb>(m.subspan(0, 2 * lo), std::span<const Limb>(m).subspan(0, 2 * lo),
                        std::span<const Limb>(r).subspan(0, 2 * lo));
  if (bw) sub_1<Limb>(m.subspan(2 * lo), std::span<const Limb>(m).subspan(2 * lo), 1);
  bw = sub_n<Limb>(m.subspan(0, 2 * hi), std::span<const Limb>(m).subspan(0, 2 * hi),
                   std::span<const Limb>(r).subspan(2 * lo, 2 * hi));
  if (bw) sub_1<Limb>(m.subspan(2 * hi), std::span<const Limb>(m).subspan(2 * hi), 1);

  // r += mid * beta^lo
  const std::size_t len = std::min<std::size_t>(mid.size(), 2 * n - lo);
  Limb c = add_n<Limb>(r.subspan(lo, len), std::span<const Limb>(r).subspan(lo, len),
                       std::span<const Limb>(m).subspan(0, len));
  if (c && lo + len < 2 * n) add_1<Limb>(r.subspan(lo + len), std::span<const Limb>(r).subspan(lo + len), c);
}

}  // namespace detail

// r = a * b with r.size() == a.size() + b.size(); requires a.size() >= b.size() >= 1.
// r must not alias a or b.
template <LimbType Limb>
void mul(std::span<Limb> r, std::span<const Limb> a, std::span<const Limb> b) {
  if (a.size() < b.size()) std::swap(a, b);
  assert(r.size() == a.size() + b.size() && !b.empty());
  if (b.size() < detail::kKaratsubaThreshold) {
    detail::mul_basecase<Limb>(r, a, b);
    return;
  }
  if (a.size() == b.size()) {
    detail::mul_karatsuba<Limb>(r, a, b);
    return;
  }
  // Unbalanced: split a into chunks of b.size().
  const std::size_t bn = b.size();
  zero<Limb>(r);
  LimbBuffer<Limb> tmp(2 * bn);
  for (std::size_t off = 0; off < a.size(); off += bn) {
    const std::size_t len = std::min(bn, a.size() - off);
    std::span<Limb> t(tmp.data(), len + bn);
    if (len == bn) {
      detail::mul_karatsuba<Limb>(t, a.subspan(off, len), b);
    } else {
      detail::mul_basecase<Limb>(t, b, a.subspan(off, len));
    }
    Limb c = add_n<Limb>(r.subspan(off, len + bn), std::span<const Limb>(r).subspan(off, len + bn),
                         std::span<const Limb>(t));
    if (c && off + len + bn < r.size()) {
      add_1<Limb>(r.subspan(off + len + bn), std::span<const Limb>(r).subspan(off + len + bn), c);
    }
  }
}

// q = a / d, r = a mod d (schoolbook long division, Knuth algorithm D).
// q.size() == a.size() - d.size() + 1, r.size() == d.size(), top limb of d nonzero.
template <LimbType Limb>
void divrem(std::span<Limb> q, std::span<Limb> r, std::span<const Limb> a, std::span<const Limb> d) {
  using W = WideOf<Limb>;
  constexpr int B = kLimbBits<Limb>;
  const std::size_t n = d.size();
  assert(n >= 1 && d[n - 1] != 0 && a.size() >= n);
  assert(q.size() == a.size() - n + 1 && r.size() == n);
  if (n == 1) {
    r[0] = divrem_1<Limb>(q, a, d[0]);
    return;
  }
  const std::size_t m = a.size() - n;
  const int s = clz<Limb>(d[n - 1]);
  LimbBuffer<Limb> dn(n), an(a.size() + 1);
  lshift<Limb>(std::span<Limb>(dn), d, s);
  an[a.size()] = lshift<Limb>(std::span<Limb>(an).subspan(0, a.size()), a, s);
  const Limb dtop = dn[n - 1], dnext = dn[n - 2];
  std::span<Limb> au(an);
  for (std::size_t j = m + 1; j-- > 0;) {
    const W num = (W(an[j + n]) << B) | an[j + n - 1];
    W qhat = num / dtop;
    W rhat = num % dtop;
    const W base = W(1) << B;
    while (qhat >= base || qhat * dnext > ((rhat << B) | an[j + n - 2])) {
      --qhat;
      rhat += dtop;
      if (rhat >= base) break;
    }
    Limb qd = Limb(qhat);
    Limb borrow = submul_1<Limb>(au.subspan(j, n), std::span<const Limb>(dn), qd);
    const Limb top = an[j + n];
    an[j + n] = top - borrow;
    if (top < borrow) {
      --qd;
      Limb c = add_n<Limb>(au.subspan(j, n), std::span<const Limb>(au).subspan(j, n), std::span<const Limb>(dn));
      an[j + n] += c;
    }
    q[j] = qd;
  }
  rshift<Limb>(r, std::span<const Limb>(an).subspan(0, n), s);
}

// r = floor(sqrt(a)); r.size() == (a.size() + 1) / 2. Newton iteration from an
// overestimate obtained in double precision; the iterates decrease monotonically
// to the integer root.
template <LimbType Limb>
void isqrt(std::span<Limb> r, std::span<const Limb> a) {
  constexpr int B = kLimbBits<Limb>;
  assert(r.size() == (a.size() + 1) / 2);
  zero<Limb>(r);
  const std::size_t an = normalized_size<Limb>(a);
  if (an == 0) return;
  const long bits = long(an) * B - clz<Limb>(a[an - 1]);
  // Take the top (up to) 100 bits with an even shift.
  long shift = std::max<long>(0, bits - 100);
  if (shift & 1) ++shift;
  long double top = 0;
  for (long i = bits - 1; i >= shift; --i) {
    const bool bit = (a[std::size_t(i / B)] >> (i % B)) & 1;
    top = top * 2 + (bit ? 1 : 0);
  }
  // x0 = (floor(sqrt(top)) + 2) << shift/2 is an overestimate of sqrt(a).
  const long double st = std::floor(std::sqrt(top)) + 2;
  const std::size_t rn = r.size();
  LimbBuffer<Limb> x(rn + 1, 0);
  {
    // write st (< 2^52) into x shifted by shift/2 bits
    std::uint64_t v = static_cast<std::uint64_t>(st);
    const long hs = shift / 2;
    for (int b = 0; b < 64; ++b) {
      if ((v >> b) & 1) {
        const long pos = hs + b;
        if (std::size_t(pos / B) < x.size()) x[std::size_t(pos / B)] |= Limb(1) << (pos % B);
      }
    }
  }
  LimbBuffer<Limb> q, rem, nx;
  for (;;) {
    const std::size_t xn = normalized_size<Limb>(std::span<const Limb>(x));
    std::span<const Limb> xs(x.data(), xn);
    // nx = (x + a / x) / 2
    if (an < xn) {
      q.assign(1, 0);
    } else {
      q.assign(an - xn + 1, 0);
      rem.assign(xn, 0);
      divrem<Limb>(std::span<Limb>(q), std::span<Limb>(rem), a.subspan(0, an), xs);
    }
    nx.assign(std::max(q.size(), x.size()) + 1, 0);
    std::copy(q.begin(), q.end(), nx.begin());
    std::span<Limb> nxs(nx);
    Limb c = add_n<Limb>(nxs.subspan(0, x.size()), std::span<const Limb>(nx).subspan(0, x.size()),
                         std::span<const Limb>(x));
    if (c) add_1<Limb>(nxs.subspan(x.size()), std::span<const Limb>(nx).subspan(x.size()), c);
    rshift<Limb>(nxs, std::span<const Limb>(nx), 1);
    // stop when nx >= x
    std::size_t len = std::max(nx.size(), x.size());
    nx.resize(len, 0);
    x.resize(len, 0);
    if (cmp<Limb>(std::span<const Limb>(nx), std::span<const Limb>(x)) >= 0) break;
    x.swap(nx);
  }
  const std::size_t xn = normalized_size<Limb>(std::span<const Limb>(x));
  assert(xn <= rn);
  std::copy(x.begin(), x.begin() + std::ptrdiff_t(xn), r.begin());
}

}  // namespace mpn
}  // namespace mpelem
