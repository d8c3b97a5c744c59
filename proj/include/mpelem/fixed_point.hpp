#pragma once
// fixed_point.hpp - Fixed-point numbers over limb arrays.
//
// A FixedPoint holds nfrac fractional limbs and nint integral limbs, value
// (sum limbs[j] * 2^(B*j)) * 2^(-B*nfrac). One ulp is 2^(-B*nfrac). Every
// rounding site truncates, so each operation below documents a one-sided
// error of at most 1 ulp on top of the propagated input errors.

#include <cassert>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "mpelem/limb.hpp"

namespace mpelem {

/// Running error bound, in ulps of the working fixed-point precision.
struct UlpErrorBound {
  std::uint64_t count = 0;

  UlpErrorBound& operator+=(std::uint64_t k) {
    count = (count > UINT64_MAX - k) ? UINT64_MAX : count + k;
    return *this;
  }
};

template <LimbType Limb>
class FixedPoint {
 public:
  static constexpr int kBits = kLimbBits<Limb>;

  FixedPoint() = default;
  explicit FixedPoint(int nfrac, int nint = 0)
      : limbs_(std::size_t(nfrac + nint), 0), nfrac_(nfrac), nint_(nint) {
    assert(nfrac >= 0 && nint >= 0);
  }

  static FixedPoint from_limbs(std::span<const Limb> limbs, int nfrac) {
    FixedPoint r(nfrac, int(limbs.size()) - nfrac);
    std::copy(limbs.begin(), limbs.end(), r.limbs_.begin());
    return r;
  }

  /// Integer value v placed in the lowest integral limb.
  static FixedPoint integer(Limb v, int nfrac, int nint = 1) {
    FixedPoint r(nfrac, nint);
    r.limbs_[std::size_t(nfrac)] = v;
    return r;
  }

  int nfrac() const { return nfrac_; }
  int nint() const { return nint_; }
  int size() const { return nfrac_ + nint_; }

  std::span<Limb> limbs() { return limbs_; }
  std::span<const Limb> limbs() const { return limbs_; }
  Limb& operator[](std::size_t i) { return limbs_[i]; }
  Limb operator[](std::size_t i) const { return limbs_[i]; }

  bool is_zero() const { return mpn::is_zero<Limb>(limbs()); }

  /// Same value with a different layout: fractional limbs are truncated or
  /// zero-extended at the bottom, integral limbs dropped or zero-extended at
  /// the top.
  FixedPoint resized(int nfrac, int nint) const {
    FixedPoint r(nfrac, nint);
    for (int i = -nfrac; i < nint; ++i) {
      if (i >= -nfrac_ && i < nint_) r.limbs_[std::size_t(i + nfrac)] = limbs_[std::size_t(i + nfrac_)];
    }
    return r;
  }

  /// Number of leading zero bits below the binary point (value < 2^-result);
  /// returns B*nfrac for zero and 0 when any integral bit is set.
  long frac_leading_zeros() const {
    for (int i = size() - 1; i >= 0; --i) {
      if (limbs_[std::size_t(i)] != 0) {
        if (i >= nfrac_) return 0;
        return long(nfrac_ - 1 - i) * kBits + mpn::clz<Limb>(limbs_[std::size_t(i)]);
      }
    }
    return long(nfrac_) * kBits;
  }

  friend bool operator==(const FixedPoint&, const FixedPoint&) = default;

 private:
  LimbBuffer<Limb> limbs_;
  int nfrac_ = 0;
  int nint_ = 0;
};

template <LimbType Limb>
struct CarryResult {
  FixedPoint<Limb> value;
  Limb carry;
};

enum class MulMode { kSet, kAdd, kSub };

namespace detail {

template <LimbType Limb>
void check_same_frac(const FixedPoint<Limb>& x, const FixedPoint<Limb>& y) {
  if (x.nfrac() != y.nfrac()) throw std::invalid_argument("fixed-point operands differ in fractional limbs");
}

}  // namespace detail

/// X + Y, exact modulo 2^(B*size(X)). Y may have one limb fewer than X.
template <LimbType Limb>
CarryResult<Limb> fx_add(const FixedPoint<Limb>& x, const FixedPoint<Limb>& y) {
  detail::check_same_frac(x, y);
  assert(y.size() == x.size() || y.size() + 1 == x.size());
  FixedPoint<Limb> r = x;
  const auto ys = std::size_t(y.size());
  Limb c = mpn::add_n<Limb>(r.limbs().subspan(0, ys), x.limbs().subspan(0, ys), y.limbs());
  if (r.size() > y.size()) c = mpn::add_1<Limb>(r.limbs().subspan(ys), x.limbs().subspan(ys), c);
  return {std::move(r), c};
}

/// X - Y, exact modulo 2^(B*size(X)); a borrow of 1 means the result is a
/// two's-complement negative.
template <LimbType Limb>
CarryResult<Limb> fx_sub(const FixedPoint<Limb>& x, const FixedPoint<Limb>& y) {
  detail::check_same_frac(x, y);
  assert(y.size() == x.size() || y.size() + 1 == x.size());
  FixedPoint<Limb> r = x;
  const auto ys = std::size_t(y.size());
  Limb b = mpn::sub_n<Limb>(r.limbs().subspan(0, ys), x.limbs().subspan(0, ys), y.limbs());
  if (r.size() > y.size()) b = mpn::sub_1<Limb>(r.limbs().subspan(ys), x.limbs().subspan(ys), b);
  return {std::move(r), b};
}

/// X <- Y*c, X + Y*c or X - Y*c at full width; returns the limb carried (or
/// borrowed) out of X. Exact: an input error e becomes at most |e|*c.
template <LimbType Limb>
Limb fx_mul_limb(FixedPoint<Limb>& x, const FixedPoint<Limb>& y, Limb c, MulMode mode) {
  detail::check_same_frac(x, y);
  assert(x.size() == y.size());
  switch (mode) {
    case MulMode::kSet: return mpn::mul_1<Limb>(x.limbs(), y.limbs(), c);
    case MulMode::kAdd: return mpn::addmul_1<Limb>(x.limbs(), y.limbs(), c);
    case MulMode::kSub: return mpn::submul_1<Limb>(x.limbs(), y.limbs(), c);
  }
  return 0;
}

/// Y*Z truncated to Y.nfrac() fractional limbs; nint of the result is the sum
/// of the operands' nint. Adds < 1 ulp; propagated error
/// |Z|e1 + |Y|e2 + e1*e2 + 1 ulp.
template <LimbType Limb>
FixedPoint<Limb> fx_mul(const FixedPoint<Limb>& y, const FixedPoint<Limb>& z) {
  detail::check_same_frac(y, z);
  const int n = y.nfrac();
  LimbBuffer<Limb> prod(std::size_t(y.size() + z.size()));
  mpn::mul<Limb>(std::span<Limb>(prod), y.limbs(), z.limbs());
  FixedPoint<Limb> r(n, y.nint() + z.nint());
  std::copy(prod.begin() + n, prod.end(), r.limbs().begin());
  return r;
}

/// Y / c truncated. Adds < 1 ulp; propagated error |e|/c + 1 ulp.
template <LimbType Limb>
FixedPoint<Limb> fx_div_limb(const FixedPoint<Limb>& y, Limb c) {
  if (c == 0) throw std::invalid_argument("fx_div_limb: division by zero");
  FixedPoint<Limb> r(y.nfrac(), y.nint());
  mpn::divrem_1<Limb>(r.limbs(), y.limbs(), c);
  return r;
}

/// Y / D truncated to nfrac fractional and nint integral limbs. The caller
/// guarantees the quotient fits. Adds < 1 ulp.
template <LimbType Limb>
FixedPoint<Limb> fx_div(const FixedPoint<Limb>& y, const FixedPoint<Limb>& d, int nfrac, int nint) {
  const std::size_t dn = mpn::normalized_size<Limb>(d.limbs());
  if (dn == 0) throw std::invalid_argument("fx_div: division by zero");
  // quotient integer = floor(Yint * 2^(B*(nfrac + d.nfrac - y.nfrac)) / Dint)
  const int shift = nfrac + d.nfrac() - y.nfrac();
  assert(shift >= 0);
  LimbBuffer<Limb> num(std::size_t(y.size() + shift), 0);
  std::copy(y.limbs().begin(), y.limbs().end(), num.begin() + shift);
  FixedPoint<Limb> r(nfrac, nint);
  if (num.size() < dn) return r;
  LimbBuffer<Limb> q(num.size() - dn + 1), rem(dn);
  mpn::divrem<Limb>(std::span<Limb>(q), std::span<Limb>(rem), std::span<const Limb>(num), d.limbs().subspan(0, dn));
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (i < std::size_t(r.size())) {
      r[i] = q[i];
    } else {
      assert(q[i] == 0 && "fx_div: quotient overflow");
    }
  }
  return r;
}

/// floor(sqrt(Y)) at Y's fractional precision; Y in [0, 4) with at most one
/// integral limb. The result has one integral limb and lies within 1 ulp
/// below the true root.
template <LimbType Limb>
FixedPoint<Limb> fx_sqrt(const FixedPoint<Limb>& y) {
  assert(y.nint() <= 1);
  const int n = y.nfrac();
  // sqrt(Yint * 2^(-Bn)) * 2^(Bn) = sqrt(Yint * 2^(Bn))
  LimbBuffer<Limb> a(std::size_t(2 * n + 1), 0);
  std::copy(y.limbs().begin(), y.limbs().end(), a.begin() + n);
  LimbBuffer<Limb> root((a.size() + 1) / 2);
  mpn::isqrt<Limb>(std::span<Limb>(root), std::span<const Limb>(a));
  FixedPoint<Limb> r(n, 1);
  for (std::size_t i = 0; i < root.size() && i < std::size_t(r.size()); ++i) r[i] = root[i];
  return r;
}

/// Y * 2^k truncated (k may be negative); layout unchanged, high bits that
/// leave the integral range are dropped.
template <LimbType Limb>
FixedPoint<Limb> fx_shift(const FixedPoint<Limb>& y, long k) {
  constexpr int B = kLimbBits<Limb>;
  FixedPoint<Limb> r(y.nfrac(), y.nint());
  const long total = y.size();
  const long limb_shift = (k >= 0) ? k / B : -((-k + B - 1) / B);
  const int bit_shift = int(k - limb_shift * B);  // in [0, B)
  // first shift by whole limbs (toward higher when limb_shift > 0)
  LimbBuffer<Limb> tmp(std::size_t(total) + 1, 0);
  for (long i = 0; i < total; ++i) {
    const long j = i + limb_shift;
    if (j >= 0 && j < total) tmp[std::size_t(j)] = y[std::size_t(i)];
  }
  // bits shifted below position 0 by a negative limb shift are lost; a positive
  // bit shift then needs the next lower source limb
  if (bit_shift != 0) {
    const long src = -limb_shift - 1;  // limb that lands just below position 0
    Limb below = (src >= 0 && src < total) ? y[std::size_t(src)] : 0;
    for (long i = total - 1; i >= 0; --i) {
      Limb lower = (i > 0) ? tmp[std::size_t(i - 1)] : below;
      r[std::size_t(i)] = Limb(tmp[std::size_t(i)] << bit_shift) | Limb(lower >> (B - bit_shift));
    }
  } else {
    for (long i = 0; i < total; ++i) r[std::size_t(i)] = tmp[std::size_t(i)];
  }
  return r;
}

}  // namespace mpelem
