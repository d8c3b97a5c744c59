#pragma once
// bigfloat.hpp - Arbitrary-precision binary floats, one-sided radii and balls.

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mpelem {

class BigFloat;

/// Nonnegative low-precision magnitude m * 2^e with m < 2^32. Every operation
/// rounds upward, so a Radius is always a safe upper bound.
class Radius {
 public:
  Radius() = default;

  static Radius pow2(std::int64_t e) { return Radius(1, e); }
  /// count * 2^e rounded up.
  static Radius from_ulps(std::uint64_t count, std::int64_t e);
  /// |x| rounded up; infinite or NaN x is rejected.
  static Radius above(const BigFloat& x);

  bool is_zero() const { return mant_ == 0; }
  std::uint32_t mantissa() const { return mant_; }
  std::int64_t exponent() const { return exp_; }

  Radius operator+(const Radius& o) const;
  Radius operator*(const Radius& o) const;
  Radius mul_pow2(std::int64_t k) const { return is_zero() ? *this : Radius(mant_, exp_ + k); }

  /// Exact value as a BigFloat.
  BigFloat to_bigfloat() const;
  double to_double() const;
  std::string to_hex() const;

  std::strong_ordering operator<=>(const Radius& o) const;
  bool operator==(const Radius& o) const { return (*this <=> o) == 0; }

 private:
  Radius(std::uint64_t m, std::int64_t e) { normalize_up(m, e); }
  void normalize_up(unsigned __int128 m, std::int64_t e);

  std::uint32_t mant_ = 0;
  std::int64_t exp_ = 0;
};

/// Sign-magnitude binary float. A finite nonzero value is
///   (-1)^negative * (mantissa / 2^(64 * limbs)) * 2^exponent
/// with the top mantissa bit set, so 2^(exponent-1) <= |x| < 2^exponent, and
/// no zero low limbs. Zero, infinities and NaN carry no mantissa.
class BigFloat {
 public:
  enum class Kind { kZero, kFinite, kInf, kNaN };

  BigFloat() = default;

  static BigFloat zero(bool negative = false);
  static BigFloat inf(bool negative = false);
  static BigFloat nan();
  static BigFloat from_int(std::int64_t v);
  static BigFloat from_double(double d);
  /// (-1)^negative * integer(limbs) * 2^scale, normalized. Exact.
  static BigFloat from_integer(bool negative, std::span<const std::uint64_t> limbs, std::int64_t scale);

  /// Hex float ("0x1.8p-3", "-0X.Ap+2"), decimal ("0.1", "-1.5e-7") or
  /// inf/nan. Hex input is exact; decimal input is rounded to nearest at
  /// `precision` bits. Throws std::invalid_argument on malformed text.
  static BigFloat parse(std::string_view text, long precision = 4608);

  Kind kind() const { return kind_; }
  bool is_zero() const { return kind_ == Kind::kZero; }
  bool is_finite() const { return kind_ == Kind::kFinite || kind_ == Kind::kZero; }
  bool is_inf() const { return kind_ == Kind::kInf; }
  bool is_nan() const { return kind_ == Kind::kNaN; }
  bool negative() const { return negative_; }
  std::int64_t exponent() const { return exp_; }
  std::span<const std::uint64_t> mantissa() const { return mant_; }
  /// Significant bits (position of the lowest set bit counted from the top).
  long bit_length() const;

  BigFloat operator-() const;
  BigFloat abs() const;
  BigFloat mul_pow2(std::int64_t k) const;

  /// Exact arithmetic on finite values; the cost grows with the exponent gap.
  friend BigFloat operator+(const BigFloat& a, const BigFloat& b);
  friend BigFloat operator-(const BigFloat& a, const BigFloat& b);
  friend BigFloat operator*(const BigFloat& a, const BigFloat& b);

  /// Nearest p-bit value, ties to even; |x - result| is added (rounded up)
  /// into *error when given.
  BigFloat rounded(long p, Radius* error = nullptr) const;

  /// floor(|x| * 2^k) as little-endian limbs (empty for zero).
  std::vector<std::uint64_t> scaled_floor(std::int64_t k) const;
  /// True iff |x| * 2^k is an integer.
  bool scaled_exact(std::int64_t k) const;

  /// "0x1.8p-3" style; "0", "-0", "inf", "-inf", "nan".
  std::string to_hex() const;
  /// Decimal with `digits` significant digits (truncated), e.g. "1.25e-3".
  std::string to_decimal(int digits = 20) const;
  double to_double() const;

  friend bool operator==(const BigFloat&, const BigFloat&) = default;
  /// Numeric comparison of finite values.
  friend std::strong_ordering compare(const BigFloat& a, const BigFloat& b);
  friend std::strong_ordering compare_abs(const BigFloat& a, const BigFloat& b);

 private:
  void normalize();

  Kind kind_ = Kind::kZero;
  bool negative_ = false;
  std::int64_t exp_ = 0;
  std::vector<std::uint64_t> mant_;
};

/// Midpoint-radius enclosure [mid - rad, mid + rad].
struct Ball {
  BigFloat mid;
  Radius rad;
};

}  // namespace mpelem
