#pragma once
// functions.hpp - Ball-valued atan, exp, log, sin and cos at precision p.
//
// Each entry point returns (y, z) with f(x) in [y - z, y + z], y rounded to p
// bits. Internally the argument is converted to fixed point at w working
// bits, reduced with the lookup tables, finished with a Taylor series and
// converted back. The radius counts every truncation in ulps of 2^-(B*n).

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mpelem/argtables.hpp"
#include "mpelem/bigfloat.hpp"
#include "mpelem/fixed_point.hpp"
#include "mpelem/series.hpp"

#ifndef MPELEM_LIMB_BITS
#define MPELEM_LIMB_BITS 64
#endif

namespace mpelem {

#if MPELEM_LIMB_BITS == 32
using DefaultLimb = std::uint32_t;
#else
using DefaultLimb = std::uint64_t;
#endif

/// Largest working precision served by the tables and constants.
inline constexpr long kMaxWorkingBits = kEconomicalBandBits;
/// exp rejects |x| >= 2^kExpMaxExponent.
inline constexpr std::int64_t kExpMaxExponent = 24;
/// Working precision above which cos is taken from sin, and exp from sinh.
inline constexpr long kCosFromSinBits = 320;
inline constexpr long kExpFromSinhBits = 832;

enum class ErrorCode { kUnsupportedPrecision, kUnsupportedArgument, kDomainError, kInvalidInput };

const char* to_string(ErrorCode code);

class EvalError : public std::runtime_error {
 public:
  EvalError(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

enum class Function { kAtan, kExp, kLog, kSin, kCos };

inline constexpr Function kFunctions[] = {Function::kAtan, Function::kExp, Function::kLog, Function::kSin,
                                          Function::kCos};

const char* to_string(Function f);
std::optional<Function> parse_function(std::string_view s);

/// What an evaluation did, for tests and for callers that want the accuracy
/// before output rounding.
struct EvalInfo {
  std::string path;        // "pipeline", "tiny", "huge", "unit", "exact", "whole-range", ...
  long w = 0;              // working precision in bits
  int limb_bits = 0;
  int limbs = 0;           // n
  long r = 0;              // X < 2^-r before the series
  int terms = 0;           // N
  std::uint64_t ulps = 0;  // Z, in units of 2^-(B*n) of the fixed-point result
  Radius tail;             // series truncation bound on the fixed-point result
  Ball unrounded;          // (y, z) before output rounding; the sin ball for sin_cos
  Ball unrounded_cos;      // cos ball before output rounding (sin_cos only)
};

struct SinCosBall {
  Ball sin;
  Ball cos;
};

namespace detail {

template <LimbType Limb>
Ball atan_ball(const BigFloat& x, long p, EvalInfo* info = nullptr);
template <LimbType Limb>
Ball exp_ball(const BigFloat& x, long p, EvalInfo* info = nullptr);
template <LimbType Limb>
Ball log_ball(const BigFloat& x, long p, EvalInfo* info = nullptr);
template <LimbType Limb>
SinCosBall sin_cos_ball(const BigFloat& x, long p, Want want, EvalInfo* info = nullptr);

}  // namespace detail

inline Ball atan_ball(const BigFloat& x, long p, EvalInfo* info = nullptr) {
  return detail::atan_ball<DefaultLimb>(x, p, info);
}
inline Ball exp_ball(const BigFloat& x, long p, EvalInfo* info = nullptr) {
  return detail::exp_ball<DefaultLimb>(x, p, info);
}
inline Ball log_ball(const BigFloat& x, long p, EvalInfo* info = nullptr) {
  return detail::log_ball<DefaultLimb>(x, p, info);
}
/// A component not wanted is returned as (0, 0).
inline SinCosBall sin_cos_ball(const BigFloat& x, long p, Want want = Want::kBoth, EvalInfo* info = nullptr) {
  return detail::sin_cos_ball<DefaultLimb>(x, p, want, info);
}
inline Ball sin_ball(const BigFloat& x, long p, EvalInfo* info = nullptr) {
  return sin_cos_ball(x, p, Want::kSin, info).sin;
}
inline Ball cos_ball(const BigFloat& x, long p, EvalInfo* info = nullptr) {
  return sin_cos_ball(x, p, Want::kCos, info).cos;
}

template <LimbType Limb = DefaultLimb>
Ball eval_ball(Function f, const BigFloat& x, long p, EvalInfo* info = nullptr) {
  switch (f) {
    case Function::kAtan: return detail::atan_ball<Limb>(x, p, info);
    case Function::kExp: return detail::exp_ball<Limb>(x, p, info);
    case Function::kLog: return detail::log_ball<Limb>(x, p, info);
    case Function::kSin: return detail::sin_cos_ball<Limb>(x, p, Want::kSin, info).sin;
    case Function::kCos: return detail::sin_cos_ball<Limb>(x, p, Want::kCos, info).cos;
  }
  throw std::logic_error("unknown function");
}

/// Stored constant truncated to ceil(w/B) fractional limbs (one integral
/// limb); error below 1 ulp. Throws kUnsupportedPrecision past the stored
/// precision.
template <LimbType Limb>
FixedPoint<Limb> get_constant(Constant c, long w);

}  // namespace mpelem
