#pragma once
// series.hpp - Rectangular-splitting Taylor series with collected denominators.
//
// The evaluators sum a truncated Taylor series backwards over a sqrt(N) x sqrt(N)
// grid of terms. Consecutive coefficients share a single-limb denominator v_k
// with numerators u_k, so most (n x 1) divisions become (n x 1)
// multiplications. The running sum S carries one integral limb and is kept
// multiplied by the current denominator.

#include <cstdint>
#include <string>
#include <vector>

#include "mpelem/fixed_point.hpp"

namespace mpelem {

enum class DenomKind { kOdd, kFactorial };

enum class SeriesKind { kAtan, kAtanh, kExp, kSin, kCos, kSinh };

const char* to_string(SeriesKind kind);
const char* to_string(DenomKind kind);

/// Collected-denominator table. For kOdd, u[k]/v[k] = 1/(2k+1). For
/// kFactorial, v[k] is the product of the integers of k's block and
/// u[k]/(v[0-block] * ... * v[k-block]) = 1/k!.
struct DenomTable {
  DenomKind kind = DenomKind::kOdd;
  int limb_bits = 64;
  std::vector<std::uint64_t> u;
  std::vector<std::uint64_t> v;
  std::vector<int> breaks;  // k with v[k] != v[k+1]

  std::size_t size() const { return u.size(); }
  bool is_break(std::size_t k) const { return k + 1 < v.size() && v[k] != v[k + 1]; }

  /// One line per k: "k u_k v_k break" in decimal.
  std::string dump() const;
  static DenomTable parse(DenomKind kind, int limb_bits, const std::string& text);
};

inline constexpr int kDenomTableLength = 640;
inline constexpr int kMaxTerms = 300;

DenomTable gen_denom_table(DenomKind kind, int limb_bits, int length = kDenomTableLength);

/// Shared immutable tables, generated on first use.
const DenomTable& odd_table(int limb_bits);
const DenomTable& factorial_table(int limb_bits);

DenomKind denom_kind(SeriesKind kind);
const DenomTable& default_table(SeriesKind kind, int limb_bits);

/// Program points of the series evaluator, used for tracing and by the
/// symbolic prover.
enum class SeriesLine {
  kDenomAdd,    // S <- S + v_{k+1} before a sign-corrected denominator change
  kDenomMul,    // S <- S * v_k
  kDenomDiv,    // S <- S / v_{k+1}
  kDenomSub,    // S <- S - v_k (or S - 1)
  kAddCoeff,    // S <- S +- u_k
  kHornerMul,   // S <- S * T_m
  kAddMul,      // S <- S +- u_k * T_{k mod m}
  kFinalDiv,    // S <- S / v_0
  kFinalMul,    // S <- S * X
};

const char* to_string(SeriesLine line);

/// Snapshot of S (two's complement, n+1 limbs unless noted) after a line.
template <LimbType Limb>
struct TracePoint {
  SeriesLine line;
  int k;
  std::vector<Limb> s;
};

template <LimbType Limb>
struct SeriesTrace {
  std::vector<TracePoint<Limb>> points;
};

/// Splitting parameter m = 2 * ceil(sqrt(N) / 2).
int splitting_parameter(int n_terms);

/// T[1..m] (T[0] left empty): powers of the base, X for exp and X^2
/// otherwise, each n limbs and each truncated. T[k] lies within k ulp below
/// the exact power.
template <LimbType Limb>
std::vector<FixedPoint<Limb>> series_power_table(const FixedPoint<Limb>& x, SeriesKind kind, int m);

/// Table index of the coefficient of term k.
int coeff_index(SeriesKind kind, int k);

/// sum_{k<N} (-1)^k X^(2k+1)/(2k+1), n limbs, <= 2 ulp error. 0 <= X <= 2^-4, 2 < N < 300.
template <LimbType Limb>
FixedPoint<Limb> eval_atan_series(const FixedPoint<Limb>& x, int n_terms, const DenomTable& table,
                                  SeriesTrace<Limb>* trace = nullptr);

/// sum_{k<N} X^(2k+1)/(2k+1), n limbs, <= 2 ulp error.
template <LimbType Limb>
FixedPoint<Limb> eval_atanh_series(const FixedPoint<Limb>& x, int n_terms, const DenomTable& table,
                                   SeriesTrace<Limb>* trace = nullptr);

/// sum_{k<N} X^k/k!, n+1 limbs (one integral), <= 2 ulp error.
template <LimbType Limb>
FixedPoint<Limb> eval_exp_series(const FixedPoint<Limb>& x, int n_terms, const DenomTable& table,
                                 SeriesTrace<Limb>* trace = nullptr);

enum class Want { kSin, kCos, kBoth };

template <LimbType Limb>
struct SinCos {
  FixedPoint<Limb> sin;  // n limbs
  FixedPoint<Limb> cos;  // n+1 limbs
};

/// sin = sum (-1)^k X^(2k+1)/(2k+1)!, cos = sum (-1)^k X^(2k)/(2k)!, sharing
/// the power table. Each within 2 ulp. A component not wanted is left empty.
template <LimbType Limb>
SinCos<Limb> eval_sin_cos_series(const FixedPoint<Limb>& x, int n_terms, const DenomTable& table, Want want,
                                 SeriesTrace<Limb>* sin_trace = nullptr, SeriesTrace<Limb>* cos_trace = nullptr);

/// sum_{k<N} X^(2k+1)/(2k+1)!, n limbs; the all-positive sine loop.
template <LimbType Limb>
FixedPoint<Limb> eval_sinh_series(const FixedPoint<Limb>& x, int n_terms, const DenomTable& table,
                                  SeriesTrace<Limb>* trace = nullptr);

/// Generic entry used by all of the above.
template <LimbType Limb>
FixedPoint<Limb> eval_series(SeriesKind kind, const FixedPoint<Limb>& x, int n_terms, const DenomTable& table,
                             SeriesTrace<Limb>* trace = nullptr);

}  // namespace mpelem
