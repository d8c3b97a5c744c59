#pragma once
// prover.hpp - Symbolic verification of the series evaluators.
//
// The prover replays the evaluation loop of each series kind for every term
// count N separately, tracking for each fixed-point variable an upper bound on
// the magnitude of its exact value and on its accumulated error in ulps. The
// argument X is known only through 0 <= X < 2^-4, and the limb count n only
// through ulp <= 2^-B, so one run covers every argument and every precision.
// All bounds are exact rationals; large ones are rounded upward to dyadics
// with a 128-bit numerator to keep them small.

#include <gmpxx.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mpelem/series.hpp"

namespace mpelem {

/// Bounds for one fixed-point variable: |exact value| <= max_magnitude and
/// |computed - exact| <= max_error ulp.
struct AbstractValue {
  mpq_class max_magnitude = 0;
  mpq_class max_error = 0;

  /// Largest possible |computed value| for a given ulp.
  mpq_class computed_bound(const mpq_class& ulp) const { return max_magnitude + max_error * ulp; }

  /// Exact multiplication by a single-limb integer c.
  AbstractValue mul_limb(const mpq_class& c) const;
  /// Truncating division by c: error/c + 1.
  AbstractValue div_limb(const mpq_class& c) const;
  /// Truncating product: |Z|e1 + |Y|e2 + e1*e2*ulp + 1.
  AbstractValue mul(const AbstractValue& z, const mpq_class& ulp) const;
  /// Exact sum or difference.
  AbstractValue add(const AbstractValue& y) const;
};

enum class ProofCheck {
  kMagnitude,     // |S| <= 2^B - ulp
  kProductWidth,  // S * v fits n+2 limbs
  kNonnegative,   // operand of an unsigned multiply/divide is >= 0
  kPairGap,       // coefficient ratio behind the computed-sign argument
  kFinalError,    // final error <= 2 ulp
  kIdentity,      // u_k / v_k reproduces the series coefficients
};

const char* to_string(ProofCheck check);

struct ProofFailure {
  int n_terms = 0;
  int k = -1;                       // loop index, -1 when not tied to one
  std::optional<SeriesLine> line;   // program point, if any
  ProofCheck check = ProofCheck::kMagnitude;
  std::string detail;
};

struct ProofReport {
  SeriesKind kind = SeriesKind::kAtan;
  int limb_bits = 64;
  int n_min = 3;
  int n_max = kMaxTerms;
  bool passed = false;
  std::vector<mpq_class> final_error;  // per N, index N - n_min
  mpq_class worst_final_error = 0;
  std::map<SeriesLine, long> checks;   // flagged checks performed per line
  std::optional<ProofFailure> failure;

  std::string summary() const;
};

/// Bound recorded at one program point, in the order the evaluator's trace
/// records its snapshots.
struct PointBound {
  SeriesLine line;
  int k;
  AbstractValue value;
};

/// Proves the evaluator for `kind` correct for every N in 3..n_max.
ProofReport prove_series(SeriesKind kind, int limb_bits, const DenomTable& table, int n_max = kMaxTerms);

/// Per-point bounds of a single abstract run with N terms.
std::vector<PointBound> series_point_bounds(SeriesKind kind, int limb_bits, const DenomTable& table, int n_terms);

/// atan, atanh, exp, sin and cos with their default tables, both limb sizes.
std::vector<ProofReport> prove_all(int n_max = kMaxTerms);

}  // namespace mpelem
