#pragma once
// argtables.hpp - Lookup tables of function values for argument reduction.
//
// For q = 2^r and x in [0, 1), i = floor(q x), t = i/q:
//   exp(x)    = exp(t) exp(x - t)
//   sin(x)    = sin(t) cos(x - t) + cos(t) sin(x - t)
//   cos(x)    = cos(t) cos(x - t) - sin(t) sin(x - t)
//   log(1+x)  = log(1 + t) + log(1 + (q x - i)/(i + q))
//   atan(x)   = atan(t) + atan((q x - i)/(i x + q))
// A chained second table repeats the step on the residual with q^2.
// Entries are stored rounded to nearest with a P-bit significand.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mpelem/bigfloat.hpp"
#include "mpelem/fixed_point.hpp"

namespace mpelem {

enum class TableFunction { kExp, kSin, kCos, kLog, kAtan };
enum class Band { kFast, kEconomical };

inline constexpr std::array<TableFunction, 5> kTableFunctions = {
    TableFunction::kExp, TableFunction::kSin, TableFunction::kCos, TableFunction::kLog, TableFunction::kAtan};
inline constexpr std::array<Band, 2> kBands = {Band::kFast, Band::kEconomical};

const char* to_string(TableFunction f);
const char* to_string(Band b);
std::optional<TableFunction> parse_table_function(std::string_view s);
std::optional<Band> parse_band(std::string_view s);

/// Precision bound of each band; the fast tables serve w <= 512.
inline constexpr long kFastBandBits = 512;
inline constexpr long kEconomicalBandBits = 4608;
inline Band band_for(long w) { return w <= kFastBandBits ? Band::kFast : Band::kEconomical; }

struct TableSpec {
  TableFunction function;
  Band band;
  int chain_count;            // 1 or 2
  int bits_per_table;         // r
  std::array<int, 2> counts;  // entries per chained table; counts[1] = 0 when unchained
  long precision;             // P

  int total_entries() const { return counts[0] + counts[1]; }
  /// Payload in bits: entries * P.
  long payload_bits() const { return long(total_entries()) * precision; }
  /// Log2 of the grid denominator of chained table `which` (1 or 2).
  int grid_shift(int which) const { return which * bits_per_table; }
};

const TableSpec& table_spec(TableFunction f, Band b);

/// Stored table. Entry k of chained table `which` approximates f(k / 2^(which*r))
/// (log: log(1 + k / 2^(which*r))).
class ArgRedTable {
 public:
  ArgRedTable() = default;
  ArgRedTable(const TableSpec& spec, std::vector<BigFloat> entries);

  const TableSpec& spec() const { return *spec_; }
  const BigFloat& entry(int which, int index) const;
  std::span<const BigFloat> entries() const { return entries_; }

  friend bool operator==(const ArgRedTable& a, const ArgRedTable& b) {
    return a.spec_ == b.spec_ && a.entries_ == b.entries_;
  }

 private:
  const TableSpec* spec_ = nullptr;
  std::vector<BigFloat> entries_;
};

/// Computes the table from scratch with this library's own kernels.
ArgRedTable gen_argred_table(TableFunction f, Band b);

/// The embedded table.
const ArgRedTable& builtin_table(TableFunction f, Band b);

/// Entry truncated to a fixed-point number with nfrac fractional limbs and one
/// integral limb. Error below 1 ulp of the stored P bits plus 1 ulp of
/// truncation; callers charge 2 ulp.
template <LimbType Limb>
FixedPoint<Limb> lookup(const ArgRedTable& table, int which, int index, int nfrac);

/// "function band m r counts P" followed by one "<hex mantissa> p<exponent>"
/// line per entry, value = mantissa * 2^exponent, mantissa exactly P bits.
std::string dump(const ArgRedTable& table);
ArgRedTable parse_dump(const std::string& text);
/// One table entry in dump notation.
std::string dump_entry(const BigFloat& value, long precision);

struct TableMismatch {
  int which;
  int index;
  std::string stored;
  std::string reference;
};

struct TableVerifyReport {
  TableFunction function;
  Band band;
  int entries_checked = 0;
  std::vector<TableMismatch> mismatches;
  bool ok() const { return mismatches.empty(); }
};

/// Compares a table with a reference dump. Throws std::runtime_error when the
/// reference is missing entries, has the wrong header or cannot be parsed.
TableVerifyReport verify_table(const ArgRedTable& table, const std::string& reference_dump);

/// Verifies every embedded table against "<dir>/<function>_<band>.txt".
std::vector<TableVerifyReport> verify_tables(const std::string& reference_dir);

/// Directory holding the reference dumps: $MPELEM_TABLE_REFERENCE_DIR if set,
/// else the location written by the build.
std::string default_reference_dir();

// ---------------------------------------------------------------- constants

enum class Constant { kPiOver4, kPiOver2, kLog2 };

inline constexpr std::array<Constant, 3> kConstants = {Constant::kPiOver4, Constant::kPiOver2, Constant::kLog2};
/// Stored significand length of each constant.
inline constexpr long kConstantBits = 4608 + 64;

const char* to_string(Constant c);

/// Correctly rounded value at `bits`, computed with this library's kernels.
BigFloat gen_constant(Constant c, long bits);
/// Embedded value at kConstantBits.
const BigFloat& builtin_constant(Constant c);

// ---------------------------------------------------------------- generation

/// f(num / 2^shift) rounded to nearest with a `bits`-bit significand
/// (log: log(1 + num / 2^shift)). The argument must lie in [0, 1].
BigFloat gen_function_value(TableFunction f, std::uint64_t num, int shift, long bits);

}  // namespace mpelem
