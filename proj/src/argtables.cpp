#include "mpelem/argtables.hpp"

#include <sstream>
#include <stdexcept>

namespace mpelem {

namespace {

constexpr TableSpec kSpecs[] = {
    {TableFunction::kExp, Band::kFast, 1, 8, {178, 0}, kFastBandBits},
    {TableFunction::kExp, Band::kEconomical, 2, 5, {23, 32}, kEconomicalBandBits},
    {TableFunction::kSin, Band::kFast, 1, 8, {203, 0}, kFastBandBits},
    {TableFunction::kSin, Band::kEconomical, 2, 5, {26, 32}, kEconomicalBandBits},
    {TableFunction::kCos, Band::kFast, 1, 8, {203, 0}, kFastBandBits},
    {TableFunction::kCos, Band::kEconomical, 2, 5, {26, 32}, kEconomicalBandBits},
    {TableFunction::kLog, Band::kFast, 2, 7, {128, 128}, kFastBandBits},
    {TableFunction::kLog, Band::kEconomical, 2, 5, {32, 32}, kEconomicalBandBits},
    {TableFunction::kAtan, Band::kFast, 1, 8, {256, 0}, kFastBandBits},
    {TableFunction::kAtan, Band::kEconomical, 2, 5, {32, 32}, kEconomicalBandBits},
};

std::string counts_text(const TableSpec& s) {
  std::string t = std::to_string(s.counts[0]);
  if (s.chain_count == 2) t += "+" + std::to_string(s.counts[1]);
  return t;
}

std::string header_text(const TableSpec& s) {
  return std::string(to_string(s.function)) + " " + to_string(s.band) + " " + std::to_string(s.chain_count) + " " +
         std::to_string(s.bits_per_table) + " " + counts_text(s) + " " + std::to_string(s.precision);
}

std::string to_hex_digits(const std::vector<std::uint64_t>& words, long digits) {
  std::string out(std::size_t(digits), '0');
  for (long i = 0; i < digits; ++i) {
    const long bit = 4 * (digits - 1 - i);
    const std::size_t w = std::size_t(bit / 64);
    const unsigned d = w < words.size() ? unsigned(words[w] >> (bit % 64)) & 0xf : 0;
    out[std::size_t(i)] = "0123456789abcdef"[d];
  }
  return out;
}

BigFloat parse_entry(const std::string& line) {
  std::istringstream in(line);
  std::string mant, exp;
  if (!(in >> mant >> exp) || exp.size() < 2 || exp[0] != 'p') {
    throw std::runtime_error("malformed table entry: " + line);
  }
  std::vector<std::uint64_t> words((mant.size() + 15) / 16, 0);
  for (std::size_t i = 0; i < mant.size(); ++i) {
    const char c = mant[mant.size() - 1 - i];
    int d;
    if (c >= '0' && c <= '9') d = c - '0';
    else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
    else throw std::runtime_error("malformed table mantissa: " + line);
    words[i / 16] |= std::uint64_t(d) << (4 * (i % 16));
  }
  std::int64_t e;
  try {
    e = std::stoll(exp.substr(1));
  } catch (const std::exception&) {
    throw std::runtime_error("malformed table exponent: " + line);
  }
  return BigFloat::from_integer(false, words, e);
}

}  // namespace

const char* to_string(TableFunction f) {
  switch (f) {
    case TableFunction::kExp: return "exp";
    case TableFunction::kSin: return "sin";
    case TableFunction::kCos: return "cos";
    case TableFunction::kLog: return "log";
    case TableFunction::kAtan: return "atan";
  }
  return "?";
}

const char* to_string(Band b) { return b == Band::kFast ? "fast" : "economical"; }

const char* to_string(Constant c) {
  switch (c) {
    case Constant::kPiOver4: return "pi/4";
    case Constant::kPiOver2: return "pi/2";
    case Constant::kLog2: return "log2";
  }
  return "?";
}

std::optional<TableFunction> parse_table_function(std::string_view s) {
  for (auto f : kTableFunctions) {
    if (s == to_string(f)) return f;
  }
  return std::nullopt;
}

std::optional<Band> parse_band(std::string_view s) {
  for (auto b : kBands) {
    if (s == to_string(b)) return b;
  }
  return std::nullopt;
}

const TableSpec& table_spec(TableFunction f, Band b) {
  for (const auto& s : kSpecs) {
    if (s.function == f && s.band == b) return s;
  }
  throw std::logic_error("no such table");
}

ArgRedTable::ArgRedTable(const TableSpec& spec, std::vector<BigFloat> entries)
    : spec_(&table_spec(spec.function, spec.band)), entries_(std::move(entries)) {
  if (int(entries_.size()) != spec_->total_entries()) throw std::invalid_argument("table entry count mismatch");
}

const BigFloat& ArgRedTable::entry(int which, int index) const {
  if (which < 1 || which > spec_->chain_count || index < 0 || index >= spec_->counts[std::size_t(which - 1)]) {
    throw std::out_of_range("table index out of range");
  }
  return entries_[std::size_t((which == 2 ? spec_->counts[0] : 0) + index)];
}

template <LimbType Limb>
FixedPoint<Limb> lookup(const ArgRedTable& table, int which, int index, int nfrac) {
  constexpr int B = kLimbBits<Limb>;
  const BigFloat& e = table.entry(which, index);
  FixedPoint<Limb> r(nfrac, 1);
  if (e.is_zero()) return r;
  const auto words = e.scaled_floor(std::int64_t(B) * nfrac);
  const auto limbs = r.limbs();
  for (std::size_t i = 0; i < words.size(); ++i) {
    if constexpr (B == 64) {
      if (i < limbs.size()) limbs[i] = words[i];
    } else {
      if (2 * i < limbs.size()) limbs[2 * i] = Limb(words[i]);
      if (2 * i + 1 < limbs.size()) limbs[2 * i + 1] = Limb(words[i] >> 32);
    }
  }
  return r;
}

template FixedPoint<std::uint32_t> lookup(const ArgRedTable&, int, int, int);
template FixedPoint<std::uint64_t> lookup(const ArgRedTable&, int, int, int);

std::string dump_entry(const BigFloat& value, long precision) {
  if (value.negative() && !value.is_zero()) throw std::invalid_argument("table entries are nonnegative");
  if (value.is_zero()) return std::string(std::size_t(precision / 4), '0') + " p0";
  if (value.bit_length() > precision) throw std::invalid_argument("table entry exceeds its precision");
  const std::int64_t e = value.exponent() - precision;
  return to_hex_digits(value.scaled_floor(-e), precision / 4) + " p" + std::to_string(e);
}

std::string dump(const ArgRedTable& table) {
  const TableSpec& s = table.spec();
  std::string out = header_text(s) + "\n";
  for (const auto& e : table.entries()) out += dump_entry(e, s.precision) + "\n";
  return out;
}

namespace {

struct ParsedDump {
  const TableSpec* spec = nullptr;
  std::vector<BigFloat> entries;
};

ParsedDump parse_lines(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("table dump is empty");
  std::istringstream h(line);
  std::string fname, bname, counts;
  int m = 0, r = 0;
  long p = 0;
  if (!(h >> fname >> bname >> m >> r >> counts >> p)) throw std::runtime_error("malformed table header: " + line);
  const auto f = parse_table_function(fname);
  const auto b = parse_band(bname);
  if (!f || !b) throw std::runtime_error("unknown table in header: " + line);
  ParsedDump out;
  out.spec = &table_spec(*f, *b);
  if (header_text(*out.spec) != line) {
    throw std::runtime_error("table header does not match the " + std::string(fname) + " " + bname +
                             " layout: " + line);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.entries.push_back(parse_entry(line));
  }
  return out;
}

}  // namespace

ArgRedTable parse_dump(const std::string& text) {
  ParsedDump d = parse_lines(text);
  if (int(d.entries.size()) != d.spec->total_entries()) {
    throw std::runtime_error("table dump has " + std::to_string(d.entries.size()) + " entries, expected " +
                             std::to_string(d.spec->total_entries()));
  }
  return ArgRedTable(*d.spec, std::move(d.entries));
}

TableVerifyReport verify_table(const ArgRedTable& table, const std::string& reference_dump) {
  const TableSpec& s = table.spec();
  ParsedDump ref = parse_lines(reference_dump);
  if (ref.spec != &s) {
    throw std::runtime_error(std::string("reference is for ") + to_string(ref.spec->function) + " " +
                             to_string(ref.spec->band) + ", table is " + to_string(s.function) + " " +
                             to_string(s.band) + " (size mismatch)");
  }
  if (int(ref.entries.size()) != s.total_entries()) {
    throw std::runtime_error("reference has " + std::to_string(ref.entries.size()) + " entries, table has " +
                             std::to_string(s.total_entries()) + " (size mismatch)");
  }
  TableVerifyReport report{s.function, s.band, 0, {}};
  for (int which = 1; which <= s.chain_count; ++which) {
    for (int i = 0; i < s.counts[std::size_t(which - 1)]; ++i) {
      const BigFloat& got = table.entry(which, i);
      const BigFloat& want = ref.entries[std::size_t((which == 2 ? s.counts[0] : 0) + i)];
      ++report.entries_checked;
      if (!(got == want)) {
        report.mismatches.push_back({which, i, dump_entry(got, s.precision), dump_entry(want, s.precision)});
      }
    }
  }
  return report;
}

}  // namespace mpelem
