// Writes reference dumps of every lookup table, computed with MPFR.
//
//   mpelem_reference <directory>
//
// One file per table, "<function>_<band>.txt", in the table dump format.

#include <gmp.h>
#include <mpfr.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "mpelem/argtables.hpp"

namespace {

using namespace mpelem;

std::string entry_line(mpfr_t v, long bits) {
  if (mpfr_zero_p(v)) return std::string(std::size_t(bits / 4), '0') + " p0";
  mpz_t z;
  mpz_init(z);
  mpfr_exp_t e = mpfr_get_z_2exp(z, v);
  // normalize to exactly `bits` significant bits
  const long len = long(mpz_sizeinbase(z, 2));
  if (len < bits) {
    mpz_mul_2exp(z, z, mp_bitcnt_t(bits - len));
    e -= bits - len;
  }
  char* hex = mpz_get_str(nullptr, 16, z);
  std::string digits(hex);
  void (*free_fn)(void*, size_t);
  mp_get_memory_functions(nullptr, nullptr, &free_fn);
  free_fn(hex, std::strlen(hex) + 1);
  mpz_clear(z);
  if (long(digits.size()) < bits / 4) digits.insert(0, std::size_t(bits / 4) - digits.size(), '0');
  return digits + " p" + std::to_string(e);
}

void reference_value(mpfr_t out, TableFunction f, long num, int shift) {
  mpfr_t x;
  mpfr_init2(x, 128);
  mpfr_set_si_2exp(x, num, -shift, MPFR_RNDN);  // exact
  switch (f) {
    case TableFunction::kExp: mpfr_exp(out, x, MPFR_RNDN); break;
    case TableFunction::kSin: mpfr_sin(out, x, MPFR_RNDN); break;
    case TableFunction::kCos: mpfr_cos(out, x, MPFR_RNDN); break;
    case TableFunction::kLog: mpfr_log1p(out, x, MPFR_RNDN); break;
    case TableFunction::kAtan: mpfr_atan(out, x, MPFR_RNDN); break;
  }
  mpfr_clear(x);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: mpelem_reference <directory>\n";
    return 2;
  }
  const std::filesystem::path dir(argv[1]);
  std::filesystem::create_directories(dir);
  for (auto f : kTableFunctions) {
    for (auto b : kBands) {
      const TableSpec& s = table_spec(f, b);
      std::ofstream out(dir / (std::string(to_string(f)) + "_" + to_string(b) + ".txt"));
      out << to_string(f) << " " << to_string(b) << " " << s.chain_count << " " << s.bits_per_table << " "
          << s.counts[0];
      if (s.chain_count == 2) out << "+" << s.counts[1];
      out << " " << s.precision << "\n";
      mpfr_t v;
      mpfr_init2(v, s.precision);
      for (int which = 1; which <= s.chain_count; ++which) {
        for (int i = 0; i < s.counts[std::size_t(which - 1)]; ++i) {
          reference_value(v, f, i, s.grid_shift(which));
          out << entry_line(v, s.precision) << "\n";
        }
      }
      mpfr_clear(v);
      if (!out) {
        std::cerr << "write failed in " << dir << "\n";
        return 1;
      }
    }
  }
  return 0;
}
