// Writes the embedded table data as a C++ source file.
//
//   mpelem_tablegen <output.cpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "mpelem/argtables.hpp"

namespace {

using namespace mpelem;

std::string ident(TableFunction f, Band b) {
  std::string s = std::string(to_string(f)) + "_" + to_string(b);
  return s;
}

void emit_words(std::ostream& out, const BigFloat& v, long bits, std::int64_t* exp) {
  const std::size_t n = std::size_t(bits / 64);
  std::vector<std::uint64_t> words;
  *exp = 0;
  if (!v.is_zero()) {
    *exp = v.exponent() - bits;
    words = v.scaled_floor(-*exp);
  }
  words.resize(n, 0);
  char buf[32];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "0x%016llxull,", static_cast<unsigned long long>(words[i]));
    out << (i % 4 == 0 ? "\n    " : " ") << buf;
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: mpelem_tablegen <output.cpp>\n";
    return 2;
  }
  std::ofstream out(argv[1]);
  if (!out) {
    std::cerr << "cannot write " << argv[1] << "\n";
    return 1;
  }
  out << "// Generated by mpelem_tablegen. Do not edit.\n#include \"tables_data.hpp\"\n\n"
      << "namespace mpelem::data {\nnamespace {\n\n";
  for (auto f : kTableFunctions) {
    for (auto b : kBands) {
      const ArgRedTable t = gen_argred_table(f, b);
      const long p = t.spec().precision;
      std::vector<std::int64_t> exps;
      out << "const std::uint64_t k_" << ident(f, b) << "_words[] = {";
      for (const auto& e : t.entries()) {
        std::int64_t ex;
        emit_words(out, e, p, &ex);
        exps.push_back(ex);
      }
      out << "\n};\nconst std::int64_t k_" << ident(f, b) << "_exps[] = {";
      for (std::size_t i = 0; i < exps.size(); ++i) out << (i % 12 == 0 ? "\n    " : " ") << exps[i] << ",";
      out << "\n};\n\n";
    }
  }
  const char* const_names[] = {"pi4", "pi2", "log2"};
  std::int64_t const_exps[3];
  for (auto c : kConstants) {
    out << "const std::uint64_t k_" << const_names[int(c)] << "_words[] = {";
    emit_words(out, gen_constant(c, kConstantBits), kConstantBits, &const_exps[int(c)]);
    out << "\n};\n";
  }
  out << "\n}  // namespace\n\nconst StoredTable kStoredTables[10] = {\n";
  for (auto f : kTableFunctions) {
    for (auto b : kBands) {
      out << "    {TableFunction(" << int(f) << "), Band(" << int(b) << "), k_" << ident(f, b) << "_words, k_"
          << ident(f, b) << "_exps},\n";
    }
  }
  out << "};\n\nconst StoredConstant kStoredConstants[3] = {\n";
  for (auto c : kConstants) {
    out << "    {Constant(" << int(c) << "), k_" << const_names[int(c)] << "_words, " << const_exps[int(c)] << "},\n";
  }
  out << "};\n\n}  // namespace mpelem::data\n";
  return out ? 0 : 1;
}
