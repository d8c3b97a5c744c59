#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tables_data.hpp"

namespace mpelem {

namespace {

std::size_t slot(TableFunction f, Band b) { return std::size_t(f) * 2 + std::size_t(b); }

ArgRedTable load(const data::StoredTable& st) {
  const TableSpec& s = table_spec(st.function, st.band);
  const std::size_t per = std::size_t(s.precision / 64);
  std::vector<BigFloat> entries;
  for (std::size_t i = 0; i < std::size_t(s.total_entries()); ++i) {
    entries.push_back(BigFloat::from_integer(false, {st.words + i * per, per}, st.exps[i]));
  }
  return ArgRedTable(s, std::move(entries));
}

}  // namespace

const ArgRedTable& builtin_table(TableFunction f, Band b) {
  static const std::vector<ArgRedTable> tables = [] {
    std::vector<ArgRedTable> t(10);
    for (const auto& st : data::kStoredTables) t[slot(st.function, st.band)] = load(st);
    return t;
  }();
  return tables[slot(f, b)];
}

const BigFloat& builtin_constant(Constant c) {
  static const std::vector<BigFloat> values = [] {
    std::vector<BigFloat> v(3);
    for (const auto& sc : data::kStoredConstants) {
      v[std::size_t(sc.constant)] = BigFloat::from_integer(false, {sc.words, std::size_t(kConstantBits / 64)}, sc.exp);
    }
    return v;
  }();
  return values[std::size_t(c)];
}

std::string default_reference_dir() {
  if (const char* env = std::getenv("MPELEM_TABLE_REFERENCE_DIR"); env && *env) return env;
#ifdef MPELEM_REFERENCE_DIR
  return MPELEM_REFERENCE_DIR;
#else
  return "reference";
#endif
}

std::vector<TableVerifyReport> verify_tables(const std::string& reference_dir) {
  std::vector<TableVerifyReport> out;
  for (auto f : kTableFunctions) {
    for (auto b : kBands) {
      const std::string path = reference_dir + "/" + to_string(f) + "_" + to_string(b) + ".txt";
      std::ifstream in(path);
      if (!in) throw std::runtime_error("missing reference table file " + path);
      std::stringstream ss;
      ss << in.rdbuf();
      out.push_back(verify_table(builtin_table(f, b), ss.str()));
    }
  }
  return out;
}

}  // namespace mpelem
