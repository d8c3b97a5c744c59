#pragma once
// Layout of the generated table data.

#include <cstdint>

#include "mpelem/argtables.hpp"

namespace mpelem::data {

// Entry i occupies words[i*P/64 .. (i+1)*P/64), value = mantissa * 2^exps[i].
struct StoredTable {
  TableFunction function;
  Band band;
  const std::uint64_t* words;
  const std::int64_t* exps;
};

struct StoredConstant {
  Constant constant;
  const std::uint64_t* words;  // kConstantBits / 64 words
  std::int64_t exp;
};

extern const StoredTable kStoredTables[10];
extern const StoredConstant kStoredConstants[3];

}  // namespace mpelem::data
