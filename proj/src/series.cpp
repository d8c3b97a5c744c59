#include "mpelem/series.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mpelem {

const char* to_string(SeriesKind kind) {
  switch (kind) {
    case SeriesKind::kAtan: return "atan";
    case SeriesKind::kAtanh: return "atanh";
    case SeriesKind::kExp: return "exp";
    case SeriesKind::kSin: return "sin";
    case SeriesKind::kCos: return "cos";
    case SeriesKind::kSinh: return "sinh";
  }
  return "?";
}

const char* to_string(DenomKind kind) { return kind == DenomKind::kOdd ? "odd" : "factorial"; }

const char* to_string(SeriesLine line) {
  switch (line) {
    case SeriesLine::kDenomAdd: return "denom-add";
    case SeriesLine::kDenomMul: return "denom-mul";
    case SeriesLine::kDenomDiv: return "denom-div";
    case SeriesLine::kDenomSub: return "denom-sub";
    case SeriesLine::kAddCoeff: return "add-coeff";
    case SeriesLine::kHornerMul: return "horner-mul";
    case SeriesLine::kAddMul: return "addmul";
    case SeriesLine::kFinalDiv: return "final-div";
    case SeriesLine::kFinalMul: return "final-mul";
  }
  return "?";
}

std::string DenomTable::dump() const {
  std::ostringstream os;
  for (std::size_t k = 0; k < size(); ++k) {
    os << k << ' ' << u[k] << ' ' << v[k] << ' ' << (is_break(k) ? 1 : 0) << '\n';
  }
  return os.str();
}

DenomTable DenomTable::parse(DenomKind kind, int limb_bits, const std::string& text) {
  DenomTable t;
  t.kind = kind;
  t.limb_bits = limb_bits;
  std::istringstream is(text);
  std::size_t k;
  std::uint64_t u, v;
  int brk;
  while (is >> k >> u >> v >> brk) {
    if (k != t.u.size()) throw std::runtime_error("denominator table dump: index out of sequence");
    t.u.push_back(u);
    t.v.push_back(v);
  }
  for (std::size_t i = 0; i + 1 < t.v.size(); ++i) {
    if (t.v[i] != t.v[i + 1]) t.breaks.push_back(int(i));
  }
  return t;
}

DenomTable gen_denom_table(DenomKind kind, int limb_bits, int length) {
  if (limb_bits != 32 && limb_bits != 64) throw std::invalid_argument("limb_bits must be 32 or 64");
  using U128 = unsigned __int128;
  const U128 limit = (U128(1) << limb_bits) - 1;  // largest limb value

  DenomTable t;
  t.kind = kind;
  t.limb_bits = limb_bits;
  t.u.resize(std::size_t(length));
  t.v.resize(std::size_t(length));

  // Greedy blocks: extend while the collected denominator still fits a limb.
  std::vector<int> block_start;
  std::vector<std::uint64_t> block_v;
  U128 acc = 1;
  block_start.push_back(0);
  for (int k = 0; k < length; ++k) {
    const U128 factor = kind == DenomKind::kOdd ? U128(2 * k + 1) : U128(std::max(k, 1));
    U128 next;
    if (kind == DenomKind::kOdd) {
      const auto g = std::gcd(static_cast<std::uint64_t>(acc), static_cast<std::uint64_t>(factor));
      next = acc / g * factor;
    } else {
      next = acc * factor;
    }
    if (next > limit) {
      block_v.push_back(static_cast<std::uint64_t>(acc));
      block_start.push_back(k);
      acc = factor;
    } else {
      acc = next;
    }
  }
  block_v.push_back(static_cast<std::uint64_t>(acc));

  for (std::size_t b = 0; b < block_v.size(); ++b) {
    const int lo = block_start[b];
    const int hi = (b + 1 < block_start.size()) ? block_start[b + 1] : length;
    const std::uint64_t vb = block_v[b];
    U128 partial = 1;
    for (int k = lo; k < hi; ++k) {
      t.v[std::size_t(k)] = vb;
      if (kind == DenomKind::kOdd) {
        t.u[std::size_t(k)] = vb / std::uint64_t(2 * k + 1);
      } else {
        partial *= U128(std::max(k, 1));
        t.u[std::size_t(k)] = static_cast<std::uint64_t>(U128(vb) / partial);
      }
    }
    if (hi < length) t.breaks.push_back(hi - 1);
  }
  for (std::size_t i = 0; i + 1 < block_v.size(); ++i) {
    if (block_v[i] == block_v[i + 1]) throw std::logic_error("adjacent denominator blocks coincide");
  }
  return t;
}

namespace {

struct TableCache {
  std::mutex mu;
  std::map<std::pair<DenomKind, int>, DenomTable> tables;
};

const DenomTable& cached_table(DenomKind kind, int limb_bits) {
  static TableCache cache;
  std::lock_guard lock(cache.mu);
  auto key = std::make_pair(kind, limb_bits);
  auto it = cache.tables.find(key);
  if (it == cache.tables.end()) it = cache.tables.emplace(key, gen_denom_table(kind, limb_bits)).first;
  return it->second;
}

}  // namespace

const DenomTable& odd_table(int limb_bits) { return cached_table(DenomKind::kOdd, limb_bits); }
const DenomTable& factorial_table(int limb_bits) { return cached_table(DenomKind::kFactorial, limb_bits); }

DenomKind denom_kind(SeriesKind kind) {
  return (kind == SeriesKind::kAtan || kind == SeriesKind::kAtanh) ? DenomKind::kOdd : DenomKind::kFactorial;
}

const DenomTable& default_table(SeriesKind kind, int limb_bits) {
  return cached_table(denom_kind(kind), limb_bits);
}

int splitting_parameter(int n_terms) {
  const int half = int(std::ceil(std::sqrt(double(n_terms)) / 2.0 - 1e-12));
  int m = 2 * half;
  // guard against floating-point slop: m must be the least even m with (m/2)^2*4 >= N
  while ((m - 2) >= 2 && (m - 2) * (m - 2) >= n_terms) m -= 2;
  while (m * m < n_terms) m += 2;
  return std::max(m, 2);
}

int coeff_index(SeriesKind kind, int k) {
  switch (kind) {
    case SeriesKind::kSin:
    case SeriesKind::kSinh: return 2 * k + 1;
    case SeriesKind::kCos: return 2 * k;
    default: return k;
  }
}

namespace {

bool is_alternating(SeriesKind kind) {
  return kind == SeriesKind::kAtan || kind == SeriesKind::kSin || kind == SeriesKind::kCos;
}

bool powers_of_square(SeriesKind kind) { return kind != SeriesKind::kExp; }

template <LimbType Limb>
void check_args(const FixedPoint<Limb>& x, int n_terms, const DenomTable& table, SeriesKind kind) {
  if (table.limb_bits != kLimbBits<Limb>) throw std::invalid_argument("denominator table limb size mismatch");
  if (table.kind != denom_kind(kind)) throw std::invalid_argument("denominator table kind mismatch");
  if (n_terms <= 2 || n_terms > kMaxTerms) throw std::invalid_argument("series term count out of range");
  if (coeff_index(kind, n_terms - 1) >= int(table.size())) throw std::invalid_argument("denominator table too short");
  if (x.nfrac() < 1 || x.nint() != 0) throw std::invalid_argument("series argument must be purely fractional");
  if (x.frac_leading_zeros() < 4) throw std::invalid_argument("series argument exceeds 2^-4");
}

}  // namespace

template <LimbType Limb>
std::vector<FixedPoint<Limb>> series_power_table(const FixedPoint<Limb>& x, SeriesKind kind, int m) {
  std::vector<FixedPoint<Limb>> t(std::size_t(m + 1));
  t[1] = powers_of_square(kind) ? fx_mul(x, x) : x;
  t[2] = fx_mul(t[1], t[1]);
  for (int k = 4; k <= m; k += 2) {
    t[std::size_t(k - 1)] = fx_mul(t[std::size_t(k / 2)], t[std::size_t(k / 2 - 1)]);
    t[std::size_t(k)] = fx_mul(t[std::size_t(k / 2)], t[std::size_t(k / 2)]);
  }
  return t;
}

namespace {

template <LimbType Limb>
void record(SeriesTrace<Limb>* trace, SeriesLine line, int k, std::span<const Limb> s) {
  if (trace) trace->points.push_back({line, k, std::vector<Limb>(s.begin(), s.end())});
}

// Main backward loop. Returns S with n+1 limbs, already divided by v_0.
template <LimbType Limb>
LimbBuffer<Limb> sum_loop(SeriesKind kind, const std::vector<FixedPoint<Limb>>& t, int n, int n_terms,
                           const DenomTable& table, SeriesTrace<Limb>* trace) {
  const int m = int(t.size()) - 1;
  const bool alternating = is_alternating(kind);
  const bool odd_denoms = table.kind == DenomKind::kOdd;
  const auto nn = std::size_t(n);

  LimbBuffer<Limb> s(nn + 2, 0);
  LimbBuffer<Limb> prod(2 * nn + 1);
  std::span<Limb> s1(s.data(), nn + 1);  // the n+1 limb running sum
  std::span<Limb> s2(s.data(), nn + 2);  // temporarily n+2 limbs
  Limb& top = s[nn];

  for (int k = n_terms - 1; k >= 0; --k) {
    const int idx = coeff_index(kind, k);
    const bool negative_sum = alternating && (k % 2 == 0);  // S holds a negative value here
    if (k < n_terms - 1) {
      const int idx_next = coeff_index(kind, k + 1);
      if (table.v[std::size_t(idx)] != table.v[std::size_t(idx_next)]) {
        if (odd_denoms) {
          const Limb v_new = Limb(table.v[std::size_t(idx)]);
          const Limb v_old = Limb(table.v[std::size_t(idx_next)]);
          if (negative_sum) {
            top += v_old;
            record<Limb>(trace, SeriesLine::kDenomAdd, k, s1);
          }
          s[nn + 1] = mpn::mul_1<Limb>(s1, s1, v_new);
          record<Limb>(trace, SeriesLine::kDenomMul, k, s2);
          mpn::divrem_1<Limb>(s2, s2, v_old);
          record<Limb>(trace, SeriesLine::kDenomDiv, k, s1);
          if (negative_sum) {
            top -= v_new;
            record<Limb>(trace, SeriesLine::kDenomSub, k, s1);
          }
        } else {
          // Factorial blocks: divide out each block left behind.
          for (int b = idx_next - 1; b >= idx; --b) {
            if (!table.is_break(std::size_t(b))) continue;
            const Limb v_old = Limb(table.v[std::size_t(b + 1)]);
            if (negative_sum) {
              top += v_old;
              record<Limb>(trace, SeriesLine::kDenomAdd, k, s1);
            }
            mpn::divrem_1<Limb>(s1, s1, v_old);
            record<Limb>(trace, SeriesLine::kDenomDiv, k, s1);
            if (negative_sum) {
              top -= 1;
              record<Limb>(trace, SeriesLine::kDenomSub, k, s1);
            }
          }
        }
      }
    }
    const Limb u = Limb(table.u[std::size_t(idx)]);
    const bool subtract = alternating && (k % 2 == 1);
    if (k % m == 0) {
      top = subtract ? Limb(top - u) : Limb(top + u);
      record<Limb>(trace, SeriesLine::kAddCoeff, k, s1);
      if (k != 0) {
        mpn::mul<Limb>(std::span<Limb>(prod), std::span<const Limb>(s1), t[std::size_t(m)].limbs());
        std::copy(prod.begin() + std::ptrdiff_t(nn), prod.end(), s.begin());
        record<Limb>(trace, SeriesLine::kHornerMul, k, s1);
      }
    } else {
      std::span<Limb> low(s.data(), nn);
      const auto& tj = t[std::size_t(k % m)];
      if (subtract) {
        top -= mpn::submul_1<Limb>(low, tj.limbs(), u);
      } else {
        top += mpn::addmul_1<Limb>(low, tj.limbs(), u);
      }
      record<Limb>(trace, SeriesLine::kAddMul, k, s1);
    }
  }
  mpn::divrem_1<Limb>(s1, s1, Limb(table.v[std::size_t(coeff_index(kind, 0))]));
  record<Limb>(trace, SeriesLine::kFinalDiv, 0, s1);
  s.resize(nn + 1);
  return s;
}

template <LimbType Limb>
FixedPoint<Limb> finish(SeriesKind kind, LimbBuffer<Limb> s, const FixedPoint<Limb>& x, SeriesTrace<Limb>* trace) {
  const int n = x.nfrac();
  const auto nn = std::size_t(n);
  if (kind == SeriesKind::kExp || kind == SeriesKind::kCos) {
    return FixedPoint<Limb>::from_limbs(std::span<const Limb>(s), n);
  }
  LimbBuffer<Limb> prod(2 * nn + 1);
  mpn::mul<Limb>(std::span<Limb>(prod), std::span<const Limb>(s), x.limbs());
  FixedPoint<Limb> r(n, 0);
  std::copy(prod.begin() + std::ptrdiff_t(nn), prod.begin() + std::ptrdiff_t(2 * nn), r.limbs().begin());
  record<Limb>(trace, SeriesLine::kFinalMul, 0, r.limbs());
  return r;
}

}  // namespace

template <LimbType Limb>
FixedPoint<Limb> eval_series(SeriesKind kind, const FixedPoint<Limb>& x, int n_terms, const DenomTable& table,
                             SeriesTrace<Limb>* trace) {
  check_args(x, n_terms, table, kind);
  const int m = splitting_parameter(n_terms);
  const auto t = series_power_table(x, kind, m);
  auto s = sum_loop<Limb>(kind, t, x.nfrac(), n_terms, table, trace);
  return finish<Limb>(kind, std::move(s), x, trace);
}

template <LimbType Limb>
FixedPoint<Limb> eval_atan_series(const FixedPoint<Limb>& x, int n_terms, const DenomTable& table,
                                  SeriesTrace<Limb>* trace) {
  return eval_series(SeriesKind::kAtan, x, n_terms, table, trace);
}

template <LimbType Limb>
FixedPoint<Limb> eval_atanh_series(const FixedPoint<Limb>& x, int n_terms, const DenomTable& table,
                                   SeriesTrace<Limb>* trace) {
  return eval_series(SeriesKind::kAtanh, x, n_terms, table, trace);
}

template <LimbType Limb>
FixedPoint<Limb> eval_exp_series(const FixedPoint<Limb>& x, int n_terms, const DenomTable& table,
                                 SeriesTrace<Limb>* trace) {
  return eval_series(SeriesKind::kExp, x, n_terms, table, trace);
}

template <LimbType Limb>
FixedPoint<Limb> eval_sinh_series(const FixedPoint<Limb>& x, int n_terms, const DenomTable& table,
                                  SeriesTrace<Limb>* trace) {
  return eval_series(SeriesKind::kSinh, x, n_terms, table, trace);
}

template <LimbType Limb>
SinCos<Limb> eval_sin_cos_series(const FixedPoint<Limb>& x, int n_terms, const DenomTable& table, Want want,
                                 SeriesTrace<Limb>* sin_trace, SeriesTrace<Limb>* cos_trace) {
  check_args(x, n_terms, table, SeriesKind::kSin);
  check_args(x, n_terms, table, SeriesKind::kCos);
  const int m = splitting_parameter(n_terms);
  const auto t = series_power_table(x, SeriesKind::kSin, m);
  SinCos<Limb> r;
  if (want != Want::kCos) {
    auto s = sum_loop<Limb>(SeriesKind::kSin, t, x.nfrac(), n_terms, table, sin_trace);
    r.sin = finish<Limb>(SeriesKind::kSin, std::move(s), x, sin_trace);
  }
  if (want != Want::kSin) {
    auto c = sum_loop<Limb>(SeriesKind::kCos, t, x.nfrac(), n_terms, table, cos_trace);
    r.cos = finish<Limb>(SeriesKind::kCos, std::move(c), x, cos_trace);
  }
  return r;
}

#define MPELEM_INSTANTIATE_SERIES(L)                                                                          \
  template std::vector<FixedPoint<L>> series_power_table<L>(const FixedPoint<L>&, SeriesKind, int);           \
  template FixedPoint<L> eval_series<L>(SeriesKind, const FixedPoint<L>&, int, const DenomTable&,             \
                                        SeriesTrace<L>*);                                                     \
  template FixedPoint<L> eval_atan_series<L>(const FixedPoint<L>&, int, const DenomTable&, SeriesTrace<L>*);  \
  template FixedPoint<L> eval_atanh_series<L>(const FixedPoint<L>&, int, const DenomTable&, SeriesTrace<L>*); \
  template FixedPoint<L> eval_exp_series<L>(const FixedPoint<L>&, int, const DenomTable&, SeriesTrace<L>*);   \
  template FixedPoint<L> eval_sinh_series<L>(const FixedPoint<L>&, int, const DenomTable&, SeriesTrace<L>*);  \
  template SinCos<L> eval_sin_cos_series<L>(const FixedPoint<L>&, int, const DenomTable&, Want, SeriesTrace<L>*, \
                                            SeriesTrace<L>*);

MPELEM_INSTANTIATE_SERIES(std::uint32_t)
MPELEM_INSTANTIATE_SERIES(std::uint64_t)

#undef MPELEM_INSTANTIATE_SERIES

}  // namespace mpelem
