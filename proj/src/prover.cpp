#include "mpelem/prover.hpp"

#include <algorithm>
#include <sstream>

namespace mpelem {

namespace {

mpq_class pow2(long e) {
  mpq_class r;
  if (e >= 0) {
    r = mpq_class(mpz_class(1) << e);
  } else {
    r = mpq_class(mpz_class(1), mpz_class(1) << -e);
  }
  return r;
}

long bit_length(const mpz_class& z) { return long(mpz_sizeinbase(z.get_mpz_t(), 2)); }

// Smallest dyadic >= q with about 128 significant bits. Exact when q is
// already a short dyadic.
mpq_class up(const mpq_class& q) {
  if (sgn(q) <= 0) return q;
  const mpz_class& num = q.get_num();
  const mpz_class& den = q.get_den();
  const bool dyadic_den = mpz_scan1(den.get_mpz_t(), 0) + 1 == mpz_sizeinbase(den.get_mpz_t(), 2);
  if (dyadic_den && bit_length(num) <= 160) return q;
  const long s = 128 - (bit_length(num) - bit_length(den));
  mpz_class a = num, d = den, c;
  if (s >= 0) a <<= s;
  else d <<= -s;
  mpz_cdiv_q(c.get_mpz_t(), a.get_mpz_t(), d.get_mpz_t());
  mpq_class r = mpq_class(c) * pow2(-s);
  return r;
}

mpq_class from_u64(std::uint64_t v) { return mpq_class(mpz_class(std::to_string(v))); }

bool is_alternating(SeriesKind kind) {
  return kind == SeriesKind::kAtan || kind == SeriesKind::kSin || kind == SeriesKind::kCos;
}

// Everything about one (kind, table) pair that does not depend on N.
struct Setup {
  SeriesKind kind;
  const DenomTable& table;
  int limb_bits;
  int n_max;
  long t_bits;  // base of the power table is < 2^-t_bits
  bool alternating;
  bool odd_denoms;
  mpq_class ulp, two_b;
  std::vector<mpz_class> scale;     // per table index: the factor S carries
  std::vector<mpq_class> coeff;     // per term j: u / scale
  std::vector<mpq_class> term_up;   // per term j: coeff * tmax^j, rounded up
  std::vector<bool> decreasing;     // coeff[j+1] * tmax <= coeff[j]
  std::vector<AbstractValue> power; // T_1 ... T_20
  std::vector<int> idx;

  Setup(SeriesKind kind_, const DenomTable& table_, int limb_bits_, int n_max_)
      : kind(kind_), table(table_), limb_bits(limb_bits_), n_max(n_max_) {
    t_bits = kind == SeriesKind::kExp ? 4 : 8;
    alternating = is_alternating(kind);
    odd_denoms = table.kind == DenomKind::kOdd;
    ulp = pow2(-limb_bits);
    two_b = pow2(limb_bits);

    const int max_index = coeff_index(kind, n_max - 1);
    scale.resize(std::size_t(max_index) + 1);
    mpz_class prod = 1;
    for (int i = 0; i <= max_index; ++i) {
      const mpz_class v(std::to_string(table.v[std::size_t(i)]));
      if (odd_denoms) {
        scale[std::size_t(i)] = v;
      } else {
        if (i == 0 || table.is_break(std::size_t(i - 1))) prod *= v;
        scale[std::size_t(i)] = prod;
      }
    }
    for (int j = 0; j < n_max; ++j) {
      const int i = coeff_index(kind, j);
      idx.push_back(i);
      mpq_class c(mpz_class(std::to_string(table.u[std::size_t(i)])), scale[std::size_t(i)]);
      c.canonicalize();
      coeff.push_back(c);
      term_up.push_back(up(c * pow2(-t_bits * j)));
    }
    for (int j = 0; j < n_max; ++j) {
      decreasing.push_back(j + 1 >= n_max || coeff[std::size_t(j + 1)] * pow2(-t_bits) <= coeff[std::size_t(j)]);
    }

    // Power table: T_1 = base (exact for exp, one truncation otherwise).
    const int max_m = 20;
    power.resize(max_m + 1);
    power[1].max_magnitude = pow2(-t_bits);
    power[1].max_error = kind == SeriesKind::kExp ? 0 : 1;
    power[2] = power[1].mul(power[1], ulp);
    for (int k = 4; k <= max_m; k += 2) {
      power[std::size_t(k - 1)] = power[std::size_t(k / 2)].mul(power[std::size_t(k / 2 - 1)], ulp);
      power[std::size_t(k)] = power[std::size_t(k / 2)].mul(power[std::size_t(k / 2)], ulp);
    }
    for (auto& p : power) p.max_magnitude = up(p.max_magnitude), p.max_error = up(p.max_error);
  }

  mpq_class coeff_scale(int j) const { return mpq_class(scale[std::size_t(idx[std::size_t(j)])]); }
};

// One abstract run for a fixed N.
class Run {
 public:
  Run(const Setup& setup, int n_terms, ProofReport& report, std::vector<PointBound>* record)
      : s_(setup), n_(n_terms), report_(report), record_(record) {
    m_ = splitting_parameter(n_terms);
    // suffix[j] = sum_{i >= j} term_up[i], over i < N
    suffix_.assign(std::size_t(n_terms) + 1, 0);
    all_decreasing_.assign(std::size_t(n_terms) + 1, true);
    for (int j = n_terms - 1; j >= 0; --j) {
      suffix_[std::size_t(j)] = suffix_[std::size_t(j + 1)] + s_.term_up[std::size_t(j)];
      all_decreasing_[std::size_t(j)] = all_decreasing_[std::size_t(j + 1)] && s_.decreasing[std::size_t(j)];
    }
  }

  bool execute();
  const mpq_class& final_error() const { return final_error_; }

 private:
  // Bound on |exact S| when S holds the tail starting at term `from`, scaled
  // by `scale` and divided by base^r. An alternating tail with decreasing
  // terms is bounded by its first term; otherwise sum the absolute values.
  mpq_class tail(int from, int r, const mpq_class& scale) const {
    if (from >= n_) return 0;
    if (s_.alternating && all_decreasing_[std::size_t(from)]) {
      return up(scale * s_.coeff[std::size_t(from)] * pow2(-s_.t_bits * (from - r)));
    }
    return up(scale * pow2(s_.t_bits * r) * suffix_[std::size_t(from)]);
  }

  bool fail(ProofCheck check, SeriesLine line, int k, const std::string& detail) {
    report_.failure = ProofFailure{n_, k, line, check, detail};
    return false;
  }

  void count(SeriesLine line) { ++report_.checks[line]; }

  void emit(SeriesLine line, int k) {
    if (record_) record_->push_back({line, k, s_value_});
  }

  // |S| <= 2^B - ulp at the current point.
  bool check_magnitude(SeriesLine line, int k) {
    count(line);
    if (s_value_.computed_bound(s_.ulp) > s_.two_b - s_.ulp) {
      return fail(ProofCheck::kMagnitude, line, k,
                  "|S| may reach 2^B (bound " + mpq_class(s_value_.computed_bound(s_.ulp)).get_str() + ")");
    }
    return true;
  }

  void normalize() {
    s_value_.max_magnitude = up(s_value_.max_magnitude);
    s_value_.max_error = up(s_value_.max_error);
  }

  bool change_denominator(int k);
  bool rescale_step(int k, const mpq_class& v_old, const mpq_class* v_new, const mpq_class& new_scale, int r);

  const Setup& s_;
  int n_;
  int m_ = 2;
  ProofReport& report_;
  std::vector<PointBound>* record_;
  std::vector<mpq_class> suffix_;
  std::vector<bool> all_decreasing_;
  AbstractValue s_value_;
  mpq_class final_error_ = 0;
};

// One denominator change S <- S * v_new / v_old (v_new null: S <- S / v_old).
// A negative S (alternating tail of odd length) is made nonnegative first by
// adding v_old to its integral limb and fixed up afterwards; in both cases
// the computed result is floor(S * v_new / v_old).
bool Run::rescale_step(int k, const mpq_class& v_old, const mpq_class* v_new, const mpq_class& new_scale, int r) {
  const bool negative = s_.alternating && k % 2 == 0;
  if (negative) {
    // The exact S lies in [-M, 0]; S + v_old must land in [0, 2^B).
    count(SeriesLine::kDenomAdd);
    if (v_old < s_value_.computed_bound(s_.ulp)) {
      return fail(ProofCheck::kNonnegative, SeriesLine::kDenomAdd, k, "S + v may be negative");
    }
    s_value_.max_magnitude += v_old;
    if (!check_magnitude(SeriesLine::kDenomAdd, k)) return false;
    emit(SeriesLine::kDenomAdd, k);
  } else if (!check_magnitude(v_new ? SeriesLine::kDenomMul : SeriesLine::kDenomDiv, k)) {
    return false;
  }
  if (v_new) {
    count(SeriesLine::kDenomMul);
    if (s_value_.computed_bound(s_.ulp) * *v_new > s_.two_b * s_.two_b - s_.ulp) {
      return fail(ProofCheck::kProductWidth, SeriesLine::kDenomMul, k, "S * v overflows n+2 limbs");
    }
    s_value_ = s_value_.mul_limb(*v_new);
    emit(SeriesLine::kDenomMul, k);
  }
  s_value_ = s_value_.div_limb(v_old);
  normalize();
  const mpq_class settled = tail(k + 1, r, new_scale);
  if (!negative) s_value_.max_magnitude = std::min(s_value_.max_magnitude, settled);
  emit(SeriesLine::kDenomDiv, k);
  if (negative) {
    s_value_.max_magnitude = settled;
    if (!check_magnitude(SeriesLine::kDenomSub, k)) return false;
    emit(SeriesLine::kDenomSub, k);
  }
  return true;
}

bool Run::change_denominator(int k) {
  const auto& t = s_.table;
  const int i_new = s_.idx[std::size_t(k)], i_old = s_.idx[std::size_t(k + 1)];
  const int r = (k / m_) * m_;
  if (s_.odd_denoms) {
    if (t.v[std::size_t(i_new)] == t.v[std::size_t(i_old)]) return true;
    const mpq_class v_new = from_u64(t.v[std::size_t(i_new)]);
    const mpq_class v_old = from_u64(t.v[std::size_t(i_old)]);
    return rescale_step(k, v_old, &v_new, v_new, r);
  }
  mpq_class scale(s_.scale[std::size_t(i_old)]);
  for (int b = i_old - 1; b >= i_new; --b) {
    if (!t.is_break(std::size_t(b))) continue;
    const mpq_class v_old = from_u64(t.v[std::size_t(b + 1)]);
    scale /= v_old;
    if (!rescale_step(k, v_old, nullptr, scale, r)) return false;
  }
  return true;
}

// Computed-sign argument. Wherever S is fed to an unsigned multiply or divide
// without the +v_old correction, it holds a tail that starts with a positive
// term. For the all-positive series every computed quantity is a sum of
// nonnegative products, so the computed S is nonnegative. For alternating
// series, write D(j) for the computed S after term j, with j even. Then
//   D(j) = floor(r * (D(j+2)' - u_{j+1} T_{a+1})) + u_j T_a
// where D(j+2)' >= 0 (induction, a rescale or Horner product of a
// nonnegative value, or the initial zero), a = j mod m, T_0 = 1 and
// r = scale_j / scale_{j+1} is the rescale factor (the floor is absent when
// r = 1). Computed powers never exceed the exact ones and the base t is below
// tmax, so T_{a+1} <= t^(a+1) <= tmax (T_a + E_a) with E_a the error bound of
// T_a. If T_a = 0 then T_{a+1} = 0 and D(j) is the floor of a nonnegative
// value. Otherwise T_a >= 1 unit and, with c the exact coefficients,
//   D(j) > T_a scale_j (c_j - c_{j+1} tmax) - scale_j c_{j+1} tmax E_a - 1
//        >= scale_j (c_j - c_{j+1} tmax (1 + E_a)) - 1,
// so D(j) >= 0 in whole units once c_j >= c_{j+1} tmax (1 + E_a). That
// condition is checked exactly below for every pair.
bool check_pair_gaps(const Setup& s, int n_terms, ProofReport& report) {
  if (!s.alternating) return true;
  const int m = splitting_parameter(n_terms);
  const mpq_class tmax = pow2(-s.t_bits);
  for (int j = 0; j + 1 < n_terms; j += 2) {
    const int a = j % m;
    const SeriesLine line = a == 0 ? SeriesLine::kAddCoeff : SeriesLine::kAddMul;
    ++report.checks[line];
    const mpq_class err = a == 0 ? mpq_class(0) : s.power[std::size_t(a)].max_error;
    const mpq_class gap = s.coeff[std::size_t(j)] - s.coeff[std::size_t(j + 1)] * tmax * (1 + err);
    if (gap < 0) {
      report.failure = ProofFailure{n_terms, j, line, ProofCheck::kPairGap,
                                    "coefficient " + std::to_string(j + 1) + " too large for the sign argument"};
      return false;
    }
  }
  return true;
}

bool Run::execute() {
  if (!check_pair_gaps(s_, n_, report_)) return false;
  s_value_ = AbstractValue{};
  for (int k = n_ - 1; k >= 0; --k) {
    if (k < n_ - 1 && !change_denominator(k)) return false;
    const mpq_class scale = s_.coeff_scale(k);
    const mpq_class u = from_u64(s_.table.u[std::size_t(s_.idx[std::size_t(k)])]);
    const int r = (k / m_) * m_;
    if (k % m_ == 0) {
      s_value_.max_magnitude = tail(k, r, scale);
      if (!check_magnitude(SeriesLine::kAddCoeff, k)) return false;
      emit(SeriesLine::kAddCoeff, k);
      if (k != 0) {
        count(SeriesLine::kHornerMul);  // S >= 0 by the computed-sign argument
        s_value_ = s_value_.mul(s_.power[std::size_t(m_)], s_.ulp);
        normalize();
        s_value_.max_magnitude = std::min(s_value_.max_magnitude, tail(k, r - m_, scale));
        if (!check_magnitude(SeriesLine::kHornerMul, k)) return false;
        emit(SeriesLine::kHornerMul, k);
      }
    } else {
      s_value_.max_error += u * s_.power[std::size_t(k % m_)].max_error;
      s_value_.max_magnitude = tail(k, r, scale);
      normalize();
      if (!check_magnitude(SeriesLine::kAddMul, k)) return false;
      emit(SeriesLine::kAddMul, k);
    }
  }

  const mpq_class v0 = from_u64(s_.table.v[std::size_t(s_.idx[0])]);
  count(SeriesLine::kFinalDiv);  // S >= 0 by the computed-sign argument
  s_value_ = s_value_.div_limb(v0);
  s_value_.max_magnitude = std::min(s_value_.max_magnitude, tail(0, 0, s_.coeff_scale(0) / v0));
  normalize();
  if (!check_magnitude(SeriesLine::kFinalDiv, 0)) return false;
  emit(SeriesLine::kFinalDiv, 0);

  if (s_.kind != SeriesKind::kExp && s_.kind != SeriesKind::kCos) {
    // Multiply by X (exact, < 2^-4); the result has no integral limb.
    AbstractValue x{pow2(-4), 0};
    s_value_ = s_value_.mul(x, s_.ulp);
    normalize();
    count(SeriesLine::kFinalMul);
    if (s_value_.computed_bound(s_.ulp) > 1 - s_.ulp) {
      return fail(ProofCheck::kMagnitude, SeriesLine::kFinalMul, 0, "result may reach 1");
    }
    emit(SeriesLine::kFinalMul, 0);
  }
  final_error_ = s_value_.max_error;
  if (final_error_ > 2) {
    const SeriesLine line = s_.kind == SeriesKind::kExp || s_.kind == SeriesKind::kCos ? SeriesLine::kFinalDiv
                                                                                        : SeriesLine::kFinalMul;
    return fail(ProofCheck::kFinalError, line, 0, "final error " + final_error_.get_str() + " ulp > 2");
  }
  return true;
}

// u / scale must equal 1/(2j+1) or 1/idx! exactly.
bool check_identities(const Setup& s, ProofReport& report) {
  const int max_index = coeff_index(s.kind, s.n_max - 1);
  mpz_class fact = 1;
  for (int i = 0; i <= max_index; ++i) {
    if (i > 0) fact *= i;
    const mpz_class u(std::to_string(s.table.u[std::size_t(i)]));
    const mpz_class want = s.odd_denoms ? mpz_class(u * (2 * i + 1)) : mpz_class(u * fact);
    if (want != s.scale[std::size_t(i)]) {
      report.failure = ProofFailure{s.n_max, i, std::nullopt, ProofCheck::kIdentity,
                                    "u/v at index " + std::to_string(i) + " is not the series coefficient"};
      return false;
    }
  }
  return true;
}

void validate(SeriesKind kind, int limb_bits, const DenomTable& table, int n_max) {
  if (limb_bits != 32 && limb_bits != 64) throw std::invalid_argument("limb_bits must be 32 or 64");
  if (table.limb_bits != limb_bits || table.kind != denom_kind(kind)) {
    throw std::invalid_argument("denominator table does not match the series kind");
  }
  if (n_max < 3 || n_max > kMaxTerms) throw std::invalid_argument("n_max out of range");
  if (coeff_index(kind, n_max - 1) >= int(table.size())) throw std::invalid_argument("denominator table too short");
}

}  // namespace

AbstractValue AbstractValue::mul_limb(const mpq_class& c) const { return {max_magnitude * c, max_error * c}; }

AbstractValue AbstractValue::div_limb(const mpq_class& c) const { return {max_magnitude / c, max_error / c + 1}; }

AbstractValue AbstractValue::mul(const AbstractValue& z, const mpq_class& ulp) const {
  return {max_magnitude * z.max_magnitude,
          z.max_magnitude * max_error + max_magnitude * z.max_error + max_error * z.max_error * ulp + 1};
}

AbstractValue AbstractValue::add(const AbstractValue& y) const {
  return {max_magnitude + y.max_magnitude, max_error + y.max_error};
}

const char* to_string(ProofCheck check) {
  switch (check) {
    case ProofCheck::kMagnitude: return "magnitude";
    case ProofCheck::kProductWidth: return "product-width";
    case ProofCheck::kNonnegative: return "nonnegative";
    case ProofCheck::kPairGap: return "pair-gap";
    case ProofCheck::kFinalError: return "final-error";
    case ProofCheck::kIdentity: return "identity";
  }
  return "?";
}

std::string ProofReport::summary() const {
  std::ostringstream os;
  os << to_string(kind) << " B=" << limb_bits << " N=" << n_min << ".." << n_max << ": ";
  if (passed) {
    long total = 0;
    for (const auto& [line, c] : checks) total += c;
    os << "passed, worst final error " << worst_final_error.get_d() << " ulp, " << total << " checks";
  } else if (failure) {
    os << "FAILED at N=" << failure->n_terms;
    if (failure->k >= 0) os << " k=" << failure->k;
    if (failure->line) os << " line " << to_string(*failure->line);
    os << " [" << to_string(failure->check) << "] " << failure->detail;
  } else {
    os << "FAILED";
  }
  return os.str();
}

ProofReport prove_series(SeriesKind kind, int limb_bits, const DenomTable& table, int n_max) {
  validate(kind, limb_bits, table, n_max);
  ProofReport report;
  report.kind = kind;
  report.limb_bits = limb_bits;
  report.n_max = n_max;
  const Setup setup(kind, table, limb_bits, n_max);
  for (int n = report.n_min; n <= n_max; ++n) {
    Run run(setup, n, report, nullptr);
    if (!run.execute()) return report;
    report.final_error.push_back(run.final_error());
    report.worst_final_error = std::max(report.worst_final_error, run.final_error());
  }
  report.passed = check_identities(setup, report);
  return report;
}

std::vector<PointBound> series_point_bounds(SeriesKind kind, int limb_bits, const DenomTable& table, int n_terms) {
  validate(kind, limb_bits, table, n_terms);
  ProofReport report;
  const Setup setup(kind, table, limb_bits, n_terms);
  std::vector<PointBound> points;
  Run run(setup, n_terms, report, &points);
  if (!run.execute()) throw std::runtime_error("abstract run failed: " + report.summary());
  return points;
}

std::vector<ProofReport> prove_all(int n_max) {
  std::vector<ProofReport> out;
  for (int bits : {32, 64}) {
    for (auto kind : {SeriesKind::kAtan, SeriesKind::kAtanh, SeriesKind::kExp, SeriesKind::kSin, SeriesKind::kCos}) {
      out.push_back(prove_series(kind, bits, default_table(kind, bits), n_max));
    }
  }
  return out;
}

}  // namespace mpelem
