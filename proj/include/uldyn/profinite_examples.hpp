// Exact truncated-precision executables for the shift, Frobenius, and
// congruence-subgroup examples.  Every value carries an explicit scope
// (window or truncation); operations compute exact statements about the
// representative and never extrapolate to the untruncated group.
#pragma once

#include <array>

#include "uldyn/field_arith.hpp"

namespace uldyn {

// a representative of an element of F^Z known only on [lo, hi)
struct Window {
  SpecPtr spec;  // laurent spec supplying F_q
  int64_t lo = 0;
  int64_t hi = 0;
  std::vector<uint32_t> coeffs;  // size hi - lo, index k stored at k - lo

  uint32_t at(int64_t k) const {
    if (k < lo || k >= hi) throw RangeError("window index out of scope");
    return coeffs[static_cast<size_t>(k - lo)];
  }
};

// truncated formal power series: coefficients for indices min_index..trunc-1
struct SeriesTrunc {
  SpecPtr spec;
  int64_t min_index = 0;  // 0 for F[[X]], 1 for X F[[X]]
  int64_t trunc = 0;      // known modulo X^trunc
  std::vector<uint32_t> coeffs;  // index k stored at k - min_index

  uint32_t at(int64_t k) const {
    if (k < min_index || k >= trunc) return 0;
    size_t i = static_cast<size_t>(k - min_index);
    return i < coeffs.size() ? coeffs[i] : 0;
  }
  // lowest index with nonzero coefficient, or trunc when none is visible
  int64_t valuation_or_trunc() const;
};

// the right-shift (a_k) -> (a_{k-1}); the window moves with it
Window two_sided_shift(const Window& w);
// inverse shift on the overlapping range
Window two_sided_unshift(const Window& w);

struct PhiSplit {
  SeriesTrunc negative_tail;  // sum a_{-k} X^k, k >= 1 (element of X F[[X]])
  SeriesTrunc nonneg;         // sum a_k X^k, k >= 0
};

// the chart phi on the symmetric part [-m, m) of the window (m = min(-lo, hi));
// RangeError when the window covers no symmetric range
PhiSplit phi_split(const Window& w);
// inverse of phi_split: reassembles the window [-m, m)
Window phi_unsplit(const PhiSplit& parts);

struct ConCertificate {
  bool finite_support = false;
  bool in_con_at_scope = false;        // support bounded to the left, visibly
  bool in_con_minus_at_scope = false;  // support bounded to the right, visibly
  bool undecided = false;
  int64_t window_lo = 0;  // every certificate names its window
  int64_t window_hi = 0;
};

ConCertificate con_certificate(const Window& w);

// sum a_k X^k -> sum a_{k+1} X^k; truncation drops by one
SeriesTrunc left_shift_series(const SeriesTrunc& s);
// multiplication by X^k (k may be negative down to min_index constraints)
SeriesTrunc shift_series(const SeriesTrunc& s, int64_t k, int64_t new_min_index);

// valuations of z, beta z, ..., beta^n z for beta: z -> p z on Z_p
std::vector<int64_t> mul_by_p_orbit(const FieldElement& z, long long n);

struct FrobeniusResult {
  SeriesTrunc series;
  bool truncation_loss = false;  // some nonzero a_k had p k >= trunc
};

// z -> z^p: coefficients to the p-th power, exponents multiplied by p
FrobeniusResult frobenius_series(const SeriesTrunc& s);

// 2x2 matrix over F_2[[X]] truncated at N, congruent to 1 mod X, det = 1
struct CongruenceMatrix {
  SpecPtr spec;    // laurent, p = 2, f = 1
  int64_t trunc = 0;
  std::array<SeriesTrunc, 4> entries;  // a, b, c, d row-major

  // min valuation of the entries of M - I within the truncation (trunc if I)
  int64_t distance_to_identity() const;
};

// validates the invariants (congruence mod X, det = 1 at truncation)
CongruenceMatrix make_congruence_matrix(const SpecPtr& spec, int64_t trunc,
                                        std::array<SeriesTrunc, 4> entries);

// entrywise Frobenius; defined over F_2 only
CongruenceMatrix sl2_frobenius(const CongruenceMatrix& m);

// truncated series product (helper for determinant checks)
SeriesTrunc series_mul(const SeriesTrunc& a, const SeriesTrunc& b);
SeriesTrunc series_add(const SeriesTrunc& a, const SeriesTrunc& b);
SeriesTrunc series_sub(const SeriesTrunc& a, const SeriesTrunc& b);

}  // namespace uldyn
