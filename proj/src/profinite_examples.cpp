#include "uldyn/profinite_examples.hpp"

#include <algorithm>

namespace uldyn {

int64_t SeriesTrunc::valuation_or_trunc() const {
  for (int64_t k = min_index; k < trunc; ++k)
    if (at(k) != 0) return k;
  return trunc;
}

Window two_sided_shift(const Window& w) {
  Window out = w;
  out.lo = w.lo + 1;
  out.hi = w.hi + 1;
  return out;  // coefficient k of the output equals coefficient k-1 of the input
}

Window two_sided_unshift(const Window& w) {
  Window out = w;
  out.lo = w.lo - 1;
  out.hi = w.hi - 1;
  return out;
}

PhiSplit phi_split(const Window& w) {
  int64_t m = std::min(-w.lo, w.hi);
  if (m < 1) throw RangeError("phi_split: window covers no symmetric range [-m, m)");
  PhiSplit out;
  out.negative_tail.spec = w.spec;
  out.negative_tail.min_index = 1;
  out.negative_tail.trunc = m + 1;
  out.negative_tail.coeffs.resize(static_cast<size_t>(m));
  for (int64_t k = 1; k <= m; ++k)
    out.negative_tail.coeffs[static_cast<size_t>(k - 1)] = w.at(-k);
  out.nonneg.spec = w.spec;
  out.nonneg.min_index = 0;
  out.nonneg.trunc = m;
  out.nonneg.coeffs.resize(static_cast<size_t>(m));
  for (int64_t k = 0; k < m; ++k) out.nonneg.coeffs[static_cast<size_t>(k)] = w.at(k);
  return out;
}

Window phi_unsplit(const PhiSplit& parts) {
  int64_t m = std::min(parts.negative_tail.trunc - 1, parts.nonneg.trunc);
  if (m < 1) throw RangeError("phi_unsplit: truncations cover no symmetric range");
  Window out;
  out.spec = parts.nonneg.spec;
  out.lo = -m;
  out.hi = m;
  out.coeffs.resize(static_cast<size_t>(2 * m));
  for (int64_t k = 1; k <= m; ++k)
    out.coeffs[static_cast<size_t>(m - k)] = parts.negative_tail.at(k);
  for (int64_t k = 0; k < m; ++k)
    out.coeffs[static_cast<size_t>(m + k)] = parts.nonneg.at(k);
  return out;
}

ConCertificate con_certificate(const Window& w) {
  ConCertificate out;
  out.window_lo = w.lo;
  out.window_hi = w.hi;
  int64_t first = w.hi, last = w.lo - 1;
  for (int64_t k = w.lo; k < w.hi; ++k) {
    if (w.at(k) != 0) {
      first = std::min(first, k);
      last = std::max(last, k);
    }
  }
  if (first == w.hi) {
    // no support visible: the zero representative
    out.finite_support = true;
    out.in_con_at_scope = true;
    out.in_con_minus_at_scope = true;
    return out;
  }
  bool left_visible = first > w.lo;    // a zero margin before the support
  bool right_visible = last < w.hi - 1;
  out.in_con_at_scope = left_visible;
  out.in_con_minus_at_scope = right_visible;
  out.finite_support = left_visible && right_visible;
  out.undecided = !left_visible && !right_visible;
  return out;
}

SeriesTrunc left_shift_series(const SeriesTrunc& s) {
  if (s.min_index != 0) throw RangeError("left shift expects a series in F[[X]]");
  SeriesTrunc out;
  out.spec = s.spec;
  out.min_index = 0;
  out.trunc = std::max<int64_t>(s.trunc - 1, 0);
  for (int64_t k = 0; k < out.trunc; ++k) out.coeffs.push_back(s.at(k + 1));
  return out;
}

SeriesTrunc shift_series(const SeriesTrunc& s, int64_t k, int64_t new_min_index) {
  SeriesTrunc out;
  out.spec = s.spec;
  out.min_index = new_min_index;
  out.trunc = s.trunc + k;
  for (int64_t i = out.min_index; i < out.trunc; ++i) out.coeffs.push_back(s.at(i - k));
  return out;
}

std::vector<int64_t> mul_by_p_orbit(const FieldElement& z, long long n) {
  const SpecPtr& spec = z.spec();
  if (spec->kind != FieldKind::padic) throw RangeError("mul_by_p_orbit expects a p-adic element");
  if (z.is_exact_zero())
    return std::vector<int64_t>(static_cast<size_t>(n) + 1, FieldElement::kInfValuation);
  int64_t v = z.valuation();  // throws PrecisionExhausted for O(p^k) inputs
  if (v < 0) throw RangeError("mul_by_p_orbit expects z in Z_p");
  std::vector<int64_t> out;
  FieldElement cur = z;
  FieldElement p = FieldElement::uniformizer_pow(spec, 1);
  for (long long k = 0; k <= n; ++k) {
    out.push_back(cur.valuation());
    cur = cur.mul(p);
  }
  return out;
}

FrobeniusResult frobenius_series(const SeriesTrunc& s) {
  const auto& rf = s.spec->residue;
  uint32_t p = s.spec->p();
  FrobeniusResult out;
  out.series.spec = s.spec;
  out.series.min_index = s.min_index;
  out.series.trunc = s.trunc;
  out.series.coeffs.assign(static_cast<size_t>(std::max<int64_t>(s.trunc - s.min_index, 0)), 0);
  for (int64_t k = s.min_index; k < s.trunc; ++k) {
    uint32_t c = s.at(k);
    if (c == 0) continue;
    int64_t pk = static_cast<int64_t>(p) * k;
    if (pk >= s.trunc) {
      out.truncation_loss = true;
      continue;
    }
    if (pk < s.min_index) throw RangeError("frobenius: image index below the series floor");
    out.series.coeffs[static_cast<size_t>(pk - s.min_index)] = rf.frobenius(c);
  }
  return out;
}

SeriesTrunc series_mul(const SeriesTrunc& a, const SeriesTrunc& b) {
  const auto& rf = a.spec->residue;
  SeriesTrunc out;
  out.spec = a.spec;
  out.min_index = 0;
  out.trunc = std::min(a.trunc, b.trunc);
  out.coeffs.assign(static_cast<size_t>(std::max<int64_t>(out.trunc, 0)), 0);
  for (int64_t i = a.min_index; i < a.trunc; ++i) {
    uint32_t ca = a.at(i);
    if (ca == 0) continue;
    for (int64_t j = b.min_index; j < b.trunc && i + j < out.trunc; ++j) {
      uint32_t cb = b.at(j);
      if (cb == 0) continue;
      auto& slot = out.coeffs[static_cast<size_t>(i + j)];
      slot = rf.add(slot, rf.mul(ca, cb));
    }
  }
  return out;
}

SeriesTrunc series_add(const SeriesTrunc& a, const SeriesTrunc& b) {
  const auto& rf = a.spec->residue;
  SeriesTrunc out;
  out.spec = a.spec;
  out.min_index = std::min(a.min_index, b.min_index);
  out.trunc = std::min(a.trunc, b.trunc);
  for (int64_t k = out.min_index; k < out.trunc; ++k)
    out.coeffs.push_back(rf.add(a.at(k), b.at(k)));
  return out;
}

SeriesTrunc series_sub(const SeriesTrunc& a, const SeriesTrunc& b) {
  const auto& rf = a.spec->residue;
  SeriesTrunc out;
  out.spec = a.spec;
  out.min_index = std::min(a.min_index, b.min_index);
  out.trunc = std::min(a.trunc, b.trunc);
  for (int64_t k = out.min_index; k < out.trunc; ++k)
    out.coeffs.push_back(rf.sub(a.at(k), b.at(k)));
  return out;
}

namespace {

SeriesTrunc constant_series(const SpecPtr& spec, int64_t trunc, uint32_t c) {
  SeriesTrunc s;
  s.spec = spec;
  s.min_index = 0;
  s.trunc = trunc;
  s.coeffs.assign(static_cast<size_t>(std::max<int64_t>(trunc, 0)), 0);
  if (trunc > 0) s.coeffs[0] = c;
  return s;
}

void check_congruence(const CongruenceMatrix& m) {
  // entries congruent to the identity mod X
  if (m.entries[0].at(0) != 1 || m.entries[3].at(0) != 1 || m.entries[1].at(0) != 0 ||
      m.entries[2].at(0) != 0)
    throw RangeError("congruence matrix: entries not congruent to the identity mod X");
  SeriesTrunc det = series_sub(series_mul(m.entries[0], m.entries[3]),
                               series_mul(m.entries[1], m.entries[2]));
  SeriesTrunc one = constant_series(m.spec, det.trunc, 1);
  for (int64_t k = 0; k < det.trunc; ++k)
    if (det.at(k) != one.at(k))
      throw RangeError("congruence matrix: determinant differs from 1 at truncation");
}

}  // namespace

int64_t CongruenceMatrix::distance_to_identity() const {
  int64_t best = trunc;
  for (size_t e = 0; e < 4; ++e) {
    SeriesTrunc diff = entries[e];
    if (e == 0 || e == 3) {
      SeriesTrunc one = constant_series(spec, diff.trunc, 1);
      diff = series_sub(diff, one);
    }
    best = std::min(best, diff.valuation_or_trunc());
  }
  return best;
}

CongruenceMatrix make_congruence_matrix(const SpecPtr& spec, int64_t trunc,
                                        std::array<SeriesTrunc, 4> entries) {
  if (spec->kind != FieldKind::laurent || spec->p() != 2 || spec->residue.f() != 1)
    throw RangeError("the congruence-subgroup example is fixed to F_2((X))");
  CongruenceMatrix m;
  m.spec = spec;
  m.trunc = trunc;
  m.entries = std::move(entries);
  for (auto& e : m.entries) {
    e.trunc = std::min(e.trunc, trunc);
    e.coeffs.resize(static_cast<size_t>(std::max<int64_t>(e.trunc - e.min_index, 0)), 0);
  }
  check_congruence(m);
  return m;
}

CongruenceMatrix sl2_frobenius(const CongruenceMatrix& m) {
  CongruenceMatrix out = m;
  bool loss = false;
  for (size_t e = 0; e < 4; ++e) {
    FrobeniusResult fr = frobenius_series(m.entries[e]);
    loss = loss || fr.truncation_loss;
    out.entries[e] = fr.series;
  }
  (void)loss;  // squaring never drops information below the truncation in char 2
  check_congruence(out);
  return out;
}

}  // namespace uldyn
