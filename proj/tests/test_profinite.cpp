#include "doctest.h"

#include <random>

#include "uldyn/profinite_examples.hpp"

using namespace uldyn;

namespace {

Window make_window(const SpecPtr& spec, int64_t lo, int64_t hi,
                   const std::vector<std::pair<int64_t, uint32_t>>& support) {
  Window w;
  w.spec = spec;
  w.lo = lo;
  w.hi = hi;
  w.coeffs.assign(static_cast<size_t>(hi - lo), 0);
  for (auto [k, c] : support) w.coeffs[static_cast<size_t>(k - lo)] = c;
  return w;
}

SeriesTrunc make_series(const SpecPtr& spec, int64_t min_index, int64_t trunc,
                        const std::vector<std::pair<int64_t, uint32_t>>& support) {
  SeriesTrunc s;
  s.spec = spec;
  s.min_index = min_index;
  s.trunc = trunc;
  s.coeffs.assign(static_cast<size_t>(trunc - min_index), 0);
  for (auto [k, c] : support) s.coeffs[static_cast<size_t>(k - min_index)] = c;
  return s;
}

// inverse of a series with unit constant term, to the given truncation
SeriesTrunc series_inv(const SeriesTrunc& a) {
  const auto& rf = a.spec->residue;
  SeriesTrunc out = make_series(a.spec, 0, a.trunc, {});
  uint32_t d0 = rf.inv(a.at(0));
  std::vector<uint32_t> rem(static_cast<size_t>(a.trunc), 0);
  rem[0] = 1;
  for (int64_t i = 0; i < a.trunc; ++i) {
    uint32_t e = rf.mul(rem[static_cast<size_t>(i)], d0);
    out.coeffs[static_cast<size_t>(i)] = e;
    if (e == 0) continue;
    for (int64_t j = 0; j < a.trunc - i; ++j)
      rem[static_cast<size_t>(i + j)] = rf.sub(rem[static_cast<size_t>(i + j)], rf.mul(e, a.at(j)));
  }
  return out;
}

}  // namespace

TEST_CASE("two sided shift") {
  auto spec = FieldSpec::laurent(2, 1, 16, "X");
  auto w = make_window(spec, -3, 4, {{0, 1}});
  auto s = two_sided_shift(w);
  CHECK(s.lo == -2);
  CHECK(s.hi == 5);
  CHECK(s.at(1) == 1);
  CHECK(s.at(0) == 0);

  // shift then unshift is the identity on the overlapping range
  auto back = two_sided_unshift(s);
  CHECK(back.lo == w.lo);
  for (int64_t k = back.lo; k < back.hi; ++k) CHECK(back.at(k) == w.at(k));

  auto sup = make_window(spec, -4, 7, {{-2, 1}, {5, 1}});
  auto ssup = two_sided_shift(sup);
  CHECK(ssup.at(-1) == 1);
  CHECK(ssup.at(6) == 1);
  CHECK(ssup.at(-2 + 1) == 1);
}

TEST_CASE("phi chart") {
  auto spec = FieldSpec::laurent(2, 1, 16, "X");
  // delta_0 -> (0, series "1")
  auto d0 = make_window(spec, -3, 4, {{0, 1}});
  auto split0 = phi_split(d0);
  CHECK(split0.negative_tail.valuation_or_trunc() == split0.negative_tail.trunc);
  CHECK(split0.nonneg.at(0) == 1);

  // delta_{-1} -> (series "X", 0)
  auto dm1 = make_window(spec, -3, 4, {{-1, 1}});
  auto split1 = phi_split(dm1);
  CHECK(split1.negative_tail.at(1) == 1);
  CHECK(split1.nonneg.valuation_or_trunc() == split1.nonneg.trunc);

  CHECK_THROWS_AS(phi_split(make_window(spec, 0, 4, {})), RangeError);

  // round trip on 500 random windows
  std::mt19937_64 rng(31);
  for (int t = 0; t < 500; ++t) {
    int64_t m = 1 + static_cast<int64_t>(rng() % 6);
    Window w;
    w.spec = spec;
    w.lo = -m;
    w.hi = m;
    w.coeffs.resize(static_cast<size_t>(2 * m));
    for (auto& c : w.coeffs) c = static_cast<uint32_t>(rng() % 2);
    auto parts = phi_split(w);
    auto back = phi_unsplit(parts);
    REQUIRE(back.lo == w.lo);
    REQUIRE(back.hi == w.hi);
    for (int64_t k = w.lo; k < w.hi; ++k) CHECK(back.at(k) == w.at(k));
  }
}

TEST_CASE("shift conjugated through phi is the block map") {
  auto spec = FieldSpec::laurent(2, 1, 16, "X");
  std::mt19937_64 rng(77);
  for (int t = 0; t < 200; ++t) {
    int64_t m = 2 + static_cast<int64_t>(rng() % 5);
    Window w;
    w.spec = spec;
    w.lo = -m;
    w.hi = m;
    w.coeffs.resize(static_cast<size_t>(2 * m));
    for (auto& c : w.coeffs) c = static_cast<uint32_t>(rng() % 2);
    // the linear form (z, w) -> (X^{-1} z, X w) matches the conjugation on the
    // open set where a_{-1} = 0
    w.coeffs[static_cast<size_t>(m - 1)] = 0;
    auto before = phi_split(w);
    auto after = phi_split(two_sided_shift(w));
    // negative tail of the image = X^{-1} * negative tail, where both defined
    for (int64_t k = 1; k < after.negative_tail.trunc && k + 1 < before.negative_tail.trunc; ++k)
      CHECK(after.negative_tail.at(k) == before.negative_tail.at(k + 1));
    // nonneg part of the image = X * nonneg part
    CHECK(after.nonneg.at(0) == 0);
    for (int64_t k = 1; k < after.nonneg.trunc && k - 1 < before.nonneg.trunc; ++k)
      CHECK(after.nonneg.at(k) == before.nonneg.at(k - 1));
  }
}

TEST_CASE("con certificates") {
  auto spec = FieldSpec::laurent(2, 1, 16, "X");
  auto fin = con_certificate(make_window(spec, -5, 6, {{0, 1}, {1, 1}}));
  CHECK(fin.finite_support);
  CHECK(fin.in_con_at_scope);
  CHECK(fin.in_con_minus_at_scope);
  CHECK(fin.window_lo == -5);

  Window ones;
  ones.spec = spec;
  ones.lo = -4;
  ones.hi = 4;
  ones.coeffs.assign(8, 1);
  auto und = con_certificate(ones);
  CHECK(und.undecided);
  CHECK(!und.finite_support);

  auto right = con_certificate(
      make_window(spec, -5, 6, {{-5, 1}, {-3, 1}, {0, 1}}));
  CHECK(right.in_con_minus_at_scope);
  CHECK(!right.in_con_at_scope);
  CHECK(!right.finite_support);
}

TEST_CASE("left shift on truncated series") {
  auto spec = FieldSpec::laurent(2, 1, 16, "X");
  auto s = make_series(spec, 0, 8, {{0, 1}, {1, 1}});  // 1 + X
  auto l = left_shift_series(s);
  CHECK(l.at(0) == 1);
  CHECK(l.valuation_or_trunc() == 0);
  CHECK(l.trunc == 7);

  // constants die in one step: ker = F X^0
  auto c = make_series(spec, 0, 8, {{0, 1}});
  auto lc = left_shift_series(c);
  CHECK(lc.valuation_or_trunc() == lc.trunc);

  // X^k dies after exactly k+1 steps
  for (int64_t k = 0; k < 5; ++k) {
    auto xk = make_series(spec, 0, 10, {{k, 1}});
    SeriesTrunc cur = xk;
    for (int64_t step = 0; step < k; ++step) {
      cur = left_shift_series(cur);
      CHECK(cur.valuation_or_trunc() < cur.trunc);  // still alive
    }
    cur = left_shift_series(cur);
    CHECK(cur.valuation_or_trunc() == cur.trunc);  // dead at step k+1
  }

  // multiplication by X is a regressive-trajectory witness: shift back up
  auto witness = shift_series(s, 1, 0);
  auto recovered = left_shift_series(witness);
  for (int64_t k = 0; k + 1 < s.trunc; ++k) CHECK(recovered.at(k) == s.at(k));
}

TEST_CASE("multiplication by p orbit") {
  auto spec = FieldSpec::padic(5, 12);
  auto one = FieldElement::one(spec);
  auto vals = mul_by_p_orbit(one, 4);
  CHECK(vals == std::vector<int64_t>{0, 1, 2, 3, 4});

  auto z = mul_by_p_orbit(FieldElement::zero(spec), 3);
  for (auto v : z) CHECK(v == FieldElement::kInfValuation);

  auto p2 = mul_by_p_orbit(FieldElement::uniformizer_pow(spec, 2), 3);
  CHECK(p2 == std::vector<int64_t>{2, 3, 4, 5});

  CHECK_THROWS_AS(mul_by_p_orbit(FieldElement::parse("1/5", spec), 2), RangeError);
}

TEST_CASE("frobenius on truncated series") {
  auto spec = FieldSpec::laurent(2, 1, 16, "X");
  // X + X^2 -> X^2 + X^4
  auto s = make_series(spec, 1, 16, {{1, 1}, {2, 1}});
  auto fr = frobenius_series(s);
  CHECK(!fr.truncation_loss);
  CHECK(fr.series.at(2) == 1);
  CHECK(fr.series.at(4) == 1);
  CHECK(fr.series.at(1) == 0);
  CHECK(fr.series.at(3) == 0);

  // valuation law: val 1 input, 3 steps, p = 2 -> val 8
  SeriesTrunc cur = make_series(spec, 1, 16, {{1, 1}, {3, 1}});
  for (int i = 0; i < 3; ++i) cur = frobenius_series(cur).series;
  CHECK(cur.valuation_or_trunc() == 8);

  // 0 -> 0
  auto z = frobenius_series(make_series(spec, 1, 16, {}));
  CHECK(z.series.valuation_or_trunc() == z.series.trunc);

  // derivative-at-zero certificate: (c X + higher)^p has no X^1 term
  std::mt19937_64 rng(5);
  for (auto sp : {FieldSpec::laurent(2, 1, 20, "X"), FieldSpec::laurent(3, 1, 20, "X"),
                  FieldSpec::laurent(2, 2, 20, "X")}) {
    for (int t = 0; t < 50; ++t) {
      SeriesTrunc r = make_series(sp, 1, 20, {});
      for (int64_t k = 1; k < 20; ++k)
        r.coeffs[static_cast<size_t>(k - 1)] = static_cast<uint32_t>(rng() % sp->q());
      auto out = frobenius_series(r);
      CHECK(out.series.at(1) == 0);
    }
  }

  // truncation loss is flagged when p k >= N
  auto tight = make_series(spec, 1, 4, {{2, 1}});
  auto ft = frobenius_series(tight);
  CHECK(ft.truncation_loss);
}

TEST_CASE("frobenius valuation law within truncation") {
  auto spec = FieldSpec::laurent(3, 1, 30, "X");
  std::mt19937_64 rng(9);
  for (int t = 0; t < 100; ++t) {
    int64_t v = 1 + static_cast<int64_t>(rng() % 3);
    auto s = make_series(spec, 1, 30, {});
    s.coeffs[static_cast<size_t>(v - 1)] = 1 + static_cast<uint32_t>(rng() % 2);
    for (int64_t k = v + 1; k < 30; ++k)
      s.coeffs[static_cast<size_t>(k - 1)] = static_cast<uint32_t>(rng() % 3);
    SeriesTrunc cur = s;
    int64_t expect = v;
    for (int step = 1; step <= 2; ++step) {
      cur = frobenius_series(cur).series;
      expect *= 3;
      if (expect < 30) CHECK(cur.valuation_or_trunc() == expect);
    }
  }
}

TEST_CASE("congruence subgroup frobenius") {
  auto spec = FieldSpec::laurent(2, 1, 24, "X");
  int64_t N = 24;
  auto one = make_series(spec, 0, N, {{0, 1}});
  auto zero = make_series(spec, 0, N, {});

  auto I = make_congruence_matrix(spec, N, {one, zero, zero, one});
  auto fi = sl2_frobenius(I);
  CHECK(fi.distance_to_identity() == N);

  // I + X E_12 -> I + X^2 E_12
  auto b = make_series(spec, 0, N, {{1, 1}});
  auto M = make_congruence_matrix(spec, N, {one, b, zero, one});
  auto fm = sl2_frobenius(M);
  CHECK(fm.entries[1].at(2) == 1);
  CHECK(fm.entries[1].at(1) == 0);
  CHECK(fm.distance_to_identity() == 2);

  // wrong characteristic is refused
  auto spec3 = FieldSpec::laurent(3, 1, 24, "X");
  auto one3 = make_series(spec3, 0, N, {{0, 1}});
  auto zero3 = make_series(spec3, 0, N, {});
  CHECK_THROWS_AS(make_congruence_matrix(spec3, N, {one3, zero3, zero3, one3}), RangeError);

  // 500 random congruence matrices: det and congruence preserved; the
  // distance to the identity doubles each step (x8 over three steps)
  std::mt19937_64 rng(123);
  int checked = 0;
  for (int t = 0; t < 500; ++t) {
    auto a = make_series(spec, 0, N, {{0, 1}});
    auto bb = make_series(spec, 0, N, {});
    auto cc = make_series(spec, 0, N, {});
    for (int64_t k = 1; k < N; ++k) {
      a.coeffs[static_cast<size_t>(k)] = static_cast<uint32_t>(rng() % 2);
      bb.coeffs[static_cast<size_t>(k)] = static_cast<uint32_t>(rng() % 2);
      cc.coeffs[static_cast<size_t>(k)] = static_cast<uint32_t>(rng() % 2);
    }
    // d = (1 + b c) / a keeps det = 1 exactly at truncation
    auto dd = series_mul(series_add(one, series_mul(bb, cc)), series_inv(a));
    auto M2 = make_congruence_matrix(spec, N, {a, bb, cc, dd});  // validates invariants
    int64_t d0 = M2.distance_to_identity();
    auto cur = M2;
    for (int step = 0; step < 3; ++step) cur = sl2_frobenius(cur);  // validates after each step
    if (8 * d0 < N) {
      CHECK(cur.distance_to_identity() == 8 * d0);
      ++checked;
    }
  }
  CHECK(checked > 100);
}
