#include "doctest.h"

#include "uldyn/dynamics.hpp"

using namespace uldyn;

namespace {

MatrixK mat(const SpecPtr& spec, size_t r, size_t c, const std::vector<std::string>& rows) {
  MatrixK m(spec, r, c);
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < c; ++j) m.at(i, j) = FieldElement::parse(rows[i * c + j], spec);
  return m;
}

VectorK vec(const SpecPtr& spec, const std::vector<std::string>& entries) {
  VectorK v;
  for (const auto& s : entries) v.push_back(FieldElement::parse(s, spec));
  return v;
}

struct Setup {
  MatrixK A;
  SpectralDecomposition dec;
  AdaptedNorm nrm;
};

Setup setup(const MatrixK& A) {
  auto dec = spectral_decompose(A);
  auto nrm = adapted_norm(A, dec, NormValue::qpow(Rat(-1)));
  return {A, dec, nrm};
}

}  // namespace

TEST_CASE("classification of the standard hyperbolic example") {
  auto spec = FieldSpec::padic(5, 16);
  auto S = setup(mat(spec, 3, 3, {"5", "0", "0", "0", "1", "0", "0", "0", "1/5"}));
  auto cls = classify(S.A, S.dec);
  REQUIRE(cls.con.size() == 1);
  REQUIRE(cls.lev.size() == 1);
  REQUIRE(cls.con_minus.size() == 1);
  CHECK(!cls.con[0][0].is_exact_zero());
  CHECK(!cls.lev[0][1].is_exact_zero());
  CHECK(!cls.con_minus[0][2].is_exact_zero());
  CHECK(cls.parb.size() == 2);
  CHECK(cls.parb_minus.size() == 2);

  // beta = p * identity: everything contracts
  auto B = setup(mat(spec, 2, 2, {"5", "0", "0", "5"}));
  auto cb = classify(B.A, B.dec);
  CHECK(cb.con.size() == 2);
  CHECK(cb.lev.empty());
  CHECK(cb.con_minus.empty());

  // zero matrix: con = E via the zero-root component
  auto Z = setup(MatrixK(spec, 2, 2));
  auto cz = classify(Z.A, Z.dec);
  CHECK(cz.con.size() == 2);
  CHECK(cz.lev.empty());
  CHECK(cz.con_minus.empty());
}

TEST_CASE("big cell decomposition") {
  auto spec = FieldSpec::padic(5, 16);
  auto S = setup(mat(spec, 3, 3, {"5", "0", "0", "0", "1", "0", "0", "0", "1/5"}));

  auto zero = big_cell_decompose(S.A, S.dec, zero_vector(spec, 3));
  for (const auto& part : {zero.s, zero.c, zero.u})
    for (const auto& e : part) CHECK(!e.is_significant());

  auto parts = big_cell_decompose(S.A, S.dec, vec(spec, {"1", "1", "1"}));
  CHECK(parts.s[0].eq_at_precision(FieldElement::one(spec)));
  CHECK(!parts.s[1].is_significant());
  CHECK(parts.c[1].eq_at_precision(FieldElement::one(spec)));
  CHECK(parts.u[2].eq_at_precision(FieldElement::one(spec)));

  // round-trip and openness (max-splitting) on random vectors
  Rng rng(42);
  for (int t = 0; t < 200; ++t) {
    VectorK x = random_vector(spec, 3, rng);
    auto p = big_cell_decompose(S.A, S.dec, x);
    VectorK back = vec_add(vec_add(p.s, p.c), p.u);
    CHECK(vec_eq_at_precision(back, x));
    NormValue nx = S.nrm.norm(x);
    NormValue m = NormValue::max(S.nrm.norm(p.s),
                                 NormValue::max(S.nrm.norm(p.c), S.nrm.norm(p.u)));
    CHECK(nx == m);
  }
}

TEST_CASE("orbit certificates") {
  auto spec = FieldSpec::padic(5, 16);
  // beta = p on Z_p: ||beta^n x|| = q^{-n}
  auto P = setup(mat(spec, 1, 1, {"5"}));
  VectorK one{FieldElement::one(spec)};
  auto orbit = forward_orbit(P.A, one, 4);
  for (size_t k = 0; k < orbit.size(); ++k)
    CHECK(orbit[k][0].valuation() == static_cast<int64_t>(k));
  auto cert = orbit_certificate(P.A, P.dec, P.nrm, one);
  CHECK(cert.kind == OrbitKind::contracting);
  CHECK(cert.rate == NormValue::qpow(Rat(-1)));

  // Levi directions stay bounded with constant norm
  auto S = setup(mat(spec, 3, 3, {"5", "0", "0", "0", "1", "0", "0", "0", "1/5"}));
  VectorK e2 = vec(spec, {"0", "1", "0"});
  auto c2 = orbit_certificate(S.A, S.dec, S.nrm, e2);
  CHECK(c2.kind == OrbitKind::bounded);
  NormValue n0 = S.nrm.norm(e2);
  VectorK cur = e2;
  for (int k = 0; k < 20; ++k) {
    cur = S.A.mul(cur);
    CHECK(S.nrm.norm(cur) == n0);
  }

  // escaping direction grows like q^n
  VectorK e3 = vec(spec, {"0", "0", "1"});
  auto c3 = orbit_certificate(S.A, S.dec, S.nrm, e3);
  CHECK(c3.kind == OrbitKind::escaping);
  cur = e3;
  for (int k = 1; k <= 5; ++k) {
    cur = S.A.mul(cur);
    CHECK(S.nrm.norm(cur) == NormValue::qpow(Rat(k)));
  }
}

TEST_CASE("regressive trajectories") {
  auto spec = FieldSpec::padic(5, 16);
  auto S = setup(mat(spec, 3, 3, {"5", "0", "0", "0", "1", "0", "0", "0", "1/5"}));
  VectorK e3 = vec(spec, {"0", "0", "1"});
  auto res = regressive_trajectory(S.A, S.dec, e3, 4);
  REQUIRE(res.has_trajectory);
  REQUIRE(res.trajectory.size() == 5);
  for (size_t k = 0; k < res.trajectory.size(); ++k) {
    CHECK(res.trajectory[k][2].valuation() == static_cast<int64_t>(k));
    if (k > 0) {
      VectorK forward = S.A.mul(res.trajectory[k]);
      CHECK(vec_eq_at_precision(forward, res.trajectory[k - 1]));
    }
  }

  // A(x, y) = (y, 0): e2 has no preimage
  auto N = setup(mat(spec, 2, 2, {"0", "1", "0", "0"}));
  VectorK e2 = vec(spec, {"0", "1"});
  auto rn = regressive_trajectory(N.A, N.dec, e2, 1);
  CHECK(!rn.has_trajectory);
  CHECK(N.dec.components[rn.obstructing_component].zero_root);

  // Levi directions have constant-norm trajectories
  VectorK lev = vec(spec, {"0", "1", "0"});
  auto rl = regressive_trajectory(S.A, S.dec, lev, 6);
  REQUIRE(rl.has_trajectory);
  for (const auto& xk : rl.trajectory) CHECK(S.nrm.norm(xk) == S.nrm.norm(lev));
}

TEST_CASE("tidy lattice examples") {
  auto spec = FieldSpec::padic(5, 16);
  auto S = setup(mat(spec, 3, 3, {"5", "0", "0", "0", "1", "0", "0", "0", "1/5"}));
  auto tidy = tidy_lattice(S.A, S.dec, S.nrm);
  // U = Z_p^3
  auto I3 = lattice_hnf(MatrixK::identity(spec, 3));
  CHECK(lattice_equal(tidy.U, I3));
  CHECK(tidy.U_minus.pivots.size() == 2);
  CHECK(tidy.U_plus.pivots.size() == 2);
  CHECK(lattice_contains(tidy.U_minus, vec(spec, {"1", "0", "0"})));
  CHECK(lattice_contains(tidy.U_minus, vec(spec, {"0", "1", "0"})));
  CHECK(!lattice_contains(tidy.U_minus, vec(spec, {"0", "0", "1"})));
  CHECK(lattice_contains(tidy.U_plus, vec(spec, {"0", "0", "1"})));
  CHECK(tidy.index_displacement.exponent == 1);

  // isometric case: U+ = U- = U
  auto I = setup(MatrixK::identity(spec, 2));
  auto ti = tidy_lattice(I.A, I.dec, I.nrm);
  CHECK(lattice_equal(ti.U_plus, ti.U));
  CHECK(lattice_equal(ti.U_minus, ti.U));
  CHECK(ti.index_displacement.exponent == 0);

  // zero matrix: U- = U, U+ = 0
  auto Z = setup(MatrixK(spec, 2, 2));
  auto tz = tidy_lattice(Z.A, Z.dec, Z.nrm);
  CHECK(lattice_equal(tz.U_minus, tz.U));
  CHECK(tz.U_plus.pivots.empty());
  CHECK(tz.index_displacement.exponent == 0);
}

TEST_CASE("displacement index examples") {
  auto spec = FieldSpec::padic(5, 16);
  auto L1 = lattice_hnf(MatrixK::identity(spec, 1));
  CHECK(displacement_index(mat(spec, 1, 1, {"1/5"}), L1).exponent == 1);
  CHECK(displacement_index(mat(spec, 1, 1, {"5"}), L1).exponent == 0);

  auto D = mat(spec, 3, 3, {"5", "0", "0", "0", "1", "0", "0", "0", "1/5"});
  auto L3 = lattice_hnf(MatrixK::identity(spec, 3));
  CHECK(displacement_index(D, L3).exponent == 1);
  // brute-force coset count agrees
  CHECK(coset_count_exponent(D, L3, 6) == 1);
}

TEST_CASE("scale examples") {
  auto spec = FieldSpec::padic(5, 16);
  // all characteristic values <= 1: scale 1
  auto C = setup(mat(spec, 2, 2, {"5", "0", "0", "1"}));
  auto sc = scale(C.A, C.dec);
  CHECK(sc.exponent == 0);
  CHECK(sc.base == 5);

  auto S = setup(mat(spec, 3, 3, {"5", "0", "0", "0", "1", "0", "0", "0", "1/5"}));
  auto s3 = scale(S.A, S.dec);
  CHECK(s3.exponent == 1);

  auto spec2 = FieldSpec::laurent(2, 1, 16, "X");
  auto W = setup(mat(spec2, 2, 2, {"X^-1", "0", "0", "X"}));
  auto sw = scale(W.A, W.dec);
  CHECK(sw.base == 2);
  CHECK(sw.exponent == 1);
  // [X^{-1} F2[[X]] : F2[[X]]] counted literally
  auto L2 = lattice_hnf(MatrixK::identity(spec2, 2));
  CHECK(coset_count_exponent(W.A, L2, 6) == 1);
}

TEST_CASE("tidiness gap") {
  auto spec = FieldSpec::padic(3, 16);
  auto S = setup(mat(spec, 3, 3, {"3", "0", "0", "0", "1", "0", "0", "0", "1/3"}));
  auto tidy = tidy_lattice(S.A, S.dec, S.nrm);
  // the tidy U itself achieves the scale
  CHECK(displacement_index(S.A, tidy.U).exponent == 1);
  // a hand perturbation: diag(1,1,p) Z^3
  auto Lp = lattice_hnf(mat(spec, 3, 3, {"1", "0", "0", "0", "1", "0", "0", "0", "3"}));
  CHECK(displacement_index(S.A, Lp).exponent >= 1);
  auto rep = tidiness_gap(S.A, S.dec, S.nrm, 100, 777);
  CHECK(rep.min_observed_exponent >= rep.scale_exponent);
  CHECK(rep.scale_exponent == 1);
  CHECK(rep.equality_count >= 1);  // the undisturbed shape shows up
}

TEST_CASE("iterated kernel and invertibility") {
  auto spec = FieldSpec::padic(5, 16);
  auto P = mat(spec, 1, 1, {"5"});
  auto [inv1, triv1] = etale_iff_trivial_ik(P);
  CHECK(inv1);
  CHECK(triv1);

  auto Z = MatrixK(spec, 2, 2);
  auto [inv2, triv2] = etale_iff_trivial_ik(Z);
  CHECK(!inv2);
  CHECK(!triv2);
  CHECK(iterated_kernel(Z).size() == 2);

  auto A = mat(spec, 2, 2, {"0", "1", "0", "1"});
  auto [inv3, triv3] = etale_iff_trivial_ik(A);
  CHECK(!inv3);
  CHECK(!triv3);
  CHECK(iterated_kernel(A).size() == 1);
}

TEST_CASE("exhaustion bound") {
  auto spec = FieldSpec::padic(5, 16);
  auto S = setup(mat(spec, 1, 1, {"1/5"}));
  VectorK x{FieldElement::one(spec)};
  CHECK(exhaustion_bound(S.A, S.dec, S.nrm, x, NormValue::one()) == 0);
  CHECK(exhaustion_bound(S.A, S.dec, S.nrm, x, NormValue::qpow(Rat(-1))) == 1);
  // ||x|| = q^3 r with r = 1: slope -1 gives n = 3
  VectorK big{FieldElement::parse("1/125", spec)};
  CHECK(exhaustion_bound(S.A, S.dec, S.nrm, big, NormValue::one()) == 3);
  CHECK_THROWS_AS(
      exhaustion_bound(S.A, S.dec, S.nrm, zero_vector(spec, 1), NormValue::zero()), RangeError);
}

TEST_CASE("kernel sits inside the zero-root component") {
  // 20-step orbit checks need headroom: each step can cost a few digits of
  // relative precision through negative-valuation entries of the conjugated
  // matrix, so run this suite at N = 120
  for (auto spec : {FieldSpec::padic(2, 120), FieldSpec::laurent(3, 1, 120)}) {
    Rng rng(2718);
    for (int t = 0; t < 8; ++t) {
      size_t n = 2 + rng.below(3);
      PlantedMatrix pm = random_planted(spec, n, rng);
      auto dec = spectral_decompose(pm.matrix);
      auto kr = rref_val(pm.matrix);
      for (const auto& v : kr.kernel) {
        auto parts = dec.split(v);
        for (size_t c = 0; c < dec.components.size(); ++c) {
          if (dec.components[c].zero_root) continue;
          for (const auto& e : parts[c]) CHECK(!e.is_significant());
        }
      }
      // contraction / anti-contraction rates over 20 steps
      auto nrm = adapted_norm(pm.matrix, dec, NormValue::qpow(Rat(-1)));
      auto cls = classify(pm.matrix, dec);
      if (!cls.con.empty()) {
        NormValue c = nrm.epsilon;
        for (const auto& comp : dec.components)
          if (!comp.zero_root && comp.slope > Rat(0)) c = NormValue::max(c, comp.char_value);
        VectorK x = cls.con[rng.below(cls.con.size())];
        NormValue base = nrm.norm(x);
        VectorK cur = x;
        NormValue pw = NormValue::one();
        for (int k = 1; k <= 20; ++k) {
          cur = pm.matrix.mul(cur);
          pw = pw * c;
          CHECK(nrm.norm(cur) <= base * pw);
        }
      }
      if (!cls.con_minus.empty()) {
        NormValue cp = NormValue::zero();
        for (const auto& comp : dec.components)
          if (!comp.zero_root && comp.slope < Rat(0))
            cp = NormValue::max(cp, NormValue::qpow(comp.slope));  // (smallest rho > 1)^{-1}
        VectorK x = cls.con_minus[rng.below(cls.con_minus.size())];
        auto traj = regressive_trajectory(pm.matrix, dec, x, 20);
        REQUIRE(traj.has_trajectory);
        NormValue base = nrm.norm(x);
        NormValue pw = NormValue::one();
        for (size_t k = 1; k < traj.trajectory.size(); ++k) {
          pw = pw * cp;
          CHECK(nrm.norm(traj.trajectory[k]) <= base * pw);
        }
      }
    }
  }
}
