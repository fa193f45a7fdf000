#include "doctest.h"

#include "uldyn/random_gen.hpp"
#include "uldyn/ultralinalg.hpp"

using namespace uldyn;

namespace {

MatrixK mat(const SpecPtr& spec, size_t r, size_t c, const std::vector<std::string>& rows) {
  MatrixK m(spec, r, c);
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < c; ++j) m.at(i, j) = FieldElement::parse(rows[i * c + j], spec);
  return m;
}

}  // namespace

TEST_CASE("rref examples") {
  auto spec = FieldSpec::padic(5, 12);
  // zero matrix: kernel is everything, image is zero
  MatrixK Z(spec, 2, 2);
  auto rz = rref_val(Z);
  CHECK(rz.rank == 0);
  CHECK(rz.kernel.size() == 2);
  CHECK(rz.image.empty());

  // diag(p, 0)
  auto D = mat(spec, 2, 2, {"5", "0", "0", "0"});
  auto rd = rref_val(D);
  CHECK(rd.rank == 1);
  REQUIRE(rd.kernel.size() == 1);
  CHECK(rd.kernel[0][0].is_exact_zero());
  CHECK(rd.kernel[0][1].eq_at_precision(FieldElement::one(spec)));
  REQUIRE(rd.image.size() == 1);
  CHECK(rd.image[0][1].is_exact_zero());

  // planted rank: 4x4 = B (4x2) * C (2x4)
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    MatrixK B(spec, 4, 2), C(spec, 2, 4);
    for (size_t i = 0; i < 4; ++i)
      for (size_t j = 0; j < 2; ++j) {
        B.at(i, j) = random_exact(spec, rng, -1, 2);
        C.at(j, i) = random_exact(spec, rng, -1, 2);
      }
    auto rr = rref_val(B.mul(C));
    CHECK(rr.rank <= 2);
    if (rref_val(B).rank == 2 && rref_val(C).rank == 2) CHECK(rr.rank == 2);
    // kernel vectors really annihilate
    for (const auto& v : rr.kernel) {
      auto img = B.mul(C).mul(v);
      for (const auto& x : img) CHECK(!x.is_significant());
    }
  }
}

TEST_CASE("inverse and solve") {
  auto spec = FieldSpec::padic(3, 10);
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    auto u = random_unimodular(spec, 4, rng);
    CHECK(u.mat.mul(u.inv).eq_at_precision(MatrixK::identity(spec, 4)));
    auto inv2 = inverse(u.mat);
    CHECK(u.mat.mul(inv2).eq_at_precision(MatrixK::identity(spec, 4)));
  }
  // solve on a singular system
  auto A = mat(spec, 2, 2, {"0", "1", "0", "1"});
  auto sol = solve(A, {FieldElement::one(spec), FieldElement::one(spec)});
  REQUIRE(sol.has_value());
  auto img = A.mul(*sol);
  CHECK(img[0].eq_at_precision(FieldElement::one(spec)));
  auto none = solve(A, {FieldElement::one(spec), FieldElement::zero(spec)});
  CHECK(!none.has_value());
}

TEST_CASE("char poly examples") {
  auto spec = FieldSpec::padic(5, 12);
  auto D = mat(spec, 2, 2, {"1", "0", "0", "5"});
  auto cp = char_poly(D);
  auto expect = Polynomial::parse("T^2 - 6*T + 5", spec);
  CHECK(cp.eq_at_precision(expect));

  auto N = mat(spec, 2, 2, {"0", "1", "0", "0"});
  CHECK(char_poly(N).eq_at_precision(Polynomial::parse("T^2", spec)));

  // companion matrix of f reproduces f
  auto f = Polynomial::parse("T^3 - 2*T + 10", spec);
  MatrixK Cm(spec, 3, 3);
  Cm.at(1, 0) = FieldElement::one(spec);
  Cm.at(2, 1) = FieldElement::one(spec);
  for (size_t i = 0; i < 3; ++i) Cm.at(i, 2) = f.coeff(static_cast<long long>(i)).neg();
  CHECK(char_poly(Cm).eq_at_precision(f));

  // eval on matrices
  auto sq = eval_poly(Polynomial::parse("T^2", spec), D);
  CHECK(sq.eq_at_precision(mat(spec, 2, 2, {"1", "0", "0", "25"})));
  auto con = eval_poly(Polynomial::parse("T^2 - 5", spec), MatrixK(spec, 2, 2));
  CHECK(con.eq_at_precision(mat(spec, 2, 2, {"-5", "0", "0", "-5"})));
}

TEST_CASE("spectral decomposition examples") {
  auto spec = FieldSpec::padic(5, 12);
  auto D = mat(spec, 2, 2, {"1", "0", "0", "5"});
  auto dec = spectral_decompose(D);
  REQUIRE(dec.components.size() == 2);
  CHECK(dec.components[0].slope == Rat(0));
  CHECK(dec.components[0].multiplicity == 1);
  CHECK(dec.components[1].slope == Rat(1));
  CHECK(dec.components[1].char_value == NormValue::qpow(Rat(-1)));
  // eigenvector directions e1 and e2
  CHECK(dec.components[0].basis[0][1].is_exact_zero());
  CHECK(!dec.components[0].basis[0][0].is_exact_zero());

  auto Z = MatrixK(spec, 2, 2);
  auto dz = spectral_decompose(Z);
  REQUIRE(dz.components.size() == 1);
  CHECK(dz.components[0].zero_root);
  CHECK(dz.components[0].multiplicity == 2);

  auto spec2 = FieldSpec::laurent(2, 1, 12, "X");
  auto S = mat(spec2, 2, 2, {"X^-1", "0", "0", "X"});
  auto ds = spectral_decompose(S);
  REQUIRE(ds.components.size() == 2);
  CHECK(ds.components[0].slope == Rat(-1));
  CHECK(ds.components[0].char_value == NormValue::qpow(Rat(1)));  // q
  CHECK(ds.components[1].slope == Rat(1));
  CHECK(ds.components[1].char_value == NormValue::qpow(Rat(-1)));  // q^{-1}
}

TEST_CASE("hyperbolicity") {
  auto spec = FieldSpec::padic(5, 10);
  auto D = mat(spec, 2, 2, {"1", "0", "0", "5"});
  CHECK(is_hyperbolic(D, NormValue::qpow(Rat(-1, 2))));
  CHECK(!is_hyperbolic(D, NormValue::one()));
  CHECK(is_hyperbolic(D, NormValue::qpow(Rat(1000000))));
}

TEST_CASE("adapted norm examples") {
  auto spec = FieldSpec::padic(5, 12);
  auto D = mat(spec, 2, 2, {"1", "0", "0", "5"});
  auto dec = spectral_decompose(D);
  auto nrm = adapted_norm(D, dec, NormValue::qpow(Rat(-1)));
  // a vector in the slope-1 component scales by exactly q^{-1}
  VectorK e2{FieldElement::zero(spec), FieldElement::one(spec)};
  CHECK(nrm.norm(D.mul(e2)) == nrm.norm(e2) * NormValue::qpow(Rat(-1)));
  VectorK e1{FieldElement::one(spec), FieldElement::zero(spec)};
  CHECK(nrm.norm(D.mul(e1)) == nrm.norm(e1));

  // identity: the max norm comes back unchanged
  auto I = MatrixK::identity(spec, 3);
  auto di = spectral_decompose(I);
  auto ni = adapted_norm(I, di, NormValue::one());
  Rng rng(3);
  for (int t = 0; t < 25; ++t) {
    VectorK x = random_vector(spec, 3, rng);
    NormValue expect = NormValue::zero();
    bool undetermined = false;
    for (const auto& c : x) {
      if (c.is_significant()) expect = NormValue::max(expect, c.abs());
      else if (c.is_zero_at_precision()) undetermined = true;
    }
    if (!undetermined) CHECK(ni.norm(x) == expect);
  }

  // nilpotent block with eps = q^{-1}
  auto Nm = mat(spec, 2, 2, {"0", "1", "0", "0"});
  auto dn = spectral_decompose(Nm);
  auto nn = adapted_norm(Nm, dn, NormValue::qpow(Rat(-1)));
  NormValue op = op_norm_on_ik(Nm, nn);
  CHECK(op < NormValue::qpow(Rat(-1)));
}

TEST_CASE("operator norms under the max norm") {
  auto spec = FieldSpec::padic(5, 10);
  CHECK(op_norm_max(mat(spec, 2, 2, {"5", "0", "0", "1"})) == NormValue::one());
  CHECK(op_norm_max(mat(spec, 2, 2, {"0", "1/5", "0", "0"})) == NormValue::qpow(Rat(1)));
}

TEST_CASE("fitting decomposition") {
  auto spec = FieldSpec::padic(5, 10);
  auto Z = MatrixK(spec, 3, 3);
  auto fz = fitting(Z);
  CHECK(fz.ik_basis.size() == 3);
  CHECK(fz.core_basis.empty());

  auto D = mat(spec, 2, 2, {"1", "0", "0", "5"});
  auto fd = fitting(D);
  CHECK(fd.ik_basis.empty());
  CHECK(fd.core_basis.size() == 2);

  // A(x, y) = (y, y): ik = span e1, core = span (1,1)
  auto A = mat(spec, 2, 2, {"0", "1", "0", "1"});
  auto fa = fitting(A);
  REQUIRE(fa.ik_basis.size() == 1);
  REQUIRE(fa.core_basis.size() == 1);
  CHECK(!fa.ik_basis[0][1].is_significant());
  CHECK(!fa.ik_basis[0][0].is_exact_zero());
  // core direction is proportional to (1, 1)
  CHECK(fa.core_basis[0][0].eq_at_precision(fa.core_basis[0][1]));
}

TEST_CASE("ball identity") {
  auto spec2 = FieldSpec::laurent(2, 1, 12, "X");
  auto S = mat(spec2, 2, 2, {"X^-1", "0", "0", "X"});
  auto dec = spectral_decompose(S);
  auto nrm = adapted_norm(S, dec, NormValue::qpow(Rat(-1)));
  // the slope +1 component (rho = q^{-1}): image radius of the unit ball is q^{-1}
  size_t comp_plus = nrm.components[0].slope == Rat(1) ? 0 : 1;
  NormValue out = ball_image(S, nrm, comp_plus, NormValue::one());
  CHECK(out == NormValue::qpow(Rat(-1)));

  // beta = p on Q_p: r = 1 -> q^{-1}
  auto spec = FieldSpec::padic(5, 10);
  auto P = mat(spec, 1, 1, {"5"});
  auto dp = spectral_decompose(P);
  auto np = adapted_norm(P, dp, NormValue::qpow(Rat(-1)));
  CHECK(ball_image(P, np, 0, NormValue::one()) == NormValue::qpow(Rat(-1)));

  // rho = 1 components are isometries
  auto I = MatrixK::identity(spec, 2);
  auto di = spectral_decompose(I);
  auto ni = adapted_norm(I, di, NormValue::qpow(Rat(-1)));
  CHECK(ball_image(I, ni, 0, NormValue::qpow(Rat(2))) == NormValue::qpow(Rat(2)));
}

TEST_CASE("hermite and smith forms") {
  auto spec = FieldSpec::padic(5, 12);
  // lattice spanned by (5, 0), (1, 1): HNF pivots
  auto G = mat(spec, 2, 2, {"5", "1", "0", "1"});
  auto H = lattice_hnf(G);
  REQUIRE(H.pivots.size() == 2);
  // span{(5,0),(1,1)} = span{(1,1),(0,5)}: pivot exponents 0 and 1
  CHECK(H.pivots[0].second == 0);
  CHECK(H.pivots[1].second == 1);

  auto G2 = mat(spec, 2, 2, {"5", "0", "0", "25"});
  auto H2 = lattice_hnf(G2);
  CHECK(H2.pivots[0].second == 1);
  CHECK(H2.pivots[1].second == 2);
  CHECK(lattice_contains(H2, {FieldElement::parse("5", spec), FieldElement::parse("25", spec)}));
  CHECK(!lattice_contains(H2, {FieldElement::one(spec), FieldElement::zero(spec)}));

  auto sm = smith_decompose(mat(spec, 2, 2, {"5", "5", "5", "30"}));
  REQUIRE(sm.rank == 2);
  CHECK(sm.exponents == std::vector<int64_t>{1, 2});
  // reconstruct: U diag V == X
  MatrixK D(spec, 2, 2);
  D.at(0, 0) = FieldElement::uniformizer_pow(spec, sm.exponents[0]);
  D.at(1, 1) = FieldElement::uniformizer_pow(spec, sm.exponents[1]);
  CHECK(sm.U.mul(D.mul(sm.V)).eq_at_precision(mat(spec, 2, 2, {"5", "5", "5", "30"})));
}

TEST_CASE("planted decomposition property") {
  for (auto spec : {FieldSpec::padic(2, 20), FieldSpec::padic(5, 20),
                    FieldSpec::laurent(2, 1, 20), FieldSpec::laurent(3, 1, 20)}) {
    Rng rng(101);
    for (int t = 0; t < 10; ++t) {
      size_t n = 2 + rng.below(3);
      PlantedMatrix pm = random_planted(spec, n, rng);
      auto dec = spectral_decompose(pm.matrix);
      long long total = 0;
      long long zero_seen = 0;
      for (const auto& comp : dec.components) {
        total += comp.multiplicity;
        if (comp.zero_root) {
          zero_seen = comp.multiplicity;
          continue;
        }
        auto it = pm.slopes.find(comp.slope);
        REQUIRE(it != pm.slopes.end());
        CHECK(it->second == comp.multiplicity);
      }
      CHECK(total == static_cast<long long>(n));
      CHECK(zero_seen == pm.zero_multiplicity);
      // E_0 equals ker(A^n) computed independently
      if (pm.zero_multiplicity > 0) {
        auto rr = rref_val(pm.matrix.pow(n));
        CHECK(static_cast<long long>(rr.kernel.size()) == pm.zero_multiplicity);
      }
      // char_poly(A) = product of the char polys of the component blocks
      Polynomial prod = Polynomial::one(spec);
      for (size_t c = 0; c < dec.components.size(); ++c)
        prod = prod.mul(char_poly(dec.component_matrix(pm.matrix, c)));
      auto cp = char_poly(pm.matrix);
      Polynomial diff = prod.sub(cp);
      for (long long i = 0; i <= diff.degree(); ++i)
        CHECK(!diff.coeff(i).truncated(8).is_significant());
    }
  }
}

TEST_CASE("adapted norm conditions on planted matrices") {
  for (auto spec : {FieldSpec::padic(3, 20), FieldSpec::laurent(2, 1, 20)}) {
    Rng rng(55);
    NormValue eps = NormValue::qpow(Rat(-1));
    for (int t = 0; t < 6; ++t) {
      size_t n = 2 + rng.below(3);
      PlantedMatrix pm = random_planted(spec, n, rng);
      auto dec = spectral_decompose(pm.matrix);
      auto nrm = adapted_norm(pm.matrix, dec, eps);
      // (b)
      CHECK(op_norm_on_ik(pm.matrix, nrm) < eps);
      // (a): max-splitting identity on random vectors
      for (int v = 0; v < 20; ++v) {
        VectorK x = random_vector(spec, n, rng);
        NormValue total = nrm.norm(x);
        NormValue frommax = NormValue::zero();
        for (size_t c = 0; c < nrm.components.size(); ++c)
          frommax = NormValue::max(frommax, nrm.component_norm(c, x, &total));
        CHECK(total == frommax);
      }
      // (c): exact scaling on random vectors of each rho > 0 component
      for (size_t c = 0; c < nrm.components.size(); ++c) {
        const auto& comp = nrm.components[c];
        if (comp.zero_root) continue;
        for (int v = 0; v < 20; ++v) {
          VectorK part = zero_vector(spec, n);
          bool nonzero = false;
          for (size_t j = 0; j < comp.basis.cols(); ++j) {
            if (rng.below(4) == 0) continue;
            FieldElement cc = random_exact(spec, rng, -2, 2);
            nonzero = true;
            for (size_t i = 0; i < n; ++i) part[i] = part[i].add(cc.mul(comp.basis.at(i, j)));
          }
          if (!nonzero) continue;
          NormValue before = nrm.norm(part);
          NormValue after = nrm.norm(pm.matrix.mul(part));
          CHECK(after == before * comp.char_value);
        }
      }
    }
  }
}
