#include "uldyn/selftest.hpp"

#include <future>

#include "uldyn/profinite_examples.hpp"

namespace uldyn {

namespace {

// a small check accumulator: first failure wins, checks are counted
struct Tally {
  long long checks = 0;
  bool pass = true;
  std::string detail;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

std::vector<SpecPtr> field_roster(int64_t precision) {
  return {FieldSpec::padic(2, precision), FieldSpec::padic(3, precision),
          FieldSpec::padic(5, precision), FieldSpec::laurent(2, 1, precision),
          FieldSpec::laurent(3, 1, precision)};
}

// ---------------------------------------------------------------------------
// field_arith invariants
// ---------------------------------------------------------------------------

Tally field_properties(const SelftestOptions& o, uint64_t seed) {
  Tally t;
  for (const auto& spec : field_roster(o.precision)) {
    Rng rng(seed ^ spec->q());
    for (int i = 0; i < 1000; ++i) {
      FieldElement x = random_exact(spec, rng, -3, 3);
      FieldElement y = random_exact(spec, rng, -3, 3);
      FieldElement s = x.add(y);
      NormValue lhs = s.is_exact_zero() ? NormValue::zero() : s.abs();
      t.expect(lhs <= NormValue::max(x.abs(), y.abs()), "ultrametric inequality");
      if (x.abs() != y.abs())
        t.expect(lhs == NormValue::max(x.abs(), y.abs()), "ultrametric equality case");
      t.expect(x.mul(y).abs() == x.abs() * y.abs(), "multiplicativity");
      // round trip
      FieldElement back = FieldElement::parse(x.render(), spec);
      t.expect(back.eq_at_precision(x), "parse/render round trip");
      // ring laws on a derived triple
      FieldElement z = random_element(spec, rng, -3, 3);
      t.expect(x.mul(y.add(z)).eq_at_precision(x.mul(y).add(x.mul(z))), "distributivity");
      t.expect(x.add(y).add(z).eq_at_precision(x.add(y.add(z))), "associativity");
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// poly_newton invariants
// ---------------------------------------------------------------------------

Tally poly_properties(const SelftestOptions& o, uint64_t seed) {
  Tally t;
  for (const auto& spec : field_roster(o.precision)) {
    Rng rng(seed ^ (spec->q() << 8));
    for (int trial = 0; trial < 50; ++trial) {
      int deg = 2 + static_cast<int>(rng.below(5));
      std::map<long long, long long> planted;
      Polynomial f = Polynomial::one(spec);
      Polynomial T(spec, {FieldElement::zero(spec), FieldElement::one(spec)});
      for (int i = 0; i < deg; ++i) {
        FieldElement c;
        if (rng.below(8) == 0) {
          c = FieldElement::zero(spec);
          planted[FieldElement::kInfValuation]++;
        } else {
          c = random_exact(spec, rng, -2, 2, 2);
          planted[c.valuation()]++;
        }
        f = f.mul(T.sub(Polynomial::monomial(spec, c, 0)));
      }
      NewtonPolygon np = newton_polygon(f);
      long long planted_zero =
          planted.count(FieldElement::kInfValuation) ? planted[FieldElement::kInfValuation] : 0;
      t.expect(np.zero_root_multiplicity == planted_zero, "zero-root multiplicity");
      long long total = np.zero_root_multiplicity;
      for (const auto& seg : np.segments) {
        bool integral = seg.slope.denominator() == 1;
        t.expect(integral, "integral planted slopes");
        if (integral)
          t.expect(planted.count(seg.slope.numerator()) &&
                       planted[seg.slope.numerator()] == seg.length,
                   "slope multiset matches planted valuations");
        total += seg.length;
      }
      t.expect(total == deg, "segment lengths sum to the degree");
      auto factors = slope_factor(f);
      Polynomial prod = Polynomial::one(spec);
      for (const auto& sf : factors) {
        prod = prod.mul(sf.factor);
        if (!sf.zero_root)
          t.expect(newton_polygon(sf.factor).segments.size() == 1, "factor purity");
      }
      int64_t umin = 0;
      for (auto [i, v] : np.vertices) umin = std::min(umin, v);
      Polynomial diff = prod.sub(f);
      bool ok = true;
      for (long long i = 0; i <= diff.degree(); ++i)
        if (diff.coeff(i).truncated(umin + o.precision).is_significant()) ok = false;
      t.expect(ok, "factor product matches the input at precision");
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// ultralinalg invariants
// ---------------------------------------------------------------------------

Tally linalg_properties(const SelftestOptions& o, uint64_t seed) {
  Tally t;
  NormValue eps = NormValue::qpow(Rat(-1));
  for (const auto& spec : field_roster(o.precision)) {
    for (size_t n : o.sizes) {
      Rng rng(seed ^ (spec->q() * 131 + n));
      for (int m = 0; m < o.matrices_per_size; ++m) {
        PlantedMatrix pm = random_planted(spec, n, rng);
        SpectralDecomposition dec = spectral_decompose(pm.matrix);
        long long total = 0;
        long long zero_seen = 0;
        for (const auto& comp : dec.components) {
          total += comp.multiplicity;
          if (comp.zero_root) {
            zero_seen = comp.multiplicity;
            continue;
          }
          auto it = pm.slopes.find(comp.slope);
          t.expect(it != pm.slopes.end() && it->second == comp.multiplicity,
                   "characteristic values match the planted absolute values");
        }
        t.expect(total == static_cast<long long>(n), "multiplicities sum to n");
        t.expect(zero_seen == pm.zero_multiplicity, "zero-root dimension matches");
        // E_0 = ker(A^n) cross-check through plain elimination
        auto rr = rref_val(pm.matrix.pow(n));
        t.expect(static_cast<long long>(rr.kernel.size()) == pm.zero_multiplicity,
                 "E_0 equals ker(A^n)");
        // char poly factors through the components
        Polynomial prod = Polynomial::one(spec);
        for (size_t c = 0; c < dec.components.size(); ++c)
          prod = prod.mul(char_poly(dec.component_matrix(pm.matrix, c)));
        Polynomial diff = prod.sub(char_poly(pm.matrix));
        bool okcp = true;
        for (long long i = 0; i <= diff.degree(); ++i)
          if (diff.coeff(i).truncated(o.precision / 2).is_significant()) okcp = false;
        t.expect(okcp, "char poly equals the product over components");
        // adapted norm conditions
        AdaptedNorm nrm = adapted_norm(pm.matrix, dec, eps);
        t.expect(op_norm_on_ik(pm.matrix, nrm) < eps, "condition (b)");
        for (int v = 0; v < o.vectors_per_matrix; ++v) {
          VectorK x = random_vector(spec, n, rng);
          NormValue nx = nrm.norm(x);
          NormValue frommax = NormValue::zero();
          for (size_t c = 0; c < nrm.components.size(); ++c)
            frommax = NormValue::max(frommax, nrm.component_norm(c, x, &nx));
          t.expect(nx == frommax, "condition (a) max splitting");
        }
        for (size_t c = 0; c < nrm.components.size(); ++c) {
          const auto& comp = nrm.components[c];
          if (comp.zero_root) continue;
          for (int v = 0; v < o.vectors_per_matrix; ++v) {
            VectorK part = zero_vector(spec, n);
            bool nonzero = false;
            for (size_t j = 0; j < comp.basis.cols(); ++j) {
              if (rng.below(4) == 0) continue;
              FieldElement cc = random_exact(spec, rng, -2, 2);
              nonzero = true;
              for (size_t i = 0; i < n; ++i)
                part[i] = part[i].add(cc.mul(comp.basis.at(i, j)));
            }
            if (!nonzero) continue;
            t.expect(nrm.norm(pm.matrix.mul(part)) == nrm.norm(part) * comp.char_value,
                     "condition (c) exact scaling");
          }
        }
        // ball identity on each rho > 0 component
        for (size_t c = 0; c < nrm.components.size(); ++c) {
          if (nrm.components[c].zero_root || nrm.components[c].char_value.is_zero()) continue;
          for (long long e = -2; e <= 2; ++e) {
            NormValue r = NormValue::qpow(Rat(e));
            NormValue img = ball_image(pm.matrix, nrm, c, r);
            t.expect(img == r * nrm.components[c].char_value, "ball identity radius");
          }
        }
      }
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// dynamics invariants
// ---------------------------------------------------------------------------

Tally dynamics_properties(const SelftestOptions& o, uint64_t seed) {
  Tally t;
  NormValue eps = NormValue::qpow(Rat(-1));
  for (const auto& spec : field_roster(o.orbit_precision)) {
    for (size_t n : o.sizes) {
      Rng rng(seed ^ (spec->q() * 257 + n));
      for (int m = 0; m < o.matrices_per_size; ++m) {
        PlantedMatrix pm = random_planted(spec, n, rng);
        SpectralDecomposition dec = spectral_decompose(pm.matrix);
        AdaptedNorm nrm = adapted_norm(pm.matrix, dec, eps);
        SubgroupClassification cls = classify(pm.matrix, dec);

        // big cell bijectivity and quantified openness
        for (int v = 0; v < o.vectors_per_matrix; ++v) {
          VectorK x = random_vector(spec, n, rng);
          BigCellParts parts = big_cell_decompose(pm.matrix, dec, x);
          t.expect(vec_eq_at_precision(vec_add(vec_add(parts.s, parts.c), parts.u), x),
                   "big cell round trip");
          NormValue nx = nrm.norm(x);
          NormValue mx = NormValue::max(
              nrm.norm(parts.s, &nx),
              NormValue::max(nrm.norm(parts.c, &nx), nrm.norm(parts.u, &nx)));
          t.expect(nx == mx, "openness: norm equals the max of the parts");
        }

        // Levi isometry over 20 steps
        if (!cls.lev.empty()) {
          VectorK x = cls.lev[rng.below(cls.lev.size())];
          NormValue base = nrm.norm(x);
          VectorK cur = x;
          for (int k = 1; k <= 20; ++k) {
            cur = pm.matrix.mul(cur);
            t.expect(nrm.norm(cur) == base, "Levi isometry");
          }
        }
        // contraction rate on con
        if (!cls.con.empty()) {
          NormValue rate = eps;
          for (const auto& comp : dec.components)
            if (!comp.zero_root && comp.slope > Rat(0))
              rate = NormValue::max(rate, comp.char_value);
          VectorK x = cls.con[rng.below(cls.con.size())];
          NormValue base = nrm.norm(x);
          NormValue pw = NormValue::one();
          VectorK cur = x;
          for (int k = 1; k <= 20; ++k) {
            cur = pm.matrix.mul(cur);
            pw = pw * rate;
            t.expect(nrm.norm(cur) <= base * pw, "contraction rate");
          }
        }
        // anti-contraction along canonical regressive trajectories
        if (!cls.con_minus.empty()) {
          NormValue rate = NormValue::zero();
          for (const auto& comp : dec.components)
            if (!comp.zero_root && comp.slope < Rat(0))
              rate = NormValue::max(rate, NormValue::qpow(comp.slope));
          VectorK x = cls.con_minus[rng.below(cls.con_minus.size())];
          auto traj = regressive_trajectory(pm.matrix, dec, x, 20);
          t.expect(traj.has_trajectory, "canonical regressive trajectory exists");
          if (traj.has_trajectory) {
            NormValue base = nrm.norm(x);
            NormValue pw = NormValue::one();
            for (size_t k = 1; k < traj.trajectory.size(); ++k) {
              pw = pw * rate;
              t.expect(nrm.norm(traj.trajectory[k]) <= base * pw, "anti-contraction rate");
            }
          }
        }
        // linear analogs of the discreteness statements: ker(A) inside E_0,
        // trivial against lev and con-
        auto kr = rref_val(pm.matrix);
        for (const auto& v : kr.kernel) {
          auto parts = dec.split(v);
          for (size_t c = 0; c < dec.components.size(); ++c) {
            if (dec.components[c].zero_root) continue;
            for (const auto& e : parts[c])
              t.expect(!e.is_significant(), "ker(A) contained in E_0");
          }
        }
        auto [inv_ok, ik_trivial] = etale_iff_trivial_ik(pm.matrix);
        t.expect(inv_ok == ik_trivial, "invertible iff trivial iterated kernel");
        t.expect((pm.zero_multiplicity == 0) == ik_trivial, "ik dimension matches planted");
      }
    }
  }
  return t;
}

// scale agreement and tidy minimality run at the working precision on small
// sizes; the coset enumeration caps the brute-force side
Tally scale_properties(const SelftestOptions& o, uint64_t seed) {
  Tally t;
  NormValue eps = NormValue::qpow(Rat(-1));
  for (const auto& spec : field_roster(o.precision)) {
    Rng rng(seed ^ (spec->q() * 523));
    for (int m = 0; m < o.matrices_per_size; ++m) {
      size_t n = 2 + rng.below(3);  // n <= 4
      PlantedMatrix pm = random_planted(spec, n, rng, true, true, -1, 1);
      SpectralDecomposition dec = spectral_decompose(pm.matrix);
      ScaleValue sv = scale(pm.matrix, dec);  // asserts closed form == tidy index
      Rat expect(0);
      for (auto& [slope, mult] : pm.slopes)
        if (slope < Rat(0)) expect += -slope * mult;
      t.expect(Rat(sv.exponent) == expect, "scale matches the planted slopes");
      AdaptedNorm nrm = adapted_norm(pm.matrix, dec, eps);
      TidyLattice tidy = tidy_lattice(pm.matrix, dec, nrm);
      if (sv.exponent <= 6 && n <= 4) {
        long long counted = coset_count_exponent(pm.matrix, tidy.U, 7);
        t.expect(counted == sv.exponent, "brute-force coset count agrees");
      }
      TidinessReport rep = tidiness_gap(pm.matrix, dec, nrm, o.lattice_trials, seed + m);
      t.expect(rep.min_observed_exponent >= rep.scale_exponent, "tidy minimality");
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// profinite invariants
// ---------------------------------------------------------------------------

Tally profinite_properties(const SelftestOptions& o, uint64_t seed) {
  (void)o;
  Tally t;
  auto spec = FieldSpec::laurent(2, 1, 32, "X");
  Rng rng(seed ^ 0xabcdef);
  // phi round trip and conjugation
  for (int trial = 0; trial < 500; ++trial) {
    int64_t m = 2 + static_cast<int64_t>(rng.below(6));
    Window w;
    w.spec = spec;
    w.lo = -m;
    w.hi = m;
    w.coeffs.resize(static_cast<size_t>(2 * m));
    for (auto& c : w.coeffs) c = static_cast<uint32_t>(rng.below(2));
    auto back = phi_unsplit(phi_split(w));
    bool ok = back.lo == w.lo && back.hi == w.hi;
    for (int64_t k = w.lo; ok && k < w.hi; ++k) ok = back.at(k) == w.at(k);
    t.expect(ok, "phi round trip");
    // block map agreement where a_{-1} = 0
    w.coeffs[static_cast<size_t>(m - 1)] = 0;
    auto before = phi_split(w);
    auto after = phi_split(two_sided_shift(w));
    bool conj = true;
    for (int64_t k = 1; k < after.negative_tail.trunc && k + 1 < before.negative_tail.trunc; ++k)
      if (after.negative_tail.at(k) != before.negative_tail.at(k + 1)) conj = false;
    if (after.nonneg.trunc > 0 && after.nonneg.at(0) != 0) conj = false;
    for (int64_t k = 1; k < after.nonneg.trunc && k - 1 < before.nonneg.trunc; ++k)
      if (after.nonneg.at(k) != before.nonneg.at(k - 1)) conj = false;
    t.expect(conj, "shift conjugates to the block map");
  }
  // left shift compose multiplication-by-X
  for (int trial = 0; trial < 100; ++trial) {
    SeriesTrunc s;
    s.spec = spec;
    s.min_index = 0;
    s.trunc = 12;
    s.coeffs.resize(12);
    for (auto& c : s.coeffs) c = static_cast<uint32_t>(rng.below(2));
    auto recovered = left_shift_series(shift_series(s, 1, 0));
    bool ok = true;
    for (int64_t k = 0; k + 1 < s.trunc; ++k)
      if (recovered.at(k) != s.at(k)) ok = false;
    t.expect(ok, "left shift inverts multiplication by X up to truncation");
  }
  // frobenius valuation law
  for (int trial = 0; trial < 200; ++trial) {
    int64_t v = 1 + static_cast<int64_t>(rng.below(3));
    SeriesTrunc s;
    s.spec = spec;
    s.min_index = 1;
    s.trunc = 32;
    s.coeffs.assign(31, 0);
    s.coeffs[static_cast<size_t>(v - 1)] = 1;
    for (int64_t k = v + 1; k < 32; ++k)
      s.coeffs[static_cast<size_t>(k - 1)] = static_cast<uint32_t>(rng.below(2));
    SeriesTrunc cur = s;
    int64_t expect = v;
    for (int step = 1; step <= 3; ++step) {
      cur = frobenius_series(cur).series;
      expect *= 2;
      if (expect < 32) t.expect(cur.valuation_or_trunc() == expect, "frobenius valuation law");
    }
    t.expect(frobenius_series(s).series.at(1) == 0, "zero derivative at the origin");
  }
  // congruence subgroup: det and congruence preserved on 500 random matrices
  auto one = [&] {
    SeriesTrunc s;
    s.spec = spec;
    s.min_index = 0;
    s.trunc = 24;
    s.coeffs.assign(24, 0);
    s.coeffs[0] = 1;
    return s;
  }();
  for (int trial = 0; trial < 500; ++trial) {
    SeriesTrunc a = one, b = one, c = one;
    b.coeffs[0] = 0;
    c.coeffs[0] = 0;
    for (int64_t k = 1; k < 24; ++k) {
      a.coeffs[static_cast<size_t>(k)] = static_cast<uint32_t>(rng.below(2));
      b.coeffs[static_cast<size_t>(k)] = static_cast<uint32_t>(rng.below(2));
      c.coeffs[static_cast<size_t>(k)] = static_cast<uint32_t>(rng.below(2));
    }
    // d = (1 + b c) a^{-1} via truncated division
    SeriesTrunc num = series_add(one, series_mul(b, c));
    SeriesTrunc d = one;
    {
      const auto& rf = spec->residue;
      std::vector<uint32_t> rem(24, 0);
      for (int64_t k = 0; k < 24; ++k) rem[static_cast<size_t>(k)] = num.at(k);
      for (int64_t i = 0; i < 24; ++i) {
        uint32_t e = rem[static_cast<size_t>(i)];
        d.coeffs[static_cast<size_t>(i)] = e;
        if (e == 0) continue;
        for (int64_t j = 0; i + j < 24; ++j)
          rem[static_cast<size_t>(i + j)] =
              rf.sub(rem[static_cast<size_t>(i + j)], rf.mul(e, a.at(j)));
      }
    }
    bool ok = true;
    try {
      CongruenceMatrix M = make_congruence_matrix(spec, 24, {a, b, c, d});
      int64_t d0 = M.distance_to_identity();
      CongruenceMatrix cur = M;
      for (int step = 0; step < 3; ++step) cur = sl2_frobenius(cur);
      if (8 * d0 < 24) ok = cur.distance_to_identity() == 8 * d0;
    } catch (const Error&) {
      ok = false;
    }
    t.expect(ok, "sl2 frobenius preserves det and doubles the distance");
  }
  return t;
}

}  // namespace

std::vector<PropertyResult> run_selftest(const SelftestOptions& opts) {
  struct Task {
    const char* name;
    Tally (*fn)(const SelftestOptions&, uint64_t);
  };
  const std::vector<Task> tasks = {
      {"field_arith.invariants", field_properties},
      {"poly_newton.invariants", poly_properties},
      {"ultralinalg.invariants", linalg_properties},
      {"dynamics.invariants", dynamics_properties},
      {"dynamics.scale_and_tidiness", scale_properties},
      {"profinite.invariants", profinite_properties},
  };

  std::vector<PropertyResult> out(tasks.size());
  auto run_one = [&](size_t i) {
    // per-task deterministic seed stream
    uint64_t seed = opts.seed * 0x100000001b3ull + 1469598103934665603ull * (i + 1);
    PropertyResult r;
    r.name = tasks[i].name;
    try {
      Tally t = tasks[i].fn(opts, seed);
      r.pass = t.pass;
      r.checks = t.checks;
      r.detail = t.detail;
    } catch (const Error& e) {
      r.pass = false;
      r.detail = e.what();
    }
    return r;
  };

  if (opts.jobs <= 1) {
    for (size_t i = 0; i < tasks.size(); ++i) out[i] = run_one(i);
  } else {
    std::vector<std::future<PropertyResult>> futs;
    for (size_t i = 0; i < tasks.size(); ++i)
      futs.push_back(std::async(std::launch::async, run_one, i));
    for (size_t i = 0; i < tasks.size(); ++i) out[i] = futs[i].get();
  }
  return out;
}

Json selftest_report(const SelftestOptions& opts) {
  Json j;
  j["tool"] = "uldyn selftest";
  j["seed"] = opts.seed;
  j["sizes"] = opts.sizes;
  j["matrices_per_size"] = opts.matrices_per_size;
  j["vectors_per_matrix"] = opts.vectors_per_matrix;
  j["lattice_trials"] = opts.lattice_trials;
  j["precision"] = opts.precision;
  j["orbit_precision"] = opts.orbit_precision;
  auto results = run_selftest(opts);
  bool all = true;
  Json arr = Json::array();
  for (const auto& r : results) {
    Json e;
    e["name"] = r.name;
    e["pass"] = r.pass;
    e["checks"] = r.checks;
    if (!r.detail.empty()) e["detail"] = r.detail;
    arr.push_back(e);
    all = all && r.pass;
  }
  j["properties"] = arr;
  j["all_pass"] = all;
  return j;
}

}  // namespace uldyn
