#include "uldyn/dynamics.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace uldyn {

namespace {

enum class Side { below_one, at_one, above_one };

Side side_of(const SpectralComponent& c) {
  if (c.zero_root) return Side::below_one;
  if (c.slope > Rat(0)) return Side::below_one;   // rho = q^{-s} < 1
  if (c.slope == Rat(0)) return Side::at_one;
  return Side::above_one;
}

Side side_of(const AdaptedComponent& c) {
  if (c.zero_root) return Side::below_one;
  if (c.slope > Rat(0)) return Side::below_one;
  if (c.slope == Rat(0)) return Side::at_one;
  return Side::above_one;
}

}  // namespace

SubgroupClassification classify(const MatrixK& A, const SpectralDecomposition& dec) {
  (void)A;
  SubgroupClassification out;
  for (const auto& comp : dec.components) {
    Side s = side_of(comp);
    for (const auto& v : comp.basis) {
      if (s == Side::below_one) {
        out.con.push_back(v);
        out.parb.push_back(v);
      } else if (s == Side::at_one) {
        out.lev.push_back(v);
        out.parb.push_back(v);
        out.parb_minus.push_back(v);
      } else {
        out.con_minus.push_back(v);
        out.parb_minus.push_back(v);
      }
    }
  }
  return out;
}

BigCellParts big_cell_decompose(const MatrixK& A, const SpectralDecomposition& dec,
                                const VectorK& x) {
  (void)A;
  std::vector<VectorK> parts = dec.split(x);
  BigCellParts out{zero_vector(dec.spec, dec.dim), zero_vector(dec.spec, dec.dim),
                   zero_vector(dec.spec, dec.dim)};
  for (size_t c = 0; c < dec.components.size(); ++c) {
    Side s = side_of(dec.components[c]);
    VectorK* slot = s == Side::below_one ? &out.s : (s == Side::at_one ? &out.c : &out.u);
    *slot = vec_add(*slot, parts[c]);
  }
  return out;
}

std::vector<VectorK> forward_orbit(const MatrixK& A, const VectorK& x, long long k) {
  std::vector<VectorK> orbit{x};
  VectorK cur = x;
  for (long long i = 0; i < k; ++i) {
    cur = A.mul(cur);
    orbit.push_back(cur);
  }
  return orbit;
}

namespace {

// ledger-derived certificate horizon: enough steps for the per-component
// weight spread to be exhausted by the slowest contraction gap
long long ledger_horizon(const AdaptedNorm& nrm) {
  Rat spread(0);
  Rat gap(1);
  bool any_gap = false;
  for (const auto& comp : nrm.components) {
    Rat lo = comp.weights.empty() ? Rat(0) : comp.weights[0];
    Rat hi = lo;
    for (const auto& w : comp.weights) {
      lo = std::min(lo, w);
      hi = std::max(hi, w);
    }
    spread = std::max(spread, hi - lo);
    if (!comp.zero_root && comp.slope != Rat(0)) {
      Rat g = comp.slope < Rat(0) ? -comp.slope : comp.slope;
      gap = any_gap ? std::min(gap, g) : g;
      any_gap = true;
    }
  }
  if (!any_gap) return 1 + rat_ceil(spread);
  return 1 + rat_ceil(spread / gap);
}

}  // namespace

OrbitCertificate orbit_certificate(const MatrixK& A, const SpectralDecomposition& dec,
                                   const AdaptedNorm& nrm, const VectorK& x) {
  std::vector<VectorK> parts = dec.split(x);
  bool has_below = false, has_at = false, has_above = false, has_zero_root = false;
  NormValue max_rho_below = NormValue::zero();
  for (size_t c = 0; c < dec.components.size(); ++c) {
    bool nonzero = false;
    for (const auto& e : parts[c])
      if (e.is_significant()) nonzero = true;
    if (!nonzero) continue;
    Side s = side_of(dec.components[c]);
    if (s == Side::below_one) {
      has_below = true;
      if (dec.components[c].zero_root)
        has_zero_root = true;
      else
        max_rho_below = NormValue::max(max_rho_below, dec.components[c].char_value);
    } else if (s == Side::at_one) {
      has_at = true;
    } else {
      has_above = true;
    }
  }

  OrbitCertificate out;
  out.checked_steps = ledger_horizon(nrm);
  if (has_above) {
    out.kind = OrbitKind::escaping;
  } else if (has_at) {
    out.kind = OrbitKind::bounded;
  } else {
    out.kind = OrbitKind::contracting;
    out.rate = has_zero_root ? NormValue::max(nrm.epsilon, max_rho_below) : max_rho_below;
    if (!has_below) out.rate = NormValue::zero();  // x = 0 at precision
  }

  // explicit certificate run
  NormValue base = nrm.norm(x);
  VectorK cur = x;
  NormValue pw = NormValue::one();
  for (long long k = 1; k <= out.checked_steps; ++k) {
    cur = A.mul(cur);
    NormValue now = nrm.norm(cur);
    if (out.kind == OrbitKind::contracting) {
      pw = pw * out.rate;
      if (base.is_zero()) {
        if (!now.is_zero()) throw CertificationFailed("orbit certificate: zero vector moved");
      } else if (!(now <= base * pw)) {
        throw CertificationFailed("orbit certificate: contraction rate violated");
      }
    } else if (out.kind == OrbitKind::bounded) {
      if (!(now <= base)) throw CertificationFailed("orbit certificate: bound violated");
    }
  }
  if (out.kind == OrbitKind::escaping && !base.is_zero()) {
    // norms must eventually exceed the start; check at the horizon
    if (!(nrm.norm(cur) > base))
      throw CertificationFailed("orbit certificate: escape not visible at the horizon");
  }
  return out;
}

RegressiveResult regressive_trajectory(const MatrixK& A, const SpectralDecomposition& dec,
                                       const VectorK& x, long long k) {
  const SpecPtr& spec = dec.spec;
  size_t n = dec.dim;
  RegressiveResult out;
  out.trajectory.push_back(x);

  // per-component restricted matrices and inverses where they exist
  std::vector<MatrixK> blocks, block_invs;
  std::vector<bool> invertible;
  for (size_t c = 0; c < dec.components.size(); ++c) {
    MatrixK M = dec.component_matrix(A, c);
    blocks.push_back(M);
    if (dec.components[c].zero_root) {
      invertible.push_back(false);
      block_invs.push_back(M);
    } else {
      invertible.push_back(true);
      block_invs.push_back(inverse(M));
    }
  }

  VectorK cur = x;
  for (long long step = 0; step < k; ++step) {
    VectorK y = dec.coordinates(cur);
    VectorK prev_coords = zero_vector(spec, n);
    size_t off = 0;
    for (size_t c = 0; c < dec.components.size(); ++c) {
      size_t m = static_cast<size_t>(dec.components[c].multiplicity);
      VectorK part(y.begin() + static_cast<long>(off), y.begin() + static_cast<long>(off + m));
      VectorK sol;
      if (invertible[c]) {
        sol = block_invs[c].mul(part);
      } else {
        auto s = solve(blocks[c], part);
        if (!s) {
          out.has_trajectory = false;
          out.obstructing_component = c;
          return out;
        }
        sol = *s;
      }
      for (size_t j = 0; j < m; ++j) prev_coords[off + j] = sol[j];
      off += m;
    }
    cur = dec.basis_matrix.mul(prev_coords);
    out.trajectory.push_back(cur);
  }
  out.has_trajectory = true;
  return out;
}

// ---------------------------------------------------------------------------
// tidy lattices, displacement index, scale
// ---------------------------------------------------------------------------

namespace {

HermiteForm sum_of_chain_lattices(const AdaptedNorm& nrm, const std::vector<size_t>& comps) {
  const SpecPtr& spec = nrm.spec;
  MatrixK acc(spec, nrm.dim, 0);
  for (size_t c : comps) acc = acc.hstack(nrm.chain_lattice(c, 0));
  if (acc.cols() == 0) return HermiteForm{MatrixK(spec, nrm.dim, 0), {}};
  return lattice_hnf(acc);
}

}  // namespace

ScaleValue displacement_index(const MatrixK& A, const HermiteForm& L) {
  const SpecPtr& spec = A.spec();
  ScaleValue out{spec->q(), 0};
  MatrixK AL = A.mul(L.basis);
  HermiteForm H = lattice_hnf(AL);
  size_t r = H.basis.cols();
  if (r == 0) return out;  // A(L) = 0, index 1
  // T = {t : C t in L}; with D = L^{-1} C = U diag(pi^e) V this is
  // V^{-1} diag(pi^{-e}) O^r, and [O^r : O^r n T] = q^{sum max(f,0)} for the
  // Smith exponents f of T's basis
  MatrixK D = inverse(L.basis).mul(H.basis);
  SmithResult sm = smith_decompose(D);
  if (sm.rank != static_cast<long long>(r))
    throw PrecisionExhausted("displacement index: image rank undetermined");
  MatrixK Vr(spec, r, r);
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < r; ++j) Vr.at(i, j) = sm.V.at(i, j);
  MatrixK Tb = inverse(Vr);
  for (size_t j = 0; j < r; ++j)
    for (size_t i = 0; i < r; ++i) Tb.at(i, j) = Tb.at(i, j).shifted(-sm.exponents[j]);
  SmithResult tf = smith_decompose(Tb);
  for (long long i = 0; i < tf.rank; ++i)
    out.exponent += std::max<int64_t>(tf.exponents[static_cast<size_t>(i)], 0);
  return out;
}

long long coset_count_exponent(const MatrixK& A, const HermiteForm& L, long long max_exponent) {
  const SpecPtr& spec = A.spec();
  MatrixK AL = A.mul(L.basis);
  HermiteForm H = lattice_hnf(AL);
  size_t r = H.basis.cols();
  if (r == 0) return 0;
  // sublattice S = (A(L) n L) in the coordinates of A(L)'s basis C
  MatrixK D = inverse(L.basis).mul(H.basis);
  SmithResult sm = smith_decompose(D);
  if (sm.rank != static_cast<long long>(r))
    throw PrecisionExhausted("coset count: image rank undetermined");
  MatrixK Vr(spec, r, r);
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < r; ++j) Vr.at(i, j) = sm.V.at(i, j);
  MatrixK Tb = inverse(Vr);
  for (size_t j = 0; j < r; ++j)
    for (size_t i = 0; i < r; ++i) Tb.at(i, j) = Tb.at(i, j).shifted(-sm.exponents[j]);
  // S = O^r n T
  SmithResult tf = smith_decompose(Tb);
  MatrixK Ur(spec, r, r);
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < r; ++j) Ur.at(i, j) = tf.U.at(i, j);
  MatrixK Sb = Ur;
  for (size_t j = 0; j < r; ++j) {
    int64_t e = std::max<int64_t>(tf.exponents[j], 0);
    for (size_t i = 0; i < r; ++i) Sb.at(i, j) = Sb.at(i, j).shifted(e);
  }
  HermiteForm S = lattice_hnf(Sb);
  if (S.pivots.size() != r) throw PrecisionExhausted("coset count: sublattice rank lost");

  // canonical representative of v + S: reduce top-down along the staircase,
  // keeping only the exact digit window below each pivot exponent (coset
  // separation sits at scale pi^e, far above any precision fuzz)
  auto canonical = [&](VectorK v) {
    VectorK canon = zero_vector(spec, r);
    for (size_t j = 0; j < r; ++j) {
      auto [row, e] = S.pivots[j];
      const FieldElement& cur = v[row];
      FieldElement low = FieldElement::zero(spec);
      if (cur.is_significant() && cur.valuation() < e) {
        FieldElement clipped = cur.truncated(e);
        if (clipped.is_significant())
          low = FieldElement::from_digits(spec, clipped.valuation(), clipped.digits(),
                                          FieldElement::kExact);
      }
      FieldElement y = cur.sub(low).shifted(-e);
      if (y.is_significant())
        for (size_t i = 0; i < r; ++i) v[i] = v[i].sub(y.mul(S.basis.at(i, j)));
      canon[row] = low;
    }
    std::string key;
    for (size_t i = 0; i < r; ++i) key += canon[i].render() + ";";
    return std::pair<std::string, VectorK>(key, canon);
  };

  std::map<std::string, VectorK> seen;
  auto [k0, v0] = canonical(zero_vector(spec, r));
  seen.emplace(k0, v0);
  std::vector<VectorK> frontier{v0};
  uint64_t limit = 1;
  for (long long i = 0; i < max_exponent; ++i) limit *= spec->q();
  while (!frontier.empty()) {
    std::vector<VectorK> next;
    for (const auto& v : frontier) {
      for (size_t g = 0; g < r; ++g) {
        VectorK w = v;
        w[g] = w[g].add(FieldElement::one(spec));
        auto [key, canon] = canonical(std::move(w));
        if (seen.count(key)) continue;
        if (seen.size() >= limit)
          throw RangeError("coset enumeration exceeded the configured bound");
        seen.emplace(key, canon);
        next.push_back(canon);
      }
    }
    frontier = std::move(next);
  }
  // the count must be a power of q
  uint64_t count = seen.size();
  long long e = 0;
  while (count > 1) {
    if (count % spec->q() != 0)
      throw CertificationFailed("coset count is not a power of the residue size");
    count /= spec->q();
    ++e;
  }
  return e;
}

TidyLattice tidy_lattice(const MatrixK& A, const SpectralDecomposition& dec,
                         const AdaptedNorm& nrm) {
  TidyLattice out;
  std::vector<size_t> all, plus, minus;
  for (size_t c = 0; c < nrm.components.size(); ++c) {
    Side s = side_of(nrm.components[c]);
    all.push_back(c);
    if (s != Side::above_one) minus.push_back(c);
    if (s != Side::below_one) plus.push_back(c);
  }
  out.U = sum_of_chain_lattices(nrm, all);
  out.U_minus = sum_of_chain_lattices(nrm, minus);
  out.U_plus = sum_of_chain_lattices(nrm, plus);

  // U = U+ + U-
  if (!out.U_plus.pivots.empty() || !out.U_minus.pivots.empty()) {
    HermiteForm s = out.U_minus.pivots.empty()
                        ? out.U_plus
                        : (out.U_plus.pivots.empty() ? out.U_minus
                                                     : lattice_sum(out.U_plus, out.U_minus));
    if (!lattice_equal(s, out.U))
      throw CertificationFailed("tidy lattice: U != U+ + U-");
  }

  // forward containment of U- and regressive containment of U+ over the horizon
  out.verified_steps = ledger_horizon(nrm);
  if (!out.U_minus.pivots.empty()) {
    MatrixK cur = out.U_minus.basis;
    for (long long k = 0; k < out.verified_steps; ++k) {
      cur = A.mul(cur);
      for (size_t j = 0; j < cur.cols(); ++j)
        if (!lattice_contains(out.U, cur.column(j)))
          throw CertificationFailed("tidy lattice: forward orbit of U- leaves U");
    }
  }
  if (!out.U_plus.pivots.empty()) {
    // canonical regressive trajectories per component with rho >= 1
    for (size_t c : plus) {
      MatrixK M = dec.component_matrix(A, c);
      MatrixK Minv = inverse(M);
      MatrixK cur = nrm.chain_lattice(c, 0);
      // map ambient columns to component coordinates of the decomposition
      for (long long k = 0; k < out.verified_steps; ++k) {
        // apply the component inverse in decomposition coordinates
        MatrixK coords = dec.basis_inverse.mul(cur);
        size_t off = dec.component_offset(c);
        size_t m = static_cast<size_t>(dec.components[c].multiplicity);
        MatrixK part(nrm.spec, m, cur.cols());
        for (size_t i = 0; i < m; ++i)
          for (size_t j = 0; j < cur.cols(); ++j) part.at(i, j) = coords.at(off + i, j);
        MatrixK back = Minv.mul(part);
        MatrixK lifted(nrm.spec, nrm.dim, cur.cols());
        MatrixK comp_basis = dec.basis_matrix.columns_slice(off, m);
        lifted = comp_basis.mul(back);
        cur = lifted;
        for (size_t j = 0; j < cur.cols(); ++j)
          if (!lattice_contains(out.U, cur.column(j)))
            throw CertificationFailed("tidy lattice: regressive trajectory of U+ leaves U");
      }
    }
  }
  out.index_displacement = displacement_index(A, out.U);
  return out;
}

ScaleValue scale(const MatrixK& A, const SpectralDecomposition& dec) {
  const SpecPtr& spec = dec.spec;
  ScaleValue closed{spec->q(), 0};
  // closed form: q^{-val det(A|_{E_{>1}})} via the restricted blocks
  Rat total(0);
  for (size_t c = 0; c < dec.components.size(); ++c) {
    const auto& comp = dec.components[c];
    if (comp.zero_root || !(comp.slope < Rat(0))) continue;
    MatrixK M = dec.component_matrix(A, c);
    total += Rat(-det_valuation(M));
  }
  if (total.denominator() != 1)
    throw CertificationFailed("scale: non-integral determinant valuation");
  closed.exponent = total.numerator();

  // tidy route must agree
  AdaptedNorm nrm = adapted_norm(A, dec, NormValue::qpow(Rat(-1)));
  TidyLattice tidy = tidy_lattice(A, dec, nrm);
  if (tidy.index_displacement.exponent != closed.exponent)
    throw CertificationFailed("scale: closed form and tidy displacement disagree (" +
                              std::to_string(closed.exponent) + " vs " +
                              std::to_string(tidy.index_displacement.exponent) + ")");
  return closed;
}

TidinessReport tidiness_gap(const MatrixK& A, const SpectralDecomposition& dec,
                            const AdaptedNorm& nrm, int trials, uint64_t seed) {
  if (trials < 1) throw RangeError("tidiness_gap requires trials >= 1");
  TidyLattice tidy = tidy_lattice(A, dec, nrm);
  TidinessReport rep;
  rep.seed = seed;
  rep.trials = trials;
  rep.scale_exponent = tidy.index_displacement.exponent;
  rep.min_observed_exponent = std::numeric_limits<long long>::max();
  const SpecPtr& spec = dec.spec;
  size_t n = dec.dim;
  for (int t = 0; t < trials; ++t) {
    // deterministic per-trial stream
    Rng rng(seed + 0x9e3779b97f4a7c15ull * static_cast<uint64_t>(t + 1));
    Unimodular mix = random_unimodular(spec, n, rng);
    MatrixK gen = tidy.U.basis.mul(mix.mat);
    for (size_t j = 0; j < gen.cols(); ++j) {
      int64_t shift = rng.range(-2, 2);
      for (size_t i = 0; i < n; ++i) gen.at(i, j) = gen.at(i, j).shifted(shift);
    }
    HermiteForm L = lattice_hnf(gen);
    if (L.pivots.size() != n) continue;  // degenerate perturbation
    ScaleValue idx = displacement_index(A, L);
    rep.min_observed_exponent = std::min(rep.min_observed_exponent, idx.exponent);
    if (idx.exponent == rep.scale_exponent) ++rep.equality_count;
    if (idx.exponent < rep.scale_exponent)
      throw CertificationFailed("tidiness gap: perturbation beat the scale (exponent " +
                                std::to_string(idx.exponent) + " < " +
                                std::to_string(rep.scale_exponent) + ")");
  }
  if (rep.min_observed_exponent == std::numeric_limits<long long>::max())
    rep.min_observed_exponent = rep.scale_exponent;
  return rep;
}

std::vector<VectorK> iterated_kernel(const MatrixK& A) {
  if (A.rows() != A.cols()) throw RangeError("iterated kernel of non-square matrix");
  return rref_val(A.pow(A.rows())).kernel;
}

std::pair<bool, bool> etale_iff_trivial_ik(const MatrixK& A) {
  bool invertible = true;
  try {
    (void)det_valuation(A);
  } catch (const RangeError&) {
    invertible = false;
  }
  bool trivial = iterated_kernel(A).empty();
  if (invertible != trivial)
    throw CertificationFailed("invertibility and trivial iterated kernel disagree");
  return {invertible, trivial};
}

long long exhaustion_bound(const MatrixK& A, const SpectralDecomposition& dec,
                           const AdaptedNorm& nrm, const VectorK& x, const NormValue& r) {
  if (r.is_zero()) throw RangeError("exhaustion bound requires r > 0");
  std::vector<VectorK> parts = dec.split(x);
  long long n = 0;
  bool any = false;
  for (size_t c = 0; c < dec.components.size(); ++c) {
    bool nonzero = false;
    for (const auto& e : parts[c])
      if (e.is_significant()) nonzero = true;
    if (!nonzero) continue;
    if (side_of(dec.components[c]) != Side::above_one)
      throw RangeError("exhaustion bound requires x in con-");
    any = true;
    NormValue nx = nrm.norm(parts[c]);
    // ||A^{-n} x_c|| = rho^{-n} ||x_c||; need <= r
    Rat e = nx.exponent();
    Rat er = r.exponent();
    Rat s = dec.components[c].slope;  // negative
    if (e > er) {
      Rat need = (e - er) / (-s);
      n = std::max(n, rat_ceil(need));
    }
  }
  if (!any) return 0;

  // verify by exhibiting the preimage inside the closed ball
  VectorK cur = x;
  std::vector<MatrixK> invs;
  for (size_t c = 0; c < dec.components.size(); ++c)
    invs.push_back(side_of(dec.components[c]) == Side::above_one
                       ? inverse(dec.component_matrix(A, c))
                       : MatrixK());
  auto pull_back = [&](const VectorK& v) {
    VectorK y = dec.coordinates(v);
    VectorK out_coords = zero_vector(dec.spec, dec.dim);
    size_t off = 0;
    for (size_t c = 0; c < dec.components.size(); ++c) {
      size_t m = static_cast<size_t>(dec.components[c].multiplicity);
      if (side_of(dec.components[c]) == Side::above_one) {
        VectorK part(y.begin() + static_cast<long>(off), y.begin() + static_cast<long>(off + m));
        VectorK back = invs[c].mul(part);
        for (size_t j = 0; j < m; ++j) out_coords[off + j] = back[j];
      }
      off += m;
    }
    return dec.basis_matrix.mul(out_coords);
  };
  for (long long i = 0; i < n; ++i) cur = pull_back(cur);
  if (!(nrm.norm(cur) <= r))
    throw CertificationFailed("exhaustion bound: preimage not inside the ball");
  if (n > 0) {
    // minimality: one step fewer does not reach the ball
    VectorK prev = x;
    for (long long i = 0; i + 1 < n; ++i) prev = pull_back(prev);
    if (nrm.norm(prev) <= r)
      throw CertificationFailed("exhaustion bound: bound is not minimal");
  }
  return n;
}

}  // namespace uldyn
