#include <algorithm>

#include "uldyn/ultralinalg.hpp"

// Characteristic-subspace decomposition and adapted norms.
//
// Each component E_rho (rho = q^{-s}, s = a/b in lowest terms) carries a
// lattice chain Lambda_0 > Lambda_1 > ... > Lambda_b = pi Lambda_0 with
// A Lambda_i = Lambda_{i+a}; the chain realizes the fractional weight ladder
// q^{-g/b} without constructing a ramified extension.  The chain is built by
// saturating the coordinate lattice under the slope-zero operators
// A^b pi^{-a} (and its inverse) and then closing under the slope-1/b operator
// Pi = pi^{-d} A^c with ca - db = 1.  All certificates are lattice equalities
// at the working precision.

namespace uldyn {

// ---------------------------------------------------------------------------
// spectral decomposition
// ---------------------------------------------------------------------------

VectorK SpectralDecomposition::coordinates(const VectorK& x) const {
  return basis_inverse.mul(x);
}

std::vector<VectorK> SpectralDecomposition::split(const VectorK& x) const {
  VectorK y = coordinates(x);
  std::vector<VectorK> parts;
  size_t off = 0;
  for (const auto& comp : components) {
    VectorK part = zero_vector(spec, dim);
    for (long long j = 0; j < comp.multiplicity; ++j) {
      const FieldElement& c = y[off + static_cast<size_t>(j)];
      if (c.is_exact_zero()) continue;
      for (size_t i = 0; i < dim; ++i)
        part[i] = part[i].add(c.mul(comp.basis[static_cast<size_t>(j)][i]));
    }
    parts.push_back(std::move(part));
    off += static_cast<size_t>(comp.multiplicity);
  }
  return parts;
}

size_t SpectralDecomposition::component_offset(size_t c) const {
  size_t off = 0;
  for (size_t i = 0; i < c; ++i) off += static_cast<size_t>(components[i].multiplicity);
  return off;
}

MatrixK SpectralDecomposition::component_matrix(const MatrixK& A, size_t c) const {
  MatrixK full = basis_inverse.mul(A.mul(basis_matrix));
  size_t off = component_offset(c);
  size_t m = static_cast<size_t>(components[c].multiplicity);
  MatrixK block(spec, m, m);
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < m; ++j) block.at(i, j) = full.at(off + i, off + j);
  return block;
}

SpectralDecomposition spectral_decompose(const MatrixK& A) {
  if (A.rows() != A.cols()) throw RangeError("spectral_decompose of non-square matrix");
  const SpecPtr& spec = A.spec();
  size_t n = A.rows();

  SpectralDecomposition dec;
  dec.spec = spec;
  dec.dim = n;

  Polynomial cp = char_poly(A);
  auto factors = slope_factor(cp);

  std::vector<VectorK> all_columns;
  for (const auto& sf : factors) {
    MatrixK M = eval_poly(sf.factor, A);
    RrefResult kr = rref_val(M);
    if (static_cast<long long>(kr.kernel.size()) != sf.multiplicity)
      throw PrecisionExhausted(
          "spectral: kernel dimension of a slope factor undetermined at precision");
    SpectralComponent comp;
    comp.zero_root = sf.zero_root;
    comp.slope = sf.zero_root ? Rat(0) : sf.slope;
    comp.char_value = sf.zero_root ? NormValue::zero() : NormValue::qpow(-sf.slope);
    comp.multiplicity = sf.multiplicity;
    comp.basis = kr.kernel;
    for (const auto& v : kr.kernel) all_columns.push_back(v);
    dec.components.push_back(std::move(comp));
  }

  dec.basis_matrix = MatrixK::from_columns(spec, n, all_columns);
  dec.basis_inverse = inverse(dec.basis_matrix);  // throws if not a basis at precision

  // invariance and per-component invertibility certificates
  MatrixK full = dec.basis_inverse.mul(A.mul(dec.basis_matrix));
  size_t off = 0;
  for (const auto& comp : dec.components) {
    size_t m = static_cast<size_t>(comp.multiplicity);
    for (size_t j = 0; j < m; ++j)
      for (size_t i = 0; i < n; ++i) {
        if (i >= off && i < off + m) continue;
        if (full.at(i, off + j).is_significant())
          throw CertificationFailed("spectral: component basis is not A-invariant at precision");
      }
    if (!comp.zero_root) {
      MatrixK block(spec, m, m);
      for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < m; ++j) block.at(i, j) = full.at(off + i, off + j);
      (void)det_valuation(block);  // throws when not invertible at precision
    }
    off += m;
  }

  int64_t cert = spec->precision;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      const FieldElement& e = dec.basis_inverse.at(i, j);
      if (!e.is_exact()) cert = std::min(cert, e.known_to());
    }
  dec.certified_precision = cert;
  return dec;
}

bool is_hyperbolic(const MatrixK& A, const NormValue& a) {
  if (a.is_zero() || !(NormValue::zero() < a)) throw RangeError("is_hyperbolic requires a > 0");
  Polynomial cp = char_poly(A);
  NewtonPolygon np = newton_polygon(cp);
  for (const auto& seg : np.segments)
    if (NormValue::qpow(-seg.slope) == a) return false;
  return true;
}

// ---------------------------------------------------------------------------
// adapted norms
// ---------------------------------------------------------------------------

namespace {

// residue-field Gaussian elimination helpers (row vectors over F_q)
struct ResidueBasis {
  const ResidueField* rf;
  std::vector<std::vector<uint32_t>> rows;  // reduced independent vectors
  std::vector<size_t> lead;                 // leading index per row

  bool reduce(std::vector<uint32_t>& v) const {
    for (size_t r = 0; r < rows.size(); ++r) {
      uint32_t c = v[lead[r]];
      if (c == 0) continue;
      uint32_t f = rf->mul(c, rf->inv(rows[r][lead[r]]));
      for (size_t i = 0; i < v.size(); ++i) v[i] = rf->sub(v[i], rf->mul(f, rows[r][i]));
    }
    for (uint32_t c : v)
      if (c != 0) return false;
    return true;
  }

  // returns true when v extended the span
  bool insert(std::vector<uint32_t> v) {
    if (reduce(v)) return false;
    size_t l = 0;
    while (v[l] == 0) ++l;
    rows.push_back(std::move(v));
    lead.push_back(l);
    return true;
  }
};

// residue image of a lattice column in L-coordinates
std::vector<uint32_t> residue_vector(const VectorK& v) {
  std::vector<uint32_t> out(v.size(), 0);
  for (size_t i = 0; i < v.size(); ++i) {
    const FieldElement& e = v[i];
    if (e.is_significant() && e.valuation() <= 0) {
      if (e.valuation() < 0)
        throw CertificationFailed("adapted norm: chain column not integral");
      out[i] = e.digit_at(0);
    }
  }
  return out;
}

HermiteForm hnf_of(const MatrixK& m) { return lattice_hnf(m); }

// saturation of the standard lattice under a slope-zero operator and its inverse
HermiteForm saturate(const MatrixK& V, const char* what) {
  const SpecPtr& spec = V.spec();
  size_t m = V.rows();
  MatrixK Vinv = inverse(V);
  HermiteForm L = hnf_of(MatrixK::identity(spec, m));
  for (int iter = 0; iter < 200; ++iter) {
    MatrixK bigger = L.basis.hstack(V.mul(L.basis)).hstack(Vinv.mul(L.basis));
    HermiteForm L2 = hnf_of(bigger);
    if (lattice_equal(L, L2)) return L;
    L = std::move(L2);
  }
  throw PrecisionExhausted(std::string("adapted norm: ") + what +
                           " saturation cannot be certified stable at precision");
}

bool lattice_subset(const HermiteForm& inner, const HermiteForm& outer) {
  for (size_t j = 0; j < inner.basis.cols(); ++j)
    if (!lattice_contains(outer, inner.basis.column(j))) return false;
  return true;
}

}  // namespace

size_t AdaptedNorm::component_offset(size_t c) const {
  size_t off = 0;
  for (size_t i = 0; i < c; ++i) off += components[i].basis.cols();
  return off;
}

NormValue AdaptedNorm::component_norm(size_t c, const VectorK& x, const NormValue* floor) const {
  VectorK y = basis_inverse.mul(x);
  const AdaptedComponent& comp = components[c];
  size_t off = component_offset(c);
  NormValue best = NormValue::zero();
  for (size_t j = 0; j < comp.basis.cols(); ++j) {
    const FieldElement& e = y[off + j];
    if (e.is_significant())
      best = NormValue::max(best, NormValue::qpow(Rat(-e.valuation()) + comp.weights[j]));
  }
  NormValue cert = floor ? NormValue::max(best, *floor) : best;
  for (size_t j = 0; j < comp.basis.cols(); ++j) {
    const FieldElement& e = y[off + j];
    if (e.is_zero_at_precision()) {
      NormValue bound = NormValue::qpow(Rat(-e.known_to()) + comp.weights[j]);
      if (cert < bound)
        throw PrecisionExhausted("adapted norm evaluation undetermined at precision");
    }
  }
  return best;
}

NormValue AdaptedNorm::norm(const VectorK& x, const NormValue* floor) const {
  VectorK y = basis_inverse.mul(x);
  NormValue best = NormValue::zero();
  size_t off = 0;
  for (const auto& comp : components) {
    for (size_t j = 0; j < comp.basis.cols(); ++j) {
      const FieldElement& e = y[off + j];
      if (e.is_significant())
        best = NormValue::max(best, NormValue::qpow(Rat(-e.valuation()) + comp.weights[j]));
    }
    off += comp.basis.cols();
  }
  NormValue cert = floor ? NormValue::max(best, *floor) : best;
  off = 0;
  for (const auto& comp : components) {
    for (size_t j = 0; j < comp.basis.cols(); ++j) {
      const FieldElement& e = y[off + j];
      if (e.is_zero_at_precision()) {
        NormValue bound = NormValue::qpow(Rat(-e.known_to()) + comp.weights[j]);
        if (cert < bound)
          throw PrecisionExhausted("adapted norm evaluation undetermined at precision");
      }
    }
    off += comp.basis.cols();
  }
  return best;
}

MatrixK AdaptedNorm::chain_lattice(size_t c, long long i) const {
  const AdaptedComponent& comp = components[c];
  long long b = comp.chain_den;
  MatrixK out = comp.basis;
  for (size_t j = 0; j < out.cols(); ++j) {
    // weight r_j = -g_j/b; column j scales by pi^ceil((i - g_j)/b)
    Rat g = -comp.weights[j] * b;
    long long gj = g.numerator() / g.denominator();
    long long shift = ceil_div(i - gj, b);
    for (size_t r = 0; r < out.rows(); ++r) out.at(r, j) = out.at(r, j).shifted(shift);
  }
  return out;
}

AdaptedNorm adapted_norm(const MatrixK& A, const SpectralDecomposition& dec,
                         const NormValue& eps) {
  if (eps.is_zero() || NormValue::one() < eps)
    throw RangeError("adapted_norm requires 0 < eps <= 1");
  const SpecPtr& spec = dec.spec;
  size_t n = dec.dim;

  AdaptedNorm nrm;
  nrm.spec = spec;
  nrm.dim = n;
  nrm.epsilon = eps;

  std::vector<VectorK> all_columns;

  for (size_t ci = 0; ci < dec.components.size(); ++ci) {
    const SpectralComponent& sc = dec.components[ci];
    size_t m = static_cast<size_t>(sc.multiplicity);
    MatrixK M = dec.component_matrix(A, ci);
    MatrixK comp_basis = MatrixK::from_columns(spec, n, sc.basis);

    AdaptedComponent out;
    out.zero_root = sc.zero_root;
    out.slope = sc.slope;
    out.char_value = sc.char_value;

    if (sc.zero_root) {
      // nilpotent action: kernel-flag basis, geometric weights forcing (b)
      std::vector<VectorK> flag_cols;
      std::vector<long long> level_of;
      MatrixK Mp = MatrixK::identity(spec, m);
      long long level = 0;
      std::vector<VectorK> chosen;
      while (flag_cols.size() < m) {
        ++level;
        if (level > static_cast<long long>(m) + 1)
          throw CertificationFailed("adapted norm: zero-root component is not nilpotent");
        Mp = Mp.mul(M);
        RrefResult kr = rref_val(Mp);
        // extend the chosen set by kernel vectors of this level
        for (const auto& v : kr.kernel) {
          std::vector<VectorK> trial = chosen;
          trial.push_back(v);
          MatrixK T = MatrixK::from_columns(spec, m, trial);
          if (rref_val(T).rank == static_cast<long long>(trial.size())) {
            chosen.push_back(v);
            flag_cols.push_back(v);
            level_of.push_back(level);
          }
        }
      }
      MatrixK C = MatrixK::from_columns(spec, m, flag_cols);
      MatrixK B = inverse(C).mul(M.mul(C));
      long long lmax = level_of.back();
      // strict triangularity along the flag
      int64_t worst = 0;
      for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < m; ++j) {
          if (!B.at(i, j).is_significant()) continue;
          if (level_of[i] >= level_of[j])
            throw CertificationFailed("adapted norm: flag basis not strictly triangular");
          worst = std::min<int64_t>(worst, B.at(i, j).valuation());
        }
      long long eps_exp = 0;
      if (!(eps == NormValue::one())) {
        Rat e = eps.exponent();
        eps_exp = -rat_floor(e);  // eps = q^e, e <= 0
      }
      long long h = eps_exp + std::max<int64_t>(0, -worst) + 1;
      out.chain_num = 0;
      out.chain_den = 1;
      for (size_t j = 0; j < m; ++j) out.weights.push_back(Rat(-h * (lmax - level_of[j]), 1));
      out.basis = comp_basis.mul(C);
      // certify condition (b): operator norm on the flag-weighted basis < eps
      NormValue op = NormValue::zero();
      for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < m; ++j) {
          const FieldElement& e = B.at(i, j);
          if (!e.is_significant()) continue;
          op = NormValue::max(
              op, NormValue::qpow(Rat(-e.valuation()) + out.weights[i] - out.weights[j]));
        }
      if (!(op < eps))
        throw CertificationFailed("adapted norm: contraction bound on E_0 not achieved");
    } else {
      // slope s = a/b: saturate under the slope-zero normalization of M^b,
      // then close the chain under Pi = pi^{-d} M^c with ca - db = 1
      Rat s = sc.slope;
      long long a = s.numerator();
      long long b = s.denominator();
      MatrixK Mb = M.pow(static_cast<uint64_t>(b)).shifted(-a);
      HermiteForm LV = saturate(Mb, "orbit lattice");
      out.chain_num = a;
      out.chain_den = b;

      if (b == 1) {
        // lattice with M L = pi^a L exactly; all weights 0
        HermiteForm left = hnf_of(M.mul(LV.basis));
        HermiteForm right = hnf_of(LV.basis.shifted(a));
        if (!lattice_equal(left, right))
          throw CertificationFailed("adapted norm: component lattice not scaled exactly");
        out.basis = comp_basis.mul(LV.basis);
        out.weights.assign(m, Rat(0));
      } else {
        // Pi has slope 1/b
        long long c = 0, d = 0;
        for (long long cc = 1; cc <= 2 * b; ++cc) {
          if ((cc * a % b + b) % b == (1 % b + b) % b) {
            c = cc;
            d = (cc * a - 1) / b;
            break;
          }
        }
        if (c == 0) throw CertificationFailed("adapted norm: no chain exponent found");
        MatrixK Pi = M.pow(static_cast<uint64_t>(c)).shifted(-d);
        MatrixK big = LV.basis;
        MatrixK cur = LV.basis;
        for (long long i = 1; i < b; ++i) {
          cur = Pi.mul(cur);
          big = big.hstack(cur);
        }
        HermiteForm L = hnf_of(big);
        // chain lattices Lambda_i = Pi^i L
        std::vector<HermiteForm> chain{L};
        MatrixK cb = L.basis;
        for (long long i = 1; i <= b; ++i) {
          cb = Pi.mul(cb);
          chain.push_back(hnf_of(cb));
        }
        if (!lattice_equal(chain[static_cast<size_t>(b)], hnf_of(L.basis.shifted(1))))
          throw CertificationFailed("adapted norm: chain does not close at pi L");
        for (long long i = 0; i < b; ++i)
          if (!lattice_subset(chain[static_cast<size_t>(i + 1)], chain[static_cast<size_t>(i)]))
            throw CertificationFailed("adapted norm: chain not descending");
        // M Lambda_0 = Lambda_a (with pi-shifts folded in)
        long long qd = floor_div(a, b);
        long long rr = a - qd * b;
        HermiteForm target = hnf_of(chain[static_cast<size_t>(rr)].basis.shifted(qd));
        if (!lattice_equal(hnf_of(M.mul(L.basis)), target))
          throw CertificationFailed("adapted norm: A does not shift the chain by its slope");

        // flag-adapted basis of L/piL from the chain images
        MatrixK Linv = inverse(L.basis);
        std::vector<std::vector<uint32_t>> residues;  // candidate columns per level
        ResidueBasis rb{&spec->residue, {}, {}};
        std::vector<VectorK> cols;
        std::vector<long long> level_of;
        for (long long lev = b - 1; lev >= 0; --lev) {
          MatrixK img = Linv.mul(chain[static_cast<size_t>(lev)].basis);
          for (size_t j = 0; j < img.cols(); ++j) {
            std::vector<uint32_t> v = residue_vector(img.column(j));
            if (rb.insert(v)) {
              cols.push_back(chain[static_cast<size_t>(lev)].basis.column(j));
              level_of.push_back(lev);
            }
          }
        }
        if (cols.size() != m)
          throw CertificationFailed("adapted norm: chain flag basis incomplete");
        MatrixK C = MatrixK::from_columns(spec, m, cols);
        // certify that the weighted basis reproduces every chain lattice
        for (long long i = 0; i < b; ++i) {
          std::vector<VectorK> gen;
          for (size_t j = 0; j < m; ++j) {
            VectorK col = C.column(j);
            if (level_of[j] < i)
              for (auto& x : col) x = x.shifted(1);
            gen.push_back(col);
          }
          HermiteForm test = hnf_of(MatrixK::from_columns(spec, m, gen));
          if (!lattice_equal(test, chain[static_cast<size_t>(i)]))
            throw CertificationFailed("adapted norm: weight ladder mismatch with the chain");
        }
        out.basis = comp_basis.mul(C);
        for (size_t j = 0; j < m; ++j) out.weights.push_back(Rat(-level_of[j], b));
      }
    }
    for (size_t j = 0; j < out.basis.cols(); ++j) all_columns.push_back(out.basis.column(j));
    nrm.components.push_back(std::move(out));
  }

  nrm.basis_matrix = MatrixK::from_columns(spec, n, all_columns);
  nrm.basis_inverse = inverse(nrm.basis_matrix);
  int64_t cert = spec->precision;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      const FieldElement& e = nrm.basis_inverse.at(i, j);
      if (!e.is_exact()) cert = std::min(cert, e.known_to());
    }
  nrm.certified_precision = cert;

  // final certificate for condition (b)
  NormValue opik = op_norm_on_ik(A, nrm);
  if (!(opik < eps))
    throw CertificationFailed("adapted norm: ||A|_{E_0}||_op < eps failed final check");
  return nrm;
}

// ---------------------------------------------------------------------------
// operator norms
// ---------------------------------------------------------------------------

NormValue op_norm_max(const MatrixK& A) {
  NormValue best = NormValue::zero();
  for (size_t i = 0; i < A.rows(); ++i)
    for (size_t j = 0; j < A.cols(); ++j) {
      const FieldElement& e = A.at(i, j);
      if (e.is_significant()) best = NormValue::max(best, e.abs());
    }
  for (size_t i = 0; i < A.rows(); ++i)
    for (size_t j = 0; j < A.cols(); ++j) {
      const FieldElement& e = A.at(i, j);
      if (e.is_zero_at_precision() && best < NormValue::qpow(Rat(-e.known_to())))
        throw PrecisionExhausted("operator norm undetermined at precision");
    }
  return best;
}

namespace {

// weight exponent of coordinate i of an adapted norm
Rat weight_at(const AdaptedNorm& nrm, size_t i) {
  size_t off = 0;
  for (const auto& comp : nrm.components) {
    if (i < off + comp.basis.cols()) return comp.weights[i - off];
    off += comp.basis.cols();
  }
  throw RangeError("weight index out of range");
}

NormValue weighted_op_norm(const MatrixK& Ahat, const AdaptedNorm& nrm, size_t row0, size_t col0,
                           size_t rows, size_t cols) {
  NormValue best = NormValue::zero();
  for (size_t i = 0; i < rows; ++i)
    for (size_t j = 0; j < cols; ++j) {
      const FieldElement& e = Ahat.at(row0 + i, col0 + j);
      if (e.is_significant())
        best = NormValue::max(best, NormValue::qpow(Rat(-e.valuation()) +
                                                    weight_at(nrm, row0 + i) -
                                                    weight_at(nrm, col0 + j)));
    }
  for (size_t i = 0; i < rows; ++i)
    for (size_t j = 0; j < cols; ++j) {
      const FieldElement& e = Ahat.at(row0 + i, col0 + j);
      if (e.is_zero_at_precision()) {
        NormValue bound = NormValue::qpow(Rat(-e.known_to()) + weight_at(nrm, row0 + i) -
                                          weight_at(nrm, col0 + j));
        if (best < bound)
          throw PrecisionExhausted("operator norm undetermined at precision");
      }
    }
  return best;
}

}  // namespace

NormValue op_norm(const MatrixK& A, const AdaptedNorm& nrm) {
  MatrixK Ahat = nrm.basis_inverse.mul(A.mul(nrm.basis_matrix));
  return weighted_op_norm(Ahat, nrm, 0, 0, nrm.dim, nrm.dim);
}

NormValue op_norm_on_ik(const MatrixK& A, const AdaptedNorm& nrm) {
  for (size_t c = 0; c < nrm.components.size(); ++c) {
    if (!nrm.components[c].zero_root) continue;
    MatrixK Ahat = nrm.basis_inverse.mul(A.mul(nrm.basis_matrix));
    size_t off = nrm.component_offset(c);
    size_t m = nrm.components[c].basis.cols();
    return weighted_op_norm(Ahat, nrm, off, off, m, m);
  }
  return NormValue::zero();
}

// ---------------------------------------------------------------------------
// Fitting decomposition
// ---------------------------------------------------------------------------

FittingDecomposition fitting(const MatrixK& A) {
  if (A.rows() != A.cols()) throw RangeError("fitting of non-square matrix");
  const SpecPtr& spec = A.spec();
  size_t n = A.rows();
  MatrixK An = A.pow(n);
  RrefResult rr = rref_val(An);
  FittingDecomposition out;
  out.ik_basis = rr.kernel;
  out.core_basis = rr.image;
  // the two concatenated must form a basis, and A must map the core onto itself
  std::vector<VectorK> all(out.ik_basis);
  all.insert(all.end(), out.core_basis.begin(), out.core_basis.end());
  if (all.size() != n) throw CertificationFailed("fitting: rank mismatch");
  MatrixK P = MatrixK::from_columns(spec, n, all);
  MatrixK Pinv = inverse(P);  // throws when not a basis at precision
  if (!out.core_basis.empty()) {
    MatrixK F = MatrixK::from_columns(spec, n, out.core_basis);
    MatrixK coords = Pinv.mul(A.mul(F));
    size_t k = out.ik_basis.size();
    // image of the core stays inside the core and is invertible there
    MatrixK block(spec, out.core_basis.size(), out.core_basis.size());
    for (size_t i = 0; i < out.core_basis.size(); ++i)
      for (size_t j = 0; j < out.core_basis.size(); ++j) block.at(i, j) = coords.at(k + i, j);
    for (size_t i = 0; i < k; ++i)
      for (size_t j = 0; j < out.core_basis.size(); ++j)
        if (coords.at(i, j).is_significant())
          throw CertificationFailed("fitting: core is not A-invariant at precision");
    (void)det_valuation(block);
  }
  return out;
}

// ---------------------------------------------------------------------------
// ball identity
// ---------------------------------------------------------------------------

NormValue ball_image(const MatrixK& A, const AdaptedNorm& nrm, size_t c, const NormValue& r) {
  if (c >= nrm.components.size()) throw RangeError("ball_image: component out of range");
  const AdaptedComponent& comp = nrm.components[c];
  if (comp.char_value.is_zero() || comp.zero_root)
    throw RangeError("ball_image requires a component with rho > 0");
  if (r.is_zero()) throw RangeError("ball_image requires r > 0");
  long long b = comp.chain_den;
  long long a = comp.chain_num;
  // open ball of radius r = q^e is the chain lattice with index floor(-e b) + 1
  Rat e = r.exponent();
  long long i_r = rat_floor(-e * b) + 1;
  MatrixK ball = nrm.chain_lattice(c, i_r);
  MatrixK image = A.mul(ball);
  MatrixK target = nrm.chain_lattice(c, i_r + a);
  // compare inside the component: coordinates via the full norm basis
  HermiteForm him = lattice_hnf(nrm.basis_inverse.mul(image));
  HermiteForm htg = lattice_hnf(nrm.basis_inverse.mul(target));
  if (!lattice_equal(him, htg))
    throw CertificationFailed("ball identity: lattice images disagree");
  return r * comp.char_value;
}

}  // namespace uldyn
