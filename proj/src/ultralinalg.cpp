#include "uldyn/ultralinalg.hpp"

#include <algorithm>

namespace uldyn {

// ---------------------------------------------------------------------------
// matrix basics
// ---------------------------------------------------------------------------

MatrixK::MatrixK(SpecPtr spec, size_t rows, size_t cols)
    : spec_(std::move(spec)), rows_(rows), cols_(cols) {
  e_.assign(rows * cols, FieldElement::zero(spec_));
}

MatrixK MatrixK::identity(const SpecPtr& spec, size_t n) {
  MatrixK m(spec, n, n);
  for (size_t i = 0; i < n; ++i) m.at(i, i) = FieldElement::one(spec);
  return m;
}

MatrixK MatrixK::from_columns(const SpecPtr& spec, size_t rows, const std::vector<VectorK>& cols) {
  MatrixK m(spec, rows, cols.size());
  for (size_t j = 0; j < cols.size(); ++j) {
    if (cols[j].size() != rows) throw RangeError("from_columns: ragged column");
    for (size_t i = 0; i < rows; ++i) m.at(i, j) = cols[j][i];
  }
  return m;
}

MatrixK MatrixK::diagonal(const SpecPtr& spec, const VectorK& entries) {
  MatrixK m(spec, entries.size(), entries.size());
  for (size_t i = 0; i < entries.size(); ++i) m.at(i, i) = entries[i];
  return m;
}

MatrixK MatrixK::add(const MatrixK& o) const {
  MatrixK r(spec_, rows_, cols_);
  for (size_t i = 0; i < e_.size(); ++i) r.e_[i] = e_[i].add(o.e_[i]);
  return r;
}

MatrixK MatrixK::sub(const MatrixK& o) const {
  MatrixK r(spec_, rows_, cols_);
  for (size_t i = 0; i < e_.size(); ++i) r.e_[i] = e_[i].sub(o.e_[i]);
  return r;
}

MatrixK MatrixK::mul(const MatrixK& o) const {
  if (cols_ != o.rows_) throw RangeError("matrix dimension mismatch");
  MatrixK r(spec_, rows_, o.cols_);
  for (size_t i = 0; i < rows_; ++i)
    for (size_t k = 0; k < cols_; ++k) {
      const FieldElement& a = at(i, k);
      if (a.is_exact_zero()) continue;
      for (size_t j = 0; j < o.cols_; ++j)
        r.at(i, j) = r.at(i, j).add(a.mul(o.at(k, j)));
    }
  return r;
}

VectorK MatrixK::mul(const VectorK& v) const {
  if (cols_ != v.size()) throw RangeError("matrix/vector dimension mismatch");
  VectorK r(rows_, FieldElement::zero(spec_));
  for (size_t i = 0; i < rows_; ++i)
    for (size_t j = 0; j < cols_; ++j) {
      const FieldElement& a = at(i, j);
      if (a.is_exact_zero() || v[j].is_exact_zero()) continue;
      r[i] = r[i].add(a.mul(v[j]));
    }
  return r;
}

MatrixK MatrixK::scaled(const FieldElement& c) const {
  MatrixK r(spec_, rows_, cols_);
  for (size_t i = 0; i < e_.size(); ++i) r.e_[i] = e_[i].mul(c);
  return r;
}

MatrixK MatrixK::shifted(int64_t k) const {
  MatrixK r(spec_, rows_, cols_);
  for (size_t i = 0; i < e_.size(); ++i) r.e_[i] = e_[i].shifted(k);
  return r;
}

MatrixK MatrixK::pow(uint64_t k) const {
  if (rows_ != cols_) throw RangeError("pow of non-square matrix");
  MatrixK acc = identity(spec_, rows_);
  MatrixK base = *this;
  while (k) {
    if (k & 1) acc = acc.mul(base);
    base = base.mul(base);
    k >>= 1;
  }
  return acc;
}

MatrixK MatrixK::transpose() const {
  MatrixK r(spec_, cols_, rows_);
  for (size_t i = 0; i < rows_; ++i)
    for (size_t j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
  return r;
}

VectorK MatrixK::column(size_t j) const {
  VectorK v(rows_, FieldElement::zero(spec_));
  for (size_t i = 0; i < rows_; ++i) v[i] = at(i, j);
  return v;
}

MatrixK MatrixK::columns_slice(size_t j0, size_t count) const {
  MatrixK r(spec_, rows_, count);
  for (size_t i = 0; i < rows_; ++i)
    for (size_t j = 0; j < count; ++j) r.at(i, j) = at(i, j0 + j);
  return r;
}

MatrixK MatrixK::hstack(const MatrixK& o) const {
  MatrixK r(spec_, rows_, cols_ + o.cols_);
  for (size_t i = 0; i < rows_; ++i) {
    for (size_t j = 0; j < cols_; ++j) r.at(i, j) = at(i, j);
    for (size_t j = 0; j < o.cols_; ++j) r.at(i, cols_ + j) = o.at(i, j);
  }
  return r;
}

bool MatrixK::eq_at_precision(const MatrixK& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) return false;
  for (size_t i = 0; i < e_.size(); ++i)
    if (!e_[i].eq_at_precision(o.e_[i])) return false;
  return true;
}

bool MatrixK::is_zero_at_precision() const {
  for (const auto& x : e_)
    if (x.is_significant()) return false;
  return true;
}

VectorK vec_add(const VectorK& a, const VectorK& b) {
  VectorK r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i].add(b[i]);
  return r;
}

VectorK vec_sub(const VectorK& a, const VectorK& b) {
  VectorK r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i].sub(b[i]);
  return r;
}

VectorK vec_scaled(const VectorK& a, const FieldElement& c) {
  VectorK r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i].mul(c);
  return r;
}

bool vec_eq_at_precision(const VectorK& a, const VectorK& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!a[i].eq_at_precision(b[i])) return false;
  return true;
}

VectorK zero_vector(const SpecPtr& spec, size_t n) {
  return VectorK(n, FieldElement::zero(spec));
}

// ---------------------------------------------------------------------------
// elimination
// ---------------------------------------------------------------------------

namespace {

struct PivotScan {
  bool found = false;
  size_t row = 0, col = 0;
  int64_t val = 0;
};

// minimal-valuation pivot among unused rows x unused cols; throws when an
// undetermined entry could beat the chosen pivot
PivotScan scan_pivot(const MatrixK& B, const std::vector<bool>& row_used,
                     const std::vector<bool>& col_used, const char* where) {
  PivotScan best;
  int64_t zap_known = std::numeric_limits<int64_t>::max();
  for (size_t i = 0; i < B.rows(); ++i) {
    if (row_used[i]) continue;
    for (size_t j = 0; j < B.cols(); ++j) {
      if (col_used[j]) continue;
      const FieldElement& e = B.at(i, j);
      if (e.is_significant()) {
        int64_t v = e.valuation();
        if (!best.found || v < best.val ||
            (v == best.val && (i < best.row || (i == best.row && j < best.col)))) {
          best.found = true;
          best.row = i;
          best.col = j;
          best.val = v;
        }
      } else if (e.is_zero_at_precision()) {
        zap_known = std::min(zap_known, e.known_to());
      }
    }
  }
  if (best.found && zap_known <= best.val)
    throw PrecisionExhausted(std::string(where) +
                             ": pivot decision undetermined at precision (O(pi^" +
                             std::to_string(zap_known) + ") entry vs valuation " +
                             std::to_string(best.val) + " pivot)");
  return best;
}

}  // namespace

RrefResult rref_val(const MatrixK& A) {
  const SpecPtr& spec = A.spec();
  size_t r = A.rows(), c = A.cols();
  MatrixK B = A;
  MatrixK V = MatrixK::identity(spec, c);
  std::vector<bool> row_used(r, false), col_used(c, false);
  RrefResult out;
  while (true) {
    PivotScan pv = scan_pivot(B, row_used, col_used, "rref");
    if (!pv.found) break;
    FieldElement pinv = B.at(pv.row, pv.col).inv();
    for (size_t j = 0; j < c; ++j) {
      if (j == pv.col || col_used[j]) continue;
      FieldElement f = B.at(pv.row, j).mul(pinv);
      if (f.is_exact_zero()) continue;
      for (size_t i = 0; i < r; ++i) B.at(i, j) = B.at(i, j).sub(f.mul(B.at(i, pv.col)));
      for (size_t i = 0; i < c; ++i) V.at(i, j) = V.at(i, j).sub(f.mul(V.at(i, pv.col)));
    }
    row_used[pv.row] = true;
    col_used[pv.col] = true;
    out.pivots.push_back({pv.row, pv.col});
  }
  out.rank = static_cast<long long>(out.pivots.size());
  for (size_t j = 0; j < c; ++j)
    if (!col_used[j]) out.kernel.push_back(V.column(j));
  for (const auto& [pr, pc] : out.pivots) out.image.push_back(B.column(pc));
  return out;
}

namespace {

// Gauss-Jordan with valuation pivoting; rhs may be an identity (inverse) or a
// single column (solve)
struct Eliminated {
  MatrixK lhs;
  MatrixK rhs;
  std::vector<bool> row_used;
  std::vector<long long> pivot_col_of_row;  // -1 when none
  long long rank = 0;
};

Eliminated gauss_jordan(const MatrixK& A, const MatrixK& rhs0, const char* where) {
  size_t r = A.rows(), c = A.cols();
  Eliminated out{A, rhs0, std::vector<bool>(r, false), std::vector<long long>(r, -1), 0};
  std::vector<bool> col_used(c, false);
  while (true) {
    PivotScan pv = scan_pivot(out.lhs, out.row_used, col_used, where);
    if (!pv.found) break;
    FieldElement pinv = out.lhs.at(pv.row, pv.col).inv();
    for (size_t j = 0; j < c; ++j) out.lhs.at(pv.row, j) = out.lhs.at(pv.row, j).mul(pinv);
    for (size_t j = 0; j < out.rhs.cols(); ++j)
      out.rhs.at(pv.row, j) = out.rhs.at(pv.row, j).mul(pinv);
    for (size_t i = 0; i < r; ++i) {
      if (i == pv.row) continue;
      FieldElement f = out.lhs.at(i, pv.col);
      if (f.is_exact_zero()) continue;
      for (size_t j = 0; j < c; ++j)
        out.lhs.at(i, j) = out.lhs.at(i, j).sub(f.mul(out.lhs.at(pv.row, j)));
      for (size_t j = 0; j < out.rhs.cols(); ++j)
        out.rhs.at(i, j) = out.rhs.at(i, j).sub(f.mul(out.rhs.at(pv.row, j)));
    }
    out.row_used[pv.row] = true;
    col_used[pv.col] = true;
    out.pivot_col_of_row[pv.row] = static_cast<long long>(pv.col);
    ++out.rank;
  }
  return out;
}

}  // namespace

MatrixK inverse(const MatrixK& A) {
  if (A.rows() != A.cols()) throw RangeError("inverse of non-square matrix");
  size_t n = A.rows();
  Eliminated el = gauss_jordan(A, MatrixK::identity(A.spec(), n), "inverse");
  if (el.rank != static_cast<long long>(n)) throw RangeError("matrix singular at precision");
  MatrixK inv(A.spec(), n, n);
  for (size_t i = 0; i < n; ++i) {
    size_t pc = static_cast<size_t>(el.pivot_col_of_row[i]);
    for (size_t j = 0; j < n; ++j) inv.at(pc, j) = el.rhs.at(i, j);
  }
  return inv;
}

std::optional<VectorK> solve(const MatrixK& A, const VectorK& b) {
  MatrixK rhs(A.spec(), A.rows(), 1);
  for (size_t i = 0; i < A.rows(); ++i) rhs.at(i, 0) = b[i];
  Eliminated el = gauss_jordan(A, rhs, "solve");
  for (size_t i = 0; i < A.rows(); ++i)
    if (el.pivot_col_of_row[i] < 0 && el.rhs.at(i, 0).is_significant()) return std::nullopt;
  VectorK x = zero_vector(A.spec(), A.cols());
  for (size_t i = 0; i < A.rows(); ++i)
    if (el.pivot_col_of_row[i] >= 0)
      x[static_cast<size_t>(el.pivot_col_of_row[i])] = el.rhs.at(i, 0);
  return x;
}

int64_t det_valuation(const MatrixK& A) {
  if (A.rows() != A.cols()) throw RangeError("det of non-square matrix");
  MatrixK B = A;
  size_t n = A.rows();
  std::vector<bool> row_used(n, false), col_used(n, false);
  int64_t total = 0;
  for (size_t step = 0; step < n; ++step) {
    PivotScan pv = scan_pivot(B, row_used, col_used, "det");
    if (!pv.found) throw RangeError("determinant: matrix singular at precision");
    total += pv.val;
    FieldElement pinv = B.at(pv.row, pv.col).inv();
    for (size_t i = 0; i < n; ++i) {
      if (row_used[i] || i == pv.row) continue;
      FieldElement f = B.at(i, pv.col).mul(pinv);
      if (f.is_exact_zero()) continue;
      for (size_t j = 0; j < n; ++j)
        if (!col_used[j]) B.at(i, j) = B.at(i, j).sub(f.mul(B.at(pv.row, j)));
    }
    row_used[pv.row] = true;
    col_used[pv.col] = true;
  }
  return total;
}

// ---------------------------------------------------------------------------
// characteristic polynomial (Berkowitz)
// ---------------------------------------------------------------------------

Polynomial char_poly(const MatrixK& A) {
  if (A.rows() != A.cols()) throw RangeError("char_poly of non-square matrix");
  const SpecPtr& spec = A.spec();
  size_t n = A.rows();
  if (n == 0) return Polynomial::one(spec);

  // C holds the coefficients of det(T I - A_k), leading coefficient first
  std::vector<FieldElement> C{FieldElement::one(spec), A.at(0, 0).neg()};
  for (size_t k = 2; k <= n; ++k) {
    // q[0] = 1, q[1] = -a_kk, q[t] = -(R M^{t-2} S) for the principal block M,
    // bordering row R and column S
    std::vector<FieldElement> q(k + 1, FieldElement::zero(spec));
    q[0] = FieldElement::one(spec);
    q[1] = A.at(k - 1, k - 1).neg();
    VectorK u(k - 1);
    for (size_t i = 0; i < k - 1; ++i) u[i] = A.at(i, k - 1);
    for (size_t t = 2; t <= k; ++t) {
      FieldElement dot = FieldElement::zero(spec);
      for (size_t i = 0; i < k - 1; ++i) dot = dot.add(A.at(k - 1, i).mul(u[i]));
      q[t] = dot.neg();
      if (t == k) break;
      VectorK nu(k - 1, FieldElement::zero(spec));
      for (size_t i = 0; i < k - 1; ++i)
        for (size_t j = 0; j < k - 1; ++j) nu[i] = nu[i].add(A.at(i, j).mul(u[j]));
      u = std::move(nu);
    }
    std::vector<FieldElement> Cn(k + 1, FieldElement::zero(spec));
    for (size_t i = 0; i <= k; ++i)
      for (size_t t = 0; t <= i && t <= k; ++t) {
        if (i - t >= C.size()) continue;
        Cn[i] = Cn[i].add(q[t].mul(C[i - t]));
      }
    C = std::move(Cn);
  }
  std::vector<FieldElement> coeffs(n + 1, FieldElement::zero(spec));
  for (size_t i = 0; i <= n; ++i) coeffs[n - i] = C[i];
  return Polynomial(spec, std::move(coeffs));
}

MatrixK eval_poly(const Polynomial& f, const MatrixK& A) {
  if (A.rows() != A.cols()) throw RangeError("eval_poly on non-square matrix");
  const SpecPtr& spec = A.spec();
  size_t n = A.rows();
  MatrixK acc(spec, n, n);
  for (long long i = f.degree(); i >= 0; --i) {
    acc = acc.mul(A);
    FieldElement c = f.coeff(i);
    for (size_t d = 0; d < n; ++d) acc.at(d, d) = acc.at(d, d).add(c);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// lattices: Hermite form, sums, membership, Smith decomposition
// ---------------------------------------------------------------------------

namespace {

// x = low + pi^e * high with low the exact digit content below pi^e
std::pair<FieldElement, FieldElement> split_at(const FieldElement& x, int64_t e) {
  const SpecPtr& spec = x.spec();
  if (!x.is_significant() || x.valuation() >= e)
    return {FieldElement::zero(spec), x.shifted(-e)};
  FieldElement clipped = x.truncated(e);
  std::vector<uint32_t> low_digits =
      clipped.is_significant() ? clipped.digits() : std::vector<uint32_t>{};
  int64_t lo = clipped.is_significant() ? clipped.valuation() : 0;
  FieldElement low =
      FieldElement::from_digits(spec, lo, std::move(low_digits), FieldElement::kExact);
  FieldElement high = x.sub(low).shifted(-e);
  return {low, high};
}

}  // namespace

HermiteForm lattice_hnf(const MatrixK& generators) {
  const SpecPtr& spec = generators.spec();
  size_t n = generators.rows(), k = generators.cols();
  MatrixK B = generators;
  std::vector<bool> col_used(k, false);
  HermiteForm out;
  std::vector<size_t> pivot_cols;

  for (size_t row = 0; row < n; ++row) {
    bool found = false;
    size_t bc = 0;
    int64_t bv = 0;
    int64_t zap_known = std::numeric_limits<int64_t>::max();
    for (size_t j = 0; j < k; ++j) {
      if (col_used[j]) continue;
      const FieldElement& e = B.at(row, j);
      if (e.is_significant()) {
        int64_t v = e.valuation();
        if (!found || v < bv || (v == bv && j < bc)) {
          found = true;
          bc = j;
          bv = v;
        }
      } else if (e.is_zero_at_precision()) {
        zap_known = std::min(zap_known, e.known_to());
      }
    }
    if (found && zap_known <= bv)
      throw PrecisionExhausted("hnf: pivot decision undetermined at precision");
    if (!found) continue;  // no pivot in this row

    // normalize so the pivot equals pi^bv (at precision)
    FieldElement unit_inv = B.at(row, bc).shifted(-bv).inv();
    for (size_t i = 0; i < n; ++i) B.at(i, bc) = B.at(i, bc).mul(unit_inv);
    // clear this row among unused columns
    for (size_t j = 0; j < k; ++j) {
      if (j == bc || col_used[j]) continue;
      if (!B.at(row, j).is_significant()) continue;
      FieldElement f = B.at(row, j).shifted(-bv);
      for (size_t i = 0; i < n; ++i) B.at(i, j) = B.at(i, j).sub(f.mul(B.at(i, bc)));
    }
    // reduce earlier pivot columns modulo pi^bv at this row
    for (size_t j : pivot_cols) {
      const FieldElement& e = B.at(row, j);
      if (!e.is_significant()) continue;
      auto [low, high] = split_at(e, bv);
      if (!high.is_significant()) continue;
      for (size_t i = 0; i < n; ++i) B.at(i, j) = B.at(i, j).sub(high.mul(B.at(i, bc)));
    }
    col_used[bc] = true;
    pivot_cols.push_back(bc);
    out.pivots.push_back({row, bv});
  }
  out.basis = MatrixK(spec, n, pivot_cols.size());
  for (size_t j = 0; j < pivot_cols.size(); ++j)
    for (size_t i = 0; i < n; ++i) out.basis.at(i, j) = B.at(i, pivot_cols[j]);
  return out;
}

bool lattice_equal(const HermiteForm& a, const HermiteForm& b) {
  if (a.pivots != b.pivots) return false;
  return a.basis.eq_at_precision(b.basis);
}

HermiteForm lattice_sum(const HermiteForm& a, const HermiteForm& b) {
  return lattice_hnf(a.basis.hstack(b.basis));
}

bool lattice_contains(const HermiteForm& L, const VectorK& x) {
  VectorK r = x;
  for (size_t j = 0; j < L.pivots.size(); ++j) {
    auto [row, e] = L.pivots[j];
    const FieldElement& cur = r[row];
    if (!cur.is_significant()) continue;
    if (cur.valuation() < e) return false;
    FieldElement y = cur.shifted(-e);  // integral coefficient of column j
    for (size_t i = 0; i < r.size(); ++i) r[i] = r[i].sub(y.mul(L.basis.at(i, j)));
  }
  for (const auto& v : r)
    if (v.is_significant()) return false;
  return true;
}

SmithResult smith_decompose(const MatrixK& X) {
  const SpecPtr& spec = X.spec();
  size_t n = X.rows(), m = X.cols();
  MatrixK B = X;
  MatrixK U = MatrixK::identity(spec, n);
  MatrixK V = MatrixK::identity(spec, m);
  SmithResult out;
  size_t steps = std::min(n, m);
  std::vector<bool> row_used(n, false), col_used(m, false);

  for (size_t k = 0; k < steps; ++k) {
    PivotScan pv = scan_pivot(B, row_used, col_used, "smith");
    if (!pv.found) break;
    if (pv.row != k) {
      for (size_t j = 0; j < m; ++j) std::swap(B.at(k, j), B.at(pv.row, j));
      for (size_t i = 0; i < n; ++i) std::swap(U.at(i, k), U.at(i, pv.row));
    }
    if (pv.col != k) {
      for (size_t i = 0; i < n; ++i) std::swap(B.at(i, k), B.at(i, pv.col));
      for (size_t j = 0; j < m; ++j) std::swap(V.at(k, j), V.at(pv.col, j));
    }
    int64_t e = pv.val;
    // normalize the pivot to pi^e: row k scaled by u^{-1}, U column k by u
    FieldElement u = B.at(k, k).shifted(-e);
    FieldElement uinv = u.inv();
    for (size_t j = 0; j < m; ++j) B.at(k, j) = B.at(k, j).mul(uinv);
    for (size_t i = 0; i < n; ++i) U.at(i, k) = U.at(i, k).mul(u);
    // clear row k rightward (column ops; V rows adjust inversely)
    for (size_t j = k + 1; j < m; ++j) {
      if (!B.at(k, j).is_significant()) continue;
      FieldElement f = B.at(k, j).shifted(-e);
      for (size_t i = 0; i < n; ++i) B.at(i, j) = B.at(i, j).sub(f.mul(B.at(i, k)));
      for (size_t j2 = 0; j2 < m; ++j2) V.at(k, j2) = V.at(k, j2).add(f.mul(V.at(j, j2)));
    }
    // clear column k downward (row ops; U columns adjust inversely)
    for (size_t i = k + 1; i < n; ++i) {
      if (!B.at(i, k).is_significant()) continue;
      FieldElement f = B.at(i, k).shifted(-e);
      for (size_t j = 0; j < m; ++j) B.at(i, j) = B.at(i, j).sub(f.mul(B.at(k, j)));
      for (size_t i2 = 0; i2 < n; ++i2) U.at(i2, k) = U.at(i2, k).add(f.mul(U.at(i2, i)));
    }
    row_used[k] = true;
    col_used[k] = true;
    out.exponents.push_back(e);
  }
  out.rank = static_cast<long long>(out.exponents.size());
  out.U = std::move(U);
  out.V = std::move(V);
  return out;
}

}  // namespace uldyn
