// Matrices over the configured field with valuation-pivoted elimination, the
// characteristic-subspace decomposition E = (+)_rho E_rho, adapted norms,
// Fitting decomposition, and lattice (O-module) machinery: Hermite-style
// canonical forms, Smith decompositions over the valuation ring, membership
// and index computations.
//
// Pivoting rule everywhere: minimal valuation wins; among equal valuations,
// lowest row index, then lowest column index.  A pivot decision that cannot
// be made at the working precision raises PrecisionExhausted.
#pragma once

#include <optional>

#include "uldyn/poly_newton.hpp"

namespace uldyn {

using VectorK = std::vector<FieldElement>;

class MatrixK {
 public:
  MatrixK() = default;
  MatrixK(SpecPtr spec, size_t rows, size_t cols);

  static MatrixK identity(const SpecPtr& spec, size_t n);
  static MatrixK from_columns(const SpecPtr& spec, size_t rows, const std::vector<VectorK>& cols);
  static MatrixK diagonal(const SpecPtr& spec, const VectorK& entries);

  const SpecPtr& spec() const { return spec_; }
  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  FieldElement& at(size_t i, size_t j) { return e_[i * cols_ + j]; }
  const FieldElement& at(size_t i, size_t j) const { return e_[i * cols_ + j]; }

  MatrixK add(const MatrixK& o) const;
  MatrixK sub(const MatrixK& o) const;
  MatrixK mul(const MatrixK& o) const;
  VectorK mul(const VectorK& v) const;
  MatrixK scaled(const FieldElement& c) const;
  // multiply every entry by uniformizer^k
  MatrixK shifted(int64_t k) const;
  MatrixK pow(uint64_t k) const;
  MatrixK transpose() const;
  VectorK column(size_t j) const;
  MatrixK columns_slice(size_t j0, size_t count) const;
  MatrixK hstack(const MatrixK& o) const;

  bool eq_at_precision(const MatrixK& o) const;
  bool is_zero_at_precision() const;

 private:
  SpecPtr spec_;
  size_t rows_ = 0, cols_ = 0;
  std::vector<FieldElement> e_;
};

VectorK vec_add(const VectorK& a, const VectorK& b);
VectorK vec_sub(const VectorK& a, const VectorK& b);
VectorK vec_scaled(const VectorK& a, const FieldElement& c);
bool vec_eq_at_precision(const VectorK& a, const VectorK& b);
VectorK zero_vector(const SpecPtr& spec, size_t n);

// ---------------------------------------------------------------------------
// elimination
// ---------------------------------------------------------------------------

struct RrefResult {
  long long rank = 0;
  std::vector<std::pair<size_t, size_t>> pivots;  // (row, column) per elimination step
  std::vector<VectorK> kernel;                    // null-space basis, exact at precision
  std::vector<VectorK> image;                     // column-space basis
};

RrefResult rref_val(const MatrixK& A);

// inverse of a square matrix invertible at precision (throws RangeError when
// singular at precision, PrecisionExhausted on undetermined pivots)
MatrixK inverse(const MatrixK& A);

// one solution of A x = b, or nullopt when provably inconsistent at precision
std::optional<VectorK> solve(const MatrixK& A, const VectorK& b);

// valuation of det(A); RangeError if A is singular at precision
int64_t det_valuation(const MatrixK& A);

// ---------------------------------------------------------------------------
// characteristic polynomial (Berkowitz, division-free)
// ---------------------------------------------------------------------------

Polynomial char_poly(const MatrixK& A);

// Horner evaluation of f at a square matrix
MatrixK eval_poly(const Polynomial& f, const MatrixK& A);

// ---------------------------------------------------------------------------
// spectral decomposition
// ---------------------------------------------------------------------------

struct SpectralComponent {
  bool zero_root = false;      // the component E_0 = ik(A)
  Rat slope;                   // root valuation s; char value is q^{-s}
  NormValue char_value;        // 0 for the zero-root component
  long long multiplicity = 0;  // dim E_rho
  std::vector<VectorK> basis;  // ambient-coordinate basis of E_rho
};

class SpectralDecomposition {
 public:
  SpecPtr spec;
  size_t dim = 0;
  std::vector<SpectralComponent> components;
  MatrixK basis_matrix;   // concatenated component bases (columns)
  MatrixK basis_inverse;  // its inverse at precision
  int64_t certified_precision = 0;

  // coordinates of x in the concatenated basis
  VectorK coordinates(const VectorK& x) const;
  // per-component parts of x (ambient coordinates); their sum is x
  std::vector<VectorK> split(const VectorK& x) const;
  // column offset of component c in the concatenated basis
  size_t component_offset(size_t c) const;
  // matrix of A restricted to component c, in that component's basis
  MatrixK component_matrix(const MatrixK& A, size_t c) const;
};

SpectralDecomposition spectral_decompose(const MatrixK& A);

// true iff a is not a characteristic value of A
bool is_hyperbolic(const MatrixK& A, const NormValue& a);

// ---------------------------------------------------------------------------
// adapted norms
// ---------------------------------------------------------------------------

struct AdaptedComponent {
  bool zero_root = false;
  Rat slope;             // a/b in lowest terms (b = 1 for the zero-root part)
  long long chain_num = 0;    // a
  long long chain_den = 1;    // b
  NormValue char_value;
  MatrixK basis;              // refined basis of E_rho (n x m columns)
  std::vector<Rat> weights;   // weight exponents r_j: ||sum y_j c_j|| = max |y_j| q^{r_j}
};

class AdaptedNorm {
 public:
  SpecPtr spec;
  size_t dim = 0;
  NormValue epsilon;  // certified bound for ||A|_{E_0}||_op
  std::vector<AdaptedComponent> components;
  MatrixK basis_matrix;
  MatrixK basis_inverse;
  int64_t certified_precision = 0;

  // undetermined coordinates are certified against max(significant part,
  // floor); without a floor they must stay below the vector's own maximum
  NormValue norm(const VectorK& x, const NormValue* floor = nullptr) const;
  // norm of the component-c part of x, with the same floor semantics
  NormValue component_norm(size_t c, const VectorK& x, const NormValue* floor = nullptr) const;
  size_t component_offset(size_t c) const;
  // chain lattice Lambda_i of component c (ambient columns); Lambda_0 is the
  // unit ball of the component, Lambda_{i+b} = pi Lambda_i, A Lambda_i = Lambda_{i+a}
  MatrixK chain_lattice(size_t c, long long i) const;
};

// Builds a norm adapted to A (conditions (a), (b) with the given eps, (c)),
// verified constructively before returning.
AdaptedNorm adapted_norm(const MatrixK& A, const SpectralDecomposition& dec,
                         const NormValue& eps);

// exact operator norm sup ||Ax||/||x|| under the plain max norm
NormValue op_norm_max(const MatrixK& A);
// exact operator norm under an adapted norm
NormValue op_norm(const MatrixK& A, const AdaptedNorm& nrm);
// operator norm of A restricted to the zero-root component (0 if absent)
NormValue op_norm_on_ik(const MatrixK& A, const AdaptedNorm& nrm);

// ---------------------------------------------------------------------------
// Fitting decomposition
// ---------------------------------------------------------------------------

struct FittingDecomposition {
  std::vector<VectorK> ik_basis;    // ker(A^n)
  std::vector<VectorK> core_basis;  // im(A^n) = intersection of A^k(E)
};

FittingDecomposition fitting(const MatrixK& A);

// image radius rho*r of the component-c ball of radius r under A, certified
// by chain-lattice equality; component must have rho > 0
NormValue ball_image(const MatrixK& A, const AdaptedNorm& nrm, size_t c, const NormValue& r);

// ---------------------------------------------------------------------------
// lattices over the valuation ring
// ---------------------------------------------------------------------------

// Column Hermite form with valuation pivots: staircase columns, pivot entries
// exactly pi^e, entries left of a pivot reduced modulo it.
struct HermiteForm {
  MatrixK basis;                                  // n x rank canonical columns
  std::vector<std::pair<size_t, int64_t>> pivots; // (row, valuation exponent) per column
};

HermiteForm lattice_hnf(const MatrixK& generators);

bool lattice_equal(const HermiteForm& a, const HermiteForm& b);
HermiteForm lattice_sum(const HermiteForm& a, const HermiteForm& b);
// membership of x in the O-span of the lattice columns
bool lattice_contains(const HermiteForm& L, const VectorK& x);

struct SmithResult {
  MatrixK U;                      // unimodular
  std::vector<int64_t> exponents; // diag = pi^{e_1..e_r}, ascending
  MatrixK V;                      // unimodular, X = U diag V
  long long rank = 0;
};

SmithResult smith_decompose(const MatrixK& X);

}  // namespace uldyn
