// Linear realization of the contraction/Levi/parabolic subgroup zoo, the big
// cell, regressive trajectories, tidy lattices with the displacement index,
// and the scale.  Membership in con/lev/con- is decided by exact component
// projections; orbit runs serve as certificates, not deciders.
#pragma once

#include "uldyn/random_gen.hpp"
#include "uldyn/ultralinalg.hpp"

namespace uldyn {

struct SubgroupClassification {
  std::vector<VectorK> con;        // E_{<1} including the zero-root part
  std::vector<VectorK> lev;        // E_1
  std::vector<VectorK> con_minus;  // E_{>1}
  std::vector<VectorK> parb;       // E_{<=1}
  std::vector<VectorK> parb_minus; // E_{>=1}
};

SubgroupClassification classify(const MatrixK& A, const SpectralDecomposition& dec);

struct BigCellParts {
  VectorK s;  // contracting part
  VectorK c;  // Levi part
  VectorK u;  // anti-contracting part
};

BigCellParts big_cell_decompose(const MatrixK& A, const SpectralDecomposition& dec,
                                const VectorK& x);

std::vector<VectorK> forward_orbit(const MatrixK& A, const VectorK& x, long long k);

enum class OrbitKind { contracting, bounded, escaping };

struct OrbitCertificate {
  OrbitKind kind = OrbitKind::bounded;
  NormValue rate;            // certified contraction rate (contracting only)
  long long checked_steps = 0;
};

OrbitCertificate orbit_certificate(const MatrixK& A, const SpectralDecomposition& dec,
                                   const AdaptedNorm& nrm, const VectorK& x);

// A regressive trajectory (x_0 = x, x_{-1}, ..., x_{-k}) with A x_{-n} = x_{-n+1},
// or the obstructing component when none exists.  NoPreimage is a legitimate
// answer, not an error.
struct RegressiveResult {
  bool has_trajectory = false;
  std::vector<VectorK> trajectory;     // x_0 .. x_{-k}
  size_t obstructing_component = 0;    // valid when !has_trajectory
};

RegressiveResult regressive_trajectory(const MatrixK& A, const SpectralDecomposition& dec,
                                       const VectorK& x, long long k);

struct ScaleValue {
  uint64_t base = 0;       // residue field size q
  long long exponent = 0;  // the value is q^exponent
};

struct TidyLattice {
  HermiteForm U;        // direct sum of the component unit balls
  HermiteForm U_plus;   // U intersect parb_minus
  HermiteForm U_minus;  // U intersect parb
  ScaleValue index_displacement;  // [A(U) : A(U) n U]
  long long verified_steps = 0;   // forward/backward containment horizon checked
};

TidyLattice tidy_lattice(const MatrixK& A, const SpectralDecomposition& dec,
                         const AdaptedNorm& nrm);

// [A(L) : A(L) n L] as q^m via valuation Smith form
ScaleValue displacement_index(const MatrixK& A, const HermiteForm& L);

// literal coset enumeration of A(L)/(A(L) n L); returns the exponent m with
// q^m cosets, throwing RangeError beyond max_exponent
long long coset_count_exponent(const MatrixK& A, const HermiteForm& L, long long max_exponent);

// the scale q^{-val det(A|_{E>1})}; asserts agreement with the tidy
// displacement index before returning
ScaleValue scale(const MatrixK& A, const SpectralDecomposition& dec);

struct TidinessReport {
  uint64_t seed = 0;
  int trials = 0;
  long long scale_exponent = 0;
  long long min_observed_exponent = 0;
  int equality_count = 0;  // trials achieving the scale exactly
};

// random lattice perturbations never beat the tidy displacement index; any
// counterexample is a hard failure (CertificationFailed)
TidinessReport tidiness_gap(const MatrixK& A, const SpectralDecomposition& dec,
                            const AdaptedNorm& nrm, int trials, uint64_t seed);

// ker(A^n) basis (the zero-root component computed independently)
std::vector<VectorK> iterated_kernel(const MatrixK& A);

// (A invertible at precision, ik(A) = 0); asserts the two are equivalent
std::pair<bool, bool> etale_iff_trivial_ik(const MatrixK& A);

// least n with x in A^n(closed ball of radius r in E_{>1}); verified by
// exhibiting the preimage A^{-n} x inside the ball
long long exhaustion_bound(const MatrixK& A, const SpectralDecomposition& dec,
                           const AdaptedNorm& nrm, const VectorK& x, const NormValue& r);

}  // namespace uldyn
