// Exact arithmetic with precision tracking in Q_p and F_q((t)).
//
// Elements carry a valuation, a unit part, and an absolute precision
// exponent ("known_to"): the element is defined modulo uniformizer^known_to.
// Exact elements (known_to = kExact) hold their unit part as a rational --
// a signed integer pair for Q_p, an F_q[t] pair with unit constant terms for
// F_q((t)) -- so exact values are closed under all field operations and
// cancellation produces the true zero.  Inexact elements hold a canonical
// digit window over the residue field.  Three states exist:
//   * significant       -- a nonzero unit part
//   * exact zero        -- the distinguished true zero
//   * zero at precision -- O(pi^known_to): no significant digit survives.
//     Consumers must treat it as unknown-small, never as proven zero.
// Norm values q^r (r rational) are kept as exact exponents; no floating
// point appears anywhere.
#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/rational.hpp>

namespace uldyn {

using Rat = boost::rational<long long>;

long long floor_div(long long a, long long b);
long long ceil_div(long long a, long long b);
inline long long rat_floor(const Rat& r) { return floor_div(r.numerator(), r.denominator()); }
inline long long rat_ceil(const Rat& r) { return ceil_div(r.numerator(), r.denominator()); }
std::string rat_str(const Rat& r);

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a result or decision is not determined at the working precision.
class PrecisionExhausted : public Error {
 public:
  explicit PrecisionExhausted(const std::string& where) : Error("precision exhausted: " + where) {}
};

class DivisionByZero : public Error {
 public:
  explicit DivisionByZero(const std::string& where) : Error("division by zero: " + where) {}
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t position)
      : Error("syntax error at position " + std::to_string(position) + ": " + what),
        position(position) {}
  std::size_t position;
};

class CertificationFailed : public Error {
 public:
  explicit CertificationFailed(const std::string& what) : Error("certification failed: " + what) {}
};

class RangeError : public Error {
 public:
  explicit RangeError(const std::string& what) : Error("range error: " + what) {}
};

// The finite field F_q, q = p^f, in the polynomial basis modulo a fixed
// monic irreducible of degree f over F_p.  Elements are encoded as
// sum c_i p^i with coefficient vector (c_0..c_{f-1}), i.e. integers in [0,q).
class ResidueField {
 public:
  ResidueField(uint32_t p, uint32_t f);
  ResidueField(uint32_t p, std::vector<uint32_t> modulus_low_coeffs);

  uint32_t p() const { return p_; }
  uint32_t f() const { return f_; }
  uint64_t q() const { return q_; }
  // low coefficients c_0..c_{f-1} of the modulus x^f + c_{f-1}x^{f-1} + ... + c_0
  const std::vector<uint32_t>& modulus() const { return modulus_; }

  uint32_t add(uint32_t a, uint32_t b) const;
  uint32_t sub(uint32_t a, uint32_t b) const;
  uint32_t neg(uint32_t a) const;
  uint32_t mul(uint32_t a, uint32_t b) const;
  uint32_t inv(uint32_t a) const;  // throws DivisionByZero on 0
  uint32_t pow(uint32_t a, uint64_t e) const;
  uint32_t frobenius(uint32_t a) const { return pow(a, p_); }

 private:
  std::vector<uint32_t> decode(uint32_t a) const;
  uint32_t encode(const std::vector<uint32_t>& c) const;

  uint32_t p_;
  uint32_t f_;
  uint64_t q_;
  std::vector<uint32_t> modulus_;
  // full multiplication/inverse tables when q is small
  std::vector<uint32_t> mul_table_;
  std::vector<uint32_t> inv_table_;
};

bool is_prime_u32(uint32_t n);

enum class FieldKind { padic, laurent };

struct FieldSpec;
using SpecPtr = std::shared_ptr<const FieldSpec>;

// A configured local field: Q_p or F_q((t)), with working absolute precision N.
struct FieldSpec {
  FieldKind kind;
  int64_t precision;    // N >= 1, absolute precision exponent
  std::string symbol;   // uniformizer symbol: "p" for padic, "t"/"X" for laurent
  ResidueField residue; // F_p resp. F_q

  uint32_t p() const { return residue.p(); }
  uint64_t q() const { return residue.q(); }

  static SpecPtr padic(uint32_t p, int64_t precision, std::string symbol = "p");
  static SpecPtr laurent(uint32_t p, uint32_t f, int64_t precision, std::string symbol = "t");
  static SpecPtr laurent_q(uint64_t q, int64_t precision, std::string symbol = "t");

  bool same_as(const FieldSpec& other) const;

 private:
  FieldSpec(FieldKind k, int64_t n, std::string sym, ResidueField rf)
      : kind(k), precision(n), symbol(std::move(sym)), residue(std::move(rf)) {}
};

// q^exponent with exact rational exponent, or 0 (= q^{-infinity}).
class NormValue {
 public:
  NormValue() : zero_(true), exp_(0) {}
  static NormValue zero() { return NormValue(); }
  static NormValue one() { return qpow(Rat(0)); }
  static NormValue qpow(const Rat& e) {
    NormValue v;
    v.zero_ = false;
    v.exp_ = e;
    return v;
  }

  bool is_zero() const { return zero_; }
  const Rat& exponent() const {
    if (zero_) throw RangeError("exponent of zero norm value");
    return exp_;
  }

  NormValue operator*(const NormValue& o) const {
    if (zero_ || o.zero_) return zero();
    return qpow(exp_ + o.exp_);
  }
  NormValue operator/(const NormValue& o) const {
    if (o.zero_) throw DivisionByZero("norm value");
    if (zero_) return zero();
    return qpow(exp_ - o.exp_);
  }
  NormValue pow(long long k) const {
    if (zero_) {
      if (k <= 0) throw RangeError("0^k, k <= 0");
      return zero();
    }
    return qpow(exp_ * k);
  }

  bool operator==(const NormValue& o) const {
    return zero_ == o.zero_ && (zero_ || exp_ == o.exp_);
  }
  bool operator!=(const NormValue& o) const { return !(*this == o); }
  bool operator<(const NormValue& o) const {
    if (zero_) return !o.zero_;
    if (o.zero_) return false;
    return exp_ < o.exp_;
  }
  bool operator<=(const NormValue& o) const { return *this < o || *this == o; }
  bool operator>(const NormValue& o) const { return o < *this; }
  bool operator>=(const NormValue& o) const { return o <= *this; }

  static NormValue max(const NormValue& a, const NormValue& b) { return a < b ? b : a; }

  std::string str() const;  // "0" or "q^r"

 private:
  bool zero_;
  Rat exp_;
};

struct PadicRat;  // signed numerator / positive denominator, both coprime to p

class FieldElement {
 public:
  static constexpr int64_t kExact = std::numeric_limits<int64_t>::max();
  static constexpr int64_t kInfValuation = std::numeric_limits<int64_t>::max();

  FieldElement() = default;

  static FieldElement zero(const SpecPtr& spec);
  static FieldElement one(const SpecPtr& spec);
  static FieldElement from_integer(const SpecPtr& spec, long long value);
  static FieldElement from_rational(const SpecPtr& spec, long long num, long long den);
  // residue-field coefficient times uniformizer^k (exact)
  static FieldElement monomial(const SpecPtr& spec, uint32_t coeff, int64_t k);
  static FieldElement uniformizer_pow(const SpecPtr& spec, int64_t k) {
    return monomial(spec, 1, k);
  }
  static FieldElement zero_at_precision(const SpecPtr& spec, int64_t known);
  static FieldElement from_digits(const SpecPtr& spec, int64_t valuation,
                                  std::vector<uint32_t> digits, int64_t known);

  const SpecPtr& spec() const { return spec_; }
  bool is_exact() const { return known_ == kExact; }
  bool is_exact_zero() const { return known_ == kExact && !rat_ && digits_.empty(); }
  bool is_zero_at_precision() const { return known_ != kExact && digits_.empty(); }
  bool is_significant() const { return rat_ != nullptr || !digits_.empty(); }

  // valuation: exact integer for significant elements, +infinity (kInfValuation)
  // for the exact zero; throws PrecisionExhausted for zero-at-precision, whose
  // valuation is only bounded below by known_to().
  int64_t valuation() const;
  // lower bound on the valuation, defined in every state
  int64_t valuation_lower_bound() const;
  int64_t known_to() const { return known_; }
  NormValue abs() const;

  // digit window of the unit part starting at the valuation; exact elements
  // materialize spec->precision digits
  std::vector<uint32_t> digits() const;
  // digit at pi^k (0 outside the stored window; caller must respect known_to)
  uint32_t digit_at(int64_t k) const;

  FieldElement add(const FieldElement& o) const;
  FieldElement neg() const;
  FieldElement sub(const FieldElement& o) const { return add(o.neg()); }
  FieldElement mul(const FieldElement& o) const;
  FieldElement inv() const;
  FieldElement div(const FieldElement& o) const { return mul(o.inv()); }
  FieldElement shifted(int64_t k) const;  // multiply by uniformizer^k
  FieldElement truncated(int64_t abs_prec) const;

  // equality modulo pi^min(known_to); exact elements compare exactly
  bool eq_at_precision(const FieldElement& o) const;
  bool is_unit() const { return is_significant() && val_ == 0; }

  std::string render() const;
  static FieldElement parse(const std::string& text, const SpecPtr& spec);

 private:
  void normalize();
  // inexact copy with the unit digits materialized up to abs precision k
  FieldElement to_window(int64_t k) const;
  std::vector<uint32_t> unit_window(size_t len) const;
  static FieldElement make_padic_exact(const SpecPtr& spec, int64_t val, PadicRat rat);
  static FieldElement make_laurent_exact(const SpecPtr& spec, int64_t val,
                                         std::vector<uint32_t> num, std::vector<uint32_t> den);

  SpecPtr spec_;
  int64_t val_ = 0;
  int64_t known_ = kExact;
  // inexact: canonical digit window; laurent exact: numerator polynomial
  std::vector<uint32_t> digits_;
  // laurent exact: denominator polynomial (empty means 1), unit constant term
  std::vector<uint32_t> den_;
  // padic exact nonzero unit part (immutable, shared across copies)
  std::shared_ptr<const PadicRat> rat_;
};

// saturating precision arithmetic (kExact-aware)
int64_t prec_add(int64_t a, int64_t b);
int64_t prec_min(int64_t a, int64_t b);

}  // namespace uldyn
