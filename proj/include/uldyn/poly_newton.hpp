// Polynomials over the configured field, Newton polygons, and Hensel-based
// slope factorization.  The polygon's "slope" of a segment is the common
// valuation of the roots it accounts for (the negative of the geometric hull
// slope); characteristic values are recovered as q^{-slope}.  Factorization
// splits the polynomial into monic factors of pure slope without leaving the
// ground field; fractional-slope factors stay whole.
#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "uldyn/field_arith.hpp"

namespace uldyn {

class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(SpecPtr spec, std::vector<FieldElement> coeffs);

  static Polynomial zero(const SpecPtr& spec);
  static Polynomial one(const SpecPtr& spec);
  static Polynomial monomial(const SpecPtr& spec, const FieldElement& c, long long k);
  // monic T^k
  static Polynomial power_of_T(const SpecPtr& spec, long long k);

  const SpecPtr& spec() const { return spec_; }
  long long degree() const { return static_cast<long long>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  FieldElement coeff(long long i) const;
  const std::vector<FieldElement>& coeffs() const { return coeffs_; }
  bool monic_at_precision() const;

  Polynomial add(const Polynomial& o) const;
  Polynomial sub(const Polynomial& o) const;
  Polynomial mul(const Polynomial& o) const;
  Polynomial scaled(const FieldElement& c) const;
  Polynomial shifted_T(long long k) const;  // multiply by T^k, k >= 0
  // division by a divisor with invertible leading coefficient
  std::pair<Polynomial, Polynomial> divmod(const Polynomial& d) const;

  FieldElement eval(const FieldElement& x) const;

  bool eq_at_precision(const Polynomial& o) const;
  std::string render() const;
  static Polynomial parse(const std::string& text, const SpecPtr& spec);

 private:
  SpecPtr spec_;
  std::vector<FieldElement> coeffs_;  // constant term first; trailing exact zeros stripped
};

struct NewtonSegment {
  Rat slope;         // common valuation of the roots in this segment
  long long length;  // number of roots (with multiplicity)
};

struct NewtonPolygon {
  // lower-hull vertices (index, coefficient valuation), ascending index
  std::vector<std::pair<long long, int64_t>> vertices;
  // segments ordered by strictly increasing slope
  std::vector<NewtonSegment> segments;
  long long zero_root_multiplicity = 0;
};

// Throws PrecisionExhausted when a hull vertex's valuation is not determined
// at precision (an undetermined coefficient could dig below the hull).
NewtonPolygon newton_polygon(const Polynomial& f);

struct SlopeFactor {
  bool zero_root = false;     // factor T^m collecting the roots equal to 0
  Rat slope;                  // root valuation (unset for the zero-root factor)
  Polynomial factor;          // monic, pure Newton slope
  long long multiplicity = 0; // degree of the factor
};

// Splits monic f into pure-slope monic factors; the product matches f modulo
// pi^(min coefficient valuation + N).  Ordered zero-root first, then by
// increasing slope.
std::vector<SlopeFactor> slope_factor(const Polynomial& f);

// extended Euclid at precision: returns (a, b) with a*g + b*h = 1 when g, h
// are coprime at precision; throws PrecisionExhausted otherwise
std::pair<Polynomial, Polynomial> bezout_pair(const Polynomial& g, const Polynomial& h);

}  // namespace uldyn
