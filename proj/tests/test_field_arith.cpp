#include "doctest.h"

#include <random>

#include "uldyn/field_arith.hpp"

using namespace uldyn;

namespace {

FieldElement rand_element(const SpecPtr& spec, std::mt19937_64& rng, bool allow_zero = true) {
  std::uniform_int_distribution<int> val_d(-3, 3);
  std::uniform_int_distribution<int> kind_d(0, allow_zero ? 9 : 7);
  int k = kind_d(rng);
  if (k == 8) return FieldElement::zero(spec);
  if (k == 9) return FieldElement::zero_at_precision(spec, spec->precision);
  int64_t val = val_d(rng);
  std::uniform_int_distribution<uint32_t> digit(0, static_cast<uint32_t>(spec->q() - 1));
  std::uniform_int_distribution<uint32_t> lead(1, static_cast<uint32_t>(spec->q() - 1));
  size_t len = 1 + rng() % 6;
  std::vector<uint32_t> digits(len);
  digits[0] = lead(rng);
  for (size_t i = 1; i < len; ++i) digits[i] = digit(rng);
  bool exact = (rng() % 2) == 0;
  return FieldElement::from_digits(spec, val, std::move(digits),
                                   exact ? FieldElement::kExact : spec->precision);
}

}  // namespace

TEST_CASE("padic add examples") {
  auto spec = FieldSpec::padic(5, 4);
  auto two = FieldElement::from_integer(spec, 2);
  auto three = FieldElement::from_integer(spec, 3);
  auto sum = two.add(three);
  CHECK(sum.valuation() == 1);
  CHECK(sum.digits() == std::vector<uint32_t>{1});

  auto x = FieldElement::parse("7/3", spec);
  CHECK(x.add(FieldElement::zero(spec)).eq_at_precision(x));
}

TEST_CASE("laurent characteristic-2 cancellation is exact") {
  auto spec = FieldSpec::laurent(2, 1, 8);
  auto a = FieldElement::parse("1 + t", spec);
  auto s = a.add(a);
  CHECK(s.is_exact_zero());
}

TEST_CASE("mul, inv, valuation laws") {
  auto spec = FieldSpec::padic(5, 4);
  auto five = FieldElement::from_integer(spec, 5);
  CHECK(five.mul(five.inv()).eq_at_precision(FieldElement::one(spec)));
  CHECK(five.mul(five).valuation() == 2);
  CHECK_THROWS_AS(FieldElement::zero(spec).inv(), DivisionByZero);
  CHECK_THROWS_AS(FieldElement::zero_at_precision(spec, 4).inv(), PrecisionExhausted);
}

TEST_CASE("laurent inverse of 1+t") {
  auto spec = FieldSpec::laurent(2, 1, 3);
  auto a = FieldElement::parse("1 + t", spec);
  auto b = a.inv();
  // oracle: multiply back and compare to 1 mod t^3
  CHECK(a.mul(b).truncated(3).eq_at_precision(FieldElement::one(spec).truncated(3)));
  // frozen expansion 1 + t + t^2 (mod t^3)
  CHECK(b.digit_at(0) == 1);
  CHECK(b.digit_at(1) == 1);
  CHECK(b.digit_at(2) == 1);
  // the rational-function inverse is exact; a window-truncated copy is not
  CHECK(b.is_exact());
  auto bw = b.truncated(3);
  CHECK(bw.known_to() == 3);
  CHECK(a.mul(bw).eq_at_precision(FieldElement::one(spec)));
}

TEST_CASE("valuation and absolute value") {
  auto spec = FieldSpec::padic(5, 6);
  CHECK(FieldElement::from_integer(spec, 50).valuation() == 2);
  auto p = FieldElement::uniformizer_pow(spec, 1);
  CHECK(p.abs() == NormValue::qpow(Rat(-1)));
  CHECK(FieldElement::zero(spec).valuation() == FieldElement::kInfValuation);
  CHECK(FieldElement::zero(spec).abs().is_zero());
}

TEST_CASE("parse and render") {
  auto spec5 = FieldSpec::padic(5, 4);
  auto x = FieldElement::parse("3/25", spec5);
  CHECK(x.valuation() == -2);
  CHECK(x.digit_at(-2) == 3);
  CHECK(x.digit_at(-1) == 0);
  CHECK(x.digit_at(0) == 0);

  auto spec2 = FieldSpec::laurent(2, 1, 6);
  auto y = FieldElement::parse("t^-1 + 1", spec2);
  CHECK(y.valuation() == -1);

  CHECK(FieldElement::parse("0", spec5).is_exact_zero());
  CHECK(FieldElement::parse("0", spec2).is_exact_zero());

  CHECK_THROWS_AS(FieldElement::parse("3//4", spec5), SyntaxError);
  CHECK_THROWS_AS(FieldElement::parse("t^", spec2), SyntaxError);
  CHECK_THROWS_AS(FieldElement::parse("", spec2), SyntaxError);
}

TEST_CASE("round trip at precision") {
  std::mt19937_64 rng(12345);
  for (auto spec : {FieldSpec::padic(5, 8), FieldSpec::padic(2, 8),
                    FieldSpec::laurent(3, 1, 8), FieldSpec::laurent(2, 2, 8)}) {
    for (int i = 0; i < 1000; ++i) {
      auto x = rand_element(spec, rng);
      auto back = FieldElement::parse(x.render(), spec);
      CAPTURE(x.render());
      CHECK(back.eq_at_precision(x));
      if (x.is_significant()) CHECK(back.valuation() == x.valuation());
    }
  }
}

TEST_CASE("ultrametric inequality and multiplicativity") {
  std::mt19937_64 rng(99);
  for (auto spec : {FieldSpec::padic(3, 8), FieldSpec::laurent(2, 1, 8)}) {
    for (int i = 0; i < 500; ++i) {
      auto x = rand_element(spec, rng, false);
      auto y = rand_element(spec, rng, false);
      auto s = x.add(y);
      if (s.is_significant() || s.is_exact_zero()) {
        auto lhs = s.is_exact_zero() ? NormValue::zero() : s.abs();
        CHECK(lhs <= NormValue::max(x.abs(), y.abs()));
        if (x.abs() != y.abs()) CHECK(lhs == NormValue::max(x.abs(), y.abs()));
      }
      CHECK(x.mul(y).abs() == x.abs() * y.abs());
    }
  }
}

TEST_CASE("ring laws at precision on random triples") {
  std::mt19937_64 rng(7);
  for (auto spec : {FieldSpec::padic(5, 8), FieldSpec::laurent(2, 2, 8)}) {
    for (int i = 0; i < 300; ++i) {
      auto x = rand_element(spec, rng);
      auto y = rand_element(spec, rng);
      auto z = rand_element(spec, rng);
      CHECK(x.add(y).eq_at_precision(y.add(x)));
      CHECK(x.mul(y).eq_at_precision(y.mul(x)));
      CHECK(x.add(y).add(z).eq_at_precision(x.add(y.add(z))));
      CHECK(x.mul(y).mul(z).eq_at_precision(x.mul(y.mul(z))));
      CHECK(x.mul(y.add(z)).eq_at_precision(x.mul(y).add(x.mul(z))));
    }
  }
}

TEST_CASE("residue field F_4 and F_9 arithmetic") {
  ResidueField f4(2, 2);
  // x^2 + x + 1 is the default modulus over F_2
  CHECK(f4.modulus() == std::vector<uint32_t>{1, 1});
  uint32_t g = 2;  // the class of x
  CHECK(f4.mul(g, g) == f4.add(g, 1));  // x^2 = x + 1
  CHECK(f4.mul(g, f4.inv(g)) == 1);

  ResidueField f9(3, 2);
  for (uint32_t a = 1; a < 9; ++a) CHECK(f9.mul(a, f9.inv(a)) == 1);
  CHECK(f9.pow(2, 2) == 1);  // (-1)^2 = 1
}

TEST_CASE("zero at precision semantics") {
  auto spec = FieldSpec::padic(5, 4);
  // exact rationals cancel to the true zero
  auto x = FieldElement::parse("1/3", spec);
  CHECK(x.sub(x).is_exact_zero());
  // an O(...)-qualified input is inexact and cancellation exhausts it
  auto y = FieldElement::parse("1/3 + O(p^4)", spec);
  CHECK(y.known_to() == 4);
  auto d = y.sub(y);
  CHECK(d.is_zero_at_precision());
  CHECK(d.known_to() == 4);
  CHECK_THROWS_AS(d.valuation(), PrecisionExhausted);
  // the unknown tail also blocks inversion of small differences
  auto z = x.sub(y);  // O(p^4)
  CHECK(z.is_zero_at_precision());
}
