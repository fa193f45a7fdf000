#include "uldyn/field_arith.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

namespace uldyn {

using boost::multiprecision::cpp_int;

struct PadicRat {
  cpp_int num;  // nonzero, signed, coprime to p
  cpp_int den;  // positive, coprime to p
};

long long floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

long long ceil_div(long long a, long long b) { return -floor_div(-a, b); }

std::string rat_str(const Rat& r) {
  std::ostringstream os;
  os << r.numerator();
  if (r.denominator() != 1) os << "/" << r.denominator();
  return os.str();
}

std::string NormValue::str() const {
  if (zero_) return "0";
  return "q^" + rat_str(exp_);
}

int64_t prec_add(int64_t a, int64_t b) {
  if (a == FieldElement::kExact || b == FieldElement::kExact) return FieldElement::kExact;
  return a + b;
}

int64_t prec_min(int64_t a, int64_t b) { return std::min(a, b); }

bool is_prime_u32(uint32_t n) {
  if (n < 2) return false;
  for (uint32_t d = 2; static_cast<uint64_t>(d) * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// ---------------------------------------------------------------------------
// residue field
// ---------------------------------------------------------------------------

namespace {

using SmallPoly = std::vector<uint32_t>;  // coeffs over F_p, constant first

SmallPoly poly_mulmod(const SmallPoly& a, const SmallPoly& b, const SmallPoly& mod, uint32_t p) {
  SmallPoly prod(a.size() + b.size() - 1, 0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j)
      prod[i + j] = static_cast<uint32_t>((prod[i + j] + static_cast<uint64_t>(a[i]) * b[j]) % p);
  size_t f = mod.size() - 1;
  for (size_t i = prod.size(); i-- > f;) {
    uint32_t c = prod[i];
    if (c == 0) continue;
    prod[i] = 0;
    for (size_t j = 0; j < f; ++j) {
      uint64_t sub = static_cast<uint64_t>(c) * mod[j] % p;
      prod[i - f + j] = static_cast<uint32_t>((prod[i - f + j] + p - sub) % p);
    }
  }
  prod.resize(f);
  return prod;
}

SmallPoly poly_powmod(SmallPoly base, cpp_int e, const SmallPoly& mod, uint32_t p) {
  SmallPoly result(mod.size() - 1, 0);
  result[0] = 1;
  while (e > 0) {
    if ((e & 1) != 0) result = poly_mulmod(result, base, mod, p);
    base = poly_mulmod(base, base, mod, p);
    e >>= 1;
  }
  return result;
}

bool poly_is_zero(const SmallPoly& a) {
  return std::all_of(a.begin(), a.end(), [](uint32_t c) { return c == 0; });
}

uint32_t mod_inv_prime(uint32_t a, uint32_t p) {
  uint64_t r = 1, b = a % p;
  uint32_t e = p - 2;
  while (e) {
    if (e & 1) r = r * b % p;
    b = b * b % p;
    e >>= 1;
  }
  return static_cast<uint32_t>(r);
}

SmallPoly poly_mod_small(SmallPoly a, const SmallPoly& b, uint32_t p) {
  auto deg = [](const SmallPoly& x) {
    for (size_t i = x.size(); i-- > 0;)
      if (x[i] != 0) return static_cast<int>(i);
    return -1;
  };
  int db = deg(b);
  uint32_t lead_inv = mod_inv_prime(b[static_cast<size_t>(db)], p);
  while (true) {
    int da = deg(a);
    if (da < db) break;
    uint32_t c = static_cast<uint32_t>(static_cast<uint64_t>(a[static_cast<size_t>(da)]) * lead_inv % p);
    for (int j = 0; j <= db; ++j) {
      uint64_t sub = static_cast<uint64_t>(c) * b[static_cast<size_t>(j)] % p;
      auto& slot = a[static_cast<size_t>(da - db + j)];
      slot = static_cast<uint32_t>((slot + p - sub) % p);
    }
  }
  return a;
}

bool poly_coprime(SmallPoly a, SmallPoly b, uint32_t p) {
  auto deg = [](const SmallPoly& x) {
    for (size_t i = x.size(); i-- > 0;)
      if (x[i] != 0) return static_cast<int>(i);
    return -1;
  };
  while (deg(b) >= 0) {
    a = poly_mod_small(std::move(a), b, p);
    std::swap(a, b);
  }
  return deg(a) == 0;
}

bool is_irreducible(const SmallPoly& low, uint32_t p, uint32_t f) {
  SmallPoly g(low);
  g.push_back(1);
  SmallPoly x(f, 0);
  if (f >= 2) x[1] = 1;
  cpp_int pf = 1;
  for (uint32_t i = 0; i < f; ++i) pf *= p;
  SmallPoly xq = poly_powmod(x, pf, g, p);
  SmallPoly diff = xq;
  diff[1] = (diff[1] + p - 1) % p;
  if (!poly_is_zero(diff)) return false;
  for (uint32_t l = 2; l <= f; ++l) {
    if (f % l != 0 || !is_prime_u32(l)) continue;
    cpp_int pk = 1;
    for (uint32_t i = 0; i < f / l; ++i) pk *= p;
    SmallPoly xk = poly_powmod(x, pk, g, p);
    xk[1] = (xk[1] + p - 1) % p;
    if (poly_is_zero(xk)) return false;
    if (!poly_coprime(g, xk, p)) return false;
  }
  return true;
}

SmallPoly default_modulus(uint32_t p, uint32_t f) {
  uint64_t q = 1;
  for (uint32_t i = 0; i < f; ++i) q *= p;
  for (uint64_t code = 1; code < q; ++code) {
    SmallPoly low(f, 0);
    uint64_t c = code;
    for (uint32_t i = 0; i < f; ++i) {
      low[i] = static_cast<uint32_t>(c % p);
      c /= p;
    }
    if (low[0] == 0) continue;
    if (is_irreducible(low, p, f)) return low;
  }
  throw RangeError("no irreducible polynomial found (bad p, f)");
}

constexpr uint64_t kTableLimit = 512;

}  // namespace

ResidueField::ResidueField(uint32_t p, uint32_t f) : p_(p), f_(f) {
  if (!is_prime_u32(p)) throw RangeError("residue characteristic must be prime");
  if (f < 1 || f > 16) throw RangeError("extension degree out of range");
  q_ = 1;
  for (uint32_t i = 0; i < f; ++i) {
    q_ *= p;
    if (q_ > (1ull << 20)) throw RangeError("residue field too large");
  }
  if (f > 1) modulus_ = default_modulus(p, f);
  if (f > 1 && q_ <= kTableLimit) {
    mul_table_.assign(q_ * q_, 0);
    inv_table_.assign(q_, 0);
    SmallPoly g(modulus_);
    g.push_back(1);
    for (uint64_t a = 0; a < q_; ++a)
      for (uint64_t b = a; b < q_; ++b) {
        uint32_t prod = encode(poly_mulmod(decode(static_cast<uint32_t>(a)),
                                           decode(static_cast<uint32_t>(b)), g, p_));
        mul_table_[a * q_ + b] = prod;
        mul_table_[b * q_ + a] = prod;
        if (prod == 1) {
          inv_table_[a] = static_cast<uint32_t>(b);
          inv_table_[b] = static_cast<uint32_t>(a);
        }
      }
  }
}

ResidueField::ResidueField(uint32_t p, std::vector<uint32_t> modulus_low_coeffs)
    : p_(p),
      f_(static_cast<uint32_t>(modulus_low_coeffs.size())),
      modulus_(std::move(modulus_low_coeffs)) {
  if (!is_prime_u32(p)) throw RangeError("residue characteristic must be prime");
  if (f_ < 2 || f_ > 16) throw RangeError("extension degree out of range");
  for (auto& c : modulus_) c %= p;
  if (!is_irreducible(modulus_, p_, f_)) throw RangeError("modulus polynomial is reducible");
  q_ = 1;
  for (uint32_t i = 0; i < f_; ++i) q_ *= p;
}

std::vector<uint32_t> ResidueField::decode(uint32_t a) const {
  std::vector<uint32_t> c(f_, 0);
  for (uint32_t i = 0; i < f_; ++i) {
    c[i] = a % p_;
    a /= p_;
  }
  return c;
}

uint32_t ResidueField::encode(const std::vector<uint32_t>& c) const {
  uint32_t a = 0;
  for (uint32_t i = f_; i-- > 0;) a = a * p_ + c[i];
  return a;
}

uint32_t ResidueField::add(uint32_t a, uint32_t b) const {
  if (f_ == 1) return (a + b) % p_;
  std::vector<uint32_t> ca = decode(a), cb = decode(b);
  for (uint32_t i = 0; i < f_; ++i) ca[i] = (ca[i] + cb[i]) % p_;
  return encode(ca);
}

uint32_t ResidueField::neg(uint32_t a) const {
  if (f_ == 1) return a == 0 ? 0 : p_ - a;
  std::vector<uint32_t> c = decode(a);
  for (uint32_t i = 0; i < f_; ++i) c[i] = c[i] == 0 ? 0 : p_ - c[i];
  return encode(c);
}

uint32_t ResidueField::sub(uint32_t a, uint32_t b) const { return add(a, neg(b)); }

uint32_t ResidueField::mul(uint32_t a, uint32_t b) const {
  if (f_ == 1) return static_cast<uint32_t>(static_cast<uint64_t>(a) * b % p_);
  if (!mul_table_.empty()) return mul_table_[static_cast<uint64_t>(a) * q_ + b];
  SmallPoly g(modulus_);
  g.push_back(1);
  return encode(poly_mulmod(decode(a), decode(b), g, p_));
}

uint32_t ResidueField::inv(uint32_t a) const {
  if (a == 0) throw DivisionByZero("residue field inverse of 0");
  if (f_ == 1) return mod_inv_prime(a, p_);
  if (!inv_table_.empty()) return inv_table_[a];
  return pow(a, q_ - 2);
}

uint32_t ResidueField::pow(uint32_t a, uint64_t e) const {
  uint32_t r = 1;
  while (e) {
    if (e & 1) r = mul(r, a);
    a = mul(a, a);
    e >>= 1;
  }
  return r;
}

// ---------------------------------------------------------------------------
// field spec
// ---------------------------------------------------------------------------

SpecPtr FieldSpec::padic(uint32_t p, int64_t precision, std::string symbol) {
  if (precision < 1) throw RangeError("precision must be >= 1");
  return SpecPtr(new FieldSpec(FieldKind::padic, precision, std::move(symbol), ResidueField(p, 1)));
}

SpecPtr FieldSpec::laurent(uint32_t p, uint32_t f, int64_t precision, std::string symbol) {
  if (precision < 1) throw RangeError("precision must be >= 1");
  return SpecPtr(
      new FieldSpec(FieldKind::laurent, precision, std::move(symbol), ResidueField(p, f)));
}

SpecPtr FieldSpec::laurent_q(uint64_t q, int64_t precision, std::string symbol) {
  for (uint32_t p = 2; static_cast<uint64_t>(p) <= q; ++p) {
    if (!is_prime_u32(p) || q % p != 0) continue;
    uint64_t r = q;
    uint32_t f = 0;
    while (r % p == 0) {
      r /= p;
      ++f;
    }
    if (r != 1) break;
    return laurent(p, f, precision, std::move(symbol));
  }
  throw RangeError("q is not a prime power");
}

bool FieldSpec::same_as(const FieldSpec& other) const {
  return kind == other.kind && residue.p() == other.residue.p() &&
         residue.f() == other.residue.f() && precision == other.precision &&
         symbol == other.symbol && residue.modulus() == other.residue.modulus();
}

// ---------------------------------------------------------------------------
// F_q[t] helpers for exact laurent unit parts (coeff vectors, constant first,
// nonzero constant term once the t-valuation is factored out)
// ---------------------------------------------------------------------------

namespace {

using FqPoly = std::vector<uint32_t>;

void fq_strip_high(FqPoly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

FqPoly fq_mul(const ResidueField& rf, const FqPoly& a, const FqPoly& b) {
  if (a.empty() || b.empty()) return {};
  FqPoly c(a.size() + b.size() - 1, 0);
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (size_t j = 0; j < b.size(); ++j)
      c[i + j] = rf.add(c[i + j], rf.mul(a[i], b[j]));
  }
  return c;
}

FqPoly fq_add(const ResidueField& rf, const FqPoly& a, const FqPoly& b) {
  FqPoly c(std::max(a.size(), b.size()), 0);
  for (size_t i = 0; i < c.size(); ++i) {
    uint32_t x = i < a.size() ? a[i] : 0;
    uint32_t y = i < b.size() ? b[i] : 0;
    c[i] = rf.add(x, y);
  }
  fq_strip_high(c);
  return c;
}

FqPoly fq_neg(const ResidueField& rf, FqPoly a) {
  for (auto& c : a) c = rf.neg(c);
  return a;
}

// divide out the largest power of t; returns the exponent removed
int64_t fq_strip_low(FqPoly& a) {
  size_t k = 0;
  while (k < a.size() && a[k] == 0) ++k;
  a.erase(a.begin(), a.begin() + static_cast<long>(k));
  return static_cast<int64_t>(k);
}

FqPoly fq_rem(const ResidueField& rf, FqPoly a, const FqPoly& b) {
  // b nonzero with nonzero leading coeff
  uint32_t lead_inv = rf.inv(b.back());
  while (a.size() >= b.size()) {
    fq_strip_high(a);
    if (a.size() < b.size()) break;
    uint32_t c = rf.mul(a.back(), lead_inv);
    size_t off = a.size() - b.size();
    for (size_t j = 0; j < b.size(); ++j)
      a[off + j] = rf.sub(a[off + j], rf.mul(c, b[j]));
  }
  fq_strip_high(a);
  return a;
}

FqPoly fq_gcd(const ResidueField& rf, FqPoly a, FqPoly b) {
  fq_strip_high(a);
  fq_strip_high(b);
  while (!b.empty()) {
    a = fq_rem(rf, std::move(a), b);
    std::swap(a, b);
  }
  return a;
}

// exact division (remainder known to vanish)
FqPoly fq_divexact(const ResidueField& rf, FqPoly a, const FqPoly& b) {
  fq_strip_high(a);
  if (a.empty()) return {};
  uint32_t lead_inv = rf.inv(b.back());
  FqPoly q(a.size() - b.size() + 1, 0);
  for (size_t i = q.size(); i-- > 0;) {
    fq_strip_high(a);
    if (a.size() < b.size() + i) continue;
    uint32_t c = rf.mul(a.back(), lead_inv);
    q[i] = c;
    for (size_t j = 0; j < b.size(); ++j)
      a[i + j] = rf.sub(a[i + j], rf.mul(c, b[j]));
  }
  return q;
}

// reduce num/den by their gcd and normalize den's constant term to 1
void fq_reduce(const ResidueField& rf, FqPoly& num, FqPoly& den) {
  if (den.size() == 1 && den[0] == 1) return;
  FqPoly g = fq_gcd(rf, num, den);
  if (g.size() > 1) {
    num = fq_divexact(rf, num, g);
    den = fq_divexact(rf, den, g);
  }
  if (den[0] != 1) {
    uint32_t s = rf.inv(den[0]);
    for (auto& c : den) c = rf.mul(c, s);
    for (auto& c : num) c = rf.mul(c, s);
  }
}

// long-division digit window of num/den of given length (den[0] invertible)
FqPoly fq_window(const ResidueField& rf, const FqPoly& num, const FqPoly& den, size_t len) {
  FqPoly out(len, 0);
  FqPoly rem(num);
  rem.resize(std::max(rem.size(), len), 0);
  uint32_t d0inv = rf.inv(den[0]);
  for (size_t i = 0; i < len; ++i) {
    uint32_t e = rf.mul(rem[i], d0inv);
    out[i] = e;
    if (e == 0) continue;
    for (size_t j = 0; j < den.size() && i + j < rem.size(); ++j)
      rem[i + j] = rf.sub(rem[i + j], rf.mul(e, den[j]));
  }
  return out;
}

// p-adic digit window of num/den (both coprime to p, num may be negative)
std::vector<uint32_t> padic_window(uint32_t p, const cpp_int& num, const cpp_int& den, size_t len) {
  std::vector<uint32_t> out(len, 0);
  cpp_int r = num;
  uint32_t dinv = mod_inv_prime(static_cast<uint32_t>((den % p).convert_to<uint32_t>()), p);
  for (size_t i = 0; i < len; ++i) {
    cpp_int rd = r % p;
    if (rd < 0) rd += p;
    uint32_t e = static_cast<uint32_t>(rd.convert_to<uint32_t>() * static_cast<uint64_t>(dinv) % p);
    out[i] = e;
    r -= e * den;
    r /= p;
  }
  return out;
}

void padic_reduce(uint32_t p, int64_t& val, cpp_int& num, cpp_int& den) {
  while (num % p == 0) {
    num /= p;
    ++val;
  }
  cpp_int g = boost::multiprecision::gcd(num < 0 ? cpp_int(-num) : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// field element
// ---------------------------------------------------------------------------

FieldElement FieldElement::make_padic_exact(const SpecPtr& spec, int64_t val, PadicRat rat) {
  FieldElement e;
  e.spec_ = spec;
  if (rat.num == 0) return e;  // exact zero
  padic_reduce(spec->p(), val, rat.num, rat.den);
  e.val_ = val;
  e.known_ = kExact;
  e.rat_ = std::make_shared<const PadicRat>(std::move(rat));
  return e;
}

FieldElement FieldElement::make_laurent_exact(const SpecPtr& spec, int64_t val,
                                              std::vector<uint32_t> num,
                                              std::vector<uint32_t> den) {
  FieldElement e;
  e.spec_ = spec;
  fq_strip_high(num);
  if (num.empty()) return e;  // exact zero
  const auto& rf = spec->residue;
  val += fq_strip_low(num);
  if (den.empty()) den = {1};
  int64_t dshift = fq_strip_low(den);
  val -= dshift;
  fq_reduce(rf, num, den);
  e.val_ = val;
  e.known_ = kExact;
  e.digits_ = std::move(num);
  if (!(den.size() == 1 && den[0] == 1)) e.den_ = std::move(den);
  return e;
}

void FieldElement::normalize() {
  // inexact digit windows only
  size_t lead = 0;
  while (lead < digits_.size() && digits_[lead] == 0) ++lead;
  if (lead > 0) {
    digits_.erase(digits_.begin(), digits_.begin() + static_cast<long>(lead));
    val_ += static_cast<int64_t>(lead);
  }
  if (!digits_.empty()) {
    if (val_ >= known_) {
      digits_.clear();
    } else if (static_cast<int64_t>(digits_.size()) > known_ - val_) {
      digits_.resize(static_cast<size_t>(known_ - val_));
    }
  }
  while (!digits_.empty() && digits_.back() == 0) digits_.pop_back();
  if (digits_.empty()) val_ = 0;
}

FieldElement FieldElement::zero(const SpecPtr& spec) {
  FieldElement e;
  e.spec_ = spec;
  return e;
}

FieldElement FieldElement::one(const SpecPtr& spec) { return monomial(spec, 1, 0); }

FieldElement FieldElement::monomial(const SpecPtr& spec, uint32_t coeff, int64_t k) {
  if (coeff == 0) return zero(spec);
  if (spec->kind == FieldKind::padic)
    return make_padic_exact(spec, k, {cpp_int(coeff), cpp_int(1)});
  return make_laurent_exact(spec, k, {coeff}, {});
}

FieldElement FieldElement::zero_at_precision(const SpecPtr& spec, int64_t known) {
  FieldElement e;
  e.spec_ = spec;
  e.known_ = known;
  return e;
}

FieldElement FieldElement::from_digits(const SpecPtr& spec, int64_t valuation,
                                       std::vector<uint32_t> digits, int64_t known) {
  if (known == kExact) {
    if (spec->kind == FieldKind::laurent)
      return make_laurent_exact(spec, valuation, std::move(digits), {});
    cpp_int num = 0;
    for (size_t i = digits.size(); i-- > 0;) num = num * spec->p() + digits[i];
    return make_padic_exact(spec, valuation, {num, cpp_int(1)});
  }
  FieldElement e;
  e.spec_ = spec;
  e.val_ = valuation;
  e.digits_ = std::move(digits);
  e.known_ = known;
  e.normalize();
  return e;
}

FieldElement FieldElement::from_integer(const SpecPtr& spec, long long value) {
  return from_rational(spec, value, 1);
}

FieldElement FieldElement::from_rational(const SpecPtr& spec, long long num, long long den) {
  if (den == 0) throw DivisionByZero("from_rational");
  if (num == 0) return zero(spec);
  if (den < 0) {
    den = -den;
    num = -num;
  }
  if (spec->kind == FieldKind::padic) {
    int64_t val = 0;
    cpp_int n = num, d = den;
    uint32_t p = spec->p();
    while (d % p == 0) {
      d /= p;
      --val;
    }
    return make_padic_exact(spec, val, {n, d});
  }
  // laurent: reduce numerator and denominator into F_p
  const auto& rf = spec->residue;
  auto to_coeff = [&](long long v) -> uint32_t {
    long long m = v % spec->p();
    if (m < 0) m += spec->p();
    return static_cast<uint32_t>(m);
  };
  uint32_t n = to_coeff(num);
  uint32_t d = to_coeff(den);
  if (d == 0) throw DivisionByZero("from_rational: denominator is 0 in the residue field");
  if (n == 0) return zero(spec);
  return monomial(spec, rf.mul(n, rf.inv(d)), 0);
}

int64_t FieldElement::valuation() const {
  if (is_significant()) return val_;
  if (is_exact_zero()) return kInfValuation;
  throw PrecisionExhausted("valuation of zero-at-precision element (O(pi^" +
                           std::to_string(known_) + "))");
}

int64_t FieldElement::valuation_lower_bound() const {
  if (is_significant()) return val_;
  if (is_exact_zero()) return kInfValuation;
  return known_;
}

NormValue FieldElement::abs() const {
  if (is_exact_zero()) return NormValue::zero();
  return NormValue::qpow(Rat(-valuation()));
}

std::vector<uint32_t> FieldElement::unit_window(size_t len) const {
  // unit-part digits for significant elements
  if (!is_exact()) {
    std::vector<uint32_t> w(digits_);
    w.resize(std::max(w.size(), len), 0);
    w.resize(len);
    return w;
  }
  if (spec_->kind == FieldKind::padic) return padic_window(spec_->p(), rat_->num, rat_->den, len);
  FqPoly den = den_.empty() ? FqPoly{1} : den_;
  return fq_window(spec_->residue, digits_, den, len);
}

FieldElement FieldElement::to_window(int64_t k) const {
  if (!is_significant()) {
    FieldElement e;
    e.spec_ = spec_;
    e.known_ = prec_min(known_, k);
    return e;
  }
  if (k <= val_) return zero_at_precision(spec_, k);
  FieldElement e;
  e.spec_ = spec_;
  e.val_ = val_;
  e.known_ = prec_min(known_, k);
  e.digits_ = unit_window(static_cast<size_t>(e.known_ - val_));
  e.normalize();
  return e;
}

std::vector<uint32_t> FieldElement::digits() const {
  if (!is_significant()) return {};
  if (!is_exact()) return digits_;
  if (spec_->kind == FieldKind::laurent && den_.empty()) return digits_;
  std::vector<uint32_t> w = unit_window(static_cast<size_t>(spec_->precision));
  while (!w.empty() && w.back() == 0) w.pop_back();
  return w;
}

uint32_t FieldElement::digit_at(int64_t k) const {
  if (!is_significant() || k < val_) return 0;
  size_t idx = static_cast<size_t>(k - val_);
  if (!is_exact()) return idx < digits_.size() ? digits_[idx] : 0;
  if (spec_->kind == FieldKind::laurent && den_.empty())
    return idx < digits_.size() ? digits_[idx] : 0;
  return unit_window(idx + 1)[idx];
}

FieldElement FieldElement::truncated(int64_t abs_prec) const {
  if (abs_prec == kExact) return *this;
  return to_window(abs_prec);
}

FieldElement FieldElement::shifted(int64_t k) const {
  FieldElement e(*this);
  if (e.is_exact_zero()) return e;
  if (e.is_significant()) e.val_ += k;
  e.known_ = prec_add(e.known_, k);
  return e;
}

FieldElement FieldElement::add(const FieldElement& o) const {
  if (!spec_->same_as(*o.spec_)) throw RangeError("field spec mismatch in add");
  if (is_exact_zero()) return o;
  if (o.is_exact_zero()) return *this;
  int64_t known = prec_min(known_, o.known_);
  if (is_zero_at_precision()) return o.truncated(known);
  if (o.is_zero_at_precision()) return truncated(known);

  if (is_exact() && o.is_exact()) {
    int64_t v = std::min(val_, o.val_);
    if (spec_->kind == FieldKind::padic) {
      cpp_int pw1 = 1, pw2 = 1;
      for (int64_t i = 0; i < val_ - v; ++i) pw1 *= spec_->p();
      for (int64_t i = 0; i < o.val_ - v; ++i) pw2 *= spec_->p();
      PadicRat r;
      r.num = rat_->num * o.rat_->den * pw1 + o.rat_->num * rat_->den * pw2;
      r.den = rat_->den * o.rat_->den;
      return make_padic_exact(spec_, v, std::move(r));
    }
    const auto& rf = spec_->residue;
    FqPoly d1 = den_.empty() ? FqPoly{1} : den_;
    FqPoly d2 = o.den_.empty() ? FqPoly{1} : o.den_;
    FqPoly t1(static_cast<size_t>(val_ - v), 0), t2(static_cast<size_t>(o.val_ - v), 0);
    t1.push_back(1);
    t2.push_back(1);
    FqPoly num = fq_add(rf, fq_mul(rf, fq_mul(rf, digits_, d2), t1),
                        fq_mul(rf, fq_mul(rf, o.digits_, d1), t2));
    return make_laurent_exact(spec_, v, std::move(num), fq_mul(rf, d1, d2));
  }

  // at least one side is an inexact window: materialize and add digitwise
  FieldElement x = to_window(known);
  FieldElement y = o.to_window(known);
  if (x.is_zero_at_precision()) return y;
  if (y.is_zero_at_precision()) return x;

  int64_t lo = std::min(x.val_, y.val_);
  int64_t hi = std::max(x.val_ + static_cast<int64_t>(x.digits_.size()),
                        y.val_ + static_cast<int64_t>(y.digits_.size()));
  hi = std::min(hi, known);

  FieldElement r;
  r.spec_ = spec_;
  r.val_ = lo;
  r.known_ = known;
  const auto& rf = spec_->residue;
  if (spec_->kind == FieldKind::laurent) {
    r.digits_.resize(static_cast<size_t>(hi - lo), 0);
    for (int64_t k = lo; k < hi; ++k)
      r.digits_[static_cast<size_t>(k - lo)] = rf.add(x.digit_at(k), y.digit_at(k));
  } else {
    uint32_t p = spec_->p();
    int64_t len = std::min(hi - lo + 1, known - lo);
    r.digits_.assign(static_cast<size_t>(std::max<int64_t>(len, 0)), 0);
    uint32_t carry = 0;
    for (int64_t i = 0; i < static_cast<int64_t>(r.digits_.size()); ++i) {
      uint32_t s = x.digit_at(lo + i) + y.digit_at(lo + i) + carry;
      r.digits_[static_cast<size_t>(i)] = s % p;
      carry = s / p;
    }
  }
  r.normalize();
  return r;
}

FieldElement FieldElement::neg() const {
  if (!is_significant()) return *this;
  if (is_exact()) {
    if (spec_->kind == FieldKind::padic)
      return make_padic_exact(spec_, val_, {-rat_->num, rat_->den});
    FieldElement e(*this);
    e.digits_ = fq_neg(spec_->residue, e.digits_);
    return e;
  }
  FieldElement r;
  r.spec_ = spec_;
  r.val_ = val_;
  r.known_ = known_;
  const auto& rf = spec_->residue;
  if (spec_->kind == FieldKind::laurent) {
    r.digits_.resize(digits_.size());
    for (size_t i = 0; i < digits_.size(); ++i) r.digits_[i] = rf.neg(digits_[i]);
  } else {
    uint32_t p = spec_->p();
    size_t len = static_cast<size_t>(known_ - val_);
    r.digits_.resize(len);
    for (size_t i = 0; i < len; ++i) {
      uint32_t d = digit_at(val_ + static_cast<int64_t>(i));
      r.digits_[i] = i == 0 ? p - d : p - 1 - d;
    }
  }
  r.normalize();
  return r;
}

FieldElement FieldElement::mul(const FieldElement& o) const {
  if (!spec_->same_as(*o.spec_)) throw RangeError("field spec mismatch in mul");
  if (is_exact_zero() || o.is_exact_zero()) return zero(spec_);
  if (is_zero_at_precision() || o.is_zero_at_precision())
    return zero_at_precision(spec_, valuation_lower_bound() + o.valuation_lower_bound());

  if (is_exact() && o.is_exact()) {
    if (spec_->kind == FieldKind::padic)
      return make_padic_exact(spec_, val_ + o.val_,
                              {rat_->num * o.rat_->num, rat_->den * o.rat_->den});
    const auto& rf = spec_->residue;
    FqPoly d1 = den_.empty() ? FqPoly{1} : den_;
    FqPoly d2 = o.den_.empty() ? FqPoly{1} : o.den_;
    return make_laurent_exact(spec_, val_ + o.val_, fq_mul(rf, digits_, o.digits_),
                              fq_mul(rf, d1, d2));
  }

  int64_t val = val_ + o.val_;
  int64_t known = prec_min(prec_add(val_, o.known_), prec_add(o.val_, known_));
  int64_t len64 = known - val;
  if (len64 <= 0) return zero_at_precision(spec_, known);
  size_t len = static_cast<size_t>(len64);
  std::vector<uint32_t> xd = unit_window(len);
  std::vector<uint32_t> yd = o.unit_window(len);

  FieldElement r;
  r.spec_ = spec_;
  r.val_ = val;
  r.known_ = known;
  if (spec_->kind == FieldKind::laurent) {
    const auto& rf = spec_->residue;
    r.digits_.assign(len, 0);
    for (size_t i = 0; i < len; ++i) {
      if (xd[i] == 0) continue;
      for (size_t j = 0; i + j < len; ++j)
        r.digits_[i + j] = rf.add(r.digits_[i + j], rf.mul(xd[i], yd[j]));
    }
  } else {
    uint64_t p = spec_->p();
    std::vector<uint64_t> acc(len + 1, 0);
    for (size_t i = 0; i < len; ++i) {
      if (xd[i] == 0) continue;
      uint64_t di = xd[i];
      for (size_t j = 0; i + j < len; ++j) acc[i + j] += di * yd[j];
    }
    r.digits_.assign(len, 0);
    uint64_t carry = 0;
    for (size_t i = 0; i < len; ++i) {
      uint64_t s = acc[i] + carry;
      r.digits_[i] = static_cast<uint32_t>(s % p);
      carry = s / p;
    }
  }
  r.normalize();
  return r;
}

FieldElement FieldElement::inv() const {
  if (is_exact_zero()) throw DivisionByZero("inv of exact zero");
  if (is_zero_at_precision())
    throw PrecisionExhausted("inv of zero-at-precision element (O(pi^" +
                             std::to_string(known_) + "))");
  if (is_exact()) {
    if (spec_->kind == FieldKind::padic) {
      PadicRat r;
      r.num = rat_->num < 0 ? -rat_->den : rat_->den;
      r.den = rat_->num < 0 ? cpp_int(-rat_->num) : rat_->num;
      return make_padic_exact(spec_, -val_, std::move(r));
    }
    FqPoly den = den_.empty() ? FqPoly{1} : den_;
    return make_laurent_exact(spec_, -val_, std::move(den), digits_);
  }
  // inexact: invert the digit window at the same relative precision
  const auto& rf = spec_->residue;
  size_t len = static_cast<size_t>(known_ - val_);
  FieldElement r;
  r.spec_ = spec_;
  r.val_ = -val_;
  r.known_ = -val_ + static_cast<int64_t>(len);
  if (spec_->kind == FieldKind::laurent) {
    r.digits_ = fq_window(rf, {1}, digits_, len);
  } else {
    uint32_t p = spec_->p();
    cpp_int num = 0;
    for (size_t i = digits_.size(); i-- > 0;) num = num * p + digits_[i];
    r.digits_ = padic_window(p, cpp_int(1), num, len);
  }
  r.normalize();
  return r;
}

bool FieldElement::eq_at_precision(const FieldElement& o) const {
  if (is_exact() && o.is_exact()) {
    if (is_exact_zero() || o.is_exact_zero()) return is_exact_zero() == o.is_exact_zero();
    if (val_ != o.val_) return false;
    if (spec_->kind == FieldKind::padic)
      return rat_->num == o.rat_->num && rat_->den == o.rat_->den;
    return digits_ == o.digits_ && den_ == o.den_;
  }
  FieldElement d = sub(o);
  return !d.is_significant();
}

// ---------------------------------------------------------------------------
// parse / render
// ---------------------------------------------------------------------------

namespace {

struct Cursor {
  const std::string& s;
  size_t i = 0;
  void skip_ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool eof() {
    skip_ws();
    return i >= s.size();
  }
  char peek() {
    skip_ws();
    return i < s.size() ? s[i] : '\0';
  }
  bool accept(char c) {
    skip_ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  bool accept_str(const std::string& t) {
    skip_ws();
    if (s.compare(i, t.size(), t) == 0) {
      i += t.size();
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) { throw SyntaxError(what, i); }
};

cpp_int parse_unsigned_bigint(Cursor& c) {
  c.skip_ws();
  size_t start = c.i;
  cpp_int v = 0;
  while (c.i < c.s.size() && std::isdigit(static_cast<unsigned char>(c.s[c.i]))) {
    v = v * 10 + (c.s[c.i] - '0');
    ++c.i;
  }
  if (c.i == start) c.fail("expected digits");
  return v;
}

long long parse_signed_int(Cursor& c) {
  c.skip_ws();
  bool negative = false;
  if (c.accept('-'))
    negative = true;
  else
    c.accept('+');
  cpp_int v = parse_unsigned_bigint(c);
  if (v > std::numeric_limits<long long>::max()) c.fail("exponent too large");
  long long r = v.convert_to<long long>();
  return negative ? -r : r;
}

std::optional<int64_t> parse_big_o(Cursor& c, const std::string& symbol, uint32_t p,
                                   FieldKind kind) {
  size_t save = c.i;
  if (!c.accept('+')) return std::nullopt;
  if (!c.accept('O')) {
    c.i = save;
    return std::nullopt;
  }
  if (!c.accept('(')) c.fail("expected ( after O");
  if (!c.accept_str(symbol)) {
    if (kind != FieldKind::padic || !c.accept_str(std::to_string(p)))
      c.fail("expected uniformizer in O(...)");
  }
  int64_t k = 1;
  if (c.accept('^')) k = parse_signed_int(c);
  if (!c.accept(')')) c.fail("expected )");
  return k;
}

struct ParsedPadic {
  bool is_zero = false;
  cpp_int num;
  cpp_int den;
  int64_t val = 0;
  std::optional<int64_t> osuffix;
};

ParsedPadic parse_padic_parts(const std::string& text, const SpecPtr& spec) {
  Cursor c{text};
  uint32_t p = spec->p();
  ParsedPadic out;

  if (c.peek() == 'O') {
    std::string with_plus = "+" + text;
    Cursor c2{with_plus};
    auto k = parse_big_o(c2, spec->symbol, p, FieldKind::padic);
    if (!k || !c2.eof()) c.fail("bad O(...) form");
    out.is_zero = true;
    out.osuffix = k;
    return out;
  }

  bool negative = false;
  if (c.accept('-'))
    negative = true;
  else
    c.accept('+');
  cpp_int num = parse_unsigned_bigint(c);
  cpp_int den = 1;
  if (c.accept('/')) den = parse_unsigned_bigint(c);
  if (den == 0) c.fail("zero denominator");
  out.osuffix = parse_big_o(c, spec->symbol, p, FieldKind::padic);
  if (!c.eof()) c.fail("trailing input");

  if (negative) num = -num;
  if (num == 0) {
    out.is_zero = true;
    return out;
  }
  int64_t val = 0;
  while (den % p == 0) {
    den /= p;
    --val;
  }
  out.num = std::move(num);
  out.den = std::move(den);
  out.val = val;
  return out;
}

FieldElement parse_laurent(const std::string& text, const SpecPtr& spec) {
  Cursor c{text};
  const auto& rf = spec->residue;

  if (c.peek() == 'O') {
    std::string with_plus = "+" + text;
    Cursor c2{with_plus};
    auto k = parse_big_o(c2, spec->symbol, spec->p(), FieldKind::laurent);
    if (!k || !c2.eof()) c.fail("bad O(...) form");
    return FieldElement::zero_at_precision(spec, *k);
  }

  FieldElement acc = FieldElement::zero(spec);
  std::optional<int64_t> osuffix;
  bool first = true;
  while (!c.eof()) {
    if (!first) {
      Cursor c2{text};
      c2.i = c.i;
      osuffix = parse_big_o(c2, spec->symbol, spec->p(), FieldKind::laurent);
      if (osuffix) {
        c.i = c2.i;
        break;
      }
    }
    bool negative = false;
    if (c.accept('-'))
      negative = true;
    else if (!first && !c.accept('+'))
      c.fail("expected + or -");
    else if (first)
      c.accept('+');

    uint32_t coeff = 1;
    bool have_coeff = false;
    c.skip_ws();
    if (c.i < c.s.size() && std::isdigit(static_cast<unsigned char>(c.s[c.i]))) {
      cpp_int v = parse_unsigned_bigint(c);
      if (spec->residue.f() == 1) {
        coeff = (v % spec->p()).convert_to<uint32_t>();
      } else {
        if (v >= spec->q()) c.fail("residue coefficient out of range");
        coeff = v.convert_to<uint32_t>();
      }
      have_coeff = true;
    }
    int64_t k = 0;
    bool have_sym = false;
    {
      size_t save = c.i;
      bool star = c.accept('*');
      if (c.accept_str(spec->symbol)) {
        have_sym = true;
        k = 1;
        if (c.accept('^')) k = parse_signed_int(c);
      } else {
        if (star) c.fail("expected uniformizer after *");
        c.i = save;
      }
    }
    if (!have_coeff && !have_sym) c.fail("expected term");
    if (negative) coeff = rf.neg(coeff);
    acc = acc.add(FieldElement::monomial(spec, coeff, k));
    first = false;
  }
  if (!c.eof()) c.fail("trailing input");
  if (osuffix) acc = acc.truncated(*osuffix);
  return acc;
}

}  // namespace

FieldElement FieldElement::parse(const std::string& text, const SpecPtr& spec) {
  Cursor c{text};
  if (c.eof()) throw SyntaxError("empty input", 0);
  if (spec->kind == FieldKind::padic) {
    ParsedPadic parts = parse_padic_parts(text, spec);
    if (parts.is_zero) {
      if (parts.osuffix) return zero_at_precision(spec, *parts.osuffix);
      return zero(spec);
    }
    FieldElement out =
        make_padic_exact(spec, parts.val, {std::move(parts.num), std::move(parts.den)});
    if (parts.osuffix) out = out.truncated(*parts.osuffix);
    return out;
  }
  return parse_laurent(text, spec);
}

std::string FieldElement::render() const {
  if (is_exact_zero()) return "0";
  const std::string& sym = spec_->symbol;
  if (is_zero_at_precision()) return "O(" + sym + "^" + std::to_string(known_) + ")";
  std::ostringstream os;
  if (spec_->kind == FieldKind::padic) {
    if (is_exact()) {
      cpp_int a = rat_->num < 0 ? cpp_int(-rat_->num) : rat_->num;
      cpp_int b = rat_->den;
      if (val_ >= 0)
        for (int64_t i = 0; i < val_; ++i) a *= spec_->p();
      else
        for (int64_t i = 0; i < -val_; ++i) b *= spec_->p();
      if (rat_->num < 0) os << "-";
      os << a;
      if (b != 1) os << "/" << b;
      return os.str();
    }
    cpp_int unit = 0;
    for (size_t i = digits_.size(); i-- > 0;) unit = unit * spec_->p() + digits_[i];
    if (val_ >= 0) {
      cpp_int v = unit;
      for (int64_t i = 0; i < val_; ++i) v *= spec_->p();
      os << v;
    } else {
      cpp_int den = 1;
      for (int64_t i = 0; i < -val_; ++i) den *= spec_->p();
      os << unit << "/" << den;
    }
    os << " + O(" << sym << "^" << known_ << ")";
    return os.str();
  }
  // laurent: exact rational functions materialize a window under an O(...) tail
  const FieldElement* self = this;
  FieldElement boxed;
  if (is_exact() && !den_.empty()) {
    boxed = to_window(val_ + spec_->precision);
    self = &boxed;
  }
  bool first = true;
  for (size_t i = 0; i < self->digits_.size(); ++i) {
    if (self->digits_[i] == 0) continue;
    int64_t k = self->val_ + static_cast<int64_t>(i);
    if (!first) os << " + ";
    if (k == 0) {
      os << self->digits_[i];
    } else {
      if (self->digits_[i] != 1) os << self->digits_[i] << "*";
      os << sym;
      if (k != 1) os << "^" << k;
    }
    first = false;
  }
  if (!self->is_exact()) os << " + O(" << sym << "^" << self->known_ << ")";
  return os.str();
}

}  // namespace uldyn
