#include "uldyn/random_gen.hpp"

namespace uldyn {

FieldElement random_exact(const SpecPtr& spec, Rng& rng, int64_t vlo, int64_t vhi,
                          size_t max_len) {
  int64_t v = rng.range(vlo, vhi);
  size_t len = 1 + rng.below(max_len);
  std::vector<uint32_t> digits(len);
  digits[0] = 1 + static_cast<uint32_t>(rng.below(spec->q() - 1));
  for (size_t i = 1; i < len; ++i) digits[i] = static_cast<uint32_t>(rng.below(spec->q()));
  return FieldElement::from_digits(spec, v, std::move(digits), FieldElement::kExact);
}

FieldElement random_element(const SpecPtr& spec, Rng& rng, int64_t vlo, int64_t vhi) {
  uint64_t k = rng.below(10);
  if (k == 8) return FieldElement::zero(spec);
  if (k == 9) return FieldElement::zero_at_precision(spec, spec->precision);
  FieldElement x = random_exact(spec, rng, vlo, vhi);
  if (k >= 6) x = x.truncated(spec->precision);
  return x;
}

VectorK random_vector(const SpecPtr& spec, size_t n, Rng& rng, int64_t vlo, int64_t vhi) {
  VectorK v(n);
  for (size_t i = 0; i < n; ++i)
    v[i] = rng.below(6) == 0 ? FieldElement::zero(spec) : random_exact(spec, rng, vlo, vhi);
  return v;
}

Unimodular random_unimodular(const SpecPtr& spec, size_t n, Rng& rng, size_t steps) {
  if (steps == 0) steps = 2 * n + 2;
  MatrixK U = MatrixK::identity(spec, n);
  MatrixK Uinv = MatrixK::identity(spec, n);
  for (size_t s = 0; s < steps; ++s) {
    if (n >= 2 && rng.below(4) == 0) {
      // permutation swap
      size_t i = rng.below(n), j = rng.below(n);
      if (i == j) continue;
      for (size_t k = 0; k < n; ++k) std::swap(U.at(k, i), U.at(k, j));
      for (size_t k = 0; k < n; ++k) std::swap(Uinv.at(i, k), Uinv.at(j, k));
    } else if (n >= 2) {
      // shear: col_i += m * col_j  (inverse: row update on the other side)
      size_t i = rng.below(n), j = rng.below(n);
      if (i == j) continue;
      FieldElement m = random_exact(spec, rng, 0, 2, 3);
      for (size_t k = 0; k < n; ++k) U.at(k, i) = U.at(k, i).add(m.mul(U.at(k, j)));
      for (size_t k = 0; k < n; ++k) Uinv.at(j, k) = Uinv.at(j, k).sub(m.mul(Uinv.at(i, k)));
    }
  }
  return {std::move(U), std::move(Uinv)};
}

PlantedMatrix random_planted(const SpecPtr& spec, size_t n, Rng& rng, bool allow_zero_root,
                             bool allow_fractional, int64_t vlo, int64_t vhi) {
  PlantedMatrix out;
  MatrixK B(spec, n, n);
  size_t pos = 0;
  while (pos < n) {
    size_t room = n - pos;
    uint64_t kind = rng.below(10);
    if (allow_zero_root && kind == 0) {
      // nilpotent Jordan block of size k (zero characteristic value)
      size_t k = 1 + rng.below(std::min<uint64_t>(room, 3));
      for (size_t i = 0; i + 1 < k; ++i)
        B.at(pos + i, pos + i + 1) = FieldElement::one(spec);
      out.zero_multiplicity += static_cast<long long>(k);
      pos += k;
    } else if (allow_fractional && kind <= 2 && room >= 2) {
      // companion block of T^b - pi^a with gcd(a, b) = 1: pure slope a/b
      long long b = 2 + static_cast<long long>(rng.below(std::min<uint64_t>(room, 3) - 1));
      long long a = 0;
      do {
        a = rng.range(std::max<int64_t>(vlo, -3), std::min<int64_t>(vhi, 3));
      } while (a == 0 || std::gcd(std::abs(a), b) != 1);
      for (long long i = 0; i + 1 < b; ++i)
        B.at(pos + static_cast<size_t>(i) + 1, pos + static_cast<size_t>(i)) =
            FieldElement::one(spec);
      B.at(pos, pos + static_cast<size_t>(b) - 1) = FieldElement::uniformizer_pow(spec, a);
      out.slopes[Rat(a, b)] += b;
      pos += static_cast<size_t>(b);
    } else if (kind <= 5 && room >= 2 && rng.below(2) == 0) {
      // Jordan-type block: lambda I + nilpotent shift, |.|-pure
      size_t k = 2 + rng.below(std::min<uint64_t>(room, 3) - 1);
      FieldElement lam = random_exact(spec, rng, vlo, vhi, 2);
      int64_t v = lam.valuation();
      for (size_t i = 0; i < k; ++i) {
        B.at(pos + i, pos + i) = lam;
        if (i + 1 < k) B.at(pos + i, pos + i + 1) = FieldElement::uniformizer_pow(spec, v);
      }
      out.slopes[Rat(v)] += static_cast<long long>(k);
      pos += k;
    } else {
      // diagonal entry
      FieldElement c = random_exact(spec, rng, vlo, vhi, 2);
      out.slopes[Rat(c.valuation())] += 1;
      B.at(pos, pos) = c;
      pos += 1;
    }
  }
  Unimodular u = random_unimodular(spec, n, rng);
  out.matrix = u.mat.mul(B.mul(u.inv));
  return out;
}

}  // namespace uldyn
