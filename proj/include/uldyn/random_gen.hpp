// Seeded deterministic generators for property suites: random field elements,
// unimodular conjugators (built together with their exact inverses), and
// matrices with planted characteristic values.
#pragma once

#include <map>
#include <numeric>
#include <random>

#include "uldyn/ultralinalg.hpp"

namespace uldyn {

class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}
  uint64_t next() { return eng_(); }
  uint64_t below(uint64_t n) { return eng_() % n; }
  int64_t range(int64_t lo, int64_t hi) {  // inclusive
    return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
  }

 private:
  std::mt19937_64 eng_;
};

// exact element with valuation in [vlo, vhi] and up to max_len digits
FieldElement random_exact(const SpecPtr& spec, Rng& rng, int64_t vlo, int64_t vhi,
                          size_t max_len = 4);
// random element including occasional zeros and O(pi^N) values
FieldElement random_element(const SpecPtr& spec, Rng& rng, int64_t vlo, int64_t vhi);
VectorK random_vector(const SpecPtr& spec, size_t n, Rng& rng, int64_t vlo = -2, int64_t vhi = 2);

// product of exact shears and permutations (det = +-1); the exact inverse is
// accumulated alongside
struct Unimodular {
  MatrixK mat;
  MatrixK inv;
};
Unimodular random_unimodular(const SpecPtr& spec, size_t n, Rng& rng, size_t steps = 0);

// block-diagonal matrix with known characteristic values, conjugated by a
// random unimodular matrix; everything stays exact
struct PlantedMatrix {
  MatrixK matrix;
  std::map<Rat, long long> slopes;  // slope -> multiplicity (finite char values)
  long long zero_multiplicity = 0;  // dimension of the planted E_0
};
PlantedMatrix random_planted(const SpecPtr& spec, size_t n, Rng& rng, bool allow_zero_root = true,
                             bool allow_fractional = true, int64_t vlo = -2, int64_t vhi = 2);

}  // namespace uldyn
