#include "uldyn/poly_newton.hpp"

#include <algorithm>
#include <sstream>

namespace uldyn {

Polynomial::Polynomial(SpecPtr spec, std::vector<FieldElement> coeffs)
    : spec_(std::move(spec)), coeffs_(std::move(coeffs)) {
  while (!coeffs_.empty() && coeffs_.back().is_exact_zero()) coeffs_.pop_back();
}

Polynomial Polynomial::zero(const SpecPtr& spec) { return Polynomial(spec, {}); }

Polynomial Polynomial::one(const SpecPtr& spec) {
  return Polynomial(spec, {FieldElement::one(spec)});
}

Polynomial Polynomial::monomial(const SpecPtr& spec, const FieldElement& c, long long k) {
  std::vector<FieldElement> cs(static_cast<size_t>(k) + 1, FieldElement::zero(spec));
  cs.back() = c;
  return Polynomial(spec, std::move(cs));
}

Polynomial Polynomial::power_of_T(const SpecPtr& spec, long long k) {
  return monomial(spec, FieldElement::one(spec), k);
}

FieldElement Polynomial::coeff(long long i) const {
  if (i < 0 || i >= static_cast<long long>(coeffs_.size())) return FieldElement::zero(spec_);
  return coeffs_[static_cast<size_t>(i)];
}

bool Polynomial::monic_at_precision() const {
  if (coeffs_.empty()) return false;
  return coeffs_.back().eq_at_precision(FieldElement::one(spec_));
}

Polynomial Polynomial::add(const Polynomial& o) const {
  size_t n = std::max(coeffs_.size(), o.coeffs_.size());
  std::vector<FieldElement> cs;
  cs.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    FieldElement a = i < coeffs_.size() ? coeffs_[i] : FieldElement::zero(spec_);
    FieldElement b = i < o.coeffs_.size() ? o.coeffs_[i] : FieldElement::zero(spec_);
    cs.push_back(a.add(b));
  }
  return Polynomial(spec_, std::move(cs));
}

Polynomial Polynomial::sub(const Polynomial& o) const {
  size_t n = std::max(coeffs_.size(), o.coeffs_.size());
  std::vector<FieldElement> cs;
  cs.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    FieldElement a = i < coeffs_.size() ? coeffs_[i] : FieldElement::zero(spec_);
    FieldElement b = i < o.coeffs_.size() ? o.coeffs_[i] : FieldElement::zero(spec_);
    cs.push_back(a.sub(b));
  }
  return Polynomial(spec_, std::move(cs));
}

Polynomial Polynomial::mul(const Polynomial& o) const {
  if (is_zero() || o.is_zero()) return zero(spec_);
  std::vector<FieldElement> cs(coeffs_.size() + o.coeffs_.size() - 1, FieldElement::zero(spec_));
  for (size_t i = 0; i < coeffs_.size(); ++i) {
    if (coeffs_[i].is_exact_zero()) continue;
    for (size_t j = 0; j < o.coeffs_.size(); ++j)
      cs[i + j] = cs[i + j].add(coeffs_[i].mul(o.coeffs_[j]));
  }
  return Polynomial(spec_, std::move(cs));
}

Polynomial Polynomial::scaled(const FieldElement& c) const {
  std::vector<FieldElement> cs;
  cs.reserve(coeffs_.size());
  for (const auto& a : coeffs_) cs.push_back(a.mul(c));
  return Polynomial(spec_, std::move(cs));
}

Polynomial Polynomial::shifted_T(long long k) const {
  if (is_zero()) return *this;
  std::vector<FieldElement> cs(static_cast<size_t>(k), FieldElement::zero(spec_));
  cs.insert(cs.end(), coeffs_.begin(), coeffs_.end());
  return Polynomial(spec_, std::move(cs));
}

std::pair<Polynomial, Polynomial> Polynomial::divmod(const Polynomial& d) const {
  if (d.is_zero()) throw DivisionByZero("polynomial division by zero");
  if (!d.coeffs_.back().is_significant())
    throw PrecisionExhausted("polynomial division: divisor degree undetermined");
  FieldElement lead_inv = d.coeffs_.back().inv();
  std::vector<FieldElement> rem(coeffs_);
  long long dd = d.degree();
  long long dn = degree();
  if (dn < dd) return {zero(spec_), *this};
  std::vector<FieldElement> quot(static_cast<size_t>(dn - dd) + 1, FieldElement::zero(spec_));
  for (long long i = dn; i >= dd; --i) {
    FieldElement top = rem[static_cast<size_t>(i)];
    if (top.is_exact_zero()) continue;
    FieldElement q = top.mul(lead_inv);
    quot[static_cast<size_t>(i - dd)] = q;
    for (long long j = 0; j <= dd; ++j) {
      auto& slot = rem[static_cast<size_t>(i - dd + j)];
      slot = slot.sub(q.mul(d.coeffs_[static_cast<size_t>(j)]));
    }
  }
  rem.resize(static_cast<size_t>(dd));
  return {Polynomial(spec_, std::move(quot)), Polynomial(spec_, std::move(rem))};
}

FieldElement Polynomial::eval(const FieldElement& x) const {
  FieldElement acc = FieldElement::zero(spec_);
  for (size_t i = coeffs_.size(); i-- > 0;) acc = acc.mul(x).add(coeffs_[i]);
  return acc;
}

bool Polynomial::eq_at_precision(const Polynomial& o) const {
  size_t n = std::max(coeffs_.size(), o.coeffs_.size());
  for (size_t i = 0; i < n; ++i) {
    FieldElement a = i < coeffs_.size() ? coeffs_[i] : FieldElement::zero(spec_);
    FieldElement b = i < o.coeffs_.size() ? o.coeffs_[i] : FieldElement::zero(spec_);
    if (!a.eq_at_precision(b)) return false;
  }
  return true;
}

std::string Polynomial::render() const {
  if (is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (size_t i = coeffs_.size(); i-- > 0;) {
    const auto& c = coeffs_[i];
    if (c.is_exact_zero()) continue;
    if (!first) os << " + ";
    first = false;
    std::string cs = c.render();
    bool needs_parens = cs.find(' ') != std::string::npos || cs.find('+') != std::string::npos;
    if (i == 0) {
      os << (needs_parens ? "(" + cs + ")" : cs);
    } else {
      bool is_one = c.is_exact() && c.eq_at_precision(FieldElement::one(spec_));
      if (!is_one) os << (needs_parens ? "(" + cs + ")" : cs) << "*";
      os << "T";
      if (i != 1) os << "^" << i;
    }
  }
  if (first) return "0";
  return os.str();
}

Polynomial Polynomial::parse(const std::string& text, const SpecPtr& spec) {
  // split into top-level terms on +/- (respecting parentheses; signs directly
  // after '^' belong to an exponent)
  struct Term {
    std::string body;
    bool negative;
  };
  std::vector<Term> terms;
  std::string cur;
  bool cur_neg = false;
  bool seen_content = false;
  int depth = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    char ch = text[i];
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (depth == 0 && (ch == '+' || ch == '-')) {
      size_t j = cur.find_last_not_of(" \t");
      bool after_caret = j != std::string::npos && cur[j] == '^';
      if (!seen_content && ch == '-' && cur.empty()) {
        cur_neg = !cur_neg;
        continue;
      }
      if (!after_caret && seen_content) {
        terms.push_back({cur, cur_neg});
        cur.clear();
        cur_neg = ch == '-';
        seen_content = false;
        continue;
      }
    }
    if (!std::isspace(static_cast<unsigned char>(ch))) seen_content = true;
    cur += ch;
  }
  if (seen_content) terms.push_back({cur, cur_neg});
  if (terms.empty()) throw SyntaxError("empty polynomial", 0);

  Polynomial acc = Polynomial::zero(spec);
  for (const auto& t : terms) {
    const std::string& body = t.body;
    int d = 0;
    size_t tpos = std::string::npos;
    for (size_t i = 0; i < body.size(); ++i) {
      if (body[i] == '(') ++d;
      if (body[i] == ')') --d;
      if (d == 0 && body[i] == 'T') {
        tpos = i;
        break;
      }
    }
    long long k = 0;
    std::string coeff_str;
    if (tpos == std::string::npos) {
      coeff_str = body;
    } else {
      k = 1;
      coeff_str = body.substr(0, tpos);
      while (!coeff_str.empty() &&
             (std::isspace(static_cast<unsigned char>(coeff_str.back())) || coeff_str.back() == '*'))
        coeff_str.pop_back();
      std::string rest = body.substr(tpos + 1);
      size_t ri = 0;
      while (ri < rest.size() && std::isspace(static_cast<unsigned char>(rest[ri]))) ++ri;
      if (ri < rest.size() && rest[ri] == '^') {
        ++ri;
        size_t start = ri;
        if (ri < rest.size() && (rest[ri] == '-' || rest[ri] == '+')) ++ri;
        while (ri < rest.size() && std::isdigit(static_cast<unsigned char>(rest[ri]))) ++ri;
        if (ri == start) throw SyntaxError("expected exponent after ^", tpos);
        k = std::stoll(rest.substr(start, ri - start));
        while (ri < rest.size() && std::isspace(static_cast<unsigned char>(rest[ri]))) ++ri;
      }
      if (ri < rest.size()) throw SyntaxError("trailing input after T term", tpos + ri);
      if (k < 0) throw SyntaxError("negative power of T", tpos);
    }
    auto strip = [](std::string s) {
      size_t a = s.find_first_not_of(" \t");
      if (a == std::string::npos) return std::string();
      size_t b = s.find_last_not_of(" \t");
      s = s.substr(a, b - a + 1);
      if (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
        int dd = 0;
        bool outer = true;
        for (size_t i = 0; i + 1 < s.size(); ++i) {
          if (s[i] == '(') ++dd;
          if (s[i] == ')') --dd;
          if (dd == 0) {
            outer = false;
            break;
          }
        }
        if (outer) s = s.substr(1, s.size() - 2);
      }
      return s;
    };
    coeff_str = strip(coeff_str);
    FieldElement c =
        coeff_str.empty() ? FieldElement::one(spec) : FieldElement::parse(coeff_str, spec);
    if (t.negative) c = c.neg();
    acc = acc.add(Polynomial::monomial(spec, c, k));
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Newton polygon
// ---------------------------------------------------------------------------

NewtonPolygon newton_polygon(const Polynomial& f) {
  if (f.is_zero()) throw RangeError("newton polygon of the zero polynomial");
  long long n = f.degree();
  if (!f.coeff(n).is_significant())
    throw PrecisionExhausted("newton polygon: leading coefficient undetermined");

  struct Pt {
    long long i;
    int64_t v;
  };
  std::vector<Pt> pts;
  std::vector<std::pair<long long, int64_t>> undetermined;  // (index, known bound)
  for (long long i = 0; i <= n; ++i) {
    const auto& c = f.coeff(i);
    if (c.is_significant())
      pts.push_back({i, c.valuation()});
    else if (c.is_zero_at_precision())
      undetermined.push_back({i, c.known_to()});
  }

  long long i_min = pts.front().i;

  std::vector<Pt> hull;
  for (const auto& pt : pts) {
    while (hull.size() >= 2) {
      const Pt& a = hull[hull.size() - 2];
      const Pt& b = hull[hull.size() - 1];
      __int128 lhs = static_cast<__int128>(b.v - a.v) * (pt.i - a.i);
      __int128 rhs = static_cast<__int128>(pt.v - a.v) * (b.i - a.i);
      if (lhs < rhs) break;  // b strictly below chord a->pt
      hull.pop_back();
    }
    hull.push_back(pt);
  }

  auto could_dig_below = [&](long long i, int64_t bound) {
    if (i < i_min) return true;  // would shift the zero-root count
    for (size_t k = 0; k + 1 < hull.size(); ++k) {
      if (hull[k].i <= i && i <= hull[k + 1].i) {
        __int128 lhs = static_cast<__int128>(bound) * (hull[k + 1].i - hull[k].i);
        __int128 rhs = static_cast<__int128>(hull[k].v) * (hull[k + 1].i - hull[k].i) +
                       static_cast<__int128>(hull[k + 1].v - hull[k].v) * (i - hull[k].i);
        return lhs < rhs;
      }
    }
    return false;
  };
  for (const auto& [i, bound] : undetermined) {
    if (could_dig_below(i, bound))
      throw PrecisionExhausted("newton polygon: coefficient of T^" + std::to_string(i) +
                               " undetermined at the hull");
  }

  NewtonPolygon np;
  np.zero_root_multiplicity = i_min;
  for (const auto& pt : hull) np.vertices.push_back({pt.i, pt.v});
  for (size_t k = 0; k + 1 < hull.size(); ++k) {
    Rat geometric(hull[k + 1].v - hull[k].v, hull[k + 1].i - hull[k].i);
    np.segments.push_back({-geometric, hull[k + 1].i - hull[k].i});
  }
  std::reverse(np.segments.begin(), np.segments.end());
  return np;
}

// ---------------------------------------------------------------------------
// slope factorization
// ---------------------------------------------------------------------------

namespace {

// min_i (val(c_i) + w*i); undetermined coefficients contribute their bound
Rat weighted_val(const Polynomial& f, const Rat& w) {
  bool any = false;
  Rat best(0);
  for (long long i = 0; i <= f.degree(); ++i) {
    const auto& c = f.coeff(i);
    if (c.is_exact_zero()) continue;
    Rat v = Rat(c.is_significant() ? c.valuation() : c.known_to()) + w * i;
    if (!any || v < best) best = v;
    any = true;
  }
  if (!any) best = Rat(std::numeric_limits<int32_t>::max());
  return best;
}

// coefficientwise congruence to zero modulo pi^threshold, capped per
// coefficient by the reference polynomial's own precision
bool provably_zero_mod(const Polynomial& e, const Polynomial& reference, int64_t threshold) {
  long long n = std::max(e.degree(), reference.degree());
  for (long long i = 0; i <= n; ++i) {
    const auto& c = e.coeff(i);
    int64_t t = prec_min(threshold, reference.coeff(i).known_to());
    if (c.is_exact_zero()) continue;
    if (c.is_significant()) {
      if (c.valuation() < t) return false;
    } else if (c.known_to() < t) {
      return false;  // cannot certify congruence at the target precision
    }
  }
  return true;
}

struct HenselSplit {
  Polynomial lower;  // larger root valuations (left hull part), monic
  Polynomial upper;  // smaller root valuations (right hull part), monic
};

// truncate every coefficient to absolute precision cap
Polynomial capped(const Polynomial& f, int64_t cap) {
  std::vector<FieldElement> cs;
  cs.reserve(static_cast<size_t>(f.degree()) + 1);
  for (long long i = 0; i <= f.degree(); ++i) cs.push_back(f.coeff(i).truncated(cap));
  return Polynomial(f.spec(), std::move(cs));
}

// single lift attempt at scratch precision cap; returns nullopt when the
// residual bottoms out as sub-precision fuzz short of the certificate (the
// caller may retry with more scratch)
std::optional<HenselSplit> hensel_attempt(const Polynomial& f, long long k, const Rat& w,
                                          int64_t threshold, int64_t cap) {
  const SpecPtr& spec = f.spec();
  long long n = f.degree();
  FieldElement fk = f.coeff(k);
  if (!fk.is_significant())
    throw PrecisionExhausted("slope factorization: break coefficient undetermined");
  FieldElement fk_inv = fk.inv();

  std::vector<FieldElement> glow, ghigh;
  glow.reserve(static_cast<size_t>(k) + 1);
  ghigh.reserve(static_cast<size_t>(n - k) + 1);
  for (long long i = 0; i <= k; ++i) glow.push_back(f.coeff(i).mul(fk_inv));
  for (long long i = k; i <= n; ++i) ghigh.push_back(f.coeff(i));
  Polynomial g = capped(Polynomial(spec, std::move(glow)), cap);   // monic degree k
  Polynomial h = capped(Polynomial(spec, std::move(ghigh)), cap);  // monic degree n-k

  Rat excess_prev(-(1 << 20), 1);
  const int max_iter = 80;
  for (int iter = 0; iter < max_iter; ++iter) {
    Polynomial e = f.sub(g.mul(h));
    if (provably_zero_mod(e, f, threshold)) return HenselSplit{g, h};
    bool fuzz_only = true;
    for (long long i = 0; i <= e.degree(); ++i)
      if (e.coeff(i).is_significant()) fuzz_only = false;
    if (fuzz_only) return std::nullopt;  // precision floor, certificate unreachable here
    Rat excess = weighted_val(e, w);
    if (excess <= excess_prev) return std::nullopt;
    excess_prev = excess;
    auto [a, b] = bezout_pair(g, h);
    // write b*e = Q*g + dg; then dh := a*e + Q*h solves g*dh + h*dg = e exactly
    auto [Q, dg] = b.mul(e).divmod(g);
    Polynomial dh = a.mul(e).add(Q.mul(h));
    if (dh.degree() >= h.degree()) {
      // top coefficients are sub-precision fuzz; they must not disturb monicity
      std::vector<FieldElement> cs(dh.coeffs());
      for (size_t i = cs.size(); i-- > static_cast<size_t>(h.degree());) {
        if (cs[i].is_significant())
          throw PrecisionExhausted("slope factorization: correction degree overflow");
        cs.pop_back();
      }
      dh = Polynomial(spec, std::move(cs));
    }
    g = capped(g.add(dg), cap);
    h = capped(h.add(dh), cap);
  }
  return std::nullopt;
}

// thrown internally when a lift bottoms out at the current scratch budget
struct ScratchExhausted {};

}  // namespace

std::pair<Polynomial, Polynomial> bezout_pair(const Polynomial& g, const Polynomial& h) {
  const SpecPtr& spec = g.spec();
  Polynomial r0 = g, r1 = h;
  Polynomial a0 = Polynomial::one(spec), a1 = Polynomial::zero(spec);
  Polynomial b0 = Polynomial::zero(spec), b1 = Polynomial::one(spec);
  auto clip = [&](Polynomial& r) {
    // strip sub-precision fuzz from the top so degrees stay determined
    if (r.is_zero() || r.coeff(r.degree()).is_significant()) return;
    std::vector<FieldElement> cs(r.coeffs());
    while (!cs.empty() && !cs.back().is_significant()) cs.pop_back();
    r = Polynomial(spec, std::move(cs));
  };
  clip(r1);
  while (!r1.is_zero()) {
    auto [q, r2] = r0.divmod(r1);
    Polynomial a2 = a0.sub(q.mul(a1));
    Polynomial b2 = b0.sub(q.mul(b1));
    r0 = r1;
    r1 = r2;
    a0 = a1;
    a1 = a2;
    b0 = b1;
    b1 = b2;
    clip(r1);
  }
  if (r0.degree() != 0) throw PrecisionExhausted("bezout: inputs not coprime at precision");
  FieldElement scale = r0.coeff(0).inv();
  return {a0.scaled(scale), b0.scaled(scale)};
}

namespace {

std::vector<SlopeFactor> slope_factor_attempt(const Polynomial& f, const NewtonPolygon& np,
                                              int64_t threshold, int64_t pad) {
  const SpecPtr& spec = f.spec();
  std::vector<SlopeFactor> out;
  Polynomial rest = f;
  if (np.zero_root_multiplicity > 0) {
    long long m = np.zero_root_multiplicity;
    SlopeFactor zf;
    zf.zero_root = true;
    zf.factor = Polynomial::power_of_T(spec, m);
    zf.multiplicity = m;
    out.push_back(zf);
    std::vector<FieldElement> cs(rest.coeffs().begin() + static_cast<long>(m),
                                 rest.coeffs().end());
    rest = Polynomial(spec, std::move(cs));
  }
  if (rest.degree() == 0) return out;

  struct Item {
    Polynomial poly;
    bool from_split;
  };
  std::vector<Item> queue{{rest, false}};
  std::vector<SlopeFactor> pure;
  std::vector<bool> pure_split;
  while (!queue.empty()) {
    Item cur = queue.back();
    queue.pop_back();
    NewtonPolygon cnp = newton_polygon(cur.poly);
    if (cnp.zero_root_multiplicity != 0)
      throw CertificationFailed("slope factorization: unexpected zero root in sub-factor");
    if (cnp.segments.size() == 1) {
      SlopeFactor sf;
      sf.slope = cnp.segments[0].slope;
      sf.factor = cur.poly;
      sf.multiplicity = cur.poly.degree();
      pure.push_back(sf);
      pure_split.push_back(cur.from_split);
      continue;
    }
    long long kidx = cnp.vertices[1].first;
    Rat s_left = -Rat(cnp.vertices[1].second - cnp.vertices[0].second,
                      cnp.vertices[1].first - cnp.vertices[0].first);
    Rat s_right = -Rat(cnp.vertices[2].second - cnp.vertices[1].second,
                       cnp.vertices[2].first - cnp.vertices[1].first);
    Rat w = (s_left + s_right) / 2;
    auto split = hensel_attempt(cur.poly, kidx, w, threshold, threshold + pad);
    if (!split) throw ScratchExhausted{};
    queue.push_back({split->lower, true});
    queue.push_back({split->upper, true});
  }
  std::vector<size_t> order(pure.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t x, size_t y) { return pure[x].slope < pure[y].slope; });

  Polynomial prod = out.empty() ? Polynomial::one(spec) : out[0].factor;
  for (size_t i : order) {
    NewtonPolygon p = newton_polygon(pure[i].factor);
    if (p.segments.size() != 1 || p.zero_root_multiplicity != 0 ||
        p.segments[0].slope != pure[i].slope)
      throw CertificationFailed("slope factorization: factor is not slope-pure");
    prod = prod.mul(pure[i].factor);
  }
  if (!provably_zero_mod(prod.sub(f), f, threshold)) throw ScratchExhausted{};
  for (size_t i : order) {
    SlopeFactor sf = pure[i];
    // factors produced by a lift carry N digits above their own scale;
    // an unsplit passthrough keeps the input's own precision
    if (pure_split[i]) {
      int64_t fmin = 0;
      for (long long j = 0; j <= sf.factor.degree(); ++j) {
        auto c = sf.factor.coeff(j);
        if (c.is_significant()) fmin = std::min(fmin, c.valuation());
      }
      sf.factor = capped(sf.factor, fmin + spec->precision);
    }
    out.push_back(std::move(sf));
  }
  return out;
}

}  // namespace

std::vector<SlopeFactor> slope_factor(const Polynomial& f) {
  if (f.is_zero()) throw RangeError("slope factorization of zero polynomial");
  if (!f.monic_at_precision()) throw RangeError("slope factorization requires monic input");

  NewtonPolygon np = newton_polygon(f);

  int64_t umin = 0, vmax = 0;
  for (const auto& [i, v] : np.vertices) {
    umin = std::min(umin, v);
    vmax = std::max(vmax, v);
  }
  int64_t threshold = umin + f.spec()->precision;

  // cascaded splits consume scratch precision; escalate the budget from the
  // intact input rather than extending capped intermediates
  int64_t pad = (vmax - umin) + 4;
  for (int attempt = 0; attempt < 6; ++attempt) {
    try {
      return slope_factor_attempt(f, np, threshold, pad);
    } catch (const ScratchExhausted&) {
      pad *= 2;
    }
  }
  throw PrecisionExhausted(
      "slope factorization: Hensel lift cannot separate adjacent slopes at the working "
      "precision");
}

}  // namespace uldyn
