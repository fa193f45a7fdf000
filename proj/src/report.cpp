#include "uldyn/report.hpp"

namespace uldyn {

Json field_to_json(const FieldSpec& spec) {
  Json j;
  j["kind"] = spec.kind == FieldKind::padic ? "padic" : "laurent";
  if (spec.kind == FieldKind::padic) {
    j["p"] = spec.p();
  } else {
    j["q"] = spec.q();
    j["p"] = spec.p();
    j["f"] = spec.residue.f();
    if (spec.residue.f() > 1) j["modulus"] = spec.residue.modulus();
  }
  j["precision"] = spec.precision;
  j["uniformizer"] = spec.symbol;
  return j;
}

SpecPtr field_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw SyntaxError("field spec must be an object with a kind", 0);
  std::string kind = j.at("kind").get<std::string>();
  int64_t precision = j.value("precision", static_cast<int64_t>(40));
  if (kind == "padic") {
    uint32_t p = j.at("p").get<uint32_t>();
    std::string sym = j.value("uniformizer", std::string("p"));
    return FieldSpec::padic(p, precision, sym);
  }
  if (kind == "laurent") {
    std::string sym = j.value("uniformizer", std::string("t"));
    if (j.contains("q")) return FieldSpec::laurent_q(j.at("q").get<uint64_t>(), precision, sym);
    uint32_t p = j.at("p").get<uint32_t>();
    uint32_t f = j.value("f", 1u);
    return FieldSpec::laurent(p, f, precision, sym);
  }
  throw SyntaxError("unknown field kind '" + kind + "'", 0);
}

Json norm_to_json(const NormValue& v, uint64_t q) {
  Json j;
  j["base"] = q;
  j["exponent"] = v.is_zero() ? std::string("-inf") : rat_str(v.exponent());
  return j;
}

Json scale_to_json(const ScaleValue& s) {
  Json j;
  j["base"] = s.base;
  j["exponent"] = s.exponent;
  return j;
}

Json vector_to_json(const VectorK& v) {
  Json j = Json::array();
  for (const auto& e : v) j.push_back(e.render());
  return j;
}

Json matrix_to_json(const MatrixK& m) {
  Json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  Json rows = Json::array();
  for (size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (size_t jj = 0; jj < m.cols(); ++jj) row.push_back(m.at(i, jj).render());
    rows.push_back(row);
  }
  j["entries"] = rows;
  return j;
}

MatrixK matrix_from_json(const Json& j, const SpecPtr& spec) {
  if (!j.is_object() || !j.contains("entries"))
    throw SyntaxError("matrix must be an object with entries", 0);
  const Json& rows = j.at("entries");
  size_t r = rows.size();
  size_t c = r > 0 ? rows.at(0).size() : 0;
  if (j.contains("rows") && j.at("rows").get<size_t>() != r)
    throw SyntaxError("matrix row count mismatch", 0);
  if (j.contains("cols") && j.at("cols").get<size_t>() != c)
    throw SyntaxError("matrix column count mismatch", 0);
  MatrixK m(spec, r, c);
  for (size_t i = 0; i < r; ++i) {
    if (rows.at(i).size() != c) throw SyntaxError("ragged matrix rows", 0);
    for (size_t jj = 0; jj < c; ++jj)
      m.at(i, jj) = FieldElement::parse(rows.at(i).at(jj).get<std::string>(), spec);
  }
  return m;
}

VectorK vector_from_json(const Json& j, const SpecPtr& spec) {
  VectorK v;
  for (const auto& e : j) v.push_back(FieldElement::parse(e.get<std::string>(), spec));
  return v;
}

Json polygon_to_json(const NewtonPolygon& np) {
  Json j;
  Json verts = Json::array();
  for (auto [i, v] : np.vertices) verts.push_back(Json::array({i, v}));
  j["vertices"] = verts;
  Json segs = Json::array();
  for (const auto& s : np.segments) {
    Json seg;
    seg["slope"] = rat_str(s.slope);
    seg["length"] = s.length;
    segs.push_back(seg);
  }
  j["segments"] = segs;
  j["zero_root_multiplicity"] = np.zero_root_multiplicity;
  return j;
}

Json decomposition_to_json(const SpectralDecomposition& dec) {
  Json j;
  j["dimension"] = dec.dim;
  j["certified_precision"] = dec.certified_precision;
  Json comps = Json::array();
  for (const auto& c : dec.components) {
    Json cj;
    cj["kind"] = c.zero_root ? "zero_root" : "slope";
    if (!c.zero_root) cj["slope"] = rat_str(c.slope);
    cj["char_value"] = norm_to_json(c.char_value, dec.spec->q());
    cj["multiplicity"] = c.multiplicity;
    Json basis = Json::array();
    for (const auto& v : c.basis) basis.push_back(vector_to_json(v));
    cj["basis"] = basis;
    comps.push_back(cj);
  }
  j["components"] = comps;
  return j;
}

Json adapted_norm_to_json(const AdaptedNorm& nrm) {
  Json j;
  j["epsilon"] = norm_to_json(nrm.epsilon, nrm.spec->q());
  j["certified_precision"] = nrm.certified_precision;
  Json comps = Json::array();
  for (const auto& c : nrm.components) {
    Json cj;
    cj["kind"] = c.zero_root ? "zero_root" : "slope";
    if (!c.zero_root) cj["slope"] = rat_str(c.slope);
    cj["char_value"] = norm_to_json(c.char_value, nrm.spec->q());
    Json ws = Json::array();
    for (const auto& w : c.weights) ws.push_back(rat_str(w));
    cj["weights"] = ws;
    cj["basis"] = matrix_to_json(c.basis);
    comps.push_back(cj);
  }
  j["components"] = comps;
  return j;
}

Json classification_to_json(const SubgroupClassification& cls) {
  auto pack = [](const std::vector<VectorK>& vs) {
    Json arr = Json::array();
    for (const auto& v : vs) arr.push_back(vector_to_json(v));
    return arr;
  };
  Json j;
  j["con"] = pack(cls.con);
  j["lev"] = pack(cls.lev);
  j["con_minus"] = pack(cls.con_minus);
  j["parb"] = pack(cls.parb);
  j["parb_minus"] = pack(cls.parb_minus);
  return j;
}

Json hermite_to_json(const HermiteForm& h) {
  Json j;
  Json pivots = Json::array();
  for (auto [row, e] : h.pivots) pivots.push_back(Json::array({row, e}));
  j["pivots"] = pivots;
  j["basis"] = matrix_to_json(h.basis);
  return j;
}

Json tidy_to_json(const TidyLattice& t) {
  Json j;
  j["U"] = hermite_to_json(t.U);
  j["U_plus"] = hermite_to_json(t.U_plus);
  j["U_minus"] = hermite_to_json(t.U_minus);
  j["index_displacement"] = scale_to_json(t.index_displacement);
  j["verified_steps"] = t.verified_steps;
  return j;
}

}  // namespace uldyn
