// Python bindings for the main operations: field arithmetic, spectral
// decomposition, dynamics, and the command-level entry points.  Structured
// results cross the boundary as JSON strings with stable key order.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "uldyn/cli_ops.hpp"

namespace py = pybind11;
using namespace uldyn;

namespace {

// python-side handle for the immutable field spec
struct PyField {
  SpecPtr ptr;
};

SpecPtr make_field(const std::string& kind, uint64_t q, int64_t precision,
                   const std::string& uniformizer) {
  if (kind == "padic")
    return FieldSpec::padic(static_cast<uint32_t>(q), precision,
                            uniformizer.empty() ? "p" : uniformizer);
  if (kind == "laurent")
    return FieldSpec::laurent_q(q, precision, uniformizer.empty() ? "t" : uniformizer);
  throw RangeError("field kind must be 'padic' or 'laurent'");
}

MatrixK matrix_from_entries(const SpecPtr& spec,
                            const std::vector<std::vector<std::string>>& entries) {
  size_t r = entries.size();
  size_t c = r ? entries[0].size() : 0;
  MatrixK m(spec, r, c);
  for (size_t i = 0; i < r; ++i) {
    if (entries[i].size() != c) throw RangeError("ragged matrix entries");
    for (size_t j = 0; j < c; ++j) m.at(i, j) = FieldElement::parse(entries[i][j], spec);
  }
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "exact spectral analysis of linear maps over Q_p and F_q((t))";

  py::register_exception<PrecisionExhausted>(m, "PrecisionExhausted");
  py::register_exception<SyntaxError>(m, "ParseError");
  py::register_exception<DivisionByZero>(m, "DivisionByZero");
  py::register_exception<CertificationFailed>(m, "CertificationFailed");
  py::register_exception<RangeError>(m, "RangeError");

  py::class_<FieldElement>(m, "Element")
      .def("__add__", &FieldElement::add)
      .def("__sub__", &FieldElement::sub)
      .def("__mul__", &FieldElement::mul)
      .def("__truediv__", &FieldElement::div)
      .def("__neg__", &FieldElement::neg)
      .def("inv", &FieldElement::inv)
      .def("valuation",
           [](const FieldElement& e) -> py::object {
             if (e.is_exact_zero()) return py::none();
             return py::int_(e.valuation());
           })
      .def("known_to",
           [](const FieldElement& e) -> py::object {
             if (e.is_exact()) return py::none();
             return py::int_(e.known_to());
           })
      .def("is_zero", &FieldElement::is_exact_zero)
      .def("eq_at_precision", &FieldElement::eq_at_precision)
      .def("__repr__", &FieldElement::render)
      .def("__str__", &FieldElement::render);

  py::class_<PyField>(m, "Field")
      .def(py::init([](const std::string& kind, uint64_t q, int64_t precision,
                       const std::string& uniformizer) {
             return PyField{make_field(kind, q, precision, uniformizer)};
           }),
           py::arg("kind"), py::arg("q"), py::arg("precision") = 40, py::arg("uniformizer") = "")
      .def_property_readonly("q", [](const PyField& f) { return f.ptr->q(); })
      .def_property_readonly("p", [](const PyField& f) { return f.ptr->p(); })
      .def_property_readonly("precision", [](const PyField& f) { return f.ptr->precision; })
      .def_property_readonly("uniformizer", [](const PyField& f) { return f.ptr->symbol; })
      .def("__call__",
           [](const PyField& f, const std::string& text) {
             return FieldElement::parse(text, f.ptr);
           })
      .def("parse",
           [](const PyField& f, const std::string& text) {
             return FieldElement::parse(text, f.ptr);
           })
      .def("__repr__", [](const PyField& f) { return field_to_json(*f.ptr).dump(); });

  py::class_<MatrixK>(m, "Matrix")
      .def(py::init([](const PyField& field, const std::vector<std::vector<std::string>>& entries) {
             return matrix_from_entries(field.ptr, entries);
           }),
           py::arg("field"), py::arg("entries"))
      .def("char_poly", [](const MatrixK& a) { return char_poly(a).render(); })
      .def("newton_polygon",
           [](const MatrixK& a) { return polygon_to_json(newton_polygon(char_poly(a))).dump(); })
      .def("decompose",
           [](const MatrixK& a) { return decomposition_to_json(spectral_decompose(a)).dump(); })
      .def("classify",
           [](const MatrixK& a) {
             auto dec = spectral_decompose(a);
             return classification_to_json(classify(a, dec)).dump();
           })
      .def("scale",
           [](const MatrixK& a) {
             auto dec = spectral_decompose(a);
             ScaleValue s = scale(a, dec);
             return py::make_tuple(s.base, s.exponent);
           })
      .def("iterated_kernel_dim", [](const MatrixK& a) { return iterated_kernel(a).size(); })
      .def("__repr__", [](const MatrixK& a) { return matrix_to_json(a).dump(); });

  m.def("analyze", [](const std::string& request) {
    Json req = Json::parse(request, nullptr, false);
    if (req.is_discarded()) throw SyntaxError("request is not valid JSON", 0);
    CommandOutcome out = run_analyze(req);
    return py::make_tuple(out.exit_code, out.report.dump(2));
  });
  m.def("corpus", [](const std::string& corpus) {
    Json doc = Json::parse(corpus, nullptr, false);
    if (doc.is_discarded()) throw SyntaxError("corpus is not valid JSON", 0);
    CommandOutcome out = run_corpus(doc);
    return py::make_tuple(out.exit_code, out.report.dump(2));
  });
  m.def(
      "selftest",
      [](uint64_t seed, const std::vector<size_t>& sizes, int matrices, int vectors, int trials,
         int jobs, int64_t precision) {
        SelftestOptions opts;
        opts.seed = seed;
        if (!sizes.empty()) opts.sizes = sizes;
        opts.matrices_per_size = matrices;
        opts.vectors_per_matrix = vectors;
        opts.lattice_trials = trials;
        opts.jobs = jobs;
        opts.precision = precision;
        CommandOutcome out = run_selftest_command(opts);
        return py::make_tuple(out.exit_code, out.report.dump(2));
      },
      py::arg("seed") = 1, py::arg("sizes") = std::vector<size_t>{}, py::arg("matrices") = 5,
      py::arg("vectors") = 50, py::arg("trials") = 25, py::arg("jobs") = 1,
      py::arg("precision") = 40);
}
