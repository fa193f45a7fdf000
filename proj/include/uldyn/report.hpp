// JSON serialization of analysis artifacts.  Reports use stable key order
// (insertion order) and carry no floating point: norms and scales are
// {base, exponent} pairs with exact rational exponents, field elements are
// grammar strings whose O(...) suffix states their certified precision.
#pragma once

#include <string>

#include "json.hpp"
#include "uldyn/dynamics.hpp"

namespace uldyn {

using Json = nlohmann::ordered_json;

Json field_to_json(const FieldSpec& spec);
SpecPtr field_from_json(const Json& j);

Json norm_to_json(const NormValue& v, uint64_t q);
Json scale_to_json(const ScaleValue& s);

Json vector_to_json(const VectorK& v);
Json matrix_to_json(const MatrixK& m);
MatrixK matrix_from_json(const Json& j, const SpecPtr& spec);
VectorK vector_from_json(const Json& j, const SpecPtr& spec);

Json polygon_to_json(const NewtonPolygon& np);
Json decomposition_to_json(const SpectralDecomposition& dec);
Json adapted_norm_to_json(const AdaptedNorm& nrm);
Json classification_to_json(const SubgroupClassification& cls);
Json hermite_to_json(const HermiteForm& h);
Json tidy_to_json(const TidyLattice& t);

}  // namespace uldyn
