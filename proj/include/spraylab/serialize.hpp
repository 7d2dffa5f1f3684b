#pragma once

#include <string>

#include "json.hpp"
#include "spraylab/approx.hpp"
#include "spraylab/degree.hpp"
#include "spraylab/polynomial.hpp"
#include "spraylab/sprays.hpp"

namespace spraylab {

/// Shortest decimal string that parses back to exactly x.
std::string decimal_string(double x);
double parse_decimal(const std::string& s);

nlohmann::json to_json(const Vector& v);
/// {"rows", "cols", "entries"} with row-major nested entries.
nlohmann::json to_json(const Matrix& a);
/// As for real matrices with [re, im] entries.
nlohmann::json to_json(const ComplexMatrix& a);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AxiomReport& r, bool per_sample = true);
nlohmann::json to_json(const DominanceReport& r, bool per_sample = true);
nlohmann::json to_json(const DegreeReport& r);
nlohmann::json to_json(const AkIdentityReport& r);

/// Coefficient table as decimal strings.
nlohmann::json to_json(const PolynomialMap& p, bool include_test_nodes = false);
PolynomialMap polynomial_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RationalMap& r);

nlohmann::json to_json(const RegularApproximation& g);
nlohmann::json to_json(const ApproximationResult& r);

}  // namespace spraylab
