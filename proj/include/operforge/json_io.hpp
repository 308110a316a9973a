#pragma once

// JSON forms of the library's values. Rationals are written as "p/q" strings;
// series carry an absolute "precision", or "exact": true for Laurent polynomials.
//
//   connection / gauge element:
//     {"n": 2, "kind": "sl", "precision": 10,
//      "terms": [{"power": -2, "matrix": [["0", "0"], ["1", "0"]]}]}
//   series: {"valuation": 0, "precision": 10, "coeffs": ["2", "0", "1/3"]}
//
// Parse errors are InvalidInput errors whose message starts with the JSON
// pointer of the offending value.

#include "operforge/cyclic.hpp"
#include "operforge/gauge.hpp"
#include "operforge/oper.hpp"
#include "operforge/springer.hpp"

#include <json.hpp>

#include <string>

namespace operforge {

using Json = nlohmann::ordered_json;

Json to_json(const Rational& q);
Json to_json(const Matrix& m);
Json to_json(const Series& s);
Json to_json(const std::vector<Series>& v);
// Connection schema for a bare matrix series in the given algebra.
Json to_json(const AlgebraContext& ctx, const MatrixSeries& m);
Json to_json(const Connection& a);
// Connection schema plus an optional "factorization" member.
Json to_json(const GaugeElement& g);
Json to_json(const OperForm& form);
Json to_json(const NormalizationCertificate& cert);
Json to_json(const CyclicWitness& w);
Json to_json(const SearchCertificate& cert);

Rational rational_from_json(const Json& j, const std::string& pointer);
Matrix matrix_from_json(const Json& j, std::size_t n, const std::string& pointer);
Series series_from_json(const Json& j, const std::string& pointer);
// Reads the "n"/"kind" header of a connection-schema object.
ContextPtr context_from_json(const Json& j, const std::string& pointer);
MatrixSeries matrix_series_from_json(const Json& j, std::size_t n, const std::string& pointer);
Connection connection_from_json(const Json& j, const std::string& pointer = "");
GaugeElement gauge_from_json(const Json& j, const ContextPtr& ctx, const std::string& pointer = "");

// Parses JSON text; syntax errors report line and column.
Json parse_json_text(const std::string& text);
Connection parse_connection(const std::string& path);

std::string emit_report(const Json& report);

} // namespace operforge
