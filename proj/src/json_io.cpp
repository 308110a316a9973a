#include "operforge/json_io.hpp"

#include "operforge/error.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace operforge {

namespace {

// Powers and precisions beyond this are rejected rather than allocated.
constexpr std::int64_t kMaxPower = 1'000'000;

[[noreturn]] void fail(const std::string& pointer, const std::string& what) {
    throw Error(ErrorKind::InvalidInput, (pointer.empty() ? std::string("/") : pointer) + ": " + what);
}

const Json& member(const Json& j, const std::string& pointer, const char* key) {
    if (!j.is_object())
        fail(pointer, "expected an object");
    auto it = j.find(key);
    if (it == j.end())
        fail(pointer, std::string("missing \"") + key + "\"");
    return *it;
}

std::int64_t integer_from_json(const Json& j, const std::string& pointer) {
    if (!j.is_number_integer())
        fail(pointer, "expected an integer");
    const std::int64_t v = j.get<std::int64_t>();
    if (v < -kMaxPower || v > kMaxPower)
        fail(pointer, "integer out of range");
    return v;
}

// Absolute precision, or kExact when the object is marked exact or omits it.
std::int64_t precision_from_json(const Json& j, const std::string& pointer) {
    const bool exact = j.contains("exact") && j["exact"].is_boolean() && j["exact"].get<bool>();
    if (j.contains("exact") && !j["exact"].is_boolean())
        fail(pointer + "/exact", "expected a boolean");
    if (!j.contains("precision") || j["precision"].is_null())
        return kExact;
    if (exact)
        fail(pointer + "/precision", "an exact object carries no precision");
    return integer_from_json(j["precision"], pointer + "/precision");
}

void put_precision(Json& out, std::int64_t precision) {
    if (precision == kExact)
        out["exact"] = true;
    else
        out["precision"] = precision;
}

Json window_bound(std::int64_t v) { return v == kExact ? Json(nullptr) : Json(v); }

Json factors_to_json(const std::vector<ExpFactor>& factors) {
    Json out = Json::array();
    for (const auto& f : factors)
        out.push_back(Json{{"k", f.k}, {"X", to_json(f.x)}});
    return out;
}

} // namespace

Json to_json(const Rational& q) { return format_rational(q); }

Json to_json(const Matrix& m) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < m.cols(); ++j)
            row.push_back(to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json to_json(const Series& s) {
    Json out;
    out["valuation"] = s.vanishes_on_window() ? Json(nullptr) : Json(s.start());
    put_precision(out, s.precision());
    Json coeffs = Json::array();
    for (const auto& c : s.coeffs())
        coeffs.push_back(to_json(c));
    out["coeffs"] = std::move(coeffs);
    return out;
}

Json to_json(const std::vector<Series>& v) {
    Json out = Json::array();
    for (const auto& s : v)
        out.push_back(to_json(s));
    return out;
}

Json to_json(const AlgebraContext& ctx, const MatrixSeries& m) {
    Json out;
    out["n"] = ctx.n;
    out["kind"] = to_string(ctx.kind);
    put_precision(out, m.precision());
    Json terms = Json::array();
    if (auto v = m.valuation()) {
        std::int64_t hi = *v;
        for (const auto& e : m.entries())
            if (!e.vanishes_on_window())
                hi = std::max(hi, e.end());
        for (std::int64_t k = *v; k <= hi; ++k) {
            Matrix c = m.coefficient(k);
            if (!c.is_zero())
                terms.push_back(Json{{"power", k}, {"matrix", to_json(c)}});
        }
    }
    out["terms"] = std::move(terms);
    return out;
}

Json to_json(const Connection& a) { return to_json(a.context(), a.series()); }

Json to_json(const GaugeElement& g) {
    Json out = to_json(g.context(), g.matrix());
    if (const auto& f = g.factorization())
        out["factorization"] = Json{{"constant", to_json(f->constant)}, {"factors", factors_to_json(f->factors)}};
    return out;
}

Json to_json(const OperForm& form) {
    Json basis = Json::array();
    for (const auto& b : form.ctx->ge_basis)
        basis.push_back(to_json(b));
    return Json{{"n", form.ctx->n},
                {"kind", to_string(form.ctx->kind)},
                {"r", form.r},
                {"slice_point", to_json(form.slice_point)},
                {"ge_basis", std::move(basis)},
                {"ge_coefficients", to_json(form.ge_coefficients)}};
}

Json to_json(const NormalizationCertificate& cert) {
    return Json{{"steps", factors_to_json(cert.factors())},
                {"conjugator", to_json(cert.conjugator())},
                {"result", to_json(cert.result)},
                {"window", Json::array({cert.window_lo, window_bound(cert.window_hi)})},
                {"gauge", to_json(cert.gauge)}};
}

Json to_json(const CyclicWitness& w) {
    return Json{{"phi", to_json(w.phi)},
                {"wronskian", to_json(*shared_context(w.phi.size(), AlgebraKind::gl), w.wronskian)},
                {"det_valuation", w.det_valuation},
                {"candidate_index", w.candidate_index}};
}

Json to_json(const SearchCertificate& cert) {
    Json exponents = Json::array();
    for (const auto& x : cert.exponents)
        exponents.push_back(to_json(x));
    return Json{{"g", to_json(cert.g)},
                {"transformed", to_json(cert.transformed)},
                {"leading", to_json(cert.leading)},
                {"r", cert.r},
                {"shortcut", cert.shortcut},
                {"g0", cert.shortcut ? Json(nullptr) : to_json(cert.g0)},
                {"coweight", cert.coweight},
                {"exponents", std::move(exponents)},
                {"search_stats",
                 Json{{"coweight_bound", cert.stats.coweight_bound},
                      {"depth_bound", cert.stats.depth_bound},
                      {"candidates_tried", cert.stats.candidates_tried}}}};
}

Rational rational_from_json(const Json& j, const std::string& pointer) {
    if (j.is_number_integer())
        return Rational(j.dump());
    if (!j.is_string())
        fail(pointer, "expected a rational string \"p/q\"");
    auto q = parse_rational(j.get<std::string>());
    if (!q)
        fail(pointer, "malformed rational \"" + j.get<std::string>() + "\"");
    return *q;
}

Matrix matrix_from_json(const Json& j, std::size_t n, const std::string& pointer) {
    if (!j.is_array() || j.size() != n)
        fail(pointer, "expected " + std::to_string(n) + " rows");
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::string row_ptr = pointer + "/" + std::to_string(i);
        if (!j[i].is_array() || j[i].size() != n)
            fail(row_ptr, "expected " + std::to_string(n) + " entries");
        for (std::size_t k = 0; k < n; ++k)
            m(i, k) = rational_from_json(j[i][k], row_ptr + "/" + std::to_string(k));
    }
    return m;
}

Series series_from_json(const Json& j, const std::string& pointer) {
    const std::int64_t precision = precision_from_json(j, pointer);
    const Json& coeffs = member(j, pointer, "coeffs");
    if (!coeffs.is_array())
        fail(pointer + "/coeffs", "expected an array");
    std::int64_t start = 0;
    if (!coeffs.empty())
        start = integer_from_json(member(j, pointer, "valuation"), pointer + "/valuation");
    if (precision != kExact && !coeffs.empty() && start + static_cast<std::int64_t>(coeffs.size()) - 1 > precision)
        fail(pointer + "/coeffs", "coefficients extend beyond the precision");
    std::vector<Rational> values;
    for (std::size_t i = 0; i < coeffs.size(); ++i)
        values.push_back(rational_from_json(coeffs[i], pointer + "/coeffs/" + std::to_string(i)));
    return Series(start, std::move(values), precision);
}

ContextPtr context_from_json(const Json& j, const std::string& pointer) {
    const Json& n = member(j, pointer, "n");
    if (!n.is_number_integer() || n.get<std::int64_t>() < 1 || n.get<std::int64_t>() > 16)
        fail(pointer + "/n", "expected an integer between 1 and 16");
    const Json& kind = member(j, pointer, "kind");
    if (!kind.is_string() || (kind != "sl" && kind != "gl"))
        fail(pointer + "/kind", "expected \"sl\" or \"gl\"");
    const auto size = n.get<std::size_t>();
    if (kind == "sl" && size < 2)
        fail(pointer + "/n", "sl needs n >= 2");
    return shared_context(size, parse_algebra_kind(kind.get<std::string>()));
}

MatrixSeries matrix_series_from_json(const Json& j, std::size_t n, const std::string& pointer) {
    const std::int64_t precision = precision_from_json(j, pointer);
    const Json& terms = member(j, pointer, "terms");
    if (!terms.is_array())
        fail(pointer + "/terms", "expected an array");
    std::vector<std::pair<std::int64_t, Matrix>> parsed;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string term_ptr = pointer + "/terms/" + std::to_string(i);
        const std::int64_t power = integer_from_json(member(terms[i], term_ptr, "power"), term_ptr + "/power");
        if (!parsed.empty() && power <= parsed.back().first)
            fail(term_ptr + "/power", "powers must be strictly increasing");
        if (precision != kExact && power > precision)
            fail(term_ptr + "/power", "power exceeds the precision");
        parsed.emplace_back(power, matrix_from_json(member(terms[i], term_ptr, "matrix"), n, term_ptr + "/matrix"));
    }
    if (precision != kExact && !parsed.empty() && precision - parsed.front().first > kMaxPower)
        fail(pointer + "/precision", "window too long");
    return MatrixSeries::from_terms(n, parsed, precision);
}

Connection connection_from_json(const Json& j, const std::string& pointer) {
    ContextPtr ctx = context_from_json(j, pointer);
    MatrixSeries a = matrix_series_from_json(j, ctx->n, pointer);
    const Json& terms = j["terms"];
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string term_ptr = pointer + "/terms/" + std::to_string(i) + "/matrix";
        if (!ctx->contains(matrix_from_json(terms[i]["matrix"], ctx->n, term_ptr)))
            fail(term_ptr, "matrix is not in " + to_string(ctx->kind) + "_" + std::to_string(ctx->n) + " (nonzero trace)");
    }
    return Connection(ctx, std::move(a));
}

GaugeElement gauge_from_json(const Json& j, const ContextPtr& ctx, const std::string& pointer) {
    ContextPtr own = context_from_json(j, pointer);
    if (!(*own == *ctx))
        fail(pointer, "gauge element and connection live in different algebras");
    MatrixSeries g = matrix_series_from_json(j, ctx->n, pointer);
    std::optional<Factorization> fact;
    if (j.contains("factorization")) {
        const std::string fptr = pointer + "/factorization";
        const Json& f = j["factorization"];
        Factorization parsed;
        parsed.constant = matrix_from_json(member(f, fptr, "constant"), ctx->n, fptr + "/constant");
        const Json& factors = member(f, fptr, "factors");
        if (!factors.is_array())
            fail(fptr + "/factors", "expected an array");
        for (std::size_t i = 0; i < factors.size(); ++i) {
            const std::string p = fptr + "/factors/" + std::to_string(i);
            parsed.factors.push_back({integer_from_json(member(factors[i], p, "k"), p + "/k"),
                                      matrix_from_json(member(factors[i], p, "X"), ctx->n, p + "/X")});
        }
        fact = std::move(parsed);
    }
    try {
        return GaugeElement(ctx, std::move(g), std::move(fact));
    } catch (const Error& e) {
        fail(pointer, e.what());
    }
}

Json parse_json_text(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, column = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        std::string detail = e.what();
        if (auto pos = detail.find("syntax error"); pos != std::string::npos)
            detail = detail.substr(pos);
        throw Error(ErrorKind::InvalidInput,
                    "malformed JSON at line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + detail);
    }
}

Connection parse_connection(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::InvalidInput, "cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return connection_from_json(parse_json_text(buffer.str()));
}

namespace {

bool is_flat(const Json& j) {
    if (j.is_primitive())
        return true;
    if (j.is_object())
        return j.empty();
    return std::all_of(j.begin(), j.end(), [](const Json& e) {
        return e.is_primitive() || (e.is_array() && std::all_of(e.begin(), e.end(), [](const Json& x) { return x.is_primitive(); }));
    });
}

// Like dump(2), but arrays of scalars and matrices stay on one line.
void emit(const Json& j, int indent, std::string& out) {
    if (is_flat(j)) {
        std::string flat = j.dump();
        if (j.is_array()) {
            std::string spaced;
            bool in_string = false;
            for (std::size_t i = 0; i < flat.size(); ++i) {
                const char c = flat[i];
                spaced += c;
                if (c == '"' && (i == 0 || flat[i - 1] != '\\'))
                    in_string = !in_string;
                if (c == ',' && !in_string)
                    spaced += ' ';
            }
            flat = std::move(spaced);
        }
        out += flat;
        return;
    }
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    const bool object = j.is_object();
    out += object ? "{\n" : "[\n";
    std::size_t i = 0;
    for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        out += pad;
        if (object)
            out += Json(it.key()).dump() + ": ";
        emit(*it, indent + 2, out);
        out += i + 1 < j.size() ? ",\n" : "\n";
    }
    out += std::string(static_cast<std::size_t>(indent), ' ') + (object ? "}" : "]");
}

} // namespace

std::string emit_report(const Json& report) {
    std::string out;
    emit(report, 0, out);
    return out + "\n";
}

} // namespace operforge
