#include "operforge/cli.hpp"

#include "operforge/error.hpp"

#include <array>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace operforge {

namespace {

constexpr std::array<const char*, 7> kCommands = {"normalize",   "normalize-regular", "cyclic", "regularize",
                                                  "verify-oper", "tangent-dim",       "member"};

struct Input {
    Connection a;
    std::optional<GaugeElement> g;
    std::optional<Rational> lambda;
};

Input read_input(const Json& j) {
    if (!j.is_object() || !j.contains("connection"))
        return Input{connection_from_json(j), std::nullopt, std::nullopt};
    Input in{connection_from_json(j["connection"], "/connection"), std::nullopt, std::nullopt};
    if (j.contains("gauge"))
        in.g = gauge_from_json(j["gauge"], in.a.context_ptr(), "/gauge");
    if (j.contains("lambda"))
        in.lambda = rational_from_json(j["lambda"], "/lambda");
    return in;
}

Json echo(const Input& in) {
    if (!in.g && !in.lambda)
        return to_json(in.a);
    Json out{{"connection", to_json(in.a)}};
    if (in.g)
        out["gauge"] = to_json(*in.g);
    if (in.lambda)
        out["lambda"] = to_json(*in.lambda);
    return out;
}

Json bound(std::int64_t v) { return v == kExact ? Json(nullptr) : Json(v); }

Json knobs(const JobSpec& spec, const std::string& command, const Connection* a) {
    Json k{{"precision", spec.precision}};
    if (command == "cyclic") {
        const std::int64_t n = a ? static_cast<std::int64_t>(a->context().n) : 0;
        k["pole_budget"] = spec.pole_budget ? Json(*spec.pole_budget) : (a ? Json(2 * n) : Json(nullptr));
    } else if (command == "regularize") {
        k["coweight_bound"] = spec.coweight_bound.value_or(2);
        k["depth_bound"] = spec.depth_bound.value_or(2);
    } else if (command == "tangent-dim") {
        k["window_depth"] = spec.window_depth.value_or(4);
    }
    return k;
}

GaugeElement gauge_or_identity(const Input& in) {
    return in.g ? *in.g : GaugeElement::identity(in.a.context_ptr());
}

void run_normalize(const Input& in, const JobSpec& spec, bool regular, Json& report) {
    NormalizationOptions options;
    if (auto r = in.a.order())
        options.precision = std::min(in.a.precision(), *r + spec.precision);
    const NormalizationCertificate cert =
        regular ? normalize_regular(in.a, options) : normalize_regular_nilpotent(in.a, options);
    const Connection b = expand(cert.result);
    report["window"] = Json::array({cert.window_lo, bound(cert.window_hi)});
    report["certificate"] = to_json(cert);
    report["normalized"] = to_json(b);
    report["is_oper"] = is_oper_form(b);
}

void run_cyclic(const Input& in, const JobSpec& spec, Json& report) {
    Connection a = in.a;
    const auto r = a.order();
    if (r && a.series().is_exact())
        a = Connection(a.context_ptr(), a.series().truncated(*r + spec.precision));
    const std::int64_t budget = spec.pole_budget.value_or(2 * static_cast<std::int64_t>(a.context().n));
    const CyclicWitness w = find_cyclic_vector(a, budget);
    const CyclicOper res = oper_from_cyclic(a, w);
    report["window"] = Json::array({r ? Json(*r) : Json(nullptr), bound(res.b.precision())});
    report["witness"] = to_json(w);
    report["gauge"] = to_json(res.g);
    report["companion"] = to_json(res.b);
    report["is_oper"] = is_oper_form(res.b);
}

void run_regularize(const Input& in, const JobSpec& spec, Json& report) {
    const SearchCertificate cert =
        regularization_search(in.a, spec.coweight_bound.value_or(2), spec.depth_bound.value_or(2));
    report["window"] = Json::array({cert.r, bound(cert.transformed.precision())});
    report["certificate"] = to_json(cert);
    report["verified"] = verify_search_certificate(in.a, cert);
}

void run_verify_oper(const Input& in, Json& report) {
    const auto r = in.a.order();
    report["window"] = Json::array({r ? Json(*r) : Json(nullptr), bound(in.a.precision())});
    report["is_oper"] = is_oper_form(in.a);
}

void run_tangent(const Input& in, const JobSpec& spec, Json& report) {
    const std::int64_t depth = spec.window_depth.value_or(4);
    const std::int64_t dim = tangent_space_dim(in.a, gauge_or_identity(in), depth);
    const std::int64_t r = *in.a.order();
    report["window"] = Json::array({r, bound(in.a.precision())});
    report["tangent_dim"] = dim;
    report["depths"] = Json::array({depth, depth + 2});
    report["bound"] = -r * static_cast<std::int64_t>(in.a.context().dimension());
}

void run_member(const Input& in, Json& report) {
    const GaugeElement g = gauge_or_identity(in);
    const bool member = in_M_A(in.a, g);
    const std::int64_t r = *in.a.order();
    report["window"] = Json::array({r, bound(in.a.precision())});
    report["in_M_A"] = member;
    if (in.lambda) {
        const auto q = DeformedFiberQuery::from_connection(in.a, *in.lambda);
        report["lambda"] = to_json(*in.lambda);
        report["in_deformed_fiber"] = in_deformed_fiber(q, g);
        report["in_iwahori_fiber"] = in_iwahori_fiber(q, g);
    }
    if (member && is_nilpotent(in.a.leading())) {
        const auto q = DeformedFiberQuery::from_connection(in.a);
        report["leading_term"] = to_json(leading_term(q, g));
        report["regular_point"] = is_regular_point(q, g);
    }
}

// Common window of two series around the order r; false if they disagree there or it misses r.
bool agree_from(const MatrixSeries& x, const MatrixSeries& y, std::int64_t r) {
    if (x.is_exact() && y.is_exact())
        return x == y;
    const std::int64_t hi = std::min(x.precision(), y.precision());
    return hi >= r && x.agrees_with(y);
}

bool commutes_with_e(const Connection& b, std::int64_t r) {
    const auto& ctx = b.context();
    const std::int64_t hi = b.series().is_exact() ? b.series().valuation().value_or(r) + 64 : b.precision();
    for (std::int64_t k = r + 1; k <= hi; ++k)
        if (!bracket(ctx.e, b.coefficient(k)).is_zero())
            return false;
    return true;
}

void add_check(Json& checks, const char* name, bool passed) {
    checks.push_back(Json{{"check", name}, {"passed", passed}});
}

Json member_of(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key))
        throw Error(ErrorKind::InvalidInput, std::string("/") + key + ": missing from report");
    return j[key];
}

// Replays a report using gauge_transform and the predicates only.
Json verify_report(const Json& report) {
    const std::string command = member_of(report, "command").get<std::string>();
    const Input in = read_input(member_of(report, "input"));
    Json checks = Json::array();
    if (command == "normalize" || command == "normalize-regular") {
        const Json cert = member_of(report, "certificate");
        const GaugeElement g = gauge_from_json(member_of(cert, "gauge"), in.a.context_ptr(), "/certificate/gauge");
        const Connection b = connection_from_json(member_of(report, "normalized"), "/normalized");
        const std::int64_t r = *in.a.order();
        const Connection replay = gauge_transform(g, in.a);
        add_check(checks, "replay", agree_from(replay.series(), b.series(), r));
        add_check(checks, "window", cert["window"][1].is_number_integer() &&
                                        cert["window"][1].get<std::int64_t>() <= std::min(replay.precision(), b.precision()));
        add_check(checks, "leading", b.coefficient(r) == matrix_from_json(cert["result"]["slice_point"], b.context().n,
                                                                          "/certificate/result/slice_point"));
        add_check(checks, "centralizer", commutes_with_e(b, r));
        if (command == "normalize")
            add_check(checks, "oper_form", is_oper_form(b));
    } else if (command == "cyclic") {
        const GaugeElement w = gauge_from_json(member_of(report, "gauge"), in.a.context_ptr(), "/gauge");
        const Connection b = connection_from_json(member_of(report, "companion"), "/companion");
        const std::int64_t v = w.matrix().valuation().value_or(0);
        const std::int64_t hi = b.series().is_exact() ? 64 : b.precision();
        const Connection replay = gauge_transform(inverse(w, hi + 2 * std::abs(v) + 8), in.a);
        const std::int64_t lo = b.series().valuation().value_or(hi);
        add_check(checks, "replay", agree_from(replay.series(), b.series(), std::min(lo, in.a.order().value_or(lo))));
        add_check(checks, "oper_form", is_oper_form(b));
    } else if (command == "regularize") {
        const Json cert = member_of(report, "certificate");
        const auto ctx = in.a.context_ptr();
        SearchCertificate c{gauge_from_json(member_of(cert, "g"), ctx, "/certificate/g"),
                            connection_from_json(member_of(cert, "transformed"), "/certificate/transformed"),
                            matrix_from_json(member_of(cert, "leading"), ctx->n, "/certificate/leading"),
                            {},
                            member_of(cert, "r").get<std::int64_t>(),
                            false,
                            {},
                            {},
                            {}};
        add_check(checks, "certificate", verify_search_certificate(in.a, c));
        add_check(checks, "regular_nilpotent", is_regular_nilpotent(c.leading));
    } else if (command == "verify-oper") {
        add_check(checks, "is_oper", is_oper_form(in.a) == member_of(report, "is_oper").get<bool>());
    } else if (command == "tangent-dim") {
        const std::int64_t depth = member_of(report, "depths")[0].get<std::int64_t>();
        add_check(checks, "tangent_dim",
                  tangent_space_dim(in.a, gauge_or_identity(in), depth) == member_of(report, "tangent_dim").get<std::int64_t>());
    } else if (command == "member") {
        add_check(checks, "in_M_A", in_M_A(in.a, gauge_or_identity(in)) == member_of(report, "in_M_A").get<bool>());
    } else {
        throw Error(ErrorKind::InvalidInput, "/command: unknown command \"" + command + "\"");
    }
    bool ok = true;
    for (const auto& c : checks)
        ok = ok && c["passed"].get<bool>();
    Json out;
    out["verified_command"] = command;
    out["checks"] = std::move(checks);
    out["verified"] = ok;
    return out;
}

} // namespace

const char* version() { return OPERFORGE_VERSION; }

std::int64_t default_precision() {
    if (const char* env = std::getenv("OPERFORGE_PRECISION")) {
        char* end = nullptr;
        const long long v = std::strtoll(env, &end, 10);
        if (end != env && *end == '\0' && v >= 4 && v <= 100000)
            return v;
    }
    return kDefaultRelativePrecision;
}

bool is_known_command(const std::string& command) {
    for (const char* c : kCommands)
        if (command == c)
            return true;
    return false;
}

JobResult run_text(const JobSpec& spec, const std::string& input) {
    JobResult result;
    Json& report = result.report;
    report["tool"] = "operforge";
    report["version"] = version();
    report["command"] = spec.verify_only ? "verify" : spec.command;
    try {
        if (!spec.verify_only && !is_known_command(spec.command))
            throw Error(ErrorKind::InvalidInput, "unknown command \"" + spec.command + "\"");
        if (spec.precision < 4)
            throw Error(ErrorKind::InvalidInput, "precision must be at least 4");
        for (const auto& b : {spec.coweight_bound, spec.depth_bound, spec.pole_budget, spec.window_depth})
            if (b && *b < 0)
                throw Error(ErrorKind::InvalidInput, "bounds must be non-negative");
        if (spec.window_depth && *spec.window_depth < 1)
            throw Error(ErrorKind::InvalidInput, "window depth must be positive");

        const Json j = parse_json_text(input);
        if (spec.verify_only) {
            if (!spec.command.empty() && j.is_object() && j.contains("command") && j["command"] != spec.command)
                throw Error(ErrorKind::InvalidInput, "/command: report was produced by \"" +
                                                         j["command"].get<std::string>() + "\", not \"" + spec.command + "\"");
            report.update(verify_report(j));
            report["status"] = report["verified"].get<bool>() ? "ok" : "failed";
            result.exit_code = report["verified"].get<bool>() ? 0 : 1;
            return result;
        }
        const Input in = read_input(j);
        report["knobs"] = knobs(spec, spec.command, &in.a);
        report["input"] = echo(in);
        if (spec.command == "normalize")
            run_normalize(in, spec, false, report);
        else if (spec.command == "normalize-regular")
            run_normalize(in, spec, true, report);
        else if (spec.command == "cyclic")
            run_cyclic(in, spec, report);
        else if (spec.command == "regularize")
            run_regularize(in, spec, report);
        else if (spec.command == "verify-oper")
            run_verify_oper(in, report);
        else if (spec.command == "tangent-dim")
            run_tangent(in, spec, report);
        else
            run_member(in, report);
        report["status"] = "ok";
    } catch (const Error& e) {
        result.exit_code = is_retryable(e.kind()) ? 2 : 1;
        report["status"] = "error";
        report["error"] = Json{{"kind", to_string(e.kind())}, {"message", e.what()}, {"retryable", is_retryable(e.kind())}};
    } catch (const nlohmann::json::exception& e) {
        result.exit_code = 1;
        report["status"] = "error";
        report["error"] = Json{{"kind", "InvalidInput"}, {"message", e.what()}, {"retryable", false}};
    }
    return result;
}

JobResult run(const JobSpec& spec) {
    std::ifstream in(spec.input_path.empty() || spec.input_path == "-" ? "/dev/stdin" : spec.input_path);
    if (!in) {
        JobResult result;
        result.exit_code = 1;
        result.report = Json{{"tool", "operforge"},
                             {"version", version()},
                             {"command", spec.verify_only ? "verify" : spec.command},
                             {"status", "error"},
                             {"error", Json{{"kind", "InvalidInput"},
                                            {"message", "InvalidInput: cannot open " + spec.input_path},
                                            {"retryable", false}}}};
        return result;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return run_text(spec, buffer.str());
}

} // namespace operforge
