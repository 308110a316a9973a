#include "doctest.h"

#include "operforge/cli.hpp"
#include "operforge/error.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace operforge;

namespace {

std::string data(const std::string& name) { return std::string(OPERFORGE_TEST_DATA) + "/" + name; }

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

JobResult job(const std::string& command, const std::string& file) {
    JobSpec spec;
    spec.command = command;
    spec.input_path = data(file);
    return run(spec);
}

JobResult verify(const JobResult& produced) {
    JobSpec spec;
    spec.command = produced.report["command"].get<std::string>();
    spec.verify_only = true;
    return run_text(spec, emit_report(produced.report));
}

Matrix mat(std::initializer_list<std::initializer_list<Rational>> rows) { return Matrix(rows); }

} // namespace

TEST_CASE("connection round trip") {
    for (const char* file : {"worked_example.json", "gl2_double_pole.json", "sl3_e13.json", "zero_sl2.json"}) {
        const Connection a = parse_connection(data(file));
        const Json emitted = parse_json_text(emit_report(to_json(a)));
        CHECK(connection_from_json(emitted) == a);
        CHECK(emit_report(to_json(connection_from_json(emitted))) == emit_report(emitted));
    }
    // Rational formatting is normalized, values are kept.
    const Json j = parse_json_text(
        R"({"n": 2, "kind": "gl", "precision": 3, "terms": [{"power": -1, "matrix": [["2/4", 3], ["-0/5", "+7"]]}]})");
    const Connection a = connection_from_json(j);
    CHECK(a.coefficient(-1) == mat({{Rational(1, 2), 3}, {0, 7}}));
    const Json back = to_json(a);
    CHECK(back["terms"][0]["matrix"][0][0] == "1/2");
    CHECK(back["precision"] == 3);
    CHECK(connection_from_json(back) == a);
}

TEST_CASE("series and gauge element round trip") {
    const Series s(-2, {Rational(1, 3), 0, -5}, 4);
    CHECK(series_from_json(to_json(s), "") == s);
    CHECK(series_from_json(to_json(Series()), "") == Series());
    CHECK(series_from_json(to_json(Series::unknown_beyond(3)), "") == Series::unknown_beyond(3));

    auto ctx = shared_context(2, AlgebraKind::sl);
    const GaugeElement g = GaugeElement::from_factorization(ctx, Factorization{{{1, ctx->e}}, ctx->f + Matrix::identity(2)}, 8);
    const GaugeElement back = gauge_from_json(to_json(g), ctx);
    CHECK(back.matrix() == g.matrix());
    CHECK(back.factorization() == g.factorization());
}

TEST_CASE("schema violations carry JSON pointers") {
    auto message = [](const std::string& text) {
        try {
            connection_from_json(parse_json_text(text));
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::InvalidInput);
            return std::string(e.what());
        }
        return std::string("accepted");
    };
    CHECK(message(R"({"n": 2, "kind": "sl", "terms": [{"power": 0, "matrix": [["0", "1/0"], ["0", "0"]]}]})")
              .find("/terms/0/matrix/0/1") != std::string::npos);
    CHECK(message(slurp(data("bad_trace.json"))).find("/terms/1/matrix") != std::string::npos);
    CHECK(message(R"({"n": 2, "kind": "so", "terms": []})").find("/kind") != std::string::npos);
    CHECK(message(R"({"n": 2, "kind": "gl", "terms": [{"power": 1, "matrix": [["0","0"],["0","0"]]},
                                                     {"power": 0, "matrix": [["0","0"],["0","0"]]}]})")
              .find("/terms/1/power") != std::string::npos);
    CHECK(message(R"({"n": 2, "kind": "gl", "precision": 0, "terms": [{"power": 1, "matrix": [["0","0"],["0","0"]]}]})")
              .find("/terms/0/power") != std::string::npos);
    CHECK(message(R"({"n": 2, "kind": "gl", "terms": [{"power": 0, "matrix": [["0","0"]]}]})")
              .find("/terms/0/matrix") != std::string::npos);
    CHECK(message(R"({"n": 2, "kind": "gl", "terms": [{"matrix": [["0","0"],["0","0"]]}]})")
              .find("/terms/0: missing \"power\"") != std::string::npos);
    CHECK(message(R"({"n": 2, "kind": "gl", "exact": true, "precision": 4, "terms": []})").find("/precision") !=
          std::string::npos);
}

TEST_CASE("malformed JSON reports its position") {
    try {
        parse_json_text("{\"n\": 2,\n \"kind\": \"sl\",\n \"terms\": [1,}");
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 3, column 14") != std::string::npos);
    }
    const JobResult r = job("normalize", "does_not_exist.json");
    CHECK(r.exit_code == 1);
}

TEST_CASE("normalize: worked example") {
    const JobResult r = job("normalize", "worked_example.json");
    REQUIRE(r.exit_code == 0);
    const Json& cert = r.report["certificate"];
    REQUIRE(cert["steps"].size() == 1);
    CHECK(cert["steps"][0]["k"] == 1);
    CHECK(cert["steps"][0]["X"] == Json::parse(R"([["0", "-1"], ["0", "0"]])"));
    CHECK(cert["conjugator"] == Json::parse(R"([["1", "0"], ["0", "1"]])"));
    CHECK(cert["window"] == Json::parse("[-2, 14]"));
    CHECK(r.report["window"] == Json::parse("[-2, 14]"));
    // g = exp(-t e) = Id - e t.
    auto ctx = shared_context(2, AlgebraKind::sl);
    CHECK(gauge_from_json(cert["gauge"], ctx).matrix() ==
          MatrixSeries::from_terms(2, {{0, Matrix::identity(2)}, {1, -ctx->e}}, kExact));
    // f t^-2 + 2e, nothing else on the window.
    const Connection b = connection_from_json(r.report["normalized"]);
    CHECK(b.series().agrees_with(MatrixSeries::from_terms(2, {{-2, ctx->f}, {0, ctx->e * Rational(2)}}, kExact)));
    CHECK(b.precision() == 14);
    CHECK(r.report["is_oper"] == true);
    CHECK(r.report["knobs"]["precision"] == 16);
    CHECK(r.report["version"] == version());
}

TEST_CASE("verify-oper and regularize examples") {
    const JobResult v = job("verify-oper", "e_simple_pole.json");
    CHECK(v.exit_code == 0);
    CHECK(v.report["is_oper"] == false);

    const JobResult z = job("regularize", "zero_sl2.json");
    REQUIRE(z.exit_code == 0);
    auto ctx = shared_context(2, AlgebraKind::sl);
    CHECK(gauge_from_json(z.report["certificate"]["g"], ctx).matrix() ==
          MatrixSeries::from_terms(2, {{-1, ctx->f}, {0, Matrix::identity(2)}}, kExact));
    CHECK(z.report["verified"] == true);
    CHECK(z.report["certificate"]["search_stats"]["candidates_tried"] == 1);
}

TEST_CASE("every command re-verifies") {
    const std::pair<const char*, const char*> jobs[] = {
        {"normalize", "worked_example.json"},    {"normalize-regular", "gl2_double_pole.json"},
        {"cyclic", "gl2_double_pole.json"},      {"regularize", "sl3_e13.json"},
        {"regularize", "zero_sl2.json"},         {"verify-oper", "e_simple_pole.json"},
        {"tangent-dim", "member_coweight.json"}, {"member", "member_coweight.json"},
    };
    for (const auto& [command, file] : jobs) {
        CAPTURE(command);
        const JobResult r = job(command, file);
        REQUIRE(r.exit_code == 0);
        CHECK(r.report["status"] == "ok");
        CHECK(r.report.contains("window"));
        const JobResult v = verify(r);
        CHECK(v.exit_code == 0);
        CHECK(v.report["verified"] == true);
    }
}

TEST_CASE("tampered reports fail verification") {
    JobResult r = job("normalize", "worked_example.json");
    r.report["normalized"]["terms"][1]["matrix"][0][1] = "3";
    CHECK(verify(r).exit_code == 1);

    JobResult m = job("member", "member_coweight.json");
    m.report["in_M_A"] = false;
    CHECK(verify(m).report["verified"] == false);

    JobSpec mismatch;
    mismatch.command = "cyclic";
    mismatch.verify_only = true;
    CHECK(run_text(mismatch, emit_report(job("normalize", "worked_example.json").report)).exit_code == 1);
}

TEST_CASE("member and tangent-dim") {
    const JobResult m = job("member", "member_coweight.json");
    REQUIRE(m.exit_code == 0);
    CHECK(m.report["in_M_A"] == true);
    CHECK(m.report["in_deformed_fiber"] == true);
    CHECK(m.report["leading_term"] == Json::parse(R"([["0", "0"], ["0", "0"]])"));
    CHECK(m.report["regular_point"] == false);

    const JobResult t = job("tangent-dim", "member_coweight.json");
    REQUIRE(t.exit_code == 0);
    CHECK(t.report["tangent_dim"].get<std::int64_t>() <= t.report["bound"].get<std::int64_t>());
    CHECK(t.report["bound"] == 6);
}

TEST_CASE("exit codes") {
    CHECK(job("normalize", "e_simple_pole.json").exit_code == 1);
    CHECK(job("member", "zero_sl2.json").exit_code == 1);
    CHECK(job("verify-oper", "bad_trace.json").exit_code == 1);
    CHECK(job("cyclic", "worked_example.json").exit_code == 1);

    JobSpec tight;
    tight.command = "regularize";
    tight.input_path = data("sl3_e13.json");
    tight.coweight_bound = 0;
    tight.depth_bound = 0;
    const JobResult r = run(tight);
    CHECK(r.exit_code == 2);
    CHECK(r.report["error"]["kind"] == "SearchExhausted");
    CHECK(r.report["error"]["retryable"] == true);

    JobSpec low;
    low.command = "normalize";
    low.input_path = data("worked_example.json");
    low.precision = 3;
    CHECK(run(low).exit_code == 1);
}

TEST_CASE("precision knob and environment default") {
    JobSpec spec;
    spec.command = "normalize";
    spec.input_path = data("worked_example.json");
    spec.precision = 6;
    const JobResult r = run(spec);
    CHECK(r.report["window"] == Json::parse("[-2, 4]"));

    setenv("OPERFORGE_PRECISION", "9", 1);
    CHECK(default_precision() == 9);
    setenv("OPERFORGE_PRECISION", "2", 1);
    CHECK(default_precision() == 16);
    unsetenv("OPERFORGE_PRECISION");
    CHECK(default_precision() == 16);
}

TEST_CASE("reports are deterministic") {
    for (const char* command : {"normalize", "cyclic", "normalize-regular"}) {
        const char* file = std::string(command) == "normalize" ? "worked_example.json" : "gl2_double_pole.json";
        CHECK(emit_report(job(command, file).report) == emit_report(job(command, file).report));
    }
    CHECK(emit_report(job("regularize", "sl3_e13.json").report) == emit_report(job("regularize", "sl3_e13.json").report));
}
