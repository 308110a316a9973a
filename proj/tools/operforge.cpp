#include "operforge/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    using operforge::JobSpec;

    CLI::App app{"Oper normal forms and deformed affine Springer fibers over Q((t))", "operforge"};
    app.set_version_flag("--version", std::string(operforge::version()));
    app.require_subcommand(1);
    app.fallthrough();

    JobSpec spec;
    spec.precision = operforge::default_precision();
    std::int64_t coweight_bound = 2, depth_bound = 2, pole_budget = 0, window_depth = 4;
    std::string output;

    app.add_option("--precision", spec.precision, "coefficients kept beyond the order of the input (env OPERFORGE_PRECISION)")
        ->check(CLI::Range(std::int64_t{4}, std::int64_t{100000}));
    auto* cb = app.add_option("--coweight-bound", coweight_bound, "regularize: largest coweight height")
                   ->check(CLI::NonNegativeNumber);
    auto* db = app.add_option("--depth-bound", depth_bound, "regularize: largest exponential depth")
                   ->check(CLI::NonNegativeNumber);
    auto* pb = app.add_option("--pole-budget", pole_budget, "cyclic: largest exponent of a candidate (default 2n)")
                   ->check(CLI::NonNegativeNumber);
    auto* wd = app.add_option("--window-depth", window_depth, "tangent-dim: principal part depth")
                   ->check(CLI::PositiveNumber);
    app.add_option("--output,-o", output, "write the report here instead of stdout");
    app.add_flag("--verify-only", spec.verify_only, "re-check the certificates of an earlier report");

    const std::pair<const char*, const char*> commands[] = {
        {"normalize", "gauge a regular nilpotent leading term into f t^r + g^e(F)"},
        {"normalize-regular", "gauge a regular leading term into the Kostant slice"},
        {"cyclic", "find a cyclic vector and the companion form (gl only)"},
        {"regularize", "search for a regular point of the deformed fiber"},
        {"verify-oper", "test whether a connection is in oper form"},
        {"tangent-dim", "tangent space dimension at a member of M_A"},
        {"member", "membership of a gauge element in M_A and the deformed fibers"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("input", spec.input_path, "input JSON file, or - for stdin")->required();
        sub->callback([&spec, name = std::string(name)] { spec.command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Usage errors count as invalid input; --help and --version exit 0.
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (cb->count() > 0)
        spec.coweight_bound = coweight_bound;
    if (db->count() > 0)
        spec.depth_bound = depth_bound;
    if (pb->count() > 0)
        spec.pole_budget = pole_budget;
    if (wd->count() > 0)
        spec.window_depth = window_depth;
    if (!output.empty())
        spec.output_path = output;

    const operforge::JobResult result = operforge::run(spec);
    const std::string text = operforge::emit_report(result.report);
    if (spec.output_path) {
        std::ofstream out(*spec.output_path);
        if (!out) {
            std::cerr << "operforge: cannot write " << *spec.output_path << "\n";
            return 1;
        }
        out << text;
    } else {
        std::cout << text;
    }
    if (result.report.contains("error"))
        std::cerr << "operforge: " << result.report["error"]["message"].get<std::string>() << "\n";
    return result.exit_code;
}
