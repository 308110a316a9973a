#pragma once

#include "operforge/json_io.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace operforge {

const char* version();

// normalize | normalize-regular | cyclic | regularize | verify-oper | tangent-dim | member
struct JobSpec {
    std::string command;
    std::string input_path;
    // Coefficients kept beyond the order of the input: the working window ends at ord(A) + precision.
    std::int64_t precision = kDefaultRelativePrecision;
    std::optional<std::int64_t> coweight_bound;
    std::optional<std::int64_t> depth_bound;
    std::optional<std::int64_t> pole_budget;
    std::optional<std::int64_t> window_depth;
    std::optional<std::string> output_path;
    // Treat the input as a report from an earlier run and re-check its certificates.
    bool verify_only = false;
};

struct JobResult {
    // 0 success, 1 invalid input or failed precondition, 2 retryable with larger knobs.
    int exit_code = 0;
    Json report;
};

// OPERFORGE_PRECISION when set to an integer >= 4, otherwise 16.
std::int64_t default_precision();

bool is_known_command(const std::string& command);

// Reads spec.input_path and runs the job. Errors are reported, not thrown.
JobResult run(const JobSpec& spec);
JobResult run_text(const JobSpec& spec, const std::string& input);

} // namespace operforge
