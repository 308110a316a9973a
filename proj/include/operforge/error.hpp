#pragma once

#include <stdexcept>
#include <string>

namespace operforge {

enum class ErrorKind {
    SingularLeadingMatrix,
    NonPositiveValuation,
    NotInAlgebra,
    NotRegular,
    NotRegularNilpotent,
    NotMember,
    PrecisionExhausted,
    OrderUndetermined,
    OrderTooLarge,
    InvalidOrder,
    SolverDegenerate,
    SearchExhausted,
    LemmaViolation,
    Unstabilized,
    InvalidInput,
    ContextMismatch,
};

const char* to_string(ErrorKind kind);

// True for failures that a larger precision or search budget may fix.
bool is_retryable(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace operforge
