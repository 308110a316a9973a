#include "operforge/error.hpp"

namespace operforge {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::SingularLeadingMatrix: return "SingularLeadingMatrix";
    case ErrorKind::NonPositiveValuation: return "NonPositiveValuation";
    case ErrorKind::NotInAlgebra: return "NotInAlgebra";
    case ErrorKind::NotRegular: return "NotRegular";
    case ErrorKind::NotRegularNilpotent: return "NotRegularNilpotent";
    case ErrorKind::NotMember: return "NotMember";
    case ErrorKind::PrecisionExhausted: return "PrecisionExhausted";
    case ErrorKind::OrderUndetermined: return "OrderUndetermined";
    case ErrorKind::OrderTooLarge: return "OrderTooLarge";
    case ErrorKind::InvalidOrder: return "InvalidOrder";
    case ErrorKind::SolverDegenerate: return "SolverDegenerate";
    case ErrorKind::SearchExhausted: return "SearchExhausted";
    case ErrorKind::LemmaViolation: return "LemmaViolation";
    case ErrorKind::Unstabilized: return "Unstabilized";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::ContextMismatch: return "ContextMismatch";
    }
    return "Unknown";
}

bool is_retryable(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::PrecisionExhausted:
    case ErrorKind::OrderUndetermined:
    case ErrorKind::SearchExhausted:
    case ErrorKind::Unstabilized:
        return true;
    default:
        return false;
    }
}

} // namespace operforge
