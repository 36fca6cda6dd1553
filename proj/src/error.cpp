#include "lobcast/error.hpp"

namespace lobcast {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorKind::NonScalarLoss: return "NonScalarLoss";
        case ErrorKind::DoubleBackward: return "DoubleBackward";
        case ErrorKind::ColumnCountMismatch: return "ColumnCountMismatch";
        case ErrorKind::RowCountMismatch: return "RowCountMismatch";
        case ErrorKind::OrdinalViolation: return "OrdinalViolation";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::GridMismatch: return "GridMismatch";
        case ErrorKind::TooShort: return "TooShort";
        case ErrorKind::BadParams: return "BadParams";
        case ErrorKind::NonPositivePrice: return "NonPositivePrice";
        case ErrorKind::ChangeBelowMinusOne: return "ChangeBelowMinusOne";
        case ErrorKind::UnknownVariable: return "UnknownVariable";
        case ErrorKind::Format: return "Format";
        case ErrorKind::Io: return "Io";
        case ErrorKind::NonFiniteActivation: return "NonFiniteActivation";
        case ErrorKind::NonFiniteGradient: return "NonFiniteGradient";
        case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorKind::Usage: return "Usage";
    }
    return "Unknown";
}

ErrorCategory category_of(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Usage:
        case ErrorKind::BadParams:
            return ErrorCategory::Usage;
        case ErrorKind::NonFiniteActivation:
        case ErrorKind::NonFiniteGradient:
        case ErrorKind::NonFiniteLoss:
            return ErrorCategory::Numeric;
        default:
            return ErrorCategory::Data;
    }
}

int exit_code_for(ErrorKind kind) {
    switch (category_of(kind)) {
        case ErrorCategory::Usage: return 2;
        case ErrorCategory::Data: return 3;
        case ErrorCategory::Numeric: return 4;
    }
    return 1;
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

OrdinalViolationError::OrdinalViolationError(std::size_t row, const std::string& detail)
    : Error(ErrorKind::OrdinalViolation, "row " + std::to_string(row) + ": " + detail), row_(row) {}

}  // namespace lobcast
