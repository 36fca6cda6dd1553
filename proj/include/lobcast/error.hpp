#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lobcast {

enum class ErrorKind {
    // numerics
    ShapeMismatch,
    IndexOutOfRange,
    NonScalarLoss,
    DoubleBackward,
    // data
    ColumnCountMismatch,
    RowCountMismatch,
    OrdinalViolation,
    EmptyInput,
    GridMismatch,
    TooShort,
    BadParams,
    NonPositivePrice,
    ChangeBelowMinusOne,
    UnknownVariable,
    Format,
    Io,
    // divergence
    NonFiniteActivation,
    NonFiniteGradient,
    NonFiniteLoss,
    // command line
    Usage,
};

// Coarse grouping used for process exit codes.
enum class ErrorCategory { Usage, Data, Numeric };

std::string_view to_string(ErrorKind kind);
ErrorCategory category_of(ErrorKind kind);

// Exit codes: 0 success, 2 usage, 3 data error, 4 numeric divergence.
int exit_code_for(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Thrown by the parser when a row breaks the ordinal price structure.
class OrdinalViolationError : public Error {
public:
    OrdinalViolationError(std::size_t row, const std::string& detail);

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

}  // namespace lobcast
