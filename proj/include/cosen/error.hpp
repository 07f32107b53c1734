#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cosen {

/// Base class for every error raised by the library. `kind()` is a stable
/// identifier used in the CLI's machine-readable error record.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define COSEN_DEFINE_ERROR(Name)                                            \
    class Name : public Error {                                             \
    public:                                                                 \
        explicit Name(const std::string& message) : Error(#Name, message) {} \
    }

COSEN_DEFINE_ERROR(ShapeError);
COSEN_DEFINE_ERROR(PositivityViolation);
COSEN_DEFINE_ERROR(RangeViolation);
COSEN_DEFINE_ERROR(ValidityError);
COSEN_DEFINE_ERROR(PreconditionError);
COSEN_DEFINE_ERROR(NumericError);
COSEN_DEFINE_ERROR(StateError);
COSEN_DEFINE_ERROR(ConfigError);
COSEN_DEFINE_ERROR(ProtocolError);
COSEN_DEFINE_ERROR(SamplingError);

#undef COSEN_DEFINE_ERROR

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& message, double residual)
        : Error("ConvergenceError", message), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Parse failure. `offset` is a byte offset for binary inputs; for text
/// inputs `row`/`column` locate the cell (1-based, 0 when not applicable).
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t offset, std::size_t row = 0,
               std::size_t column = 0)
        : Error("ParseError", message), offset_(offset), row_(row), column_(column) {}

    std::size_t offset() const noexcept { return offset_; }
    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t offset_;
    std::size_t row_;
    std::size_t column_;
};

}  // namespace cosen
