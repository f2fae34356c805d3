#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bfmle {

enum class ErrorCode {
    NotPositiveDefinite,
    DimensionMismatch,
    SampleSizeTooSmall,
    DegenerateScatter,
    SingularTransform,
    NonFinite,
    SingularJacobian,
    PathCountOverflow,
    NoRealSolution,
    InexactDivision,
    ParseError,
    FileNotFound,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Every recoverable failure in the library is reported through this type.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Internal invariants that must never break on valid input.
inline bool is_internal(ErrorCode code) {
    return code == ErrorCode::NoRealSolution || code == ErrorCode::InexactDivision;
}

} // namespace bfmle
