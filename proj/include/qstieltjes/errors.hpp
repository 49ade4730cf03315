#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qstieltjes {

enum class ErrorKind {
    unsupported_exact_input,
    divergence,
    pole,
    truncation,
    precondition,
    moment_inconsistency,
    fit,
    support,
    parse,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::unsupported_exact_input: return "unsupported-exact-input";
    case ErrorKind::divergence: return "divergence-error";
    case ErrorKind::pole: return "pole-error";
    case ErrorKind::truncation: return "truncation-error";
    case ErrorKind::precondition: return "precondition-error";
    case ErrorKind::moment_inconsistency: return "moment-inconsistency-error";
    case ErrorKind::fit: return "fit-error";
    case ErrorKind::support: return "support-error";
    case ErrorKind::parse: return "parse-error";
    }
    return "error";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

    /// True for failures of the numerics themselves rather than of the input.
    [[nodiscard]] bool is_numerical() const noexcept
    {
        return kind_ == ErrorKind::divergence || kind_ == ErrorKind::pole ||
               kind_ == ErrorKind::truncation || kind_ == ErrorKind::moment_inconsistency ||
               kind_ == ErrorKind::fit;
    }

private:
    ErrorKind kind_;
};

} // namespace qstieltjes
