#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdlab {

/// Half-open byte range [begin, end) into a source text.
struct Span {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;

    bool contains(std::uint32_t offset) const { return begin <= offset && offset < end; }
    bool operator==(const Span&) const = default;
};

enum class Severity { error, warning };

struct Diagnostic {
    std::string message;
    Span span;
    Severity severity = Severity::error;
};

using Diagnostics = std::vector<Diagnostic>;

inline bool has_errors(const Diagnostics& diags) {
    for (const auto& d : diags)
        if (d.severity == Severity::error) return true;
    return false;
}

/// Raised when a caller breaks an operation's precondition. Distinct from
/// subject failures, which are reported as diagnostics or verdicts.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Raised for faults inside the lab's own tooling (I/O, malformed files).
class ToolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string format_diagnostic(const Diagnostic& d, const std::string& source);

}  // namespace mdlab
