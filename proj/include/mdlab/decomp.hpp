#pragma once

// Decompiler backends: three builtin styles sharing one bytecode lifter, plus
// an adapter that runs an external decompiler executable.

#include <optional>
#include <string>
#include <vector>

#include "mdlab/vm.hpp"

namespace mdlab::decomp {

enum class FailureMode { empty_output, syntactic_error, deceptive };
std::string_view to_string(FailureMode m);

struct FailureEntry {
    std::string shape;  // name understood by shape_present()
    FailureMode mode = FailureMode::syntactic_error;
    std::string description;
};

struct DecompilerSpec {
    enum class Kind { builtin, external };

    std::string name;
    Kind kind = Kind::builtin;
    std::vector<FailureEntry> failure_profile;
    std::string command;  // external: template containing {input}
    int ext_timeout_secs = 60;
    /// Replace a body the backend cannot handle with a throwing stub instead
    /// of producing no output.
    bool throw_body_stub = false;
};

struct DecompOutput {
    std::optional<std::string> source;  // empty when the backend crashed, timed out, or declined
    double elapsed_ms = 0;
    std::string note;  // reason for an empty output

    bool empty() const { return !source.has_value(); }
};

DecompilerSpec literalist();
DecompilerSpec sugarer();
DecompilerSpec optimist();
std::vector<DecompilerSpec> builtin_backends();
std::optional<DecompilerSpec> builtin_by_name(std::string_view name);
DecompilerSpec external(std::string name, std::string command_template, int timeout_secs = 60);

DecompOutput decompile(const DecompilerSpec& spec, const vm::BytecodeClass& bc);

// --- bytecode shapes -------------------------------------------------------------

/// Every shape name used in failure profiles.
const std::vector<std::string>& all_shapes();
bool shape_present(std::string_view shape, const vm::BytecodeClass& bc);
std::vector<std::string> shapes_of(const vm::BytecodeClass& bc);

/// Failure modes the backend's declared profile predicts for `bc`.
std::vector<FailureEntry> predicted_failures(const DecompilerSpec& spec, const vm::BytecodeClass& bc);

}  // namespace mdlab::decomp
