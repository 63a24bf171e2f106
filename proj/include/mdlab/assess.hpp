#pragma once

// Decompile, diff, recompile, compare bytecode, run tests; then classify.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "mdlab/astdiff.hpp"
#include "mdlab/compiler.hpp"
#include "mdlab/decomp.hpp"
#include "mdlab/vm.hpp"

namespace mdlab::assess {

enum class Category { EmptyOutput, NotRecompilable, Deceptive, EquivModuloInputs, StrictlyEquivalent };
std::string_view to_string(Category c);
std::optional<Category> category_from_string(std::string_view s);

/// Fields reached by the pipeline. Absent optionals mean the stage was not run.
struct StageFacts {
    bool has_output = false;
    bool recompiled = false;
    std::optional<bool> bytecode_identical;
    const vm::TestReport* tests = nullptr;
};

/// Throws ContractViolation on combinations the pipeline cannot produce,
/// including a recompiled, non-identical class with no tests to decide it.
Category classify(const StageFacts& facts);

struct TestCounts {
    int pass = 0, fail = 0, timeout = 0;  // crashes count as failures
};
TestCounts count_tests(const vm::TestReport& report);

struct AssessmentRecord {
    std::string class_name;
    std::string compiler;
    std::string decompiler;
    Category category = Category::EmptyOutput;
    std::optional<astdiff::Distortion> distortion;
    std::optional<bool> bytecode_identical;
    std::optional<vm::TestReport> test_report;
    double elapsed_ms = 0;
    std::string note;  // empty-output reason or first compile diagnostic

    // retained for scratch output
    std::optional<std::string> source;
    std::optional<vm::BytecodeClass> recompiled;
    Diagnostics diagnostics;
};

/// The class under assessment, already compiled by the variant being studied.
struct Subject {
    lang::ClassAst ast;
    vm::BytecodeClass bytecode;
    std::vector<vm::TestCase> tests;
};

struct Options {
    std::uint64_t fuel = vm::kDefaultFuel;
    std::set<std::string> excluded_tests;
};

/// `classpath` holds the other classes compiled by the same variant; an entry
/// named like the subject is ignored.
AssessmentRecord assess(const Subject& subject, const compiler::CompilerVariant& variant,
                        const decomp::DecompilerSpec& decompiler, const std::vector<vm::BytecodeClass>& classpath,
                        const Options& options = {});

/// Steps after decompilation, for output produced elsewhere (e.g. by the
/// meta-decompiler). `source` empty means no output.
AssessmentRecord assess_output(const Subject& subject, const compiler::CompilerVariant& variant,
                               const std::string& decompiler_name, const std::optional<std::string>& source,
                               const std::vector<vm::BytecodeClass>& classpath, const Options& options = {});

/// Compiles `class_src` under `variant` against `classpath` and assesses it.
AssessmentRecord assess(const std::string& class_src, const compiler::CompilerVariant& variant,
                        const decomp::DecompilerSpec& decompiler, const std::vector<vm::TestCase>& tests,
                        const std::vector<vm::BytecodeClass>& classpath = {}, const Options& options = {});

nlohmann::json to_json(const AssessmentRecord& r);
/// Inverse of to_json for the fields it carries (no script, no test details).
AssessmentRecord record_from_json(const nlohmann::json& j);

}  // namespace mdlab::assess
