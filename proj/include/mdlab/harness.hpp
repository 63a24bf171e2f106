#pragma once

// Corpus generation and loading, configuration, and the experiment runner.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "mdlab/assess.hpp"
#include "mdlab/compiler.hpp"
#include "mdlab/decomp.hpp"
#include "mdlab/meta.hpp"
#include "mdlab/vm.hpp"

namespace mdlab::harness {

/// concat-sugar, synthetic-wrapper, nested-private-ctor, overload-hazard,
/// straight-line, try-catch-loop, static-setter.
const std::vector<std::string>& tag_vocabulary();

/// Outcome expected for one (compiler, backend) cell. Generated classes use
/// "success" for either passing category; golden classes carry exact labels.
using Expectations = std::map<std::string, std::string>;  // "A/literalist" -> label
std::string cell_key(const std::string& compiler, const std::string& decompiler);

struct ClassEntry {
    std::string path;  // relative to the corpus root
    std::string qualified_name;
    std::vector<std::string> feature_tags;
    std::vector<std::string> test_files;
    std::string role;  // generator recipe or "golden"
    bool golden = false;
    Expectations expected;
    std::map<std::string, std::string> expected_meta;  // compiler -> success | failure
};

struct CorpusManifest {
    std::uint64_t seed = 0;
    int size = 0;
    std::vector<ClassEntry> classes;
};

struct Corpus {
    CorpusManifest manifest;
    std::vector<std::string> sources;              // parallel to manifest.classes
    std::vector<std::vector<vm::TestCase>> tests;  // parallel to manifest.classes

    std::size_t index_of(std::string_view qualified_name) const;
};

/// Smallest accepted corpus size: the hand-labeled classes alone.
inline constexpr int kMinCorpusSize = 12;

struct GoldenClass {
    std::string qualified_name;
    std::string source;
    std::vector<vm::TestCase> tests;
    Expectations labels;
    std::map<std::string, std::string> meta;
};
const std::vector<GoldenClass>& golden_classes();

/// Deterministic in `seed`. Sizes below kMinCorpusSize are a usage error
/// (ContractViolation).
Corpus gen_corpus(std::uint64_t seed, int size);

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus load_corpus(const std::filesystem::path& dir);

nlohmann::json to_json(const CorpusManifest& m);
CorpusManifest manifest_from_json(const nlohmann::json& j);

/// Bytecode for every corpus class under one variant, in manifest order.
std::vector<vm::BytecodeClass> compile_corpus(const Corpus& corpus, const compiler::CompilerVariant& variant);

/// Tags implied by the class's bytecode.
std::set<std::string> tags_from_bytecode(const vm::BytecodeClass& bc);

/// Problems found; empty when the corpus is usable.
std::vector<std::string> lint(const Corpus& corpus);

struct Config {
    std::vector<std::string> compilers{"A", "B"};
    std::vector<std::string> decompilers{"literalist", "sugarer", "optimist"};
    std::vector<std::string> order{"literalist", "sugarer", "optimist"};
    std::uint64_t fuel = vm::kDefaultFuel;
    std::set<std::string> excluded_tests;
    std::map<std::string, std::string> externals;  // name -> command template
    int external_timeout_secs = 60;
    bool throw_body_stub = false;
    bool run_meta = true;

    static Config parse(std::string_view text);
    static Config load(const std::filesystem::path& path);

    /// Resolves a backend name against builtins and configured externals.
    decomp::DecompilerSpec backend(const std::string& name) const;
    std::vector<decomp::DecompilerSpec> backends() const;
    std::vector<decomp::DecompilerSpec> meta_order() const;
};

struct MetaRow {
    std::string class_name;
    std::string compiler;
    meta::MetaResult result;
};

struct ToolFault {
    std::string class_name, compiler, decompiler, message;
};

struct ExperimentResult {
    std::vector<assess::AssessmentRecord> records;  // meta output appears with decompiler "meta"
    std::vector<MetaRow> meta;
    std::vector<ToolFault> faults;
};

struct RunOptions {
    int jobs = 1;
    std::optional<std::filesystem::path> records_out;  // JSON lines, written incrementally
    std::optional<std::filesystem::path> meta_out;
    std::optional<std::filesystem::path> scratch;  // work/<class>/<compiler>/<decompiler>/
};

ExperimentResult run_experiment(const Corpus& corpus, const Config& config, const RunOptions& options = {});

}  // namespace mdlab::harness
