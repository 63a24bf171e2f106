#pragma once

// MiniJ to stack bytecode. Two variants with divergent lowering strategies.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mdlab/common.hpp"
#include "mdlab/lang.hpp"
#include "mdlab/vm.hpp"

namespace mdlab::compiler {

struct CompilerVariant {
    std::string id;                   // "A" | "B"
    bool builder_concat = true;       // A: builder idiom, B: CONCAT instruction
    bool self_typed_wrapper = false;  // B: wrapper extra parameter typed as the nested class
    bool swapped_polarity = false;    // B: if/else emitted as IFNE with swapped blocks

    static CompilerVariant A();
    static CompilerVariant B();
    static CompilerVariant by_id(std::string_view id);
};

struct ConstVal {
    enum class Kind { Int, Bool, Str } kind = Kind::Int;
    std::int32_t i = 0;
    std::string s;

    std::string type() const;
    bool operator==(const ConstVal&) const = default;
};

struct FieldInfo {
    std::string name;
    std::string type;  // bytecode type name
    std::uint8_t flags = 0;
    std::optional<ConstVal> constant;
    bool has_initializer = false;
};

struct MethodInfo {
    std::string name;  // <init> for constructors
    std::vector<std::string> params;
    std::string ret;
    std::uint8_t flags = 0;
};

struct ClassInfo {
    std::string name;        // bytecode name, nested use `Outer$Inner`
    std::string super_name;  // bytecode name
    std::string top;         // enclosing top-level class (self for top-level)
    std::uint8_t flags = 0;
    std::vector<FieldInfo> fields;
    std::vector<MethodInfo> methods;
    std::vector<std::string> nested;  // bytecode names
    bool builtin = false;

    const FieldInfo* field(std::string_view n) const;
};

/// Symbol table for resolution. Layers chain to a parent so that a class under
/// compilation can shadow its classpath entry.
class ClassEnv {
public:
    ClassEnv();
    explicit ClassEnv(const ClassEnv* parent) : parent_(parent) {}

    const ClassInfo* find(std::string_view name) const;
    void put(ClassInfo info);
    void hide(const std::string& name) { hidden_.push_back(name); }

    void add_bytecode(const vm::BytecodeClass& bc);

    bool is_subclass(std::string_view sub, std::string_view super) const;
    bool assignable(std::string_view from, std::string_view to) const;

    /// Resolves a source type name in the context of a top-level class.
    std::optional<std::string> resolve_type(std::string_view written, std::string_view top) const;

private:
    const ClassEnv* parent_ = nullptr;
    std::map<std::string, ClassInfo, std::less<>> classes_;
    std::vector<std::string> hidden_;
};

/// Classpath built from bytecode, e.g. the corpus compiled by one variant.
ClassEnv env_from_bytecode(const std::vector<vm::BytecodeClass>& classes);

struct CompileResult {
    std::optional<vm::BytecodeClass> bc;
    Diagnostics diagnostics;

    bool ok() const { return bc.has_value(); }
};

/// Compiles one class against `classpath` (may be null). The class's own
/// declarations shadow any classpath entry of the same name.
CompileResult compile(const lang::ClassAst& ast, const CompilerVariant& variant, const ClassEnv* classpath = nullptr);

/// Compiles a set of classes together, each seeing the others' declarations.
std::vector<CompileResult> compile_all(const std::vector<lang::ClassAst>& asts, const CompilerVariant& variant,
                                       const ClassEnv* classpath = nullptr);

struct RecompileResult {
    bool pass = false;
    bool parsed = false;
    std::optional<lang::ClassAst> ast;
    std::optional<vm::BytecodeClass> bc;
    Diagnostics diagnostics;
};

/// Syntactic-correctness oracle: parse + compile.
RecompileResult recompile_check(std::string_view source, const CompilerVariant& variant,
                                const ClassEnv* classpath = nullptr);

/// Bytecode type name to MiniJ source spelling (`p.C$In` -> `p.C.In`).
std::string source_type_name(std::string_view bytecode_type);

}  // namespace mdlab::compiler
