#pragma once

// Stack bytecode: class model, `.mjc` text serialization, verifier,
// constant-pool canonicalization, bytecode diffing and the interpreter that
// runs `.tj` test cases.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mdlab/common.hpp"

namespace mdlab::vm {

enum class Op : std::uint8_t {
    NOP,
    ICONST,  // imm: 16-bit signed
    LDC,     // pool: int | str
    ACONST_NULL,
    LOAD,   // local
    STORE,  // local
    GETSTATIC,
    PUTSTATIC,
    GETFIELD,
    PUTFIELD,  // pool: field
    ADD,
    SUB,
    MUL,
    DIV,
    REM,
    NEG,
    NOT,
    EQ,
    NE,
    LT,
    LE,
    GT,
    GE,
    CONCAT,  // tags: lhs, rhs
    BUILDER_NEW,
    BUILDER_APPEND,  // tag
    BUILDER_STR,
    IFEQ,
    IFNE,
    GOTO,  // branch offset
    INVOKESTATIC,
    INVOKEVIRT,
    INVOKESPECIAL,  // pool: method
    NEW,
    CHECKCAST,  // pool: type
    DUP,
    POP,
    THROW,
    RETURN,
    IRETURN,
    ARETURN,
    PRINT,  // tag
};

enum class OperandKind { none, imm, pool, local, branch, tag, tag2 };

std::string_view to_string(Op op);
std::optional<Op> op_from_string(std::string_view name);
OperandKind operand_kind(Op op);
/// Encoded width in bytes, opcode included.
int encoded_size(Op op);
bool is_branch(Op op);
bool is_terminator(Op op);

/// Runtime value category used by PRINT/CONCAT/BUILDER_APPEND operands.
enum class Tag : std::uint8_t { Int, Bool, Str, Ref };
std::string_view to_string(Tag t);
std::optional<Tag> tag_from_string(std::string_view s);

struct Instr {
    Op op = Op::NOP;
    std::int32_t a = 0;  // immediate, pool index, local, branch target offset, or first tag
    std::int32_t b = 0;  // second tag for CONCAT

    bool operator==(const Instr&) const = default;
};

enum class PoolKind : std::uint8_t { Int, Str, Field, Method, Type };
std::string_view to_string(PoolKind k);

/// Pool payload formats:
///   Int    decimal value
///   Str    raw string value
///   Field  owner#name:type
///   Method owner.name(T1,T2):R   (constructors use <init>)
///   Type   qualified class name
struct PoolEntry {
    PoolKind kind = PoolKind::Int;
    std::string text;

    bool operator==(const PoolEntry&) const = default;
    auto operator<=>(const PoolEntry&) const = default;
};

struct FieldRef {
    std::string owner, name, type;
};
struct MethodRef {
    std::string owner, name;
    std::vector<std::string> params;
    std::string ret;
};
FieldRef parse_field_ref(std::string_view text);
MethodRef parse_method_ref(std::string_view text);
std::string format_field_ref(const FieldRef& r);
std::string format_method_ref(const MethodRef& r);

enum Flags : std::uint8_t {
    kStatic = 1,
    kFinal = 2,
    kPrivate = 4,
    kSynthetic = 8,
};
std::string flags_text(std::uint8_t flags);

struct FieldDef {
    std::string name;
    std::string type;
    std::uint8_t flags = 0;
    int constant = -1;  // pool index of ConstantValue, -1 if none

    bool operator==(const FieldDef&) const = default;
};

struct LocalVar {
    std::string type;
    std::string name;  // debug name; empty when not recorded

    bool operator==(const LocalVar&) const = default;
};

struct Handler {
    std::int32_t start = 0, end = 0, target = 0;  // byte offsets, [start, end)
    int type = -1;                                // pool index of caught type

    bool operator==(const Handler&) const = default;
};

struct MethodBody {
    std::string owner;
    std::string name;  // <init>, <clinit>, or identifier
    std::vector<std::string> params;
    std::string ret;
    std::uint8_t flags = 0;
    int max_stack = 0;
    int max_locals = 0;
    std::vector<LocalVar> locals;
    std::vector<Handler> handlers;
    std::vector<Instr> code;

    std::string descriptor() const;  // owner.name(T1,T2):R
    bool is_static() const { return flags & kStatic; }
    std::vector<std::int32_t> offsets() const;

    bool operator==(const MethodBody&) const = default;
};

struct BytecodeClass {
    std::string name;
    std::string super_name = "Object";
    std::uint8_t flags = 0;
    std::vector<PoolEntry> pool;
    std::vector<FieldDef> fields;
    std::vector<MethodBody> methods;
    std::vector<BytecodeClass> nested;

    int add_pool(PoolKind kind, std::string text);
    const MethodBody* find_method(std::string_view name, const std::vector<std::string>& params) const;
    const FieldDef* find_field(std::string_view name) const;

    bool operator==(const BytecodeClass&) const = default;
};

// --- serialization -----------------------------------------------------------

/// `.mjc` assembly text. With `with_debug_names=false` the local variable
/// debug names are omitted, which is the form compared by bytecode_equal.
std::string serialize(const BytecodeClass& bc, bool with_debug_names = true);

struct LoadResult {
    std::optional<BytecodeClass> bc;
    std::string error;
};
LoadResult deserialize(std::string_view text);

// --- verification / canonical form ------------------------------------------

Diagnostics verify(const BytecodeClass& bc);

/// Largest operand stack depth reached by `m`, or -1 if the stack is inconsistent.
int compute_max_stack(const BytecodeClass& bc, const MethodBody& m);

/// Sorts the constant pool by (kind, payload), rewrites every index, and
/// recurses into nested classes.
BytecodeClass canonicalize_pool(const BytecodeClass& bc);

struct BytecodeDiff {
    bool equal = true;
    std::string diff;  // unified-style line diff of canonical text when unequal
};
BytecodeDiff bytecode_equal(const BytecodeClass& a, const BytecodeClass& b);

/// Line-level diff, `-`/`+` prefixed, unchanged lines omitted.
std::string line_diff(std::string_view a, std::string_view b);

// --- tests and execution ------------------------------------------------------

struct Literal {
    enum class Kind { Int, Bool, Str, Null } kind = Kind::Int;
    std::int32_t i = 0;
    std::string s;

    std::string render() const;
};

struct TestCase {
    std::string id;
    std::string entry;  // static method signature, e.g. p.C.name(int,str)
    std::vector<Literal> args;
    std::string expected_stdout;
    std::string expected_outcome = "normal";  // normal | throws:<Type>
};

std::vector<TestCase> parse_tests(std::string_view text);
std::string format_tests(const std::vector<TestCase>& tests);

enum class Verdict { pass, fail, timeout, crash };
std::string_view to_string(Verdict v);

struct TestResult {
    std::string id;
    Verdict verdict = Verdict::pass;
    std::string detail;  // diff on fail, reason on crash
};

struct TestReport {
    std::vector<TestResult> results;
    double elapsed_ms = 0;

    int count(Verdict v) const;
};

struct Observation {
    std::string stdout_text;
    std::string outcome;  // normal | throws:<Type> | timeout | crash
    std::string crash_reason;
    std::uint64_t steps = 0;
};

inline constexpr std::uint64_t kDefaultFuel = 10'000'000;
/// Fuel charged for each invocation on top of the instruction itself.
inline constexpr std::uint64_t kCallFuel = 64;

/// A set of loaded classes (including nested) keyed by qualified name.
class Program {
public:
    Program() = default;
    explicit Program(const std::vector<BytecodeClass>& classes);
    void add(const BytecodeClass& bc);
    const BytecodeClass* find(std::string_view name) const;
    const std::map<std::string, BytecodeClass, std::less<>>& classes() const { return classes_; }

private:
    std::map<std::string, BytecodeClass, std::less<>> classes_;
};

Observation run_entry(const Program& program, const TestCase& test, std::uint64_t fuel);
TestResult execute(const Program& program, const TestCase& test, std::uint64_t fuel = kDefaultFuel);
TestReport run_tests(const Program& program, const std::vector<TestCase>& tests,
                     std::uint64_t fuel = kDefaultFuel);

/// Builtin classes provided by the runtime.
bool is_builtin_class(std::string_view name);
/// Runtime subclass check across user classes and builtins.
bool is_subclass(const Program& program, std::string_view sub, std::string_view super);

}  // namespace mdlab::vm
