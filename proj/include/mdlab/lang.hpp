#pragma once

// MiniJ: a miniature class-based language. One class per `.mj` file, single
// inheritance, static/instance fields, overloaded methods, constructors, one
// level of nested classes, if/while/try-catch/throw, int/bool/str values.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mdlab/common.hpp"

namespace mdlab::lang {

enum class NodeKind : std::uint8_t {
    // members
    Field,        // text=name, kids=[Type, init?]
    Method,       // text=name, kids=[Type(ret), Params, Block]
    Constructor,  // text=simple class name, kids=[Params, Block]
    StaticBlock,  // kids=[Block]
    NestedClass,  // text=simple name, kids=[Type(super, empty text if none), members...]
    Params,       // kids=[Param...]
    Param,        // text=name, kids=[Type]
    Type,         // text=type name as written
    // statements
    Block,
    VarDecl,   // text=name, kids=[Type, init?]
    Assign,    // kids=[target, value]
    ExprStmt,  // kids=[expr]
    If,        // kids=[cond, Block, Block?]
    While,     // kids=[cond, Block]
    Try,       // kids=[Block, Catch]
    Catch,     // text=var name, kids=[Type, Block]
    Throw,     // kids=[expr]
    Return,    // kids=[expr?]
    Break,
    Continue,
    Print,      // kids=[expr]
    SuperCall,  // kids=[args...]
    // expressions
    IntLit,   // text=decimal value
    BoolLit,  // text=true|false
    StrLit,   // text=decoded value
    NullLit,
    This,
    Name,         // text=identifier
    FieldAccess,  // text=field, kids=[object]
    Call,         // text=method, kids=[args...]; unqualified call
    MethodCall,   // text=method, kids=[receiver, args...]
    New,          // kids=[Type, args...]
    Cast,         // kids=[Type, expr]
    Unary,        // text=op, kids=[expr]
    Binary,       // text=op, kids=[lhs, rhs]
};

std::string_view to_string(NodeKind kind);

enum Modifier : std::uint8_t {
    kStatic = 1,
    kFinal = 2,
    kPrivate = 4,
};

/// Uniform AST node. Value semantics: copying a node deep-copies the subtree.
struct Node {
    NodeKind kind = NodeKind::Block;
    std::string text;
    std::uint8_t modifiers = 0;
    Span span;
    std::vector<Node> kids;

    Node() = default;
    Node(NodeKind k, std::string t = {}, std::vector<Node> children = {})
        : kind(k), text(std::move(t)), kids(std::move(children)) {}

    /// Structural equality ignoring spans.
    bool same_shape(const Node& other) const;
    std::size_t size() const;
};

enum class MemberKind : std::uint8_t { field, method, constructor, nested_class, static_block };

std::string_view to_string(MemberKind kind);

struct MemberSignature {
    std::string text;
    bool operator==(const MemberSignature&) const = default;
    auto operator<=>(const MemberSignature&) const = default;
};

struct TypeMember {
    MemberKind kind = MemberKind::method;
    Node decl;
    bool errored = false;
    std::string origin = "original";
    /// Ordinal among static blocks; only meaningful for static_block members.
    int static_ordinal = 0;

    const Span& span() const { return decl.span; }
};

struct ClassAst {
    std::string qualified_name;
    std::string super_name;  // empty: implicit Object
    Span header_span;        // `class ... {`
    Span body_span;          // `{ ... }`
    Span span;               // whole class
    std::uint32_t source_length = 0;
    std::vector<TypeMember> members;

    /// Structural equality ignoring spans, error flags and origins.
    bool same_shape(const ClassAst& other) const;
    std::string simple_name() const;
};

struct ParseResult {
    std::optional<ClassAst> ast;
    Diagnostics diagnostics;

    bool ok() const { return ast.has_value(); }
};

ParseResult parse(std::string_view source);

/// Canonical rendering. Re-parsing the output yields a same_shape AST.
std::string pretty_print(const ClassAst& ast);
std::string print_expr(const Node& expr);
std::string print_type_list(const Node& params);

MemberSignature member_signature(const TypeMember& member, std::string_view owner);
std::vector<MemberSignature> member_signatures(const ClassAst& ast);

struct AnnotatedClass {
    ClassAst ast;
    int class_level_errors = 0;
};

/// Flags every member whose span overlaps an error diagnostic. Errors outside
/// every member are counted as class-level errors.
AnnotatedClass annotate_errors(ClassAst ast, const Diagnostics& diags);

/// Escapes a string value as a MiniJ literal including quotes.
std::string quote(std::string_view value);

bool is_keyword(std::string_view word);

}  // namespace mdlab::lang
