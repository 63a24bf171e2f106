#include <sstream>

#include "mdlab/lang.hpp"

namespace mdlab {

std::string format_diagnostic(const Diagnostic& d, const std::string& source) {
    std::uint32_t line = 1, col = 1;
    for (std::uint32_t i = 0; i < d.span.begin && i < source.size(); ++i) {
        if (source[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    std::ostringstream os;
    os << line << ':' << col << ": " << (d.severity == Severity::error ? "error" : "warning") << ": "
       << d.message;
    return os.str();
}

}  // namespace mdlab

namespace mdlab::lang {

std::string_view to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::Field: return "Field";
        case NodeKind::Method: return "Method";
        case NodeKind::Constructor: return "Constructor";
        case NodeKind::StaticBlock: return "StaticBlock";
        case NodeKind::NestedClass: return "NestedClass";
        case NodeKind::Params: return "Params";
        case NodeKind::Param: return "Param";
        case NodeKind::Type: return "Type";
        case NodeKind::Block: return "Block";
        case NodeKind::VarDecl: return "VarDecl";
        case NodeKind::Assign: return "Assign";
        case NodeKind::ExprStmt: return "ExprStmt";
        case NodeKind::If: return "If";
        case NodeKind::While: return "While";
        case NodeKind::Try: return "Try";
        case NodeKind::Catch: return "Catch";
        case NodeKind::Throw: return "Throw";
        case NodeKind::Return: return "Return";
        case NodeKind::Break: return "Break";
        case NodeKind::Continue: return "Continue";
        case NodeKind::Print: return "Print";
        case NodeKind::SuperCall: return "SuperCall";
        case NodeKind::IntLit: return "IntLit";
        case NodeKind::BoolLit: return "BoolLit";
        case NodeKind::StrLit: return "StrLit";
        case NodeKind::NullLit: return "NullLit";
        case NodeKind::This: return "This";
        case NodeKind::Name: return "Name";
        case NodeKind::FieldAccess: return "FieldAccess";
        case NodeKind::Call: return "Call";
        case NodeKind::MethodCall: return "MethodCall";
        case NodeKind::New: return "New";
        case NodeKind::Cast: return "Cast";
        case NodeKind::Unary: return "Unary";
        case NodeKind::Binary: return "Binary";
    }
    return "?";
}

std::string_view to_string(MemberKind kind) {
    switch (kind) {
        case MemberKind::field: return "field";
        case MemberKind::method: return "method";
        case MemberKind::constructor: return "constructor";
        case MemberKind::nested_class: return "nested-class";
        case MemberKind::static_block: return "static-block";
    }
    return "?";
}

bool Node::same_shape(const Node& other) const {
    if (kind != other.kind || text != other.text || modifiers != other.modifiers ||
        kids.size() != other.kids.size())
        return false;
    for (std::size_t i = 0; i < kids.size(); ++i)
        if (!kids[i].same_shape(other.kids[i])) return false;
    return true;
}

std::size_t Node::size() const {
    std::size_t n = 1;
    for (const auto& k : kids) n += k.size();
    return n;
}

bool ClassAst::same_shape(const ClassAst& other) const {
    if (qualified_name != other.qualified_name || super_name != other.super_name ||
        members.size() != other.members.size())
        return false;
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (members[i].kind != other.members[i].kind) return false;
        if (!members[i].decl.same_shape(other.members[i].decl)) return false;
    }
    return true;
}

std::string ClassAst::simple_name() const {
    auto dot = qualified_name.rfind('.');
    return dot == std::string::npos ? qualified_name : qualified_name.substr(dot + 1);
}

std::string quote(std::string_view value) {
    std::string out = "\"";
    for (char c : value) {
        switch (c) {
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            default: out += c;
        }
    }
    out += '"';
    return out;
}

bool is_keyword(std::string_view w) {
    static constexpr std::string_view kws[] = {
        "class", "extends", "static", "final", "private", "int", "bool", "str", "void",
        "if", "else", "while", "try", "catch", "throw", "return", "break", "continue",
        "print", "new", "this", "super", "true", "false", "null"};
    for (auto k : kws)
        if (k == w) return true;
    return false;
}

std::string print_type_list(const Node& params) {
    std::string out;
    for (std::size_t i = 0; i < params.kids.size(); ++i) {
        if (i) out += ',';
        out += params.kids[i].kids.at(0).text;
    }
    return out;
}

namespace {

bool builtin_type(std::string_view t) {
    for (auto b : {"int", "bool", "str", "void", "Builder", "Object", "RuntimeException", "ArithmeticException",
                   "NullPointerException", "ClassCastException"})
        if (t == b) return true;
    return false;
}

// Spells own-class references the same way however the source wrote them.
std::string normalized_params(const Node& params, const std::string& owner) {
    auto simple = owner.substr(owner.rfind('.') == std::string::npos ? 0 : owner.rfind('.') + 1);
    std::string out;
    for (std::size_t i = 0; i < params.kids.size(); ++i) {
        std::string t = params.kids[i].kids.at(0).text;
        if (t == simple) {
            t = owner;
        } else if (t.starts_with(simple + ".")) {
            t = owner + t.substr(simple.size());
        } else if (t.find('.') == std::string::npos && !builtin_type(t)) {
            t = owner + "." + t;
        }
        out += (i ? "," : "") + t;
    }
    return out;
}

}  // namespace

MemberSignature member_signature(const TypeMember& m, std::string_view owner) {
    std::string o(owner);
    switch (m.kind) {
        case MemberKind::field: return {o + "#" + m.decl.text};
        case MemberKind::constructor: return {o + "(" + normalized_params(m.decl.kids.at(0), o) + ")"};
        case MemberKind::method:
            return {o + "." + m.decl.text + "(" + normalized_params(m.decl.kids.at(1), o) + ")"};
        case MemberKind::nested_class: return {o + "." + m.decl.text};
        case MemberKind::static_block:
            return {o + ".<clinit#" + std::to_string(m.static_ordinal) + ">"};
    }
    return {o};
}

std::vector<MemberSignature> member_signatures(const ClassAst& ast) {
    std::vector<MemberSignature> out;
    out.reserve(ast.members.size());
    for (const auto& m : ast.members) out.push_back(member_signature(m, ast.qualified_name));
    return out;
}

namespace {

bool overlaps(const Span& diag, const Span& member) {
    if (diag.begin == diag.end) return member.contains(diag.begin);
    return diag.begin < member.end && member.begin < diag.end;
}

}  // namespace

AnnotatedClass annotate_errors(ClassAst ast, const Diagnostics& diags) {
    AnnotatedClass out;
    for (const auto& d : diags) {
        if (d.span.begin > d.span.end || d.span.end > ast.source_length)
            throw ContractViolation("diagnostic span outside the annotated source: " + d.message);
    }
    for (const auto& d : diags) {
        if (d.severity != Severity::error) continue;
        bool inside = false;
        for (auto& m : ast.members) {
            if (overlaps(d.span, m.span())) {
                m.errored = true;
                inside = true;
            }
        }
        if (!inside) ++out.class_level_errors;
    }
    out.ast = std::move(ast);
    return out;
}

}  // namespace mdlab::lang
