#include "mdlab/lang.hpp"

namespace mdlab::lang {
namespace {

int precedence(const Node& e) {
    switch (e.kind) {
        case NodeKind::Binary:
            if (e.text == "==" || e.text == "!=") return 1;
            if (e.text == "<" || e.text == "<=" || e.text == ">" || e.text == ">=") return 2;
            if (e.text == "+" || e.text == "-") return 3;
            return 4;
        case NodeKind::Unary:
        case NodeKind::Cast: return 5;
        case NodeKind::IntLit: return e.text.starts_with('-') ? 5 : 7;
        case NodeKind::FieldAccess:
        case NodeKind::MethodCall: return 6;
        default: return 7;
    }
}

void emit_expr(const Node& e, std::string& out);

void emit_wrapped(const Node& e, bool parens, std::string& out) {
    if (parens) out += '(';
    emit_expr(e, out);
    if (parens) out += ')';
}

void emit_args(const std::vector<Node>& kids, std::size_t from, std::string& out) {
    out += '(';
    for (std::size_t i = from; i < kids.size(); ++i) {
        if (i > from) out += ", ";
        emit_expr(kids[i], out);
    }
    out += ')';
}

void emit_expr(const Node& e, std::string& out) {
    switch (e.kind) {
        case NodeKind::IntLit:
        case NodeKind::BoolLit:
        case NodeKind::Name: out += e.text; break;
        case NodeKind::StrLit: out += quote(e.text); break;
        case NodeKind::NullLit: out += "null"; break;
        case NodeKind::This: out += "this"; break;
        case NodeKind::FieldAccess:
            emit_wrapped(e.kids.at(0), precedence(e.kids[0]) < 6, out);
            out += '.';
            out += e.text;
            break;
        case NodeKind::Call:
            out += e.text;
            emit_args(e.kids, 0, out);
            break;
        case NodeKind::MethodCall:
            emit_wrapped(e.kids.at(0), precedence(e.kids[0]) < 6, out);
            out += '.';
            out += e.text;
            emit_args(e.kids, 1, out);
            break;
        case NodeKind::New:
            out += "new ";
            out += e.kids.at(0).text;
            emit_args(e.kids, 1, out);
            break;
        case NodeKind::Cast:
            out += '(';
            out += e.kids.at(0).text;
            out += ") ";
            emit_wrapped(e.kids.at(1), precedence(e.kids[1]) < 5, out);
            break;
        case NodeKind::Unary: {
            out += e.text;
            const auto& operand = e.kids.at(0);
            // `- -5` must not fuse into a single token sequence that reads differently.
            bool neg_lit = operand.kind == NodeKind::IntLit && operand.text.starts_with('-');
            if (neg_lit || (operand.kind == NodeKind::Unary && operand.text == e.text)) out += ' ';
            // `-(5)` would otherwise re-read as the literal -5.
            bool lit = operand.kind == NodeKind::IntLit && !neg_lit && e.text == "-";
            emit_wrapped(operand, lit || precedence(operand) < 5, out);
            break;
        }
        case NodeKind::Binary: {
            int p = precedence(e);
            emit_wrapped(e.kids.at(0), precedence(e.kids[0]) < p, out);
            out += ' ';
            out += e.text;
            out += ' ';
            emit_wrapped(e.kids.at(1), precedence(e.kids[1]) <= p, out);
            break;
        }
        default: out += "<?" + std::string(to_string(e.kind)) + ">";
    }
}

std::string modifiers_text(std::uint8_t mods) {
    std::string out;
    if (mods & kPrivate) out += "private ";
    if (mods & kStatic) out += "static ";
    if (mods & kFinal) out += "final ";
    return out;
}

class Printer {
public:
    std::string out;

    void line(int indent, const std::string& text) {
        out.append(static_cast<std::size_t>(indent) * 4, ' ');
        out += text;
        out += '\n';
    }

    void block_body(const Node& block, int indent) {
        for (const auto& s : block.kids) statement(s, indent);
    }

    void statement(const Node& s, int indent) {
        switch (s.kind) {
            case NodeKind::Block:
                line(indent, "{");
                block_body(s, indent + 1);
                line(indent, "}");
                break;
            case NodeKind::VarDecl: {
                std::string t = s.kids.at(0).text + " " + s.text;
                if (s.kids.size() > 1) t += " = " + print_expr(s.kids[1]);
                line(indent, t + ";");
                break;
            }
            case NodeKind::Assign:
                line(indent, print_expr(s.kids.at(0)) + " = " + print_expr(s.kids.at(1)) + ";");
                break;
            case NodeKind::ExprStmt: line(indent, print_expr(s.kids.at(0)) + ";"); break;
            case NodeKind::If:
                line(indent, "if (" + print_expr(s.kids.at(0)) + ") {");
                block_body(s.kids.at(1), indent + 1);
                if (s.kids.size() > 2) {
                    line(indent, "} else {");
                    block_body(s.kids[2], indent + 1);
                }
                line(indent, "}");
                break;
            case NodeKind::While:
                line(indent, "while (" + print_expr(s.kids.at(0)) + ") {");
                block_body(s.kids.at(1), indent + 1);
                line(indent, "}");
                break;
            case NodeKind::Try: {
                line(indent, "try {");
                block_body(s.kids.at(0), indent + 1);
                const auto& c = s.kids.at(1);
                line(indent, "} catch (" + c.kids.at(0).text + " " + c.text + ") {");
                block_body(c.kids.at(1), indent + 1);
                line(indent, "}");
                break;
            }
            case NodeKind::Throw: line(indent, "throw " + print_expr(s.kids.at(0)) + ";"); break;
            case NodeKind::Return:
                line(indent, s.kids.empty() ? "return;" : "return " + print_expr(s.kids[0]) + ";");
                break;
            case NodeKind::Break: line(indent, "break;"); break;
            case NodeKind::Continue: line(indent, "continue;"); break;
            case NodeKind::Print: line(indent, "print(" + print_expr(s.kids.at(0)) + ");"); break;
            case NodeKind::SuperCall: {
                std::string t = "super";
                emit_args(s.kids, 0, t);
                line(indent, t + ";");
                break;
            }
            default: line(indent, "<?" + std::string(to_string(s.kind)) + ">;");
        }
    }

    std::string params(const Node& ps) {
        std::string t = "(";
        for (std::size_t i = 0; i < ps.kids.size(); ++i) {
            if (i) t += ", ";
            t += ps.kids[i].kids.at(0).text + " " + ps.kids[i].text;
        }
        return t + ")";
    }

    void member(const Node& m, int indent) {
        auto mods = modifiers_text(m.modifiers);
        switch (m.kind) {
            case NodeKind::Field: {
                std::string t = mods + m.kids.at(0).text + " " + m.text;
                if (m.kids.size() > 1) t += " = " + print_expr(m.kids[1]);
                line(indent, t + ";");
                break;
            }
            case NodeKind::Method:
                line(indent, mods + m.kids.at(0).text + " " + m.text + params(m.kids.at(1)) + " {");
                block_body(m.kids.at(2), indent + 1);
                line(indent, "}");
                break;
            case NodeKind::Constructor:
                line(indent, mods + m.text + params(m.kids.at(0)) + " {");
                block_body(m.kids.at(1), indent + 1);
                line(indent, "}");
                break;
            case NodeKind::StaticBlock:
                line(indent, "static {");
                block_body(m.kids.at(0), indent + 1);
                line(indent, "}");
                break;
            case NodeKind::NestedClass: {
                std::string head = "class " + m.text;
                if (!m.kids.at(0).text.empty()) head += " extends " + m.kids[0].text;
                line(indent, head + " {");
                for (std::size_t i = 1; i < m.kids.size(); ++i) member(m.kids[i], indent + 1);
                line(indent, "}");
                break;
            }
            default: line(indent, "<?" + std::string(to_string(m.kind)) + ">");
        }
    }
};

}  // namespace

std::string print_expr(const Node& expr) {
    std::string out;
    emit_expr(expr, out);
    return out;
}

std::string pretty_print(const ClassAst& ast) {
    Printer p;
    std::string head = "class " + ast.qualified_name;
    if (!ast.super_name.empty()) head += " extends " + ast.super_name;
    p.line(0, head + " {");
    for (const auto& m : ast.members) p.member(m.decl, 1);
    p.line(0, "}");
    return p.out;
}

}  // namespace mdlab::lang
