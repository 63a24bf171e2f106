#include <cctype>
#include <charconv>
#include <limits>

#include "mdlab/lang.hpp"

namespace mdlab::lang {
namespace {

enum class Tok { ident, keyword, integer, string, punct, eof };

struct Token {
    Tok kind = Tok::eof;
    std::string text;  // decoded for strings
    Span span;
};

struct SyntaxError {
    Diagnostic diag;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run(Diagnostics& diags) {
        std::vector<Token> out;
        while (true) {
            skip_space();
            if (pos_ >= src_.size()) break;
            auto start = static_cast<std::uint32_t>(pos_);
            char c = src_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                while (pos_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                    ++pos_;
                std::string word(src_.substr(start, pos_ - start));
                out.push_back({is_keyword(word) ? Tok::keyword : Tok::ident, word, {start, pos()}});
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
                std::string digits(src_.substr(start, pos_ - start));
                for (char d : digits) {
                    if (!std::isdigit(static_cast<unsigned char>(d))) {
                        diags.push_back({"malformed integer literal", {start, pos()}});
                        return {};
                    }
                }
                out.push_back({Tok::integer, digits, {start, pos()}});
            } else if (c == '"') {
                ++pos_;
                std::string value;
                bool closed = false;
                while (pos_ < src_.size()) {
                    char s = src_[pos_];
                    if (s == '\n') break;
                    ++pos_;
                    if (s == '"') {
                        closed = true;
                        break;
                    }
                    if (s == '\\') {
                        if (pos_ >= src_.size()) break;
                        char e = src_[pos_++];
                        switch (e) {
                            case 'n': value += '\n'; break;
                            case 't': value += '\t'; break;
                            case '"': value += '"'; break;
                            case '\\': value += '\\'; break;
                            default:
                                diags.push_back({"illegal escape character", {pos() - 2, pos()}});
                                return {};
                        }
                        continue;
                    }
                    value += s;
                }
                if (!closed) {
                    diags.push_back({"unclosed string literal", {start, pos()}});
                    return {};
                }
                out.push_back({Tok::string, value, {start, pos()}});
            } else {
                static constexpr std::string_view two[] = {"==", "!=", "<=", ">="};
                bool matched = false;
                for (auto op : two) {
                    if (src_.substr(pos_, 2) == op) {
                        pos_ += 2;
                        out.push_back({Tok::punct, std::string(op), {start, pos()}});
                        matched = true;
                        break;
                    }
                }
                if (matched) continue;
                static constexpr std::string_view one = "{}()[];,.=+-*/%<>!";
                if (one.find(c) == std::string_view::npos) {
                    diags.push_back({std::string("illegal character '") + c + "'", {start, start + 1}});
                    return {};
                }
                ++pos_;
                out.push_back({Tok::punct, std::string(1, c), {start, pos()}});
            }
        }
        out.push_back({Tok::eof, "", {pos(), pos()}});
        return out;
    }

private:
    std::uint32_t pos() const { return static_cast<std::uint32_t>(pos_); }

    void skip_space() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (src_.substr(pos_, 2) == "//") {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            } else if (src_.substr(pos_, 2) == "/*") {
                auto end = src_.find("*/", pos_ + 2);
                pos_ = end == std::string_view::npos ? src_.size() : end + 2;
            } else {
                break;
            }
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    ClassAst parse_file(std::uint32_t length) {
        ClassAst ast;
        ast.source_length = length;
        auto start = peek().span.begin;
        expect_kw("class");
        ast.qualified_name = qname();
        if (accept_kw("extends")) ast.super_name = qname();
        auto open = expect("{");
        ast.header_span = {start, open.span.end};
        std::string simple = ast.qualified_name.substr(ast.qualified_name.rfind('.') + 1);
        int static_blocks = 0;
        while (!at("}")) {
            if (at_eof()) fail("unexpected end of input");
            ast.members.push_back(member(simple, true, static_blocks));
        }
        auto close = expect("}");
        ast.body_span = {open.span.begin, close.span.end};
        ast.span = {start, close.span.end};
        if (!at_eof()) fail("class, interface, or enum expected");
        return ast;
    }

private:
    // --- token helpers ---------------------------------------------------
    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    bool at_eof() const { return peek().kind == Tok::eof; }
    bool at(std::string_view p, std::size_t ahead = 0) const {
        const auto& t = peek(ahead);
        return t.kind == Tok::punct && t.text == p;
    }
    bool at_kw(std::string_view k, std::size_t ahead = 0) const {
        const auto& t = peek(ahead);
        return t.kind == Tok::keyword && t.text == k;
    }
    Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool accept(std::string_view p) {
        if (!at(p)) return false;
        ++pos_;
        return true;
    }
    bool accept_kw(std::string_view k) {
        if (!at_kw(k)) return false;
        ++pos_;
        return true;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        const auto& t = peek();
        std::string m = at_eof() ? "unexpected end of input" : msg;
        throw SyntaxError{{m, t.span}};
    }
    Token expect(std::string_view p) {
        if (!at(p)) fail("'" + std::string(p) + "' expected");
        return next();
    }
    Token expect_kw(std::string_view k) {
        if (!at_kw(k)) fail("'" + std::string(k) + "' expected");
        return next();
    }
    Token ident() {
        if (peek().kind != Tok::ident) fail("<identifier> expected");
        return next();
    }
    std::uint32_t last_end() const { return toks_[pos_ - 1].span.end; }

    std::string qname() {
        std::string out = ident().text;
        while (at(".") && peek(1).kind == Tok::ident) {
            ++pos_;
            out += '.';
            out += next().text;
        }
        return out;
    }

    bool at_primitive(std::size_t ahead = 0) const {
        return at_kw("int", ahead) || at_kw("bool", ahead) || at_kw("str", ahead) ||
               at_kw("void", ahead);
    }

    Node type() {
        auto start = peek().span.begin;
        Node t(NodeKind::Type);
        if (at_primitive()) {
            t.text = next().text;
        } else {
            t.text = qname();
        }
        t.span = {start, last_end()};
        return t;
    }

    // Length of a qualified name starting at `ahead`, in tokens; 0 if none.
    std::size_t qname_tokens(std::size_t ahead) const {
        if (peek(ahead).kind != Tok::ident) return 0;
        std::size_t n = 1;
        while (at(".", ahead + n) && peek(ahead + n + 1).kind == Tok::ident) n += 2;
        return n;
    }

    std::uint8_t modifiers() {
        std::uint8_t mods = 0;
        while (true) {
            std::uint8_t bit = 0;
            if (at_kw("static")) bit = kStatic;
            else if (at_kw("final")) bit = kFinal;
            else if (at_kw("private")) bit = kPrivate;
            else break;
            // `static {` starts a static block, not a modifier list.
            if (bit == kStatic && at("{", 1)) break;
            if (mods & bit) fail("repeated modifier");
            mods |= bit;
            ++pos_;
        }
        return mods;
    }

    // --- members -----------------------------------------------------------
    TypeMember member(const std::string& simple, bool top_level, int& static_blocks) {
        auto start = peek().span.begin;
        std::uint8_t mods = modifiers();
        TypeMember m;
        if (at_kw("static") && at("{", 1)) {
            if (mods) fail("illegal modifier for static initializer");
            ++pos_;
            m.kind = MemberKind::static_block;
            m.static_ordinal = static_blocks++;
            m.decl = Node(NodeKind::StaticBlock, "", {block()});
        } else if (at_kw("class")) {
            if (!top_level) fail("nested classes may only appear in a top-level class");
            if (mods) fail("modifier not allowed on nested class");
            ++pos_;
            auto name = ident().text;
            Node super_type(NodeKind::Type);
            if (accept_kw("extends")) super_type = type();
            expect("{");
            m.kind = MemberKind::nested_class;
            m.decl = Node(NodeKind::NestedClass, name, {super_type});
            int nested_static = 0;
            while (!at("}")) {
                if (at_eof()) fail("unexpected end of input");
                auto inner = member(name, false, nested_static);
                m.decl.kids.push_back(std::move(inner.decl));
            }
            expect("}");
        } else if (peek().kind == Tok::ident && at("(", 1)) {
            auto name = ident();
            if (name.text != simple) {
                throw SyntaxError{{"invalid method declaration; return type required", name.span}};
            }
            m.kind = MemberKind::constructor;
            auto ps = params();
            m.decl = Node(NodeKind::Constructor, name.text, {std::move(ps), block()});
        } else {
            auto t = type();
            auto name = ident().text;
            if (at("(")) {
                m.kind = MemberKind::method;
                auto ps = params();
                m.decl = Node(NodeKind::Method, name, {std::move(t), std::move(ps), block()});
            } else {
                m.kind = MemberKind::field;
                m.decl = Node(NodeKind::Field, name, {std::move(t)});
                if (accept("=")) m.decl.kids.push_back(expr());
                expect(";");
            }
        }
        m.decl.modifiers = mods;
        m.decl.span = {start, last_end()};
        return m;
    }

    Node params() {
        auto start = peek().span.begin;
        expect("(");
        Node ps(NodeKind::Params);
        if (!at(")")) {
            do {
                auto pstart = peek().span.begin;
                auto t = type();
                auto name = ident().text;
                Node p(NodeKind::Param, name, {std::move(t)});
                p.span = {pstart, last_end()};
                ps.kids.push_back(std::move(p));
            } while (accept(","));
        }
        expect(")");
        ps.span = {start, last_end()};
        return ps;
    }

    // --- statements ----------------------------------------------------------
    Node block() {
        auto start = peek().span.begin;
        expect("{");
        Node b(NodeKind::Block);
        while (!at("}")) {
            if (at_eof()) fail("unexpected end of input");
            b.kids.push_back(statement());
        }
        expect("}");
        b.span = {start, last_end()};
        return b;
    }

    // Bodies of if/while accept a single statement; it is wrapped in a block.
    Node body() {
        if (at("{")) return block();
        auto s = statement();
        Node b(NodeKind::Block, "", {s});
        b.span = s.span;
        return b;
    }

    bool at_declaration() const {
        if (at_primitive()) return true;
        auto n = qname_tokens(0);
        return n > 0 && peek(n).kind == Tok::ident;
    }

    Node finish(Node n, std::uint32_t start) {
        n.span = {start, last_end()};
        return n;
    }

    Node statement() {
        auto start = peek().span.begin;
        if (at("{")) return block();
        if (accept_kw("if")) {
            expect("(");
            auto c = expr();
            expect(")");
            Node n(NodeKind::If, "", {std::move(c), body()});
            if (accept_kw("else")) n.kids.push_back(body());
            return finish(std::move(n), start);
        }
        if (accept_kw("while")) {
            expect("(");
            auto c = expr();
            expect(")");
            return finish(Node(NodeKind::While, "", {std::move(c), body()}), start);
        }
        if (accept_kw("try")) {
            auto tb = block();
            auto cstart = peek().span.begin;
            expect_kw("catch");
            expect("(");
            auto t = type();
            auto var = ident().text;
            expect(")");
            auto cb = block();
            Node c(NodeKind::Catch, var, {std::move(t), std::move(cb)});
            c.span = {cstart, last_end()};
            return finish(Node(NodeKind::Try, "", {std::move(tb), std::move(c)}), start);
        }
        if (accept_kw("throw")) {
            auto e = expr();
            expect(";");
            return finish(Node(NodeKind::Throw, "", {std::move(e)}), start);
        }
        if (accept_kw("return")) {
            Node n(NodeKind::Return);
            if (!at(";")) n.kids.push_back(expr());
            expect(";");
            return finish(std::move(n), start);
        }
        if (accept_kw("break")) {
            expect(";");
            return finish(Node(NodeKind::Break), start);
        }
        if (accept_kw("continue")) {
            expect(";");
            return finish(Node(NodeKind::Continue), start);
        }
        if (accept_kw("print")) {
            expect("(");
            auto e = expr();
            expect(")");
            expect(";");
            return finish(Node(NodeKind::Print, "", {std::move(e)}), start);
        }
        if (accept_kw("super")) {
            auto args = arguments();
            expect(";");
            Node n(NodeKind::SuperCall);
            n.kids = std::move(args);
            return finish(std::move(n), start);
        }
        if (at_declaration()) {
            auto t = type();
            auto name = ident().text;
            Node n(NodeKind::VarDecl, name, {std::move(t)});
            if (accept("=")) n.kids.push_back(expr());
            expect(";");
            return finish(std::move(n), start);
        }
        auto e = expr();
        if (accept("=")) {
            if (e.kind != NodeKind::Name && e.kind != NodeKind::FieldAccess) {
                throw SyntaxError{{"unexpected assignment target", e.span}};
            }
            auto v = expr();
            expect(";");
            return finish(Node(NodeKind::Assign, "", {std::move(e), std::move(v)}), start);
        }
        expect(";");
        return finish(Node(NodeKind::ExprStmt, "", {std::move(e)}), start);
    }

    // --- expressions -------------------------------------------------------
    std::vector<Node> arguments() {
        expect("(");
        std::vector<Node> args;
        if (!at(")")) {
            do {
                args.push_back(expr());
            } while (accept(","));
        }
        expect(")");
        return args;
    }

    Node expr() { return equality(); }

    Node binary_level(int level) {
        static const std::vector<std::vector<std::string_view>> ops = {
            {"==", "!="}, {"<", "<=", ">", ">="}, {"+", "-"}, {"*", "/", "%"}};
        if (level == static_cast<int>(ops.size())) return unary();
        auto start = peek().span.begin;
        auto lhs = binary_level(level + 1);
        while (true) {
            std::string_view op;
            for (auto candidate : ops[level])
                if (at(candidate)) op = candidate;
            if (op.empty()) break;
            ++pos_;
            auto rhs = binary_level(level + 1);
            Node n(NodeKind::Binary, std::string(op), {std::move(lhs), std::move(rhs)});
            n.span = {start, last_end()};
            lhs = std::move(n);
        }
        return lhs;
    }

    Node equality() { return binary_level(0); }

    bool cast_ahead() const {
        if (!at("(")) return false;
        std::size_t n;
        if (at_kw("int", 1) || at_kw("bool", 1) || at_kw("str", 1)) {
            n = 1;
        } else {
            n = qname_tokens(1);
            if (n == 0) return false;
        }
        if (!at(")", 1 + n)) return false;
        const auto& after = peek(2 + n);
        switch (after.kind) {
            case Tok::ident:
            case Tok::integer:
            case Tok::string: return true;
            case Tok::keyword:
                return after.text == "new" || after.text == "this" || after.text == "null" ||
                       after.text == "true" || after.text == "false";
            case Tok::punct: return after.text == "(" || after.text == "!";
            case Tok::eof: return false;
        }
        return false;
    }

    Node unary() {
        auto start = peek().span.begin;
        if (at("-") && peek(1).kind == Tok::integer) {
            ++pos_;
            auto lit = next();
            return finish(Node(NodeKind::IntLit, int_literal("-" + lit.text, lit.span)), start);
        }
        if (at("-") || at("!")) {
            auto op = next().text;
            auto operand = unary();
            return finish(Node(NodeKind::Unary, op, {std::move(operand)}), start);
        }
        if (cast_ahead()) {
            ++pos_;
            auto t = type();
            expect(")");
            auto operand = unary();
            return finish(Node(NodeKind::Cast, "", {std::move(t), std::move(operand)}), start);
        }
        return postfix();
    }

    std::string int_literal(const std::string& text, Span span) const {
        long long v = 0;
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || v > std::numeric_limits<std::int32_t>::max() ||
            v < std::numeric_limits<std::int32_t>::min()) {
            throw SyntaxError{{"integer number too large", span}};
        }
        return std::to_string(v);
    }

    Node postfix() {
        auto start = peek().span.begin;
        auto e = primary();
        while (at(".")) {
            ++pos_;
            auto name = ident().text;
            if (at("(")) {
                Node call(NodeKind::MethodCall, name, {std::move(e)});
                for (auto& a : arguments()) call.kids.push_back(std::move(a));
                e = finish(std::move(call), start);
            } else {
                e = finish(Node(NodeKind::FieldAccess, name, {std::move(e)}), start);
            }
        }
        return e;
    }

    Node primary() {
        auto start = peek().span.begin;
        const auto& t = peek();
        switch (t.kind) {
            case Tok::integer: {
                auto lit = next();
                return finish(Node(NodeKind::IntLit, int_literal(lit.text, lit.span)), start);
            }
            case Tok::string: return finish(Node(NodeKind::StrLit, next().text), start);
            case Tok::ident: {
                auto name = next().text;
                if (at("(")) {
                    Node call(NodeKind::Call, name);
                    call.kids = arguments();
                    return finish(std::move(call), start);
                }
                return finish(Node(NodeKind::Name, name), start);
            }
            case Tok::keyword: {
                if (accept_kw("true")) return finish(Node(NodeKind::BoolLit, "true"), start);
                if (accept_kw("false")) return finish(Node(NodeKind::BoolLit, "false"), start);
                if (accept_kw("null")) return finish(Node(NodeKind::NullLit), start);
                if (accept_kw("this")) return finish(Node(NodeKind::This), start);
                if (accept_kw("new")) {
                    auto ty = type();
                    Node n(NodeKind::New, "", {std::move(ty)});
                    for (auto& a : arguments()) n.kids.push_back(std::move(a));
                    return finish(std::move(n), start);
                }
                fail("illegal start of expression");
            }
            case Tok::punct:
                if (accept("(")) {
                    auto inner = expr();
                    expect(")");
                    return inner;
                }
                fail("illegal start of expression");
            case Tok::eof: fail("unexpected end of input");
        }
        fail("illegal start of expression");
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace

ParseResult parse(std::string_view source) {
    ParseResult result;
    Lexer lexer(source);
    auto tokens = lexer.run(result.diagnostics);
    if (has_errors(result.diagnostics)) return result;
    try {
        Parser p(std::move(tokens));
        result.ast = p.parse_file(static_cast<std::uint32_t>(source.size()));
    } catch (const SyntaxError& e) {
        result.diagnostics.push_back(e.diag);
    }
    return result;
}

}  // namespace mdlab::lang
