#include <algorithm>
#include <charconv>
#include <sstream>

#include "mdlab/lang.hpp"
#include "mdlab/vm.hpp"

namespace mdlab::vm {
namespace {

struct OpInfo {
    Op op;
    std::string_view name;
    OperandKind operand;
};

constexpr OpInfo kOps[] = {
    {Op::NOP, "NOP", OperandKind::none},
    {Op::ICONST, "ICONST", OperandKind::imm},
    {Op::LDC, "LDC", OperandKind::pool},
    {Op::ACONST_NULL, "ACONST_NULL", OperandKind::none},
    {Op::LOAD, "LOAD", OperandKind::local},
    {Op::STORE, "STORE", OperandKind::local},
    {Op::GETSTATIC, "GETSTATIC", OperandKind::pool},
    {Op::PUTSTATIC, "PUTSTATIC", OperandKind::pool},
    {Op::GETFIELD, "GETFIELD", OperandKind::pool},
    {Op::PUTFIELD, "PUTFIELD", OperandKind::pool},
    {Op::ADD, "ADD", OperandKind::none},
    {Op::SUB, "SUB", OperandKind::none},
    {Op::MUL, "MUL", OperandKind::none},
    {Op::DIV, "DIV", OperandKind::none},
    {Op::REM, "REM", OperandKind::none},
    {Op::NEG, "NEG", OperandKind::none},
    {Op::NOT, "NOT", OperandKind::none},
    {Op::EQ, "EQ", OperandKind::none},
    {Op::NE, "NE", OperandKind::none},
    {Op::LT, "LT", OperandKind::none},
    {Op::LE, "LE", OperandKind::none},
    {Op::GT, "GT", OperandKind::none},
    {Op::GE, "GE", OperandKind::none},
    {Op::CONCAT, "CONCAT", OperandKind::tag2},
    {Op::BUILDER_NEW, "BUILDER_NEW", OperandKind::none},
    {Op::BUILDER_APPEND, "BUILDER_APPEND", OperandKind::tag},
    {Op::BUILDER_STR, "BUILDER_STR", OperandKind::none},
    {Op::IFEQ, "IFEQ", OperandKind::branch},
    {Op::IFNE, "IFNE", OperandKind::branch},
    {Op::GOTO, "GOTO", OperandKind::branch},
    {Op::INVOKESTATIC, "INVOKESTATIC", OperandKind::pool},
    {Op::INVOKEVIRT, "INVOKEVIRT", OperandKind::pool},
    {Op::INVOKESPECIAL, "INVOKESPECIAL", OperandKind::pool},
    {Op::NEW, "NEW", OperandKind::pool},
    {Op::CHECKCAST, "CHECKCAST", OperandKind::pool},
    {Op::DUP, "DUP", OperandKind::none},
    {Op::POP, "POP", OperandKind::none},
    {Op::THROW, "THROW", OperandKind::none},
    {Op::RETURN, "RETURN", OperandKind::none},
    {Op::IRETURN, "IRETURN", OperandKind::none},
    {Op::ARETURN, "ARETURN", OperandKind::none},
    {Op::PRINT, "PRINT", OperandKind::tag},
};

const OpInfo& info(Op op) { return kOps[static_cast<std::size_t>(op)]; }

bool parse_int(std::string_view s, std::int64_t& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

std::vector<std::string> split_ws(std::string_view line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        if (i >= line.size()) break;
        auto j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        out.emplace_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

// Decodes a quoted literal produced by lang::quote.
bool unquote(std::string_view q, std::string& out) {
    if (q.size() < 2 || q.front() != '"' || q.back() != '"') return false;
    out.clear();
    for (std::size_t i = 1; i + 1 < q.size(); ++i) {
        char c = q[i];
        if (c != '\\') {
            out += c;
            continue;
        }
        if (i + 2 >= q.size()) return false;
        char e = q[++i];
        switch (e) {
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case '"': out += '"'; break;
            case '\\': out += '\\'; break;
            default: return false;
        }
    }
    return true;
}

std::string pool_payload(const PoolEntry& e) {
    return e.kind == PoolKind::Str ? lang::quote(e.text) : e.text;
}

void serialize_class(const BytecodeClass& bc, bool debug, std::ostringstream& os) {
    os << "CLASS " << bc.name << " extends " << bc.super_name;
    if (bc.flags) os << ' ' << flags_text(bc.flags);
    os << "\nPOOL:\n";
    for (std::size_t i = 0; i < bc.pool.size(); ++i)
        os << '#' << i << ' ' << to_string(bc.pool[i].kind) << ' ' << pool_payload(bc.pool[i]) << '\n';
    for (const auto& f : bc.fields) {
        os << "FIELD " << f.name << ' ' << f.type;
        if (f.flags) os << ' ' << flags_text(f.flags);
        if (f.constant >= 0) os << " =#" << f.constant;
        os << '\n';
    }
    for (const auto& m : bc.methods) {
        os << "METHOD " << m.descriptor() << " stack=" << m.max_stack << " locals=" << m.max_locals;
        if (m.flags) os << ' ' << flags_text(m.flags);
        os << '\n';
        for (std::size_t k = 0; k < m.locals.size(); ++k) {
            os << "VAR " << k << ' ' << m.locals[k].type;
            if (debug && !m.locals[k].name.empty()) os << ' ' << m.locals[k].name;
            os << '\n';
        }
        for (const auto& h : m.handlers)
            os << "TRY " << h.start << ' ' << h.end << ' ' << h.target << " #" << h.type << '\n';
        auto offs = m.offsets();
        for (std::size_t i = 0; i < m.code.size(); ++i) {
            const auto& in = m.code[i];
            os << "  " << offs[i] << ": " << to_string(in.op);
            switch (operand_kind(in.op)) {
                case OperandKind::none: break;
                case OperandKind::imm:
                case OperandKind::local:
                case OperandKind::branch: os << ' ' << in.a; break;
                case OperandKind::pool: os << " #" << in.a; break;
                case OperandKind::tag: os << ' ' << to_string(static_cast<Tag>(in.a)); break;
                case OperandKind::tag2:
                    os << ' ' << to_string(static_cast<Tag>(in.a)) << ' '
                       << to_string(static_cast<Tag>(in.b));
                    break;
            }
            os << '\n';
        }
        os << "END\n";
    }
    for (const auto& n : bc.nested) serialize_class(n, debug, os);
    os << "ENDCLASS\n";
}

std::uint8_t parse_flag(std::string_view w) {
    if (w == "static") return kStatic;
    if (w == "final") return kFinal;
    if (w == "private") return kPrivate;
    if (w == "synthetic") return kSynthetic;
    return 0;
}

class Loader {
public:
    explicit Loader(std::string_view text) {
        std::size_t i = 0;
        while (i <= text.size()) {
            auto j = text.find('\n', i);
            if (j == std::string_view::npos) j = text.size();
            auto line = text.substr(i, j - i);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            lines_.push_back(line);
            i = j + 1;
        }
    }

    BytecodeClass load_class() {
        auto head = split_ws(next_line());
        if (head.size() < 4 || head[0] != "CLASS" || head[2] != "extends") fail("CLASS header expected");
        BytecodeClass bc;
        bc.name = head[1];
        bc.super_name = head[3];
        for (std::size_t i = 4; i < head.size(); ++i) bc.flags |= flag(head[i]);
        if (next_line() != "POOL:") fail("POOL: expected");
        while (peek_line().starts_with('#')) {
            auto line = next_line();
            auto sp1 = line.find(' ');
            auto sp2 = line.find(' ', sp1 + 1);
            if (sp1 == std::string_view::npos || sp2 == std::string_view::npos) fail("bad pool entry");
            std::int64_t idx = 0;
            if (!parse_int(line.substr(1, sp1 - 1), idx) || idx != static_cast<std::int64_t>(bc.pool.size()))
                fail("pool index out of sequence");
            auto kind = line.substr(sp1 + 1, sp2 - sp1 - 1);
            auto payload = line.substr(sp2 + 1);
            PoolEntry e;
            if (kind == "int") e.kind = PoolKind::Int;
            else if (kind == "str") e.kind = PoolKind::Str;
            else if (kind == "field") e.kind = PoolKind::Field;
            else if (kind == "method") e.kind = PoolKind::Method;
            else if (kind == "type") e.kind = PoolKind::Type;
            else fail("unknown pool kind");
            if (e.kind == PoolKind::Str) {
                if (!unquote(payload, e.text)) fail("bad string constant");
            } else {
                e.text = std::string(payload);
            }
            bc.pool.push_back(std::move(e));
        }
        while (true) {
            auto peekw = peek_line();
            if (peekw.starts_with("FIELD ")) {
                auto w = split_ws(next_line());
                if (w.size() < 3) fail("bad FIELD");
                FieldDef f{w[1], w[2], 0, -1};
                for (std::size_t i = 3; i < w.size(); ++i) {
                    if (w[i].starts_with("=#")) f.constant = static_cast<int>(number(w[i].substr(2)));
                    else f.flags |= flag(w[i]);
                }
                bc.fields.push_back(std::move(f));
            } else if (peekw.starts_with("METHOD ")) {
                bc.methods.push_back(load_method());
            } else if (peekw.starts_with("CLASS ")) {
                bc.nested.push_back(load_class());
            } else if (peekw == "ENDCLASS") {
                next_line();
                break;
            } else {
                fail("unexpected line");
            }
        }
        return bc;
    }

    bool at_end() {
        while (line_ < lines_.size() && lines_[line_].empty()) ++line_;
        return line_ >= lines_.size();
    }

    std::string error;

    [[noreturn]] void fail(const std::string& msg) {
        throw ToolError("line " + std::to_string(line_) + ": " + msg);
    }

private:
    std::string_view peek_line() {
        while (line_ < lines_.size() && lines_[line_].empty()) ++line_;
        return line_ < lines_.size() ? lines_[line_] : std::string_view{};
    }
    std::string_view next_line() {
        auto l = peek_line();
        if (line_ >= lines_.size()) fail("unexpected end of file");
        ++line_;
        return l;
    }
    std::int64_t number(std::string_view s) {
        std::int64_t v = 0;
        if (!parse_int(s, v)) fail("number expected: " + std::string(s));
        return v;
    }
    std::uint8_t flag(std::string_view w) {
        auto f = parse_flag(w);
        if (!f) fail("unknown flag " + std::string(w));
        return f;
    }

    MethodBody load_method() {
        auto w = split_ws(next_line());
        if (w.size() < 4) fail("bad METHOD");
        auto ref = parse_method_ref(w[1]);
        MethodBody m;
        m.owner = ref.owner;
        m.name = ref.name;
        m.params = ref.params;
        m.ret = ref.ret;
        if (!w[2].starts_with("stack=") || !w[3].starts_with("locals=")) fail("stack=/locals= expected");
        m.max_stack = static_cast<int>(number(w[2].substr(6)));
        m.max_locals = static_cast<int>(number(w[3].substr(7)));
        for (std::size_t i = 4; i < w.size(); ++i) m.flags |= flag(w[i]);
        std::vector<std::int32_t> listed;
        while (true) {
            auto line = next_line();
            if (line == "END") break;
            auto t = split_ws(line);
            if (t.empty()) continue;
            if (t[0] == "VAR") {
                if (t.size() < 3 || number(t[1]) != static_cast<std::int64_t>(m.locals.size()))
                    fail("bad VAR");
                m.locals.push_back({t[2], t.size() > 3 ? t[3] : ""});
            } else if (t[0] == "TRY") {
                if (t.size() != 5 || !t[4].starts_with('#')) fail("bad TRY");
                m.handlers.push_back({static_cast<std::int32_t>(number(t[1])),
                                      static_cast<std::int32_t>(number(t[2])),
                                      static_cast<std::int32_t>(number(t[3])),
                                      static_cast<int>(number(t[4].substr(1)))});
            } else {
                if (t.size() < 2 || !t[0].ends_with(':')) fail("instruction expected");
                listed.push_back(static_cast<std::int32_t>(number(t[0].substr(0, t[0].size() - 1))));
                auto op = op_from_string(t[1]);
                if (!op) fail("unknown opcode " + t[1]);
                Instr in{*op, 0, 0};
                auto kind = operand_kind(*op);
                std::size_t want = kind == OperandKind::none ? 2 : kind == OperandKind::tag2 ? 4 : 3;
                if (t.size() != want) fail("wrong operand count for " + t[1]);
                switch (kind) {
                    case OperandKind::none: break;
                    case OperandKind::imm:
                    case OperandKind::local:
                    case OperandKind::branch: in.a = static_cast<std::int32_t>(number(t[2])); break;
                    case OperandKind::pool:
                        if (!t[2].starts_with('#')) fail("pool operand expected");
                        in.a = static_cast<std::int32_t>(number(t[2].substr(1)));
                        break;
                    case OperandKind::tag:
                    case OperandKind::tag2: {
                        auto a = tag_from_string(t[2]);
                        if (!a) fail("bad tag");
                        in.a = static_cast<std::int32_t>(*a);
                        if (kind == OperandKind::tag2) {
                            auto b = tag_from_string(t[3]);
                            if (!b) fail("bad tag");
                            in.b = static_cast<std::int32_t>(*b);
                        }
                        break;
                    }
                }
                m.code.push_back(in);
            }
        }
        if (listed != m.offsets()) fail("instruction offsets do not match encoding in " + m.descriptor());
        return m;
    }

    std::vector<std::string_view> lines_;
    std::size_t line_ = 0;
};

}  // namespace

std::string_view to_string(Op op) { return info(op).name; }

std::optional<Op> op_from_string(std::string_view name) {
    for (const auto& i : kOps)
        if (i.name == name) return i.op;
    return std::nullopt;
}

OperandKind operand_kind(Op op) { return info(op).operand; }

int encoded_size(Op op) {
    switch (operand_kind(op)) {
        case OperandKind::none: return 1;
        case OperandKind::local:
        case OperandKind::tag: return 2;
        case OperandKind::imm:
        case OperandKind::pool:
        case OperandKind::branch:
        case OperandKind::tag2: return 3;
    }
    return 1;
}

bool is_branch(Op op) { return op == Op::IFEQ || op == Op::IFNE || op == Op::GOTO; }

bool is_terminator(Op op) {
    return op == Op::GOTO || op == Op::RETURN || op == Op::IRETURN || op == Op::ARETURN ||
           op == Op::THROW;
}

std::string_view to_string(Tag t) {
    switch (t) {
        case Tag::Int: return "int";
        case Tag::Bool: return "bool";
        case Tag::Str: return "str";
        case Tag::Ref: return "ref";
    }
    return "?";
}

std::optional<Tag> tag_from_string(std::string_view s) {
    if (s == "int") return Tag::Int;
    if (s == "bool") return Tag::Bool;
    if (s == "str") return Tag::Str;
    if (s == "ref") return Tag::Ref;
    return std::nullopt;
}

std::string_view to_string(PoolKind k) {
    switch (k) {
        case PoolKind::Int: return "int";
        case PoolKind::Str: return "str";
        case PoolKind::Field: return "field";
        case PoolKind::Method: return "method";
        case PoolKind::Type: return "type";
    }
    return "?";
}

FieldRef parse_field_ref(std::string_view text) {
    auto hash = text.find('#');
    auto colon = text.rfind(':');
    if (hash == std::string_view::npos || colon == std::string_view::npos || colon < hash)
        throw ToolError("malformed field reference: " + std::string(text));
    return {std::string(text.substr(0, hash)), std::string(text.substr(hash + 1, colon - hash - 1)),
            std::string(text.substr(colon + 1))};
}

MethodRef parse_method_ref(std::string_view text) {
    auto open = text.find('(');
    auto close = text.find(')', open);
    if (open == std::string_view::npos || close == std::string_view::npos ||
        close + 1 >= text.size() || text[close + 1] != ':')
        throw ToolError("malformed method reference: " + std::string(text));
    auto head = text.substr(0, open);
    auto dot = head.rfind('.');
    if (dot == std::string_view::npos) throw ToolError("malformed method reference: " + std::string(text));
    MethodRef r;
    r.owner = std::string(head.substr(0, dot));
    r.name = std::string(head.substr(dot + 1));
    auto list = text.substr(open + 1, close - open - 1);
    std::size_t i = 0;
    while (i < list.size()) {
        auto j = list.find(',', i);
        if (j == std::string_view::npos) j = list.size();
        r.params.emplace_back(list.substr(i, j - i));
        i = j + 1;
    }
    r.ret = std::string(text.substr(close + 2));
    return r;
}

std::string format_field_ref(const FieldRef& r) { return r.owner + "#" + r.name + ":" + r.type; }

std::string format_method_ref(const MethodRef& r) {
    std::string out = r.owner + "." + r.name + "(";
    for (std::size_t i = 0; i < r.params.size(); ++i) {
        if (i) out += ',';
        out += r.params[i];
    }
    return out + "):" + r.ret;
}

std::string flags_text(std::uint8_t flags) {
    std::string out;
    auto add = [&](std::uint8_t bit, const char* word) {
        if (!(flags & bit)) return;
        if (!out.empty()) out += ' ';
        out += word;
    };
    add(kStatic, "static");
    add(kFinal, "final");
    add(kPrivate, "private");
    add(kSynthetic, "synthetic");
    return out;
}

std::string MethodBody::descriptor() const { return format_method_ref({owner, name, params, ret}); }

std::vector<std::int32_t> MethodBody::offsets() const {
    std::vector<std::int32_t> out;
    out.reserve(code.size());
    std::int32_t off = 0;
    for (const auto& in : code) {
        out.push_back(off);
        off += encoded_size(in.op);
    }
    return out;
}

int BytecodeClass::add_pool(PoolKind kind, std::string text) {
    for (std::size_t i = 0; i < pool.size(); ++i)
        if (pool[i].kind == kind && pool[i].text == text) return static_cast<int>(i);
    pool.push_back({kind, std::move(text)});
    return static_cast<int>(pool.size() - 1);
}

const MethodBody* BytecodeClass::find_method(std::string_view n, const std::vector<std::string>& params) const {
    for (const auto& m : methods)
        if (m.name == n && m.params == params) return &m;
    return nullptr;
}

const FieldDef* BytecodeClass::find_field(std::string_view n) const {
    for (const auto& f : fields)
        if (f.name == n) return &f;
    return nullptr;
}

std::string serialize(const BytecodeClass& bc, bool with_debug_names) {
    std::ostringstream os;
    serialize_class(bc, with_debug_names, os);
    return os.str();
}

LoadResult deserialize(std::string_view text) {
    LoadResult r;
    Loader loader(text);
    try {
        r.bc = loader.load_class();
        if (!loader.at_end()) loader.fail("trailing content after ENDCLASS");
    } catch (const ToolError& e) {
        r.bc.reset();
        r.error = e.what();
    }
    return r;
}

BytecodeClass canonicalize_pool(const BytecodeClass& bc) {
    BytecodeClass out = bc;
    std::vector<int> order(bc.pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return bc.pool[x] < bc.pool[y]; });
    std::vector<int> remap(bc.pool.size(), -1);
    out.pool.clear();
    for (int old : order) {
        if (!out.pool.empty() && out.pool.back() == bc.pool[old]) {
            remap[old] = static_cast<int>(out.pool.size() - 1);
            continue;
        }
        out.pool.push_back(bc.pool[old]);
        remap[old] = static_cast<int>(out.pool.size() - 1);
    }
    auto map = [&](int idx) { return idx >= 0 && idx < static_cast<int>(remap.size()) ? remap[idx] : idx; };
    for (auto& f : out.fields) f.constant = f.constant >= 0 ? map(f.constant) : -1;
    for (auto& m : out.methods) {
        for (auto& h : m.handlers) h.type = map(h.type);
        for (auto& in : m.code)
            if (operand_kind(in.op) == OperandKind::pool) in.a = map(in.a);
    }
    for (auto& n : out.nested) n = canonicalize_pool(n);
    return out;
}

std::string line_diff(std::string_view a, std::string_view b) {
    auto lines = [](std::string_view t) {
        std::vector<std::string_view> out;
        std::size_t i = 0;
        while (i < t.size()) {
            auto j = t.find('\n', i);
            if (j == std::string_view::npos) j = t.size();
            out.push_back(t.substr(i, j - i));
            i = j + 1;
        }
        return out;
    };
    auto la = lines(a), lb = lines(b);
    const std::size_t n = la.size(), m = lb.size();
    std::vector<std::vector<std::uint32_t>> lcs(n + 1, std::vector<std::uint32_t>(m + 1, 0));
    for (std::size_t i = n; i-- > 0;)
        for (std::size_t j = m; j-- > 0;)
            lcs[i][j] = la[i] == lb[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    std::string out;
    std::size_t i = 0, j = 0;
    while (i < n || j < m) {
        if (i < n && j < m && la[i] == lb[j]) {
            ++i;
            ++j;
        } else if (j < m && (i == n || lcs[i][j + 1] >= lcs[i + 1][j])) {
            out += "+";
            out += lb[j++];
            out += '\n';
        } else {
            out += "-";
            out += la[i++];
            out += '\n';
        }
    }
    return out;
}

BytecodeDiff bytecode_equal(const BytecodeClass& a, const BytecodeClass& b) {
    auto ta = serialize(canonicalize_pool(a), false);
    auto tb = serialize(canonicalize_pool(b), false);
    if (ta == tb) return {};
    return {false, line_diff(ta, tb)};
}

}  // namespace mdlab::vm
