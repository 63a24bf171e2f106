#include <algorithm>
#include <functional>
#include <memory>
#include <set>

#include "mdlab/compiler.hpp"

namespace mdlab::compiler {
namespace {

using lang::Node;
using lang::NodeKind;
using vm::Op;

struct CompileError {
    std::string message;
    Span span;
};

[[noreturn]] void error(const Node& at, std::string msg) { throw CompileError{std::move(msg), at.span}; }

bool is_ref_type(std::string_view t) { return t != "int" && t != "bool" && t != "void"; }

std::string shown(std::string_view t) { return t == "null" ? "<null>" : source_type_name(t); }

std::string erase(const std::string& t) { return t == "bool" ? "int" : t; }

vm::Tag tag_of(std::string_view t) {
    if (t == "int") return vm::Tag::Int;
    if (t == "bool") return vm::Tag::Bool;
    if (t == "str") return vm::Tag::Str;
    return vm::Tag::Ref;
}

std::string simple_of(std::string_view qualified) {
    auto dot = qualified.rfind('.');
    return std::string(dot == std::string_view::npos ? qualified : qualified.substr(dot + 1));
}

// --- constant evaluation ------------------------------------------------------

std::string render_const(const ConstVal& v) {
    switch (v.kind) {
        case ConstVal::Kind::Int: return std::to_string(v.i);
        case ConstVal::Kind::Bool: return v.i ? "true" : "false";
        case ConstVal::Kind::Str: return v.s;
    }
    return "";
}

std::int32_t wrap32(std::int64_t v) {
    return static_cast<std::int32_t>(static_cast<std::uint32_t>(static_cast<std::uint64_t>(v)));
}

std::optional<ConstVal> fold_unary(const std::string& op, const ConstVal& v) {
    if (op == "-" && v.kind == ConstVal::Kind::Int) return ConstVal{ConstVal::Kind::Int, wrap32(-static_cast<std::int64_t>(v.i)), {}};
    if (op == "!" && v.kind == ConstVal::Kind::Bool) return ConstVal{ConstVal::Kind::Bool, v.i ? 0 : 1, {}};
    return std::nullopt;
}

std::optional<ConstVal> fold_binary(const std::string& op, const ConstVal& a, const ConstVal& b) {
    using K = ConstVal::Kind;
    if (op == "+" && (a.kind == K::Str || b.kind == K::Str))
        return ConstVal{K::Str, 0, render_const(a) + render_const(b)};
    if (a.kind == K::Int && b.kind == K::Int) {
        std::int64_t x = a.i, y = b.i;
        if (op == "+") return ConstVal{K::Int, wrap32(x + y), {}};
        if (op == "-") return ConstVal{K::Int, wrap32(x - y), {}};
        if (op == "*") return ConstVal{K::Int, wrap32(x * y), {}};
        if (op == "/" || op == "%") {
            if (y == 0) return std::nullopt;
            if (x == INT32_MIN && y == -1) return ConstVal{K::Int, op == "/" ? INT32_MIN : 0, {}};
            return ConstVal{K::Int, static_cast<std::int32_t>(op == "/" ? x / y : x % y), {}};
        }
        if (op == "<") return ConstVal{K::Bool, x < y, {}};
        if (op == "<=") return ConstVal{K::Bool, x <= y, {}};
        if (op == ">") return ConstVal{K::Bool, x > y, {}};
        if (op == ">=") return ConstVal{K::Bool, x >= y, {}};
        if (op == "==") return ConstVal{K::Bool, x == y, {}};
        if (op == "!=") return ConstVal{K::Bool, x != y, {}};
    }
    if (a.kind == K::Bool && b.kind == K::Bool) {
        if (op == "==") return ConstVal{K::Bool, a.i == b.i, {}};
        if (op == "!=") return ConstVal{K::Bool, a.i != b.i, {}};
    }
    return std::nullopt;
}

// --- declarations -------------------------------------------------------------

struct MemberRef {
    const Node* decl = nullptr;
    int ordinal = 0;  // static block ordinal
};

struct ClassUnit {
    std::string name;  // bytecode name
    std::string top;
    const Node* nested_decl = nullptr;  // NestedClass node, null for top-level
    Span header_span;
    std::vector<const Node*> members;  // member decl nodes in source order
    std::vector<ClassUnit*> nested;
};

struct PInstr {
    Op op = Op::NOP;
    std::int32_t a = 0, b = 0;
    int label = -1;
    bool pooled = false;
    vm::PoolKind kind = vm::PoolKind::Int;
    std::string text;
};

struct PHandler {
    int start, end, target;
    std::string type;
};

struct Resolved {
    const ClassInfo* owner = nullptr;
    const MethodInfo* method = nullptr;
};

class Compiler;

// Generates one method body.
class MethodGen {
public:
    enum class Kind { method, ctor, clinit };

    MethodGen(Compiler& c, const ClassInfo& cls, Kind kind, bool is_static, std::string ret)
        : cc_(c), cls_(cls), kind_(kind), static_(is_static), ret_(std::move(ret)) {
        scopes_.emplace_back();
    }

    void add_this() { new_local("this", cls_.name, nullptr); }

    void add_param(const std::string& name, const std::string& type, const Node& at) { new_local(name, type, &at); }

    void gen_block_items(const std::vector<Node>& stmts, std::size_t from);
    bool gen_stmt(const Node& s);
    void gen_super_call(const Node* call);
    void gen_field_init(const FieldInfo& f, const Node& init);

    vm::MethodBody finish(vm::BytecodeClass& bc, const std::string& name, std::vector<std::string> params,
                          std::uint8_t flags, bool completes, const Node& at);

    bool completes = true;

private:
    struct Local {
        std::string type;
        int slot;
    };
    struct Loop {
        int cont, brk;
        bool has_break = false;
    };

    // emission
    void emit(Op op, std::int32_t a = 0, std::int32_t b = 0) {
        code_.push_back({op, a, b, -1, false, vm::PoolKind::Int, {}});
    }
    void emit_pool(Op op, vm::PoolKind kind, std::string text) {
        code_.push_back({op, 0, 0, -1, true, kind, std::move(text)});
    }
    void emit_jump(Op op, int label) { code_.push_back({op, 0, 0, label, false, vm::PoolKind::Int, {}}); }
    int new_label() {
        labels_.push_back(-1);
        return static_cast<int>(labels_.size() - 1);
    }
    void bind(int label) { labels_[static_cast<std::size_t>(label)] = static_cast<int>(code_.size()); }
    void emit_const(const ConstVal& v) {
        if (v.kind == ConstVal::Kind::Str) {
            emit_pool(Op::LDC, vm::PoolKind::Str, v.s);
        } else if (v.i >= -32768 && v.i <= 32767) {
            emit(Op::ICONST, v.i);
        } else {
            emit_pool(Op::LDC, vm::PoolKind::Int, std::to_string(v.i));
        }
    }

    int new_local(const std::string& name, const std::string& type, const Node* at) {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            if (it->count(name)) {
                if (at) error(*at, "variable " + name + " is already defined in method");
            }
        }
        int slot = static_cast<int>(locals_.size());
        locals_.push_back({erase(type), name});
        scopes_.back()[name] = {type, slot};
        return slot;
    }
    const Local* find_local(const std::string& name) const {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            auto f = it->find(name);
            if (f != it->end()) return &f->second;
        }
        return nullptr;
    }

    // expressions
    std::string gen(const Node& e);
    std::string type_of(const Node& e) {
        auto mark = code_.size();
        auto t = gen(e);
        code_.resize(mark);
        return t;
    }
    std::string gen_value(const Node& e) {
        auto t = gen(e);
        if (t == "void") error(e, "'void' type not allowed here");
        return t;
    }
    void gen_cond(const Node& e) {
        auto t = gen_value(e);
        if (t != "bool") error(e, "incompatible types: " + shown(t) + " cannot be converted to bool");
    }
    std::optional<ConstVal> fold(const Node& e);
    std::optional<std::string> as_class_ref(const Node& e);
    bool dotted(const Node& e, std::string& out) const;

    struct FieldHit {
        const ClassInfo* owner = nullptr;
        const FieldInfo* field = nullptr;
    };
    FieldHit find_field(const std::string& cls, const std::string& name) const;
    FieldHit find_simple_field(const std::string& name) const;
    void check_field_access(const FieldHit& h, const Node& at) const;

    std::string gen_name(const Node& e);
    std::string gen_field_access(const Node& e);
    std::string gen_call(const Node& e);
    std::string gen_method_call(const Node& e);
    std::string gen_new(const Node& e);
    std::string gen_binary(const Node& e);
    void gen_concat_operands(const Node& e);
    std::vector<std::string> arg_types(const std::vector<Node>& kids, std::size_t from);
    void gen_args(const std::vector<Node>& kids, std::size_t from, const std::vector<std::string>& params);
    Resolved resolve_method(const std::string& cls, const std::string& name, const std::vector<std::string>& args,
                            bool walk_supers, const Node& at, bool ctor);
    void emit_invoke(Op op, const ClassInfo& owner, const MethodInfo& m);

    void gen_assign(const Node& s);
    void check_final(const FieldHit& h, bool simple_name, bool via_this, const Node& at) const;

    std::string resolve_type(const Node& type_node) const;

    Compiler& cc_;
    const ClassInfo& cls_;
    Kind kind_;
    bool static_;
    std::string ret_;
    std::vector<std::map<std::string, Local>> scopes_;
    std::vector<vm::LocalVar> locals_;
    std::vector<PInstr> code_;
    std::vector<int> labels_;
    std::vector<Loop> loops_;
    std::vector<PHandler> handlers_;

    friend class Compiler;
};

class Compiler {
public:
    Compiler(const CompilerVariant& v, const ClassEnv* classpath) : variant(v), env(classpath) {}

    CompilerVariant variant;
    ClassEnv env;
    std::set<std::pair<std::string, std::vector<std::string>>> wrappers;  // (nested class, params)
    std::map<std::string, const Node*> field_inits;                        // "C#f" -> initializer

    std::string synthetic_class(const std::string& top) const { return top + "$1"; }

    /// Registers the class and nested names so that units compiled together
    /// can refer to each other before their members are declared.
    void preregister(const lang::ClassAst& ast);
    Diagnostics declare(const lang::ClassAst& ast, ClassUnit& unit, std::vector<std::unique_ptr<ClassUnit>>& store);
    void compute_constants(const std::vector<ClassUnit*>& units);
    vm::BytecodeClass generate(const ClassUnit& unit, Diagnostics& diags);

private:
    void declare_members(ClassUnit& unit, ClassInfo& info, Diagnostics& diags);
    std::optional<vm::MethodBody> gen_member(const ClassUnit& unit, const ClassInfo& info, const Node& m,
                                             vm::BytecodeClass& bc, Diagnostics& diags);
    std::optional<vm::MethodBody> gen_default_ctor(const ClassUnit& unit, const ClassInfo& info, vm::BytecodeClass& bc,
                                                   Diagnostics& diags);
    std::optional<vm::MethodBody> gen_clinit(const ClassUnit& unit, const ClassInfo& info, vm::BytecodeClass& bc,
                                             Diagnostics& diags);
    void instance_inits(const ClassUnit& unit, const ClassInfo& info, MethodGen& g);

public:
    void add_wrappers(vm::BytecodeClass& top);
};

// --- MethodGen: helpers ---------------------------------------------------------

std::string MethodGen::resolve_type(const Node& t) const {
    auto r = cc_.env.resolve_type(t.text, cls_.top);
    if (!r) error(t, "cannot find symbol: class " + t.text);
    return *r;
}

bool MethodGen::dotted(const Node& e, std::string& out) const {
    if (e.kind == NodeKind::Name) {
        out = e.text;
        return true;
    }
    if (e.kind == NodeKind::FieldAccess) {
        if (!dotted(e.kids.at(0), out)) return false;
        out += "." + e.text;
        return true;
    }
    return false;
}

std::optional<std::string> MethodGen::as_class_ref(const Node& e) {
    std::string text;
    if (!dotted(e, text)) return std::nullopt;
    auto head = text.substr(0, text.find('.'));
    if (find_local(head) || find_simple_field(head).field) return std::nullopt;
    return cc_.env.resolve_type(text, cls_.top);
}

MethodGen::FieldHit MethodGen::find_field(const std::string& cls, const std::string& name) const {
    std::string c = cls;
    for (int guard = 0; guard < 64 && !c.empty(); ++guard) {
        auto* info = cc_.env.find(c);
        if (!info) break;
        if (auto* f = info->field(name)) return {info, f};
        c = info->super_name;
    }
    return {};
}

MethodGen::FieldHit MethodGen::find_simple_field(const std::string& name) const {
    auto h = find_field(cls_.name, name);
    if (h.field) return h;
    if (cls_.name != cls_.top) {
        auto outer = find_field(cls_.top, name);
        if (outer.field && (outer.field->flags & vm::kStatic)) return outer;
    }
    return {};
}

void MethodGen::check_field_access(const FieldHit& h, const Node& at) const {
    if ((h.field->flags & vm::kPrivate) && h.owner->top != cls_.top)
        error(at, h.field->name + " has private access in " + source_type_name(h.owner->name));
}

std::optional<ConstVal> MethodGen::fold(const Node& e) {
    switch (e.kind) {
        case NodeKind::IntLit: return ConstVal{ConstVal::Kind::Int, static_cast<std::int32_t>(std::stoll(e.text)), {}};
        case NodeKind::BoolLit: return ConstVal{ConstVal::Kind::Bool, e.text == "true", {}};
        case NodeKind::StrLit: return ConstVal{ConstVal::Kind::Str, 0, e.text};
        case NodeKind::Name: {
            if (find_local(e.text)) return std::nullopt;
            auto h = find_simple_field(e.text);
            if (h.field && h.field->constant) return h.field->constant;
            return std::nullopt;
        }
        case NodeKind::FieldAccess: {
            auto cls = as_class_ref(e.kids.at(0));
            if (!cls) return std::nullopt;
            auto h = find_field(*cls, e.text);
            if (h.field && h.field->constant && (h.field->flags & vm::kStatic)) return h.field->constant;
            return std::nullopt;
        }
        case NodeKind::Unary: {
            auto v = fold(e.kids.at(0));
            return v ? fold_unary(e.text, *v) : std::nullopt;
        }
        case NodeKind::Binary: {
            auto a = fold(e.kids.at(0));
            if (!a) return std::nullopt;
            auto b = fold(e.kids.at(1));
            return b ? fold_binary(e.text, *a, *b) : std::nullopt;
        }
        default: return std::nullopt;
    }
}

// --- expressions -------------------------------------------------------------------

std::string MethodGen::gen(const Node& e) {
    if (auto c = fold(e)) {
        emit_const(*c);
        return c->type();
    }
    switch (e.kind) {
        case NodeKind::NullLit: emit(Op::ACONST_NULL); return "null";
        case NodeKind::This:
            if (static_) error(e, "non-static variable this cannot be referenced from a static context");
            emit(Op::LOAD, 0);
            return cls_.name;
        case NodeKind::Name: return gen_name(e);
        case NodeKind::FieldAccess: return gen_field_access(e);
        case NodeKind::Call: return gen_call(e);
        case NodeKind::MethodCall: return gen_method_call(e);
        case NodeKind::New: return gen_new(e);
        case NodeKind::Cast: {
            auto target = resolve_type(e.kids.at(0));
            auto t = gen_value(e.kids.at(1));
            if (!is_ref_type(target) || !is_ref_type(t)) {
                if (target == t) return t;
                error(e, "incompatible types: " + shown(t) + " cannot be converted to " + shown(target));
            }
            if (target == "Builder" || t == "Builder") {
                if (target == t) return t;
                error(e, "incompatible types: " + shown(t) + " cannot be converted to " + shown(target));
            }
            if (cc_.env.assignable(t, target)) return target;
            if (cc_.env.assignable(target, t)) {
                emit_pool(Op::CHECKCAST, vm::PoolKind::Type, target);
                return target;
            }
            error(e, "incompatible types: " + shown(t) + " cannot be converted to " + shown(target));
        }
        case NodeKind::Unary: {
            auto t = gen_value(e.kids.at(0));
            if (e.text == "-") {
                if (t != "int") error(e, "bad operand type " + shown(t) + " for unary operator '-'");
                emit(Op::NEG);
                return "int";
            }
            if (t != "bool") error(e, "bad operand type " + shown(t) + " for unary operator '!'");
            emit(Op::NOT);
            return "bool";
        }
        case NodeKind::Binary: return gen_binary(e);
        default: error(e, "illegal start of expression");
    }
}

std::string MethodGen::gen_name(const Node& e) {
    if (auto* l = find_local(e.text)) {
        emit(Op::LOAD, l->slot);
        return l->type;
    }
    auto h = find_simple_field(e.text);
    if (!h.field) error(e, "cannot find symbol: variable " + e.text);
    check_field_access(h, e);
    auto ref = vm::format_field_ref({h.owner->name, h.field->name, h.field->type});
    if (h.field->flags & vm::kStatic) {
        emit_pool(Op::GETSTATIC, vm::PoolKind::Field, ref);
    } else {
        if (static_) error(e, "non-static variable " + e.text + " cannot be referenced from a static context");
        emit(Op::LOAD, 0);
        emit_pool(Op::GETFIELD, vm::PoolKind::Field, ref);
    }
    return h.field->type;
}

std::string MethodGen::gen_field_access(const Node& e) {
    const Node& obj = e.kids.at(0);
    if (auto cls = as_class_ref(obj)) {
        auto h = find_field(*cls, e.text);
        if (!h.field || !(h.field->flags & vm::kStatic)) error(e, "cannot find symbol: variable " + e.text);
        check_field_access(h, e);
        emit_pool(Op::GETSTATIC, vm::PoolKind::Field, vm::format_field_ref({h.owner->name, h.field->name, h.field->type}));
        return h.field->type;
    }
    auto t = gen_value(obj);
    if (!is_ref_type(t) || t == "null" || t == "str" || t == "Builder")
        error(e, shown(t) + " cannot be dereferenced");
    auto h = find_field(t, e.text);
    if (!h.field) error(e, "cannot find symbol: variable " + e.text);
    if (h.field->flags & vm::kStatic) error(e, "static variable " + e.text + " accessed through an instance");
    check_field_access(h, e);
    emit_pool(Op::GETFIELD, vm::PoolKind::Field, vm::format_field_ref({h.owner->name, h.field->name, h.field->type}));
    return h.field->type;
}

std::vector<std::string> MethodGen::arg_types(const std::vector<Node>& kids, std::size_t from) {
    std::vector<std::string> out;
    for (std::size_t i = from; i < kids.size(); ++i) {
        auto mark = code_.size();
        out.push_back(gen_value(kids[i]));
        code_.resize(mark);
    }
    return out;
}

void MethodGen::gen_args(const std::vector<Node>& kids, std::size_t from, const std::vector<std::string>&) {
    for (std::size_t i = from; i < kids.size(); ++i) gen_value(kids[i]);
}

bool visible(const MethodInfo& m) { return !(m.flags & vm::kSynthetic) || (m.name == "<init>" && m.params.empty()); }

Resolved MethodGen::resolve_method(const std::string& cls, const std::string& name,
                                   const std::vector<std::string>& args, bool walk_supers, const Node& at,
                                   bool ctor) {
    struct Cand {
        const ClassInfo* owner;
        const MethodInfo* m;
    };
    std::vector<Cand> all;
    std::string c = cls;
    for (int guard = 0; guard < 64 && !c.empty(); ++guard) {
        auto* info = cc_.env.find(c);
        if (!info) break;
        for (const auto& m : info->methods) {
            if (m.name != name || !visible(m)) continue;
            bool overridden = std::any_of(all.begin(), all.end(), [&](const Cand& x) { return x.m->params == m.params; });
            if (!overridden) all.push_back({info, &m});
        }
        if (!walk_supers) break;
        c = info->super_name;
    }
    std::string what = ctor ? "constructor" : "method";
    std::string shown_name = ctor ? simple_of(source_type_name(cls)) : name;
    if (all.empty()) {
        if (ctor) error(at, "no applicable constructor for " + source_type_name(cls));
        error(at, "cannot find symbol: method " + name);
    }
    std::vector<Cand> applicable;
    for (const auto& cand : all) {
        if (cand.m->params.size() != args.size()) continue;
        bool ok = true;
        for (std::size_t i = 0; i < args.size() && ok; ++i) ok = cc_.env.assignable(args[i], cand.m->params[i]);
        if (ok) applicable.push_back(cand);
    }
    if (applicable.empty()) {
        std::string list;
        for (std::size_t i = 0; i < args.size(); ++i) list += (i ? "," : "") + shown(args[i]);
        if (ctor) error(at, "no applicable constructor for " + source_type_name(cls) + "(" + list + ")");
        error(at, "no applicable method " + name + "(" + list + ")");
    }
    auto more_specific = [&](const Cand& x, const Cand& y) {
        for (std::size_t i = 0; i < x.m->params.size(); ++i)
            if (!cc_.env.assignable(x.m->params[i], y.m->params[i])) return false;
        return true;
    };
    std::vector<Cand> maximal;
    for (const auto& x : applicable) {
        bool best = true;
        for (const auto& y : applicable)
            if (&x != &y && !more_specific(x, y)) best = false;
        if (best) maximal.push_back(x);
    }
    if (maximal.size() != 1) error(at, "reference to " + shown_name + " is ambiguous");
    auto chosen = maximal.front();
    if ((chosen.m->flags & vm::kPrivate) && chosen.owner->top != cls_.top)
        error(at, shown_name + " has private access in " + source_type_name(chosen.owner->name));
    return {chosen.owner, chosen.m};
}

void MethodGen::emit_invoke(Op op, const ClassInfo& owner, const MethodInfo& m) {
    emit_pool(op, vm::PoolKind::Method, vm::format_method_ref({owner.name, m.name, m.params, m.ret}));
}

std::string MethodGen::gen_call(const Node& e) {
    auto args = arg_types(e.kids, 0);
    std::string where = cls_.name;
    bool found = false;
    for (std::string c = cls_.name; !c.empty();) {
        auto* info = cc_.env.find(c);
        if (!info) break;
        for (const auto& m : info->methods)
            if (m.name == e.text && visible(m)) found = true;
        c = info->super_name;
    }
    if (!found && cls_.name != cls_.top) where = cls_.top;
    auto r = resolve_method(where, e.text, args, true, e, false);
    bool is_static = r.method->flags & vm::kStatic;
    if (!is_static) {
        if (where != cls_.name || static_)
            error(e, "non-static method " + e.text + " cannot be referenced from a static context");
        emit(Op::LOAD, 0);
    }
    gen_args(e.kids, 0, r.method->params);
    emit_invoke(is_static ? Op::INVOKESTATIC : Op::INVOKEVIRT, *r.owner, *r.method);
    return r.method->ret;
}

std::string MethodGen::gen_method_call(const Node& e) {
    const Node& recv = e.kids.at(0);
    if (auto cls = as_class_ref(recv)) {
        auto args = arg_types(e.kids, 1);
        auto r = resolve_method(*cls, e.text, args, true, e, false);
        if (!(r.method->flags & vm::kStatic))
            error(e, "non-static method " + e.text + " cannot be referenced from a static context");
        gen_args(e.kids, 1, r.method->params);
        emit_invoke(Op::INVOKESTATIC, *r.owner, *r.method);
        return r.method->ret;
    }
    auto rt = type_of(recv);
    if (rt == "void") error(recv, "'void' type not allowed here");
    if (rt == "Builder") {
        if (e.text == "append" && e.kids.size() == 2) {
            gen(recv);
            auto t = gen_value(e.kids[1]);
            emit(Op::BUILDER_APPEND, static_cast<std::int32_t>(tag_of(t)));
            return "Builder";
        }
        if (e.text == "toStr" && e.kids.size() == 1) {
            gen(recv);
            emit(Op::BUILDER_STR);
            return "str";
        }
        error(e, "cannot find symbol: method " + e.text);
    }
    if (!is_ref_type(rt) || rt == "null" || rt == "str") error(e, shown(rt) + " cannot be dereferenced");
    auto args = arg_types(e.kids, 1);
    auto r = resolve_method(rt, e.text, args, true, e, false);
    if (r.method->flags & vm::kStatic) error(e, "static method " + e.text + " invoked through an instance");
    gen(recv);
    gen_args(e.kids, 1, r.method->params);
    emit_invoke(Op::INVOKEVIRT, *r.owner, *r.method);
    return r.method->ret;
}

std::string MethodGen::gen_new(const Node& e) {
    auto t = resolve_type(e.kids.at(0));
    if (t == "Builder") {
        if (e.kids.size() != 1) error(e, "no applicable constructor for Builder");
        emit(Op::BUILDER_NEW);
        return "Builder";
    }
    if (!is_ref_type(t) || t == "str") error(e, "cannot instantiate " + shown(t));
    auto args = arg_types(e.kids, 1);
    auto r = resolve_method(t, "<init>", args, false, e, true);
    emit_pool(Op::NEW, vm::PoolKind::Type, t);
    emit(Op::DUP);
    gen_args(e.kids, 1, r.method->params);
    bool via_wrapper = (r.method->flags & vm::kPrivate) && r.owner->name != cls_.name && r.owner->name != r.owner->top;
    if (via_wrapper) {
        emit(Op::ACONST_NULL);
        auto params = r.method->params;
        params.push_back(cc_.variant.self_typed_wrapper ? r.owner->name : cc_.synthetic_class(r.owner->top));
        cc_.wrappers.insert({r.owner->name, r.method->params});
        emit_pool(Op::INVOKESPECIAL, vm::PoolKind::Method, vm::format_method_ref({r.owner->name, "<init>", params, "void"}));
    } else {
        emit_invoke(Op::INVOKESPECIAL, *r.owner, *r.method);
    }
    return t;
}

void MethodGen::gen_concat_operands(const Node& e) {
    if (e.kind == NodeKind::Binary && e.text == "+" && !fold(e)) {
        auto mark = code_.size();
        auto t = gen(e);
        code_.resize(mark);
        if (t == "str") {
            gen_concat_operands(e.kids[0]);
            auto rt = gen_value(e.kids[1]);
            emit(Op::BUILDER_APPEND, static_cast<std::int32_t>(tag_of(rt)));
            return;
        }
    }
    auto t = gen_value(e);
    emit(Op::BUILDER_APPEND, static_cast<std::int32_t>(tag_of(t)));
}

std::string MethodGen::gen_binary(const Node& e) {
    const auto& op = e.text;
    const Node& l = e.kids.at(0);
    const Node& r = e.kids.at(1);
    if (op == "+") {
        auto lt = type_of(l);
        auto rt = type_of(r);
        if (lt == "void" || rt == "void") error(e, "'void' type not allowed here");
        if (lt == "str" || rt == "str") {
            if (lt == "Builder" || rt == "Builder") error(e, "bad operand types for binary operator '+'");
            if (cc_.variant.builder_concat) {
                emit(Op::BUILDER_NEW);
                gen_concat_operands(l);
                gen_value(r);
                emit(Op::BUILDER_APPEND, static_cast<std::int32_t>(tag_of(rt)));
                emit(Op::BUILDER_STR);
            } else {
                gen_value(l);
                gen_value(r);
                emit(Op::CONCAT, static_cast<std::int32_t>(tag_of(lt)), static_cast<std::int32_t>(tag_of(rt)));
            }
            return "str";
        }
    }
    auto lt = gen_value(l);
    auto rt = gen_value(r);
    auto bad = [&]() { error(e, "bad operand types for binary operator '" + op + "'"); };
    if (op == "+" || op == "-" || op == "*" || op == "/" || op == "%") {
        if (lt != "int" || rt != "int") bad();
        emit(op == "+" ? Op::ADD : op == "-" ? Op::SUB : op == "*" ? Op::MUL : op == "/" ? Op::DIV : Op::REM);
        return "int";
    }
    if (op == "<" || op == "<=" || op == ">" || op == ">=") {
        if (lt != "int" || rt != "int") bad();
        emit(op == "<" ? Op::LT : op == "<=" ? Op::LE : op == ">" ? Op::GT : Op::GE);
        return "bool";
    }
    if (op == "==" || op == "!=") {
        bool ok = (lt == rt && (lt == "int" || lt == "bool")) ||
                  (is_ref_type(lt) && is_ref_type(rt) && (cc_.env.assignable(lt, rt) || cc_.env.assignable(rt, lt)));
        if (!ok) error(e, "incomparable types: " + shown(lt) + " and " + shown(rt));
        emit(op == "==" ? Op::EQ : Op::NE);
        return "bool";
    }
    bad();
    return "";
}

// --- statements -------------------------------------------------------------------

void MethodGen::check_final(const FieldHit& h, bool simple_name, bool via_this, const Node& at) const {
    if (!(h.field->flags & vm::kFinal)) return;
    bool own = h.owner->name == cls_.name;
    bool ok = false;
    if (!h.field->has_initializer && own) {
        if (h.field->flags & vm::kStatic)
            ok = kind_ == Kind::clinit && simple_name;
        else
            ok = kind_ == Kind::ctor && (simple_name || via_this);
    }
    if (!ok) error(at, "cannot assign a value to final variable " + h.field->name);
}

void MethodGen::gen_assign(const Node& s) {
    const Node& target = s.kids.at(0);
    const Node& value = s.kids.at(1);
    auto check = [&](const std::string& vt, const std::string& tt) {
        if (vt == "void") error(value, "'void' type not allowed here");
        if (!cc_.env.assignable(vt, tt))
            error(value, "incompatible types: " + shown(vt) + " cannot be converted to " + shown(tt));
    };
    if (target.kind == NodeKind::Name) {
        if (auto* l = find_local(target.text)) {
            check(gen(value), l->type);
            emit(Op::STORE, l->slot);
            return;
        }
        auto h = find_simple_field(target.text);
        if (!h.field) error(target, "cannot find symbol: variable " + target.text);
        check_field_access(h, target);
        check_final(h, true, false, target);
        auto ref = vm::format_field_ref({h.owner->name, h.field->name, h.field->type});
        if (h.field->flags & vm::kStatic) {
            check(gen(value), h.field->type);
            emit_pool(Op::PUTSTATIC, vm::PoolKind::Field, ref);
        } else {
            if (static_) error(target, "non-static variable " + target.text + " cannot be referenced from a static context");
            emit(Op::LOAD, 0);
            check(gen(value), h.field->type);
            emit_pool(Op::PUTFIELD, vm::PoolKind::Field, ref);
        }
        return;
    }
    const Node& obj = target.kids.at(0);
    if (auto cls = as_class_ref(obj)) {
        auto h = find_field(*cls, target.text);
        if (!h.field || !(h.field->flags & vm::kStatic)) error(target, "cannot find symbol: variable " + target.text);
        check_field_access(h, target);
        check_final(h, false, false, target);
        check(gen(value), h.field->type);
        emit_pool(Op::PUTSTATIC, vm::PoolKind::Field, vm::format_field_ref({h.owner->name, h.field->name, h.field->type}));
        return;
    }
    auto t = gen_value(obj);
    if (!is_ref_type(t) || t == "null" || t == "str" || t == "Builder") error(target, shown(t) + " cannot be dereferenced");
    auto h = find_field(t, target.text);
    if (!h.field) error(target, "cannot find symbol: variable " + target.text);
    if (h.field->flags & vm::kStatic) error(target, "static variable " + target.text + " accessed through an instance");
    check_field_access(h, target);
    check_final(h, false, obj.kind == NodeKind::This, target);
    check(gen(value), h.field->type);
    emit_pool(Op::PUTFIELD, vm::PoolKind::Field, vm::format_field_ref({h.owner->name, h.field->name, h.field->type}));
}

void MethodGen::gen_block_items(const std::vector<Node>& stmts, std::size_t from) {
    for (std::size_t i = from; i < stmts.size(); ++i) {
        if (!completes) break;
        completes = gen_stmt(stmts[i]);
    }
}

bool MethodGen::gen_stmt(const Node& s) {
    switch (s.kind) {
        case NodeKind::Block: {
            scopes_.emplace_back();
            bool saved = completes;
            completes = true;
            gen_block_items(s.kids, 0);
            bool out = completes;
            completes = saved;
            scopes_.pop_back();
            return out;
        }
        case NodeKind::VarDecl: {
            auto t = resolve_type(s.kids.at(0));
            if (t == "void") error(s.kids[0], "illegal start of expression");
            if (s.kids.size() > 1) {
                auto vt = gen(s.kids[1]);
                if (vt == "void") error(s.kids[1], "'void' type not allowed here");
                if (!cc_.env.assignable(vt, t))
                    error(s.kids[1], "incompatible types: " + shown(vt) + " cannot be converted to " + shown(t));
                int slot = new_local(s.text, t, &s);
                emit(Op::STORE, slot);
            } else {
                new_local(s.text, t, &s);
            }
            return true;
        }
        case NodeKind::Assign: gen_assign(s); return true;
        case NodeKind::ExprStmt: {
            const Node& e = s.kids.at(0);
            if (e.kind != NodeKind::Call && e.kind != NodeKind::MethodCall && e.kind != NodeKind::New)
                error(e, "not a statement");
            auto t = gen(e);
            if (t != "void") emit(Op::POP);
            return true;
        }
        case NodeKind::If: {
            auto c = fold(s.kids.at(0));
            if (c && c->kind != ConstVal::Kind::Bool)
                error(s.kids[0], "incompatible types: " + c->type() + " cannot be converted to bool");
            bool has_else = s.kids.size() > 2;
            if (c) {
                if (c->i) {
                    bool t = gen_stmt(s.kids[1]);
                    return t;
                }
                return has_else ? gen_stmt(s.kids[2]) : true;
            }
            if (!has_else) {
                int end = new_label();
                gen_cond(s.kids[0]);
                emit_jump(Op::IFEQ, end);
                gen_stmt(s.kids[1]);
                bind(end);
                return true;
            }
            int other = new_label(), end = new_label();
            gen_cond(s.kids[0]);
            const Node& first = cc_.variant.swapped_polarity ? s.kids[2] : s.kids[1];
            const Node& second = cc_.variant.swapped_polarity ? s.kids[1] : s.kids[2];
            emit_jump(cc_.variant.swapped_polarity ? Op::IFNE : Op::IFEQ, other);
            bool a = gen_stmt(first);
            if (a) emit_jump(Op::GOTO, end);
            bind(other);
            bool b = gen_stmt(second);
            bind(end);
            return a || b;
        }
        case NodeKind::While: {
            auto c = fold(s.kids.at(0));
            if (c && c->kind != ConstVal::Kind::Bool)
                error(s.kids[0], "incompatible types: " + c->type() + " cannot be converted to bool");
            if (c && !c->i) return true;
            int top = new_label(), end = new_label();
            bind(top);
            if (!c) {
                gen_cond(s.kids[0]);
                emit_jump(Op::IFEQ, end);
            }
            loops_.push_back({top, end});
            bool body = gen_stmt(s.kids[1]);
            if (body) emit_jump(Op::GOTO, top);
            bool has_break = loops_.back().has_break;
            loops_.pop_back();
            bind(end);
            return !c || has_break;
        }
        case NodeKind::Try: {
            const Node& body = s.kids.at(0);
            const Node& katch = s.kids.at(1);
            auto type = resolve_type(katch.kids.at(0));
            if (!cc_.env.is_subclass(type, "RuntimeException"))
                error(katch.kids[0], "incompatible types: " + shown(type) + " cannot be converted to RuntimeException");
            int start = new_label(), stop = new_label(), handler = new_label(), end = new_label();
            bind(start);
            bool a = gen_stmt(body);
            bind(stop);
            bool empty = labels_[static_cast<std::size_t>(start)] == labels_[static_cast<std::size_t>(stop)];
            if (empty) return a;
            if (a) emit_jump(Op::GOTO, end);
            bind(handler);
            handlers_.push_back({start, stop, handler, type});
            scopes_.emplace_back();
            int slot = new_local(katch.text, type, &katch);
            emit(Op::STORE, slot);
            bool b = gen_stmt(katch.kids.at(1));
            scopes_.pop_back();
            bind(end);
            return a || b;
        }
        case NodeKind::Throw: {
            auto t = gen_value(s.kids.at(0));
            if (!cc_.env.is_subclass(t, "RuntimeException") && t != "null")
                error(s.kids[0], "incompatible types: " + shown(t) + " cannot be converted to RuntimeException");
            emit(Op::THROW);
            return false;
        }
        case NodeKind::Return: {
            if (kind_ == Kind::clinit) error(s, "return outside method");
            if (s.kids.empty()) {
                if (ret_ != "void") error(s, "missing return value");
                emit(Op::RETURN);
                return false;
            }
            if (ret_ == "void") error(s.kids[0], "incompatible types: unexpected return value");
            auto t = gen_value(s.kids[0]);
            if (!cc_.env.assignable(t, ret_))
                error(s.kids[0], "incompatible types: " + shown(t) + " cannot be converted to " + shown(ret_));
            emit(is_ref_type(ret_) ? Op::ARETURN : Op::IRETURN);
            return false;
        }
        case NodeKind::Break:
            if (loops_.empty()) error(s, "break outside switch or loop");
            loops_.back().has_break = true;
            emit_jump(Op::GOTO, loops_.back().brk);
            return false;
        case NodeKind::Continue:
            if (loops_.empty()) error(s, "continue outside of loop");
            emit_jump(Op::GOTO, loops_.back().cont);
            return false;
        case NodeKind::Print: {
            auto t = gen_value(s.kids.at(0));
            emit(Op::PRINT, static_cast<std::int32_t>(tag_of(t)));
            return true;
        }
        case NodeKind::SuperCall: error(s, "call to super must be first statement in constructor");
        default: error(s, "not a statement");
    }
}

void MethodGen::gen_super_call(const Node* call) {
    auto* info = cc_.env.find(cls_.name);
    std::string super = info ? info->super_name : "Object";
    static const std::vector<Node> none;
    const auto& kids = call ? call->kids : none;
    auto args = arg_types(kids, 0);
    Node at;
    if (call) at = *call;
    auto r = resolve_method(super, "<init>", args, false, call ? *call : at, true);
    emit(Op::LOAD, 0);
    gen_args(kids, 0, r.method->params);
    emit_invoke(Op::INVOKESPECIAL, *r.owner, *r.method);
}

void MethodGen::gen_field_init(const FieldInfo& f, const Node& init) {
    auto ref = vm::format_field_ref({cls_.name, f.name, f.type});
    if (f.flags & vm::kStatic) {
        auto t = gen_value(init);
        if (!cc_.env.assignable(t, f.type))
            error(init, "incompatible types: " + shown(t) + " cannot be converted to " + shown(f.type));
        emit_pool(Op::PUTSTATIC, vm::PoolKind::Field, ref);
    } else {
        emit(Op::LOAD, 0);
        auto t = gen_value(init);
        if (!cc_.env.assignable(t, f.type))
            error(init, "incompatible types: " + shown(t) + " cannot be converted to " + shown(f.type));
        emit_pool(Op::PUTFIELD, vm::PoolKind::Field, ref);
    }
}

vm::MethodBody MethodGen::finish(vm::BytecodeClass& bc, const std::string& name, std::vector<std::string> params,
                                 std::uint8_t flags, bool can_complete, const Node& at) {
    if (can_complete) {
        if (ret_ != "void") error(at, "missing return statement");
        emit(Op::RETURN);
    }
    vm::MethodBody m;
    m.owner = bc.name;
    m.name = name;
    m.params = std::move(params);
    m.ret = ret_;
    m.flags = flags;
    m.locals = locals_;
    m.max_locals = static_cast<int>(locals_.size());
    std::vector<std::int32_t> offs;
    std::int32_t off = 0;
    for (const auto& in : code_) {
        offs.push_back(off);
        off += vm::encoded_size(in.op);
    }
    auto label_off = [&](int label) {
        int idx = labels_.at(static_cast<std::size_t>(label));
        if (idx < 0) throw CompileError{"internal: unbound label", at.span};
        return idx < static_cast<int>(offs.size()) ? offs[static_cast<std::size_t>(idx)] : off;
    };
    m.code.reserve(code_.size());
    for (const auto& in : code_) {
        vm::Instr out{in.op, in.a, in.b};
        if (in.label >= 0) out.a = label_off(in.label);
        if (in.pooled) out.a = bc.add_pool(in.kind, in.text);
        m.code.push_back(out);
    }
    for (const auto& h : handlers_)
        m.handlers.push_back({label_off(h.start), label_off(h.end), label_off(h.target), bc.add_pool(vm::PoolKind::Type, h.type)});
    m.max_stack = std::max(0, vm::compute_max_stack(bc, m));
    return m;
}

// --- Compiler --------------------------------------------------------------------------

std::uint8_t flags_of(const Node& n) {
    std::uint8_t f = 0;
    if (n.modifiers & lang::kStatic) f |= vm::kStatic;
    if (n.modifiers & lang::kFinal) f |= vm::kFinal;
    if (n.modifiers & lang::kPrivate) f |= vm::kPrivate;
    return f;
}

void Compiler::declare_members(ClassUnit& unit, ClassInfo& info, Diagnostics& diags) {
    auto resolve = [&](const Node& t, bool allow_void) -> std::optional<std::string> {
        auto r = env.resolve_type(t.text, unit.top);
        if (!r || (*r == "void" && !allow_void)) {
            diags.push_back({r ? "illegal start of expression" : "cannot find symbol: class " + t.text, t.span});
            return std::nullopt;
        }
        return r;
    };
    std::set<std::string> seen_fields;
    std::set<std::pair<std::string, std::vector<std::string>>> seen_methods;
    bool has_ctor = false;
    for (const Node* m : unit.members) {
        switch (m->kind) {
            case NodeKind::Field: {
                auto t = resolve(m->kids.at(0), false);
                if (!seen_fields.insert(m->text).second) {
                    diags.push_back({"variable " + m->text + " is already defined in class " + simple_of(info.name), m->span});
                    continue;
                }
                FieldInfo f{m->text, t.value_or("?"), flags_of(*m), std::nullopt, m->kids.size() > 1};
                info.fields.push_back(f);
                if (m->kids.size() > 1) field_inits[info.name + "#" + m->text] = &m->kids[1];
                break;
            }
            case NodeKind::Method:
            case NodeKind::Constructor: {
                bool ctor = m->kind == NodeKind::Constructor;
                const Node& ps = m->kids.at(ctor ? 0 : 1);
                std::vector<std::string> params;
                bool ok = true;
                for (const auto& p : ps.kids) {
                    auto t = resolve(p.kids.at(0), false);
                    ok = ok && t;
                    params.push_back(t.value_or("?"));
                }
                std::string ret = "void";
                if (!ctor) {
                    auto r = resolve(m->kids.at(0), true);
                    ok = ok && r;
                    ret = r.value_or("?");
                }
                std::string name = ctor ? "<init>" : m->text;
                if (ctor && (m->modifiers & lang::kStatic)) {
                    diags.push_back({"modifier static not allowed here", m->span});
                    continue;
                }
                if (!seen_methods.insert({name, params}).second) {
                    diags.push_back({(ctor ? "constructor " : "method ") + m->text + " is already defined in class " +
                                         simple_of(info.name),
                                     m->span});
                    continue;
                }
                has_ctor = has_ctor || ctor;
                if (ok) info.methods.push_back({name, params, ret, flags_of(*m)});
                break;
            }
            default: break;
        }
    }
    if (!has_ctor) info.methods.insert(info.methods.begin(), MethodInfo{"<init>", {}, "void", vm::kSynthetic});
}

void Compiler::preregister(const lang::ClassAst& ast) {
    env.hide(ast.qualified_name);
    if (env.find(ast.qualified_name)) return;
    ClassInfo top;
    top.name = ast.qualified_name;
    top.top = ast.qualified_name;
    top.super_name = "Object";
    env.put(top);
    for (const auto& m : ast.members)
        if (m.kind == lang::MemberKind::nested_class)
            env.put(ClassInfo{ast.qualified_name + "$" + m.decl.text, "Object", ast.qualified_name, 0, {}, {}, {}, false});
}

Diagnostics Compiler::declare(const lang::ClassAst& ast, ClassUnit& unit, std::vector<std::unique_ptr<ClassUnit>>& store) {
    Diagnostics diags;
    unit.name = ast.qualified_name;
    unit.top = ast.qualified_name;
    unit.header_span = ast.header_span;
    env.hide(ast.qualified_name);
    ClassInfo top;
    top.name = unit.name;
    top.top = unit.top;
    for (const auto& m : ast.members) {
        if (m.kind == lang::MemberKind::nested_class) {
            auto nu = std::make_unique<ClassUnit>();
            nu->name = unit.name + "$" + m.decl.text;
            nu->top = unit.top;
            nu->nested_decl = &m.decl;
            nu->header_span = m.decl.span;
            for (std::size_t i = 1; i < m.decl.kids.size(); ++i) nu->members.push_back(&m.decl.kids[i]);
            if (std::any_of(unit.nested.begin(), unit.nested.end(), [&](ClassUnit* x) { return x->name == nu->name; })) {
                diags.push_back({"duplicate class: " + m.decl.text, m.decl.span});
                continue;
            }
            top.nested.push_back(nu->name);
            unit.nested.push_back(nu.get());
            store.push_back(std::move(nu));
        } else {
            unit.members.push_back(&m.decl);
        }
    }
    // Register names first so member types can resolve against them.
    env.put(top);
    for (auto* n : unit.nested) env.put(ClassInfo{n->name, "Object", unit.top, 0, {}, {}, {}, false});

    auto super_of = [&](const std::string& written, Span span) -> std::string {
        if (written.empty()) return "Object";
        auto r = env.resolve_type(written, unit.top);
        if (!r || !is_ref_type(*r) || *r == "str" || *r == "Builder") {
            diags.push_back({"cannot find symbol: class " + written, span});
            return "Object";
        }
        return *r;
    };
    top.super_name = super_of(ast.super_name, ast.header_span);
    declare_members(unit, top, diags);
    env.put(top);
    for (auto* n : unit.nested) {
        ClassInfo ni{n->name, "Object", unit.top, 0, {}, {}, {}, false};
        const Node& sup = n->nested_decl->kids.at(0);
        ni.super_name = super_of(sup.text, sup.span);
        declare_members(*n, ni, diags);
        env.put(ni);
    }
    // Cyclic inheritance check.
    for (auto* u : std::vector<ClassUnit*>{&unit}) {
        std::vector<std::string> names{u->name};
        for (auto* n : u->nested) names.push_back(n->name);
        for (const auto& nm : names) {
            std::string c = env.find(nm)->super_name;
            for (int i = 0; i < 64 && !c.empty(); ++i) {
                if (c == nm) {
                    diags.push_back({"cyclic inheritance involving " + source_type_name(nm), ast.header_span});
                    auto info = *env.find(nm);
                    info.super_name = "Object";
                    env.put(info);
                    break;
                }
                auto* i2 = env.find(c);
                c = i2 ? i2->super_name : "";
            }
        }
    }
    return diags;
}

void Compiler::compute_constants(const std::vector<ClassUnit*>& units) {
    // Iterate to a fixpoint so constants may refer to other constants.
    for (int round = 0; round < 64; ++round) {
        bool changed = false;
        for (auto* u : units) {
            auto* info = env.find(u->name);
            if (!info) continue;
            ClassInfo copy = *info;
            bool local_change = false;
            for (auto& f : copy.fields) {
                if (f.constant || (f.flags & (vm::kStatic | vm::kFinal)) != (vm::kStatic | vm::kFinal)) continue;
                if (f.type != "int" && f.type != "bool" && f.type != "str") continue;
                auto it = field_inits.find(copy.name + "#" + f.name);
                if (it == field_inits.end()) continue;
                MethodGen g(*this, copy, MethodGen::Kind::clinit, true, "void");
                std::optional<ConstVal> v;
                try {
                    v = g.fold(*it->second);
                } catch (const CompileError&) {
                }
                if (v && v->type() == f.type) {
                    f.constant = v;
                    local_change = true;
                }
            }
            if (local_change) {
                env.put(copy);
                changed = true;
            }
        }
        if (!changed) break;
    }
}

void Compiler::instance_inits(const ClassUnit& unit, const ClassInfo& info, MethodGen& g) {
    for (const Node* m : unit.members) {
        if (m->kind != NodeKind::Field || (m->modifiers & lang::kStatic) || m->kids.size() < 2) continue;
        auto* f = info.field(m->text);
        if (f) g.gen_field_init(*f, m->kids[1]);
    }
}

std::optional<vm::MethodBody> Compiler::gen_member(const ClassUnit& unit, const ClassInfo& info, const Node& m,
                                                   vm::BytecodeClass& bc, Diagnostics& diags) {
    try {
        bool ctor = m.kind == NodeKind::Constructor;
        bool is_static = m.modifiers & lang::kStatic;
        std::string ret = "void";
        if (!ctor) {
            auto r = env.resolve_type(m.kids.at(0).text, unit.top);
            if (!r) return std::nullopt;
            ret = *r;
        }
        MethodGen g(*this, info, ctor ? MethodGen::Kind::ctor : MethodGen::Kind::method, is_static, ret);
        if (!is_static) g.add_this();
        std::vector<std::string> params;
        for (const auto& p : m.kids.at(ctor ? 0 : 1).kids) {
            auto t = env.resolve_type(p.kids.at(0).text, unit.top);
            if (!t) return std::nullopt;
            params.push_back(*t);
            g.add_param(p.text, *t, p);
        }
        const Node& body = m.kids.at(ctor ? 1 : 2);
        std::size_t from = 0;
        if (ctor) {
            const Node* sc = nullptr;
            if (!body.kids.empty() && body.kids[0].kind == NodeKind::SuperCall) {
                sc = &body.kids[0];
                from = 1;
            }
            if (sc) {
                g.gen_super_call(sc);
            } else {
                try {
                    g.gen_super_call(nullptr);
                } catch (CompileError& e) {
                    e.span = m.span;
                    throw;
                }
            }
            instance_inits(unit, info, g);
        }
        g.gen_block_items(body.kids, from);
        std::uint8_t flags = flags_of(m);
        return g.finish(bc, ctor ? "<init>" : m.text, params, flags, g.completes, m);
    } catch (const CompileError& e) {
        diags.push_back({e.message, e.span});
        return std::nullopt;
    }
}

std::optional<vm::MethodBody> Compiler::gen_default_ctor(const ClassUnit& unit, const ClassInfo& info,
                                                         vm::BytecodeClass& bc, Diagnostics& diags) {
    MethodGen g(*this, info, MethodGen::Kind::ctor, false, "void");
    g.add_this();
    Node at;
    at.span = unit.header_span;
    try {
        try {
            g.gen_super_call(nullptr);
        } catch (CompileError& e) {
            e.span = unit.header_span;
            throw;
        }
        instance_inits(unit, info, g);
        return g.finish(bc, "<init>", {}, vm::kSynthetic, true, at);
    } catch (const CompileError& e) {
        diags.push_back({e.message, e.span});
        return std::nullopt;
    }
}

std::optional<vm::MethodBody> Compiler::gen_clinit(const ClassUnit& unit, const ClassInfo& info, vm::BytecodeClass& bc,
                                                   Diagnostics& diags) {
    bool needed = false;
    for (const Node* m : unit.members) {
        if (m->kind == NodeKind::StaticBlock) needed = true;
        if (m->kind == NodeKind::Field && (m->modifiers & lang::kStatic) && m->kids.size() > 1) {
            auto* f = info.field(m->text);
            if (f && !f->constant) needed = true;
        }
    }
    if (!needed) return std::nullopt;
    MethodGen g(*this, info, MethodGen::Kind::clinit, true, "void");
    bool failed = false;
    for (const Node* m : unit.members) {
        try {
            if (m->kind == NodeKind::StaticBlock) {
                g.completes = true;
                if (!g.gen_stmt(m->kids.at(0))) throw CompileError{"initializer must be able to complete normally", m->span};
            } else if (m->kind == NodeKind::Field && (m->modifiers & lang::kStatic) && m->kids.size() > 1) {
                auto* f = info.field(m->text);
                if (f && !f->constant) g.gen_field_init(*f, m->kids[1]);
            }
        } catch (const CompileError& e) {
            diags.push_back({e.message, e.span});
            failed = true;
        }
    }
    if (failed) return std::nullopt;
    Node at;
    at.span = unit.header_span;
    return g.finish(bc, "<clinit>", {}, vm::kStatic, true, at);
}

void Compiler::add_wrappers(vm::BytecodeClass& top) {
    bool any = false;
    for (auto& nb : top.nested) {
        for (const auto& [cls, params] : wrappers) {
            if (cls != nb.name) continue;
            any = true;
            vm::MethodBody m;
            m.owner = nb.name;
            m.name = "<init>";
            m.params = params;
            m.params.push_back(variant.self_typed_wrapper ? nb.name : synthetic_class(top.name));
            m.ret = "void";
            m.flags = vm::kSynthetic;
            m.locals.push_back({nb.name, "this"});
            for (const auto& p : m.params) m.locals.push_back({erase(p), ""});
            m.max_locals = static_cast<int>(m.locals.size());
            for (std::size_t i = 0; i <= params.size(); ++i) m.code.push_back({Op::LOAD, static_cast<std::int32_t>(i), 0});
            int ref = nb.add_pool(vm::PoolKind::Method, vm::format_method_ref({nb.name, "<init>", params, "void"}));
            m.code.push_back({Op::INVOKESPECIAL, ref, 0});
            m.code.push_back({Op::RETURN, 0, 0});
            m.max_stack = std::max(0, vm::compute_max_stack(nb, m));
            auto pos = std::find_if(nb.methods.begin(), nb.methods.end(),
                                    [](const vm::MethodBody& x) { return x.name == "<clinit>"; });
            nb.methods.insert(pos, std::move(m));
        }
    }
    if (any && !variant.self_typed_wrapper) {
        vm::BytecodeClass syn;
        syn.name = synthetic_class(top.name);
        syn.flags = vm::kSynthetic;
        top.nested.push_back(std::move(syn));
    }
}

vm::BytecodeClass Compiler::generate(const ClassUnit& unit, Diagnostics& diags) {
    const ClassInfo& info = *env.find(unit.name);
    vm::BytecodeClass bc;
    bc.name = info.name;
    bc.super_name = info.super_name;
    bc.flags = info.flags;
    for (const auto& f : info.fields) {
        vm::FieldDef fd{f.name, f.type, f.flags, -1};
        if (f.constant) {
            if (f.constant->kind == ConstVal::Kind::Str)
                fd.constant = bc.add_pool(vm::PoolKind::Str, f.constant->s);
            else
                fd.constant = bc.add_pool(vm::PoolKind::Int, std::to_string(f.constant->i));
        }
        bc.fields.push_back(fd);
    }
    bool has_ctor = std::any_of(unit.members.begin(), unit.members.end(),
                                [](const Node* m) { return m->kind == NodeKind::Constructor; });
    if (!has_ctor) {
        if (auto m = gen_default_ctor(unit, info, bc, diags)) bc.methods.push_back(std::move(*m));
    }
    for (const Node* m : unit.members) {
        if (m->kind != NodeKind::Method && m->kind != NodeKind::Constructor) continue;
        if (auto body = gen_member(unit, info, *m, bc, diags)) bc.methods.push_back(std::move(*body));
    }
    for (auto* n : unit.nested) bc.nested.push_back(generate(*n, diags));
    if (auto clinit = gen_clinit(unit, info, bc, diags)) bc.methods.push_back(std::move(*clinit));
    return bc;
}

}  // namespace

std::vector<CompileResult> compile_all(const std::vector<lang::ClassAst>& asts, const CompilerVariant& variant,
                                       const ClassEnv* classpath) {
    Compiler c(variant, classpath);
    std::vector<std::unique_ptr<ClassUnit>> store;
    std::vector<ClassUnit*> tops, all;
    std::vector<Diagnostics> diags(asts.size());
    for (const auto& a : asts) c.preregister(a);
    for (std::size_t i = 0; i < asts.size(); ++i) {
        store.push_back(std::make_unique<ClassUnit>());
        ClassUnit* u = store.back().get();
        tops.push_back(u);
        diags[i] = c.declare(asts[i], *u, store);
    }
    for (auto* u : tops) {
        all.push_back(u);
        for (auto* n : u->nested) all.push_back(n);
    }
    c.compute_constants(all);
    std::vector<CompileResult> out(asts.size());
    for (std::size_t i = 0; i < asts.size(); ++i) {
        auto bc = c.generate(*tops[i], diags[i]);
        c.add_wrappers(bc);
        out[i].diagnostics = std::move(diags[i]);
        if (!has_errors(out[i].diagnostics)) {
            auto v = vm::verify(bc);
            if (has_errors(v)) {
                for (auto& d : v) {
                    d.message = "internal: " + d.message;
                    d.span = asts[i].header_span;
                    out[i].diagnostics.push_back(d);
                }
            } else {
                out[i].bc = std::move(bc);
            }
        }
    }
    return out;
}

CompileResult compile(const lang::ClassAst& ast, const CompilerVariant& variant, const ClassEnv* classpath) {
    return std::move(compile_all({ast}, variant, classpath).front());
}

RecompileResult recompile_check(std::string_view source, const CompilerVariant& variant, const ClassEnv* classpath) {
    RecompileResult r;
    auto parsed = lang::parse(source);
    r.diagnostics = parsed.diagnostics;
    if (!parsed.ok()) return r;
    r.parsed = true;
    r.ast = std::move(parsed.ast);
    auto cr = compile(*r.ast, variant, classpath);
    r.diagnostics.insert(r.diagnostics.end(), cr.diagnostics.begin(), cr.diagnostics.end());
    r.bc = std::move(cr.bc);
    r.pass = r.bc.has_value();
    return r;
}

}  // namespace mdlab::compiler
