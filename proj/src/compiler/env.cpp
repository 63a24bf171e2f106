#include "mdlab/compiler.hpp"

namespace mdlab::compiler {
namespace {

std::map<std::string, ClassInfo, std::less<>> make_builtins() {
    std::map<std::string, ClassInfo, std::less<>> out;
    auto add = [&](ClassInfo c) { out[c.name] = std::move(c); };
    ClassInfo object{"Object", "", "Object", 0, {}, {{"<init>", {}, "void", 0}}, {}, true};
    add(object);
    ClassInfo rte{"RuntimeException", "Object", "RuntimeException", 0,
                  {{"msg", "str", vm::kPrivate, std::nullopt, false}},
                  {{"<init>", {}, "void", 0}, {"<init>", {"str"}, "void", 0}, {"getMessage", {}, "str", 0}},
                  {}, true};
    add(rte);
    for (const char* n : {"ArithmeticException", "NullPointerException", "ClassCastException"}) {
        ClassInfo e{n, "RuntimeException", n, 0, {}, {{"<init>", {}, "void", 0}, {"<init>", {"str"}, "void", 0}}, {},
                    true};
        add(e);
    }
    return out;
}

const std::map<std::string, ClassInfo, std::less<>>& builtins() {
    static const auto b = make_builtins();
    return b;
}

bool is_primitive(std::string_view t) { return t == "int" || t == "bool" || t == "void"; }

}  // namespace

CompilerVariant CompilerVariant::A() { return {"A", true, false, false}; }
CompilerVariant CompilerVariant::B() { return {"B", false, true, true}; }
CompilerVariant CompilerVariant::by_id(std::string_view id) {
    if (id == "A") return A();
    if (id == "B") return B();
    throw ToolError("unknown compiler variant: " + std::string(id));
}

std::string ConstVal::type() const {
    switch (kind) {
        case Kind::Int: return "int";
        case Kind::Bool: return "bool";
        case Kind::Str: return "str";
    }
    return "int";
}

const FieldInfo* ClassInfo::field(std::string_view n) const {
    for (const auto& f : fields)
        if (f.name == n) return &f;
    return nullptr;
}

ClassEnv::ClassEnv() = default;

const ClassInfo* ClassEnv::find(std::string_view name) const {
    auto it = classes_.find(name);
    if (it != classes_.end()) return &it->second;
    bool hidden = false;
    for (const auto& h : hidden_) {
        if (name == h || (name.size() > h.size() && name.starts_with(h) && name[h.size()] == '$')) hidden = true;
    }
    if (parent_ && !hidden) return parent_->find(name);
    auto b = builtins().find(name);
    return b == builtins().end() ? nullptr : &b->second;
}

void ClassEnv::put(ClassInfo info) { classes_[info.name] = std::move(info); }

void ClassEnv::add_bytecode(const vm::BytecodeClass& bc) {
    ClassInfo c;
    c.name = bc.name;
    c.super_name = bc.super_name;
    auto dollar = bc.name.find('$');
    c.top = dollar == std::string::npos ? bc.name : bc.name.substr(0, dollar);
    c.flags = bc.flags;
    for (const auto& f : bc.fields) {
        FieldInfo fi{f.name, f.type, f.flags, std::nullopt, f.constant >= 0};
        if (f.constant >= 0) {
            const auto& e = bc.pool.at(static_cast<std::size_t>(f.constant));
            ConstVal v;
            if (e.kind == vm::PoolKind::Str) {
                v.kind = ConstVal::Kind::Str;
                v.s = e.text;
            } else {
                v.kind = f.type == "bool" ? ConstVal::Kind::Bool : ConstVal::Kind::Int;
                v.i = static_cast<std::int32_t>(std::stoll(e.text));
            }
            fi.constant = v;
        }
        c.fields.push_back(std::move(fi));
    }
    for (const auto& m : bc.methods) {
        if (m.name == "<clinit>") continue;
        c.methods.push_back({m.name, m.params, m.ret, m.flags});
    }
    for (const auto& n : bc.nested) {
        c.nested.push_back(n.name);
        add_bytecode(n);
    }
    put(std::move(c));
}

bool ClassEnv::is_subclass(std::string_view sub, std::string_view super) const {
    std::string c(sub);
    for (int guard = 0; guard < 64 && !c.empty(); ++guard) {
        if (c == super) return true;
        if (c == "str") {
            c = "Object";
            continue;
        }
        auto* info = find(c);
        if (!info) return false;
        c = info->super_name;
    }
    return false;
}

bool ClassEnv::assignable(std::string_view from, std::string_view to) const {
    if (from == to) return true;
    if (is_primitive(from) || is_primitive(to)) return false;
    if (from == "null") return to != "null";
    if (from == "Builder" || to == "Builder") return false;
    return is_subclass(from, to);
}

std::optional<std::string> ClassEnv::resolve_type(std::string_view written, std::string_view top) const {
    if (written == "int" || written == "bool" || written == "str" || written == "void" || written == "Builder")
        return std::string(written);
    if (written.find('.') == std::string_view::npos) {
        auto simple = top.substr(top.rfind('.') == std::string_view::npos ? 0 : top.rfind('.') + 1);
        if (written == simple) return std::string(top);
        std::string nested = std::string(top) + "$" + std::string(written);
        if (find(nested)) return nested;
        if (builtins().count(written)) return std::string(written);
        return std::nullopt;
    }
    if (auto* c = find(written); c && c->name.find('$') == std::string::npos && !c->builtin) return std::string(written);
    auto dot = written.rfind('.');
    auto outer = resolve_type(written.substr(0, dot), top);
    if (!outer || outer->find('$') != std::string::npos || is_primitive(*outer) || *outer == "str") return std::nullopt;
    std::string nested = *outer + "$" + std::string(written.substr(dot + 1));
    if (find(nested)) return nested;
    return std::nullopt;
}

ClassEnv env_from_bytecode(const std::vector<vm::BytecodeClass>& classes) {
    ClassEnv env;
    for (const auto& c : classes) env.add_bytecode(c);
    return env;
}

std::string source_type_name(std::string_view t) {
    std::string out(t);
    for (auto& c : out)
        if (c == '$') c = '.';
    return out;
}

}  // namespace mdlab::compiler
