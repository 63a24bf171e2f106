#include <algorithm>
#include <functional>

#include "lift.hpp"

namespace mdlab::decomp::detail {

Style literalist_style() { return Style{}; }

Style sugarer_style() {
    Style s;
    s.names = LocalNames::debug;
    s.types = TypeNames::simple_own;
    s.wrapper = WrapperArg::by_param_class_flag;
    s.erased_local_types = false;
    s.hoist_locals = false;
    s.reverse_concat = true;
    s.bare_own_fields = false;
    s.bare_own_statics = false;
    s.explicit_this_calls = false;
    s.explicit_super = false;
    s.keep_trailing_return = false;
    s.drop_tail_continue = true;
    s.inline_return_blocks = true;
    s.simplify_negation = true;
    s.fold_return_temps = true;
    return s;
}

Style optimist_style() {
    Style s;
    s.names = LocalNames::renamed;
    s.types = TypeNames::simple_all;
    s.wrapper = WrapperArg::by_method_flag;
    s.erased_local_types = false;
    s.hoist_locals = false;
    s.reverse_concat = true;
    s.bare_own_fields = false;
    s.bare_own_statics = true;
    s.explicit_this_calls = false;
    s.explicit_super = false;
    s.keep_trailing_return = false;
    s.simplify_negation = true;
    s.insert_arg_casts = false;
    s.drop_arg_casts = true;
    return s;
}

bool has_try_in_loop(const vm::MethodBody& m) {
    auto offs = m.offsets();
    for (const auto& h : m.handlers) {
        for (std::size_t k = 0; k < m.code.size(); ++k) {
            const auto& in = m.code[k];
            if (!vm::is_branch(in.op)) continue;
            if (in.a <= h.start && h.start < offs[k]) return true;
        }
    }
    return false;
}

namespace {

std::uint8_t modifiers_of(std::uint8_t flags) {
    std::uint8_t m = 0;
    if (flags & vm::kStatic) m |= lang::kStatic;
    if (flags & vm::kFinal) m |= lang::kFinal;
    if (flags & vm::kPrivate) m |= lang::kPrivate;
    return m;
}

std::string simple_name(const std::string& bytecode_name) {
    auto d = bytecode_name.find_last_of("$.");
    return d == std::string::npos ? bytecode_name : bytecode_name.substr(d + 1);
}

void prune_unreachable(Node& n) {
    for (auto& k : n.kids) prune_unreachable(k);
    if (n.kind != NodeKind::Block) return;
    for (std::size_t i = 0; i < n.kids.size(); ++i) {
        if (!can_complete(n.kids[i])) {
            n.kids.resize(i + 1);
            break;
        }
    }
}

int count_refs(const Node& n, int slot) {
    int s, c = 0;
    if (is_local_ref(n, &s) && s == slot) ++c;
    for (const auto& k : n.kids) c += count_refs(k, slot);
    return c;
}

void fold_return_temps(Node& block, const Node& whole) {
    for (auto& k : block.kids) fold_return_temps(k, whole);
    if (block.kind != NodeKind::Block) return;
    for (std::size_t i = 0; i + 1 < block.kids.size(); ++i) {
        auto& a = block.kids[i];
        auto& b = block.kids[i + 1];
        int slot, slot2;
        if (a.kind == NodeKind::Assign && is_local_ref(a.kids[0], &slot) && b.kind == NodeKind::Return && !b.kids.empty() &&
            is_local_ref(b.kids[0], &slot2) && slot == slot2 && count_refs(whole, slot) == 2) {
            b.kids[0] = a.kids[1];
            block.kids.erase(block.kids.begin() + static_cast<long>(i));
        }
    }
}

struct RefSite {
    std::vector<std::pair<Node*, std::size_t>> path;  // (block, statement index) from the outermost block
};

void collect_refs(Node& block, std::vector<std::pair<Node*, std::size_t>>& path, int slot, std::vector<RefSite>& out) {
    for (std::size_t i = 0; i < block.kids.size(); ++i) {
        path.emplace_back(&block, i);
        Node& s = block.kids[i];
        std::function<void(Node&)> walk = [&](Node& n) {
            for (auto& k : n.kids) {
                if (k.kind == NodeKind::Block) {
                    collect_refs(k, path, slot, out);
                } else {
                    int sl;
                    if (is_local_ref(k, &sl) && sl == slot) out.push_back({path});
                    walk(k);
                }
            }
        };
        walk(s);
        path.pop_back();
    }
}

// Declares `slot` in the innermost block enclosing all its uses.
void place_declaration(Node& body, int slot, const std::string& type) {
    std::vector<RefSite> sites;
    std::vector<std::pair<Node*, std::size_t>> path;
    collect_refs(body, path, slot, sites);
    if (sites.empty()) return;
    std::size_t depth = 0;
    while (true) {
        bool same = true;
        for (const auto& s : sites)
            if (s.path.size() <= depth + 1 || s.path[depth].first != sites[0].path[depth].first ||
                s.path[depth].second != sites[0].path[depth].second || s.path[depth + 1].first != sites[0].path[depth + 1].first)
                same = false;
        if (!same) break;
        ++depth;
    }
    Node* block = sites[0].path[depth].first;
    std::size_t first = sites[0].path[depth].second;
    for (const auto& s : sites) first = std::min(first, s.path[depth].second);
    Node& st = block->kids[first];
    int sl;
    if (st.kind == NodeKind::Assign && is_local_ref(st.kids[0], &sl) && sl == slot && count_refs(st.kids[1], slot) == 0) {
        Node decl = mk(NodeKind::VarDecl, "\x01" + std::to_string(slot), {type_node(type), st.kids[1]});
        st = std::move(decl);
        return;
    }
    block->kids.insert(block->kids.begin() + static_cast<long>(first),
                       mk(NodeKind::VarDecl, "\x01" + std::to_string(slot), {type_node(type)}));
}

void rename(Node& n, const std::map<int, std::string>& names) {
    int slot;
    if ((n.kind == NodeKind::Name || n.kind == NodeKind::VarDecl || n.kind == NodeKind::Catch || n.kind == NodeKind::Param) &&
        !n.text.empty() && n.text[0] == '\x01') {
        slot = std::stoi(n.text.substr(1));
        auto it = names.find(slot);
        n.text = it == names.end() ? "v" + std::to_string(slot) : it->second;
    }
    for (auto& k : n.kids) rename(k, names);
}

std::string type_prefix(const std::string& t) {
    if (t == "int") return "i";
    if (t == "bool") return "z";
    if (t == "str") return "s";
    if (t == "Builder") return "sb";
    auto s = simple_name(t);
    std::string p(1, static_cast<char>(std::tolower(static_cast<unsigned char>(s.empty() ? 'o' : s[0]))));
    return p;
}

Node stub_body() {
    Node ex = mk(NodeKind::New, "", {type_node("RuntimeException"), mk(NodeKind::StrLit, "decompilation failed")});
    return mk(NodeKind::Block, "", {mk(NodeKind::Throw, "", {std::move(ex)})});
}

class ClassDecompiler {
public:
    ClassDecompiler(const vm::BytecodeClass& top, const Style& st, bool stub) : top_(top), st_(st), stub_(stub) {}

    std::vector<Node> members(const vm::BytecodeClass& bc) {
        ClassCtx cx{top_, bc, st_};
        std::vector<Node> fields, statics, methods, nested;
        std::map<std::string, Node> lifted_inits;
        for (const auto& m : bc.methods) {
            if (!(m.flags & vm::kSynthetic)) continue;
            if (m.name == "<init>" && m.params.empty()) lift_default_ctor(cx, m, lifted_inits, methods);
        }
        for (const auto& f : bc.fields) {
            Node fd = mk(NodeKind::Field, f.name, {type_node(cx.spell(f.type))});
            fd.modifiers = modifiers_of(f.flags);
            if (f.constant >= 0) {
                const auto& p = bc.pool.at(static_cast<std::size_t>(f.constant));
                if (p.kind == vm::PoolKind::Str)
                    fd.kids.push_back(mk(NodeKind::StrLit, p.text));
                else if (f.type == "bool")
                    fd.kids.push_back(mk(NodeKind::BoolLit, p.text == "0" ? "false" : "true"));
                else
                    fd.kids.push_back(mk(NodeKind::IntLit, p.text));
            } else if (auto it = lifted_inits.find(f.name); it != lifted_inits.end()) {
                fd.kids.push_back(it->second);
            }
            fields.push_back(std::move(fd));
        }
        for (const auto& m : bc.methods) {
            if (m.flags & vm::kSynthetic) continue;
            if (m.name == "<clinit>") {
                Node body = method_body(cx, m);
                statics.push_back(mk(NodeKind::StaticBlock, "", {std::move(body)}));
            } else {
                methods.push_back(method_decl(cx, m));
            }
        }
        for (const auto& n : bc.nested) {
            if (n.flags & vm::kSynthetic) continue;
            Node nc = mk(NodeKind::NestedClass, simple_name(n.name),
                         {type_node(n.super_name == "Object" ? "" : cx.spell(n.super_name))});
            for (auto& m : members(n)) nc.kids.push_back(std::move(m));
            nested.push_back(std::move(nc));
        }
        std::vector<Node> out;
        for (auto* group : {&fields, &statics, &methods, &nested})
            for (auto& n : *group) out.push_back(std::move(n));
        return out;
    }

private:
    std::vector<std::string> slot_types(const vm::MethodBody& m, const ClassCtx& cx) const {
        std::vector<std::string> t(static_cast<std::size_t>(std::max<int>(m.max_locals, static_cast<int>(m.locals.size()))), "int");
        for (std::size_t i = 0; i < m.locals.size(); ++i) t[i] = m.locals[i].type;
        std::size_t p = 0;
        if (!m.is_static()) t.at(p++) = cx.cls.name;
        for (const auto& ty : m.params) t.at(p++) = ty;
        return t;
    }

    int param_slots(const vm::MethodBody& m) const { return static_cast<int>(m.params.size()) + (m.is_static() ? 0 : 1); }

    LiftResult lift(const ClassCtx& cx, const vm::MethodBody& m, std::vector<std::string>& types) {
        if (st_.decline_try_in_loop && has_try_in_loop(m)) throw Decline{"try inside loop"};
        types = slot_types(m, cx);
        if (!st_.erased_local_types) {
            auto first = lift_method(cx, m, types);
            for (int s : first.bool_evidence)
                if (s >= param_slots(m) && types[static_cast<std::size_t>(s)] == "int") types[static_cast<std::size_t>(s)] = "bool";
        }
        return lift_method(cx, m, types);
    }

    void lift_default_ctor(const ClassCtx& cx, const vm::MethodBody& m, std::map<std::string, Node>& inits,
                           std::vector<Node>& methods) {
        std::vector<std::string> types;
        LiftResult r;
        try {
            r = lift(cx, m, types);
        } catch (const Decline&) {
            if (!stub_) throw;
            return;
        }
        auto& k = r.body.kids;
        std::map<std::string, Node> found;
        bool ok = !k.empty() && k.front().kind == NodeKind::SuperCall && k.front().kids.empty();
        for (std::size_t i = 1; ok && i < k.size(); ++i) {
            const auto& s = k[i];
            if (s.kind == NodeKind::Return && s.kids.empty() && i + 1 == k.size()) break;
            const Node* target = s.kind == NodeKind::Assign ? &s.kids[0] : nullptr;
            if (target && target->kind == NodeKind::Name && !is_local_ref(*target)) {
                found[target->text] = s.kids[1];
            } else if (target && target->kind == NodeKind::FieldAccess && target->kids[0].kind == NodeKind::This) {
                found[target->text] = s.kids[1];
            } else {
                ok = false;
            }
        }
        if (ok) {
            inits = std::move(found);
            return;
        }
        methods.push_back(method_decl(cx, m));
    }

    Node method_body(const ClassCtx& cx, const vm::MethodBody& m, std::map<int, std::string>* names_out = nullptr) {
        std::vector<std::string> types;
        LiftResult r;
        try {
            r = lift(cx, m, types);
        } catch (const Decline&) {
            if (!stub_) throw;
            if (names_out) *names_out = local_names(m, slot_types(m, cx), LiftResult{});
            return stub_body();
        }
        Node& body = r.body;
        prune_unreachable(body);
        auto& k = body.kids;
        std::size_t after_super = 0;
        if (!k.empty() && k.front().kind == NodeKind::SuperCall) {
            k.front().text.clear();
            if (!st_.explicit_super && k.front().kids.empty())
                k.erase(k.begin());
            else
                after_super = 1;
        }
        bool clinit = m.name == "<clinit>";
        if (!k.empty() && k.back().kind == NodeKind::Return && k.back().kids.empty() && (clinit || !st_.keep_trailing_return))
            k.pop_back();
        if (st_.fold_return_temps) fold_return_temps(body, body);

        int params = param_slots(m);
        auto declared_type = [&](int slot) { return cx.spell(types.at(static_cast<std::size_t>(slot))); };
        if (st_.hoist_locals) {
            std::vector<Node> decls;
            for (int s = params; s < static_cast<int>(types.size()); ++s) {
                if (r.catch_slots.count(s)) continue;
                decls.push_back(mk(NodeKind::VarDecl, "\x01" + std::to_string(s), {type_node(declared_type(s))}));
            }
            k.insert(k.begin() + static_cast<long>(after_super), decls.begin(), decls.end());
        } else {
            for (int s = params; s < static_cast<int>(types.size()); ++s)
                if (!r.catch_slots.count(s)) place_declaration(body, s, declared_type(s));
        }
        auto names = local_names(m, types, r);
        rename(body, names);
        if (names_out) *names_out = std::move(names);
        return body;
    }

    std::map<int, std::string> local_names(const vm::MethodBody& m, const std::vector<std::string>& types,
                                           const LiftResult& r) const {
        std::map<int, std::string> names;
        int params = param_slots(m);
        std::set<std::string> taken;
        for (int s = 0; s < static_cast<int>(types.size()); ++s) {
            std::string n;
            switch (st_.names) {
                case LocalNames::slot: n = "r" + std::to_string(s); break;
                case LocalNames::debug:
                    n = s < static_cast<int>(m.locals.size()) ? m.locals[static_cast<std::size_t>(s)].name : "";
                    if (n.empty() || n == "this") n = "v" + std::to_string(s);
                    break;
                case LocalNames::renamed: {
                    auto it = r.param_field.find(s);
                    if (s < params && it != r.param_field.end() && !taken.count(it->second))
                        n = it->second;
                    else if (r.catch_slots.count(s))
                        n = "e" + std::to_string(s);
                    else
                        n = type_prefix(types[static_cast<std::size_t>(s)]) + std::to_string(s);
                    break;
                }
            }
            taken.insert(n);
            names[s] = n;
        }
        return names;
    }

    Node method_decl(const ClassCtx& cx, const vm::MethodBody& m) {
        Node params = mk(NodeKind::Params);
        int slot = m.is_static() ? 0 : 1;
        for (const auto& p : m.params)
            params.kids.push_back(mk(NodeKind::Param, "\x01" + std::to_string(slot++), {type_node(cx.spell(p))}));
        std::map<int, std::string> names;
        Node body = method_body(cx, m, &names);
        rename(params, names);
        std::uint8_t mods = modifiers_of(m.flags);
        if (m.name == "<init>") {
            Node c = mk(NodeKind::Constructor, simple_name(cx.cls.name), {std::move(params), std::move(body)});
            c.modifiers = mods & ~lang::kStatic;
            return c;
        }
        Node d = mk(NodeKind::Method, m.name, {type_node(cx.spell(m.ret)), std::move(params), std::move(body)});
        d.modifiers = mods;
        return d;
    }

    const vm::BytecodeClass& top_;
    const Style& st_;
    bool stub_;
};

}  // namespace

lang::ClassAst decompile_class(const vm::BytecodeClass& top, const Style& style, bool stub) {
    ClassDecompiler d(top, style, stub);
    ClassCtx cx{top, top, style};
    lang::ClassAst ast;
    ast.qualified_name = top.name;
    ast.super_name = top.super_name == "Object" ? "" : cx.spell(top.super_name);
    int ordinal = 0;
    for (auto& n : d.members(top)) {
        lang::TypeMember m;
        switch (n.kind) {
            case NodeKind::Field: m.kind = lang::MemberKind::field; break;
            case NodeKind::Method: m.kind = lang::MemberKind::method; break;
            case NodeKind::Constructor: m.kind = lang::MemberKind::constructor; break;
            case NodeKind::NestedClass: m.kind = lang::MemberKind::nested_class; break;
            default:
                m.kind = lang::MemberKind::static_block;
                m.static_ordinal = ordinal++;
        }
        m.decl = std::move(n);
        ast.members.push_back(std::move(m));
    }
    return ast;
}

std::set<int> bool_locals(const vm::BytecodeClass& top, const vm::BytecodeClass& owner, const vm::MethodBody& m) {
    Style st = sugarer_style();
    ClassCtx cx{top, owner, st};
    std::vector<std::string> t(static_cast<std::size_t>(std::max<int>(m.max_locals, static_cast<int>(m.locals.size()))), "int");
    for (std::size_t i = 0; i < m.locals.size(); ++i) t[i] = m.locals[i].type;
    std::size_t p = 0;
    if (!m.is_static()) t.at(p++) = owner.name;
    for (const auto& ty : m.params) t.at(p++) = ty;
    std::set<int> out;
    try {
        auto r = lift_method(cx, m, t);
        for (int s : r.bool_evidence)
            if (s >= static_cast<int>(p) && t[static_cast<std::size_t>(s)] == "int") out.insert(s);
    } catch (const Decline&) {
    }
    return out;
}

}  // namespace mdlab::decomp::detail
