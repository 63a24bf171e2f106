#include "lift.hpp"

#include <functional>
#include <algorithm>

#include "mdlab/compiler.hpp"

namespace mdlab::decomp::detail {

using vm::Op;

Node mk(NodeKind k, std::string text, std::vector<Node> kids) { return Node(k, std::move(text), std::move(kids)); }

Node type_node(std::string text) { return mk(NodeKind::Type, std::move(text)); }

Node dotted_expr(const std::string& text) {
    std::size_t start = 0;
    auto dot = text.find('.');
    Node cur = mk(NodeKind::Name, text.substr(0, dot));
    while (dot != std::string::npos) {
        start = dot + 1;
        dot = text.find('.', start);
        cur = mk(NodeKind::FieldAccess, text.substr(start, dot == std::string::npos ? std::string::npos : dot - start),
                 {std::move(cur)});
    }
    return cur;
}

Node local_ref(int slot) { return mk(NodeKind::Name, "\x01" + std::to_string(slot)); }

bool is_local_ref(const Node& n, int* slot) {
    if (n.kind != NodeKind::Name || n.text.empty() || n.text[0] != '\x01') return false;
    if (slot) *slot = std::stoi(n.text.substr(1));
    return true;
}

const vm::BytecodeClass* find_class(const vm::BytecodeClass& top, std::string_view name) {
    if (top.name == name) return &top;
    for (const auto& n : top.nested)
        if (auto* c = find_class(n, name)) return c;
    return nullptr;
}

bool is_builtin_type(std::string_view t) {
    for (auto b : {"int", "bool", "str", "void", "Builder", "null", "Object", "RuntimeException", "ArithmeticException",
                   "NullPointerException", "ClassCastException"})
        if (t == b) return true;
    return false;
}

std::string ClassCtx::spell(const std::string& t) const {
    if (is_builtin_type(t)) return t;
    auto src = compiler::source_type_name(t);
    auto simple = [](const std::string& s) { return s.substr(s.rfind('.') == std::string::npos ? 0 : s.rfind('.') + 1); };
    switch (st.types) {
        case TypeNames::qualified: return src;
        case TypeNames::simple_own:
            if (t == top.name) return simple(src);
            if (t.starts_with(top.name + "$")) return t.substr(top.name.size() + 1);
            return src;
        case TypeNames::simple_all: return simple(src);
    }
    return src;
}

bool can_complete(const Node& s) {
    switch (s.kind) {
        case NodeKind::Return:
        case NodeKind::Throw:
        case NodeKind::Break:
        case NodeKind::Continue: return false;
        case NodeKind::Block:
            for (const auto& k : s.kids)
                if (!can_complete(k)) return false;
            return true;
        case NodeKind::If:
            return s.kids.size() < 3 || can_complete(s.kids[1]) || can_complete(s.kids[2]);
        case NodeKind::Try: return can_complete(s.kids[0]) || can_complete(s.kids[1].kids[1]);
        case NodeKind::While: {
            bool infinite = s.kids[0].kind == NodeKind::BoolLit && s.kids[0].text == "true";
            if (!infinite) return true;
            std::function<bool(const Node&)> has_break = [&](const Node& n) {
                if (n.kind == NodeKind::Break) return true;
                if (n.kind == NodeKind::While) return false;
                for (const auto& k : n.kids)
                    if (has_break(k)) return true;
                return false;
            };
            return has_break(s.kids[1]);
        }
        default: return true;
    }
}

namespace {

struct Val {
    Node e;
    std::string type;
    bool uninit = false;
    bool chain = false;  // builder chain started in this expression
    std::vector<std::pair<Node, vm::Tag>> parts{};
};

struct Loop {
    int header, exit, tail;
};

struct HandlerIdx {
    int start, end, target;
    std::string type;
};

std::string tag_type(vm::Tag t) {
    switch (t) {
        case vm::Tag::Int: return "int";
        case vm::Tag::Bool: return "bool";
        case vm::Tag::Str: return "str";
        case vm::Tag::Ref: return "Object";
    }
    return "Object";
}

Node negate(const Node& c, bool simplify) {
    if (simplify) {
        if (c.kind == NodeKind::Unary && c.text == "!") return c.kids[0];
        if (c.kind == NodeKind::Binary) {
            static const std::map<std::string, std::string> flip{{"<", ">="}, {">=", "<"}, {">", "<="},
                                                                 {"<=", ">"}, {"==", "!="}, {"!=", "=="}};
            auto it = flip.find(c.text);
            if (it != flip.end()) {
                Node n = c;
                n.text = it->second;
                return n;
            }
        }
    }
    return mk(NodeKind::Unary, "!", {c});
}

class MethodLifter {
public:
    MethodLifter(const ClassCtx& cx, const vm::MethodBody& m, const std::vector<std::string>& slot_types)
        : cx_(cx), m_(m), slot_types_(slot_types) {
        std::int32_t off = 0;
        for (std::size_t i = 0; i < m.code.size(); ++i) {
            idx_of_[off] = static_cast<int>(i);
            off += vm::encoded_size(m.code[i].op);
        }
        idx_of_[off] = static_cast<int>(m.code.size());
        for (const auto& h : m.handlers) {
            HandlerIdx hi{idx(h.start), idx(h.end), idx(h.target), cx.cls.pool.at(static_cast<std::size_t>(h.type)).text};
            handlers_.push_back(hi);
        }
    }

    LiftResult run() {
        LiftResult r;
        auto stmts = parse(0, static_cast<int>(m_.code.size()));
        r.body = mk(NodeKind::Block, "", std::move(stmts));
        r.bool_evidence = std::move(bool_evidence_);
        r.param_field = std::move(param_field_);
        r.catch_slots = std::move(catch_slots_);
        return r;
    }

private:
    [[noreturn]] static void decline(const std::string& why) { throw Decline{why}; }

    int idx(std::int32_t off) const {
        auto it = idx_of_.find(off);
        if (it == idx_of_.end()) decline("branch into the middle of an instruction");
        return it->second;
    }
    int target(int k) const { return idx(m_.code[static_cast<std::size_t>(k)].a); }
    const vm::Instr& at(int k) const { return m_.code.at(static_cast<std::size_t>(k)); }
    const vm::PoolEntry& pool(int i) const { return cx_.cls.pool.at(static_cast<std::size_t>(i)); }

    int param_count() const { return static_cast<int>(m_.params.size()) + (m_.is_static() ? 0 : 1); }

    std::string slot_type(int slot) const {
        if (slot < 0 || slot >= static_cast<int>(slot_types_.size())) decline("local out of range");
        return slot_types_[static_cast<std::size_t>(slot)];
    }

    Val pop() {
        if (stack_.empty()) decline("stack underflow");
        Val v = std::move(stack_.back());
        stack_.pop_back();
        if (v.uninit) decline("uninitialized object escapes");
        return v;
    }
    void push(Node e, std::string type) { stack_.push_back({std::move(e), std::move(type)}); }

    void note_bool(const Node& e) {
        int slot;
        if (is_local_ref(e, &slot)) bool_evidence_.insert(slot);
    }

    // Adjusts a value to the type expected by its consumer.
    void coerce(Val& v, const std::string& want) {
        if (want != "bool") return;
        note_bool(v.e);
        if (v.e.kind == NodeKind::IntLit && (v.e.text == "0" || v.e.text == "1")) {
            v.e = mk(NodeKind::BoolLit, v.e.text == "1" ? "true" : "false");
            v.type = "bool";
        }
    }

    Node materialize(Val v) {
        if (!v.chain) return std::move(v.e);
        return std::move(v.e);
    }

    Node class_ref(const std::string& t) const { return dotted_expr(cx_.spell(t)); }

    Node static_field(const vm::FieldRef& f) const {
        if (f.owner == cx_.cls.name && cx_.st.bare_own_statics) return mk(NodeKind::Name, f.name);
        return mk(NodeKind::FieldAccess, f.name, {class_ref(f.owner)});
    }

    Node instance_field(Node obj, const vm::FieldRef& f) const {
        if (obj.kind == NodeKind::This && cx_.st.bare_own_fields) return mk(NodeKind::Name, f.name);
        return mk(NodeKind::FieldAccess, f.name, {std::move(obj)});
    }

    void note_param_store(const Node& value, const std::string& field) {
        int slot;
        if (is_local_ref(value, &slot) && slot < param_count() && !param_field_.count(slot)) param_field_[slot] = field;
    }

    std::vector<Node> pop_args(const std::vector<std::string>& params, bool super_call) {
        std::vector<Val> vals(params.size());
        for (std::size_t i = params.size(); i-- > 0;) vals[i] = pop();
        std::vector<Node> out;
        for (std::size_t i = 0; i < params.size(); ++i) {
            Val& v = vals[i];
            coerce(v, params[i]);
            std::string vt = v.type;
            Node e = materialize(std::move(v));
            if (cx_.st.drop_arg_casts && e.kind == NodeKind::Cast) e = e.kids[1];
            bool ref_param = params[i] != "int" && params[i] != "bool";
            if (!super_call && cx_.st.insert_arg_casts && ref_param && vt != params[i] && e.kind != NodeKind::Cast)
                e = mk(NodeKind::Cast, "", {type_node(cx_.spell(params[i])), std::move(e)});
            out.push_back(std::move(e));
        }
        return out;
    }

    void need_empty(const char* what) const {
        if (!stack_.empty()) decline(std::string("operand stack not empty at ") + what);
    }

    void invoke(const vm::Instr& in, std::vector<Node>& out) {
        auto ref = vm::parse_method_ref(pool(in.a).text);
        if (in.op == Op::INVOKESPECIAL && ref.name == "<init>") {
            auto params = ref.params;
            bool drop_last = false;
            if (auto* owner = find_class(cx_.top, ref.owner)) {
                auto* target = owner->find_method("<init>", ref.params);
                if (target && (target->flags & vm::kSynthetic) && !params.empty()) {
                    if (cx_.st.wrapper == WrapperArg::by_method_flag) {
                        drop_last = true;
                    } else {
                        auto* extra = find_class(cx_.top, params.back());
                        drop_last = extra && (extra->flags & vm::kSynthetic);
                    }
                }
            }
            std::vector<Node> args;
            if (drop_last) {
                pop();
                params.pop_back();
            }
            if (stack_.size() < params.size() + 1) decline("stack underflow");
            Val& recv_slot = stack_[stack_.size() - params.size() - 1];
            bool is_new = recv_slot.uninit;
            if (is_new) recv_slot.uninit = false;  // popped below with the arguments
            args = pop_args(params, !is_new);
            Val recv = pop();
            if (is_new) {
                if (stack_.empty() || !stack_.back().uninit) decline("constructor call without duplicated receiver");
                Node n = mk(NodeKind::New, "", {type_node(cx_.spell(ref.owner))});
                for (auto& a : args) n.kids.push_back(std::move(a));
                stack_.back() = Val{std::move(n), ref.owner};
                return;
            }
            if (recv.e.kind != NodeKind::This || ref.owner == cx_.cls.name) decline("unsupported constructor invocation");
            need_empty("super call");
            Node sc = mk(NodeKind::SuperCall, "", std::move(args));
            sc.text = ref.owner;
            out.push_back(std::move(sc));
            return;
        }
        auto args = pop_args(ref.params, false);
        Node call;
        if (in.op == Op::INVOKESTATIC) {
            if (ref.owner == cx_.cls.name) {
                call = mk(NodeKind::Call, ref.name, std::move(args));
            } else {
                call = mk(NodeKind::MethodCall, ref.name, {class_ref(ref.owner)});
                for (auto& a : args) call.kids.push_back(std::move(a));
            }
        } else {
            Val recv = pop();
            if (recv.e.kind == NodeKind::This && !cx_.st.explicit_this_calls) {
                call = mk(NodeKind::Call, ref.name, std::move(args));
            } else {
                call = mk(NodeKind::MethodCall, ref.name, {materialize(std::move(recv))});
                for (auto& a : args) call.kids.push_back(std::move(a));
            }
        }
        if (ref.ret == "void") {
            need_empty("call statement");
            out.push_back(mk(NodeKind::ExprStmt, "", {std::move(call)}));
        } else {
            push(std::move(call), ref.ret);
        }
    }

    Node int_lit(std::int64_t v) { return mk(NodeKind::IntLit, std::to_string(v)); }

    void step(int k, std::vector<Node>& out) {
        const auto& in = at(k);
        switch (in.op) {
            case Op::NOP: break;
            case Op::ICONST: push(int_lit(in.a), "int"); break;
            case Op::LDC: {
                const auto& p = pool(in.a);
                if (p.kind == vm::PoolKind::Str)
                    push(mk(NodeKind::StrLit, p.text), "str");
                else
                    push(int_lit(std::stoll(p.text)), "int");
                break;
            }
            case Op::ACONST_NULL: push(mk(NodeKind::NullLit), "null"); break;
            case Op::LOAD:
                if (in.a == 0 && !m_.is_static())
                    push(mk(NodeKind::This), cx_.cls.name);
                else
                    push(local_ref(in.a), slot_type(in.a));
                break;
            case Op::STORE: {
                Val v = pop();
                auto t = slot_type(in.a);
                coerce(v, t);
                if (v.type == "bool") bool_evidence_.insert(in.a);
                need_empty("store");
                out.push_back(mk(NodeKind::Assign, "", {local_ref(in.a), materialize(std::move(v))}));
                break;
            }
            case Op::GETSTATIC: {
                auto f = vm::parse_field_ref(pool(in.a).text);
                push(static_field(f), f.type);
                break;
            }
            case Op::PUTSTATIC: {
                auto f = vm::parse_field_ref(pool(in.a).text);
                Val v = pop();
                coerce(v, f.type);
                note_param_store(v.e, f.name);
                need_empty("static store");
                out.push_back(mk(NodeKind::Assign, "", {static_field(f), materialize(std::move(v))}));
                break;
            }
            case Op::GETFIELD: {
                auto f = vm::parse_field_ref(pool(in.a).text);
                Val o = pop();
                push(instance_field(materialize(std::move(o)), f), f.type);
                break;
            }
            case Op::PUTFIELD: {
                auto f = vm::parse_field_ref(pool(in.a).text);
                Val v = pop();
                Val o = pop();
                coerce(v, f.type);
                note_param_store(v.e, f.name);
                need_empty("field store");
                out.push_back(mk(NodeKind::Assign, "", {instance_field(materialize(std::move(o)), f), materialize(std::move(v))}));
                break;
            }
            case Op::ADD:
            case Op::SUB:
            case Op::MUL:
            case Op::DIV:
            case Op::REM: {
                Val b = pop(), a = pop();
                static const std::map<Op, std::string> sym{{Op::ADD, "+"}, {Op::SUB, "-"}, {Op::MUL, "*"}, {Op::DIV, "/"}, {Op::REM, "%"}};
                push(mk(NodeKind::Binary, sym.at(in.op), {materialize(std::move(a)), materialize(std::move(b))}), "int");
                break;
            }
            case Op::NEG: {
                Val a = pop();
                if (a.e.kind == NodeKind::IntLit && !a.e.text.starts_with('-') && a.e.text != "0")
                    push(mk(NodeKind::IntLit, "-" + a.e.text), "int");
                else
                    push(mk(NodeKind::Unary, "-", {materialize(std::move(a))}), "int");
                break;
            }
            case Op::NOT: {
                Val a = pop();
                coerce(a, "bool");
                push(mk(NodeKind::Unary, "!", {materialize(std::move(a))}), "bool");
                break;
            }
            case Op::EQ:
            case Op::NE:
            case Op::LT:
            case Op::LE:
            case Op::GT:
            case Op::GE: {
                Val b = pop(), a = pop();
                if (in.op == Op::EQ || in.op == Op::NE) {
                    if (a.type == "bool") coerce(b, "bool");
                    if (b.type == "bool") coerce(a, "bool");
                }
                static const std::map<Op, std::string> sym{{Op::EQ, "=="}, {Op::NE, "!="}, {Op::LT, "<"},
                                                           {Op::LE, "<="}, {Op::GT, ">"},  {Op::GE, ">="}};
                push(mk(NodeKind::Binary, sym.at(in.op), {materialize(std::move(a)), materialize(std::move(b))}), "bool");
                break;
            }
            case Op::CONCAT: {
                Val b = pop(), a = pop();
                coerce(a, tag_type(static_cast<vm::Tag>(in.a)));
                coerce(b, tag_type(static_cast<vm::Tag>(in.b)));
                push(mk(NodeKind::Binary, "+", {materialize(std::move(a)), materialize(std::move(b))}), "str");
                break;
            }
            case Op::BUILDER_NEW: {
                Val v{mk(NodeKind::New, "", {type_node("Builder")}), "Builder"};
                v.chain = true;
                stack_.push_back(std::move(v));
                break;
            }
            case Op::BUILDER_APPEND: {
                Val x = pop();
                Val r = pop();
                auto tag = static_cast<vm::Tag>(in.a);
                coerce(x, tag_type(tag));
                Val v{mk(NodeKind::MethodCall, "append", {r.e, x.e}), "Builder"};
                if (r.chain) {
                    v.chain = true;
                    v.parts = std::move(r.parts);
                    v.parts.emplace_back(x.e, tag);
                }
                stack_.push_back(std::move(v));
                break;
            }
            case Op::BUILDER_STR: {
                Val r = pop();
                if (r.chain && cx_.st.reverse_concat && !r.parts.empty()) {
                    std::vector<std::pair<Node, vm::Tag>> parts = std::move(r.parts);
                    bool str_first = parts[0].second == vm::Tag::Str || (parts.size() > 1 && parts[1].second == vm::Tag::Str);
                    Node acc;
                    std::size_t i = 0;
                    if (!str_first || parts.size() == 1) {
                        acc = mk(NodeKind::StrLit, "");
                    } else {
                        acc = std::move(parts[0].first);
                        i = 1;
                    }
                    for (; i < parts.size(); ++i) acc = mk(NodeKind::Binary, "+", {std::move(acc), std::move(parts[i].first)});
                    push(std::move(acc), "str");
                } else {
                    push(mk(NodeKind::MethodCall, "toStr", {std::move(r.e)}), "str");
                }
                break;
            }
            case Op::INVOKESTATIC:
            case Op::INVOKEVIRT:
            case Op::INVOKESPECIAL: invoke(in, out); break;
            case Op::NEW: {
                Val v{Node(), pool(in.a).text};
                v.uninit = true;
                stack_.push_back(std::move(v));
                break;
            }
            case Op::CHECKCAST: {
                Val v = pop();
                auto t = pool(in.a).text;
                push(mk(NodeKind::Cast, "", {type_node(cx_.spell(t)), materialize(std::move(v))}), t);
                break;
            }
            case Op::DUP:
                if (stack_.empty() || !stack_.back().uninit) decline("DUP outside object creation");
                stack_.push_back(stack_.back());
                break;
            case Op::POP: {
                Val v = pop();
                need_empty("discarded value");
                if (v.e.kind == NodeKind::Call || v.e.kind == NodeKind::MethodCall || v.e.kind == NodeKind::New)
                    out.push_back(mk(NodeKind::ExprStmt, "", {materialize(std::move(v))}));
                break;
            }
            case Op::THROW: {
                Val v = pop();
                need_empty("throw");
                out.push_back(mk(NodeKind::Throw, "", {materialize(std::move(v))}));
                break;
            }
            case Op::RETURN:
                need_empty("return");
                out.push_back(mk(NodeKind::Return));
                break;
            case Op::IRETURN:
            case Op::ARETURN: {
                Val v = pop();
                coerce(v, m_.ret);
                need_empty("return");
                out.push_back(mk(NodeKind::Return, "", {materialize(std::move(v))}));
                break;
            }
            case Op::PRINT: {
                Val v = pop();
                coerce(v, tag_type(static_cast<vm::Tag>(in.a)));
                need_empty("print");
                out.push_back(mk(NodeKind::Print, "", {materialize(std::move(v))}));
                break;
            }
            case Op::IFEQ:
            case Op::IFNE:
            case Op::GOTO: decline("unstructured branch");
        }
    }

    // --- structuring ---------------------------------------------------------------

    bool pure_expr_op(const vm::Instr& in) const {
        switch (in.op) {
            case Op::ICONST:
            case Op::LDC:
            case Op::ACONST_NULL:
            case Op::LOAD:
            case Op::GETSTATIC:
            case Op::GETFIELD:
            case Op::ADD:
            case Op::SUB:
            case Op::MUL:
            case Op::DIV:
            case Op::REM:
            case Op::NEG:
            case Op::NOT:
            case Op::EQ:
            case Op::NE:
            case Op::LT:
            case Op::LE:
            case Op::GT:
            case Op::GE:
            case Op::CONCAT:
            case Op::BUILDER_NEW:
            case Op::BUILDER_APPEND:
            case Op::BUILDER_STR:
            case Op::NEW:
            case Op::DUP:
            case Op::CHECKCAST:
            case Op::INVOKESPECIAL: return true;
            case Op::INVOKESTATIC:
            case Op::INVOKEVIRT: return vm::parse_method_ref(pool(in.a).text).ret != "void";
            default: return false;
        }
    }

    // Extent [header, end) of the loop whose back edge targets `i`, or -1.
    int loop_end(int i, int hi) const {
        int e = -1;
        for (int j = i; j < hi; ++j) {
            const auto& in = at(j);
            if (vm::is_branch(in.op) && target(j) == i) e = std::max(e, j + 1);
        }
        if (e < 0) return -1;
        for (bool changed = true; changed;) {
            changed = false;
            for (int j = i; j < e; ++j) {
                if (vm::is_branch(at(j).op)) {
                    int t = target(j);
                    if (t > e) {
                        e = t;
                        changed = true;
                    }
                }
            }
            for (const auto& h : handlers_) {
                if (h.start >= i && h.start < e && h.target >= e) {
                    e = h.target + 1;
                    changed = true;
                }
            }
        }
        if (e > hi) decline("loop leaves its region");
        bool has_exit = false;
        for (int j = i; j < e; ++j)
            if (vm::is_branch(at(j).op) && target(j) == e) has_exit = true;
        return has_exit ? e : hi;
    }

    int gen_loop(int i, int e, std::vector<Node>& out) {
        int tail = (e > i && at(e - 1).op == Op::GOTO && target(e - 1) == i) ? e - 1 : -1;
        loops_.push_back({i, e, tail});
        active_.insert(i);
        int j = i;
        while (j < e && pure_expr_op(at(j))) ++j;
        Node loop;
        if (j < e && j > i && at(j).op == Op::IFEQ && target(j) == e) {
            std::vector<Node> none;
            for (int k = i; k < j; ++k) step(k, none);
            if (!none.empty()) decline("statement in loop condition");
            Val c = pop();
            coerce(c, "bool");
            need_empty("loop condition");
            auto body = parse(j + 1, e);
            loop = mk(NodeKind::While, "", {materialize(std::move(c)), mk(NodeKind::Block, "", std::move(body))});
        } else {
            auto body = parse(i, e);
            loop = mk(NodeKind::While, "", {mk(NodeKind::BoolLit, "true"), mk(NodeKind::Block, "", std::move(body))});
        }
        if (cx_.st.drop_tail_continue) drop_tail_continue(loop.kids[1]);
        loops_.pop_back();
        active_.erase(i);
        out.push_back(std::move(loop));
        return e;
    }

    static void drop_tail_continue(Node& block) {
        if (block.kids.empty()) return;
        Node& last = block.kids.back();
        if (last.kind == NodeKind::Continue) {
            block.kids.pop_back();
        } else if (last.kind == NodeKind::If) {
            for (std::size_t b = 1; b < last.kids.size(); ++b) drop_tail_continue(last.kids[b]);
        } else if (last.kind == NodeKind::Try) {
            drop_tail_continue(last.kids[0]);
            drop_tail_continue(last.kids[1].kids[1]);
        }
    }

    const HandlerIdx* try_at(int i, int hi) const {
        const HandlerIdx* best = nullptr;
        for (std::size_t k = 0; k < handlers_.size(); ++k) {
            const auto& h = handlers_[k];
            if (h.start != i || h.end > hi || used_.count(k)) continue;
            if (!best || h.end > best->end) best = &h;
        }
        return best;
    }

    int gen_try(const HandlerIdx& h, int hi, std::vector<Node>& out) {
        used_.insert(static_cast<std::size_t>(&h - handlers_.data()));
        if (cx_.st.decline_try_in_loop && !loops_.empty()) decline("try inside loop");
        auto body = parse(h.start, h.end);
        int catch_end = hi, next = hi;
        if (h.end < static_cast<int>(m_.code.size()) && at(h.end).op == Op::GOTO && h.target == h.end + 1 &&
            target(h.end) > h.target) {
            catch_end = next = target(h.end);
            if (catch_end > hi) decline("try leaves its region");
        } else if (h.target != h.end) {
            decline("handler does not follow protected range");
        }
        if (at(h.target).op != Op::STORE) decline("handler does not store the exception");
        int slot = at(h.target).a;
        catch_slots_.insert(slot);
        auto cbody = parse(h.target + 1, catch_end);
        Node katch = mk(NodeKind::Catch, "\x01" + std::to_string(slot),
                        {type_node(cx_.spell(h.type)), mk(NodeKind::Block, "", std::move(cbody))});
        out.push_back(mk(NodeKind::Try, "", {mk(NodeKind::Block, "", std::move(body)), std::move(katch)}));
        return next;
    }

    bool else_skip(int x, int k, int hi, int* y) const {
        if (x - 1 <= k || at(x - 1).op != Op::GOTO) return false;
        int t = target(x - 1);
        if (t <= x || t > hi) return false;
        if (!loops_.empty() && (t == loops_.back().exit || t == loops_.back().header)) return false;
        *y = t;
        return true;
    }

    int gen_if(int k, int hi, std::vector<Node>& out) {
        Val c = pop();
        coerce(c, "bool");
        need_empty("branch");
        Node cond = materialize(std::move(c));
        int x = target(k);
        if (x <= k || x > hi) decline("conditional jump leaves its region");
        int y = 0;
        bool skip = else_skip(x, k, hi, &y);
        auto block = [&](int lo, int hi2) { return mk(NodeKind::Block, "", parse(lo, hi2)); };
        if (at(k).op == Op::IFEQ) {
            if (skip) {
                auto t = block(k + 1, x - 1);
                auto f = block(x, y);
                out.push_back(mk(NodeKind::If, "", {std::move(cond), std::move(t), std::move(f)}));
                return y;
            }
            out.push_back(mk(NodeKind::If, "", {std::move(cond), block(k + 1, x)}));
            return x;
        }
        if (skip) {
            auto f = block(k + 1, x - 1);
            auto t = block(x, y);
            out.push_back(mk(NodeKind::If, "", {std::move(cond), std::move(t), std::move(f)}));
            return y;
        }
        out.push_back(mk(NodeKind::If, "", {negate(cond, cx_.st.simplify_negation), block(k + 1, x)}));
        return x;
    }

    std::optional<Node> simple_return(int t) {
        if (t >= static_cast<int>(m_.code.size())) return std::nullopt;
        const auto& a = at(t);
        if (a.op == Op::RETURN) return mk(NodeKind::Return);
        if (t + 1 >= static_cast<int>(m_.code.size())) return std::nullopt;
        const auto& b = at(t + 1);
        if (b.op != Op::IRETURN && b.op != Op::ARETURN) return std::nullopt;
        if (a.op != Op::LOAD && a.op != Op::ICONST && a.op != Op::LDC && a.op != Op::ACONST_NULL) return std::nullopt;
        std::vector<Node> tmp;
        step(t, tmp);
        step(t + 1, tmp);
        if (tmp.size() != 1) return std::nullopt;
        return tmp[0];
    }

    void gen_goto(int k, int hi, std::vector<Node>& out) {
        int t = target(k);
        if (!loops_.empty() && t == loops_.back().header) {
            if (k != loops_.back().tail) out.push_back(mk(NodeKind::Continue));
            return;
        }
        if (cx_.st.inline_return_blocks) {
            if (auto r = simple_return(t)) {
                out.push_back(std::move(*r));
                return;
            }
        }
        if (!loops_.empty() && t == loops_.back().exit) {
            out.push_back(mk(NodeKind::Break));
            return;
        }
        if (t == hi) return;
        decline("unstructured goto");
    }

    std::vector<Node> parse(int lo, int hi) {
        std::vector<Node> out;
        need_empty("region start");
        int i = lo;
        while (i < hi) {
            if (stack_.empty()) {
                if (!active_.count(i)) {
                    int e = loop_end(i, hi);
                    if (e >= 0) {
                        i = gen_loop(i, e, out);
                        continue;
                    }
                }
                if (auto* h = try_at(i, hi)) {
                    i = gen_try(*h, hi, out);
                    continue;
                }
            }
            const auto& in = at(i);
            if (in.op == Op::IFEQ || in.op == Op::IFNE) {
                i = gen_if(i, hi, out);
                continue;
            }
            if (in.op == Op::GOTO) {
                need_empty("jump");
                gen_goto(i, hi, out);
                ++i;
                continue;
            }
            step(i, out);
            ++i;
        }
        need_empty("region end");
        return out;
    }

    const ClassCtx& cx_;
    const vm::MethodBody& m_;
    const std::vector<std::string>& slot_types_;
    std::map<std::int32_t, int> idx_of_;
    std::vector<HandlerIdx> handlers_;
    std::set<std::size_t> used_;
    std::vector<Val> stack_;
    std::vector<Loop> loops_;
    std::set<int> active_;
    std::set<int> bool_evidence_;
    std::map<int, std::string> param_field_;
    std::set<int> catch_slots_;
};

}  // namespace

LiftResult lift_method(const ClassCtx& cx, const vm::MethodBody& m, const std::vector<std::string>& slot_types) {
    MethodLifter l(cx, m, slot_types);
    auto r = l.run();
    for (auto it = r.body.kids.begin(); it != r.body.kids.end(); ++it) {
        if (!can_complete(*it)) {
            r.body.kids.erase(it + 1, r.body.kids.end());
            break;
        }
    }
    return r;
}

}  // namespace mdlab::decomp::detail
