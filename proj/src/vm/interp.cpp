#include <chrono>
#include <limits>
#include <unordered_map>

#include "mdlab/vm.hpp"

namespace mdlab::vm {
namespace {

constexpr std::size_t kMaxDepth = 200'000;

const std::map<std::string, std::string, std::less<>>& builtin_supers() {
    static const std::map<std::string, std::string, std::less<>> supers = {
        {"Object", ""},
        {"str", "Object"},
        {"RuntimeException", "Object"},
        {"ArithmeticException", "RuntimeException"},
        {"NullPointerException", "RuntimeException"},
        {"ClassCastException", "RuntimeException"},
    };
    return supers;
}

struct Value {
    enum class Kind : std::uint8_t { Int, Null, Ref } kind = Kind::Int;
    std::int32_t i = 0;
    std::uint32_t ref = 0;

    static Value of_int(std::int32_t v) { return {Kind::Int, v, 0}; }
    static Value null() { return {Kind::Null, 0, 0}; }
    static Value of_ref(std::uint32_t r) { return {Kind::Ref, 0, r}; }
};

struct HeapObj {
    enum class Kind : std::uint8_t { Obj, Str, Builder } kind = Kind::Obj;
    std::string cls;   // runtime class for Obj
    std::string text;  // Str / Builder contents
    std::unordered_map<std::string, Value> fields;
};

struct Crash {
    std::string reason;
};

struct Decoded {
    std::unordered_map<std::int32_t, std::size_t> index;
    std::vector<std::int32_t> offsets;
};

struct Frame {
    const BytecodeClass* cls = nullptr;
    const MethodBody* method = nullptr;
    const Decoded* code = nullptr;
    std::vector<Value> locals;
    std::vector<Value> stack;
    std::size_t pc = 0;
    bool discard_result = false;
};

enum class InitState : std::uint8_t { none, running, done };

class Machine {
public:
    Machine(const Program& p, std::uint64_t fuel) : program_(p), fuel_(fuel) {}

    Observation run(const TestCase& test) {
        Observation obs;
        try {
            run_inner(test, obs);
        } catch (const Crash& c) {
            obs.outcome = "crash";
            obs.crash_reason = c.reason;
        } catch (const ToolError& e) {
            obs.outcome = "crash";
            obs.crash_reason = e.what();
        } catch (const std::exception& e) {
            obs.outcome = "crash";
            obs.crash_reason = std::string("malformed bytecode: ") + e.what();
        }
        obs.stdout_text = out_;
        obs.steps = steps_;
        return obs;
    }

private:
    struct Timeout {};

    // --- class model ---------------------------------------------------------

    std::string super_of(std::string_view cls) const {
        if (auto* bc = program_.find(cls)) return bc->super_name;
        auto it = builtin_supers().find(cls);
        if (it != builtin_supers().end()) return it->second;
        throw Crash{"unresolved class " + std::string(cls)};
    }

    const MethodBody* find_declared(std::string_view cls, std::string_view name,
                                    const std::vector<std::string>& params, const BytecodeClass** owner) const {
        auto* bc = program_.find(cls);
        if (!bc) return nullptr;
        auto* m = bc->find_method(name, params);
        if (m && owner) *owner = bc;
        return m;
    }

    const Decoded* decode(const MethodBody* m) {
        auto it = decoded_.find(m);
        if (it != decoded_.end()) return &it->second;
        Decoded d;
        d.offsets = m->offsets();
        for (std::size_t i = 0; i < d.offsets.size(); ++i) d.index[d.offsets[i]] = i;
        return &decoded_.emplace(m, std::move(d)).first->second;
    }

    // --- heap ------------------------------------------------------------------

    Value new_string(std::string s) {
        heap_.push_back({HeapObj::Kind::Str, "str", std::move(s), {}});
        return Value::of_ref(static_cast<std::uint32_t>(heap_.size() - 1));
    }

    Value new_object(const std::string& cls, HeapObj::Kind kind = HeapObj::Kind::Obj) {
        heap_.push_back({kind, cls, {}, {}});
        return Value::of_ref(static_cast<std::uint32_t>(heap_.size() - 1));
    }

    HeapObj& deref(const Value& v) {
        if (v.kind != Value::Kind::Ref) throw Crash{"dereference of non-reference value"};
        return heap_.at(v.ref);
    }

    std::string runtime_class(const Value& v) {
        auto& o = deref(v);
        if (o.kind == HeapObj::Kind::Str) return "str";
        if (o.kind == HeapObj::Kind::Builder) return "Builder";
        return o.cls;
    }

    std::string render(const Value& v, Tag tag) {
        switch (tag) {
            case Tag::Int:
                if (v.kind != Value::Kind::Int) throw Crash{"int expected"};
                return std::to_string(v.i);
            case Tag::Bool:
                if (v.kind != Value::Kind::Int) throw Crash{"bool expected"};
                return v.i ? "true" : "false";
            case Tag::Str:
            case Tag::Ref: {
                if (v.kind == Value::Kind::Null) return "null";
                if (v.kind == Value::Kind::Int) throw Crash{"reference expected"};
                auto& o = deref(v);
                if (o.kind != HeapObj::Kind::Obj) return o.text;
                return o.cls + "@obj";
            }
        }
        return "";
    }

    std::string render_typed(const Value& v, const std::string& type) {
        if (type == "int") return render(v, Tag::Int);
        if (type == "bool") return render(v, Tag::Bool);
        return render(v, Tag::Ref);
    }

    // --- exceptions --------------------------------------------------------------

    Value make_exception(const std::string& cls, std::string msg) {
        auto obj = new_object(cls);
        deref(obj).fields["RuntimeException#msg"] = msg.empty() ? Value::null() : new_string(std::move(msg));
        return obj;
    }

    // Unwinds to a matching handler. Returns false when the exception escapes.
    bool raise(Value exc) {
        if (exc.kind != Value::Kind::Ref) exc = make_exception("NullPointerException", "");
        auto cls = runtime_class(exc);
        while (!frames_.empty()) {
            auto& f = frames_.back();
            std::int32_t off = f.code->offsets[f.pc];
            for (const auto& h : f.method->handlers) {
                if (off < h.start || off >= h.end) continue;
                const auto& type = f.cls->pool.at(static_cast<std::size_t>(h.type)).text;
                if (!is_subclass(program_, cls, type)) continue;
                f.stack.clear();
                f.stack.push_back(exc);
                f.pc = f.code->index.at(h.target);
                return true;
            }
            frames_.pop_back();
        }
        uncaught_ = cls;
        return false;
    }

    // --- class initialization ---------------------------------------------------

    // Returns true when frames were pushed and the current instruction must be retried.
    bool ensure_init(const std::string& cls) {
        std::vector<const BytecodeClass*> chain;
        std::string c = cls;
        while (!c.empty()) {
            auto* bc = program_.find(c);
            if (!bc) break;
            if (init_[c] != InitState::none) break;
            chain.push_back(bc);
            c = bc->super_name;
        }
        if (chain.empty()) return false;
        bool pushed = false;
        for (auto* bc : chain) {
            init_[bc->name] = InitState::running;
            for (const auto& f : bc->fields) {
                if (!(f.flags & kStatic)) continue;
                Value v = (f.type == "int" || f.type == "bool") ? Value::of_int(0) : Value::null();
                if (f.constant >= 0) {
                    const auto& e = bc->pool.at(static_cast<std::size_t>(f.constant));
                    v = e.kind == PoolKind::Int ? Value::of_int(static_cast<std::int32_t>(std::stoll(e.text)))
                                                : new_string(e.text);
                }
                statics_[bc->name + "#" + f.name] = v;
            }
        }
        // Push so that the topmost superclass runs first.
        for (auto* bc : chain) {
            auto* clinit = bc->find_method("<clinit>", {});
            if (!clinit) {
                init_[bc->name] = InitState::done;
                continue;
            }
            push_frame(bc, clinit, {});
            frames_.back().discard_result = true;
            pushed = true;
        }
        return pushed;
    }

    std::string resolve_static_field(const std::string& owner, const std::string& name) {
        std::string c = owner;
        while (!c.empty()) {
            auto* bc = program_.find(c);
            if (!bc) break;
            auto* f = bc->find_field(name);
            if (f && (f->flags & kStatic)) return c + "#" + name;
            c = bc->super_name;
        }
        throw Crash{"unresolved static field " + owner + "#" + name};
    }

    std::string resolve_instance_field(const std::string& owner, const std::string& name) {
        std::string c = owner;
        while (!c.empty()) {
            if (auto* bc = program_.find(c)) {
                auto* f = bc->find_field(name);
                if (f && !(f->flags & kStatic)) return c + "#" + name;
                c = bc->super_name;
                continue;
            }
            if (name == "msg" && is_subclass(program_, c, "RuntimeException")) return "RuntimeException#msg";
            break;
        }
        throw Crash{"unresolved field " + owner + "#" + name};
    }

    // --- frames ----------------------------------------------------------------------

    void push_frame(const BytecodeClass* cls, const MethodBody* m, std::vector<Value> args) {
        if (frames_.size() >= kMaxDepth) throw Crash{"call stack overflow"};
        Frame f;
        f.cls = cls;
        f.method = m;
        f.code = decode(m);
        f.locals.assign(static_cast<std::size_t>(std::max(m->max_locals, static_cast<int>(args.size()))),
                        Value::of_int(0));
        for (std::size_t i = 0; i < args.size(); ++i) f.locals[i] = args[i];
        f.stack.reserve(static_cast<std::size_t>(m->max_stack));
        frames_.push_back(std::move(f));
    }

    // Native behaviour of builtin classes. Returns true if handled.
    bool call_builtin(const std::string& owner, const MethodRef& ref, std::vector<Value>& args, Value& result,
                      bool& has_result) {
        has_result = false;
        if (ref.name == "<init>") {
            if (owner == "Object" && ref.params.empty()) return true;
            if (is_subclass(program_, owner, "RuntimeException") && !program_.find(owner)) {
                if (ref.params.empty()) {
                    deref(args[0]).fields["RuntimeException#msg"] = Value::null();
                    return true;
                }
                if (ref.params.size() == 1 && ref.params[0] == "str") {
                    deref(args[0]).fields["RuntimeException#msg"] = args[1];
                    return true;
                }
            }
            return false;
        }
        if (ref.name == "getMessage" && ref.params.empty() && is_subclass(program_, owner, "RuntimeException")) {
            auto& o = deref(args[0]);
            auto it = o.fields.find("RuntimeException#msg");
            result = it == o.fields.end() ? Value::null() : it->second;
            has_result = true;
            return true;
        }
        return false;
    }

    void invoke(Op op, const MethodRef& ref, Frame& caller) {
        charge(kCallFuel);
        std::size_t argc = ref.params.size() + (op == Op::INVOKESTATIC ? 0 : 1);
        if (caller.stack.size() < argc) throw Crash{"operand stack underflow at call"};
        std::vector<Value> args(caller.stack.end() - static_cast<std::ptrdiff_t>(argc), caller.stack.end());
        caller.stack.resize(caller.stack.size() - argc);

        std::string start = ref.owner;
        if (op == Op::INVOKEVIRT) {
            if (args[0].kind != Value::Kind::Ref) {
                if (!raise(make_exception("NullPointerException", ""))) finished_ = true;
                return;
            }
            start = runtime_class(args[0]);
        } else if (op == Op::INVOKESPECIAL && args[0].kind != Value::Kind::Ref) {
            if (!raise(make_exception("NullPointerException", ""))) finished_ = true;
            return;
        }
        std::string c = start;
        while (!c.empty()) {
            const BytecodeClass* owner = nullptr;
            if (auto* m = find_declared(c, ref.name, ref.params, &owner)) {
                if (op == Op::INVOKESTATIC && !m->is_static()) throw Crash{"static call to instance method"};
                if (op != Op::INVOKESTATIC && m->is_static()) throw Crash{"instance call to static method"};
                push_frame(owner, m, std::move(args));
                return;
            }
            if (!program_.find(c)) {
                Value result;
                bool has_result = false;
                if (call_builtin(c, ref, args, result, has_result)) {
                    frames_.back().pc++;
                    if (has_result) frames_.back().stack.push_back(result);
                    return;
                }
                break;
            }
            if (op == Op::INVOKESPECIAL) break;
            c = super_of(c);
        }
        throw Crash{"unresolved method " + format_method_ref(ref)};
    }

    void charge(std::uint64_t n) {
        steps_ += n;
        if (steps_ > fuel_) throw Timeout{};
    }

    static std::int32_t wrap(std::int64_t v) {
        return static_cast<std::int32_t>(static_cast<std::uint32_t>(static_cast<std::uint64_t>(v)));
    }

    Value pop(Frame& f) {
        if (f.stack.empty()) throw Crash{"operand stack underflow"};
        Value v = f.stack.back();
        f.stack.pop_back();
        return v;
    }

    std::int32_t pop_int(Frame& f) {
        auto v = pop(f);
        if (v.kind != Value::Kind::Int) throw Crash{"int operand expected"};
        return v.i;
    }

    bool values_equal(const Value& a, const Value& b) {
        if (a.kind == Value::Kind::Int && b.kind == Value::Kind::Int) return a.i == b.i;
        if (a.kind == Value::Kind::Int || b.kind == Value::Kind::Int) throw Crash{"comparison of int with reference"};
        if (a.kind == Value::Kind::Null || b.kind == Value::Kind::Null) return a.kind == b.kind;
        auto& x = deref(a);
        auto& y = deref(b);
        if (x.kind == HeapObj::Kind::Str && y.kind == HeapObj::Kind::Str) return x.text == y.text;
        return a.ref == b.ref;
    }

    void run_inner(const TestCase& test, Observation& obs) {
        auto open = test.entry.find('(');
        auto head = test.entry.substr(0, open);
        auto dot = head.rfind('.');
        if (open == std::string::npos || dot == std::string::npos) throw Crash{"malformed entry " + test.entry};
        std::string owner = head.substr(0, dot);
        std::string name = head.substr(dot + 1);
        auto* bc = program_.find(owner);
        if (!bc) throw Crash{"entry class not found: " + owner};
        const MethodBody* entry = nullptr;
        for (const auto& m : bc->methods) {
            if (m.name != name || !m.is_static()) continue;
            std::string sig = owner + "." + name + "(";
            for (std::size_t i = 0; i < m.params.size(); ++i) sig += (i ? "," : "") + m.params[i];
            if (sig + ")" == test.entry) entry = &m;
        }
        if (!entry) throw Crash{"entry method not found: " + test.entry};
        if (entry->params.size() != test.args.size()) throw Crash{"argument count mismatch"};
        std::vector<Value> args;
        for (const auto& a : test.args) {
            switch (a.kind) {
                case Literal::Kind::Int: args.push_back(Value::of_int(a.i)); break;
                case Literal::Kind::Bool: args.push_back(Value::of_int(a.i ? 1 : 0)); break;
                case Literal::Kind::Str: args.push_back(new_string(a.s)); break;
                case Literal::Kind::Null: args.push_back(Value::null()); break;
            }
        }
        push_frame(bc, entry, std::move(args));
        frames_.back().discard_result = false;
        entry_ = entry;
        try {
            ensure_init(owner);
            loop();
        } catch (const Timeout&) {
            obs.outcome = "timeout";
            return;
        }
        if (!uncaught_.empty()) {
            obs.outcome = "throws:" + uncaught_;
            return;
        }
        if (has_return_) out_ += render_typed(return_value_, entry->ret) + "\n";
        obs.outcome = "normal";
    }

    void do_return(bool with_value) {
        Value v;
        if (with_value) v = pop(frames_.back());
        bool discard = frames_.back().discard_result;
        const MethodBody* m = frames_.back().method;
        const BytecodeClass* cls = frames_.back().cls;
        frames_.pop_back();
        if (m->name == "<clinit>") init_[cls->name] = InitState::done;
        if (frames_.empty()) {
            if (m == entry_ && with_value) {
                has_return_ = true;
                return_value_ = v;
            }
            finished_ = true;
            return;
        }
        if (discard) return;
        frames_.back().pc++;
        if (with_value) frames_.back().stack.push_back(v);
    }

    void loop() {
        while (!finished_ && !frames_.empty()) {
            Frame& f = frames_.back();
            if (f.pc >= f.method->code.size()) throw Crash{"fell off end of " + f.method->descriptor()};
            const Instr& in = f.method->code[f.pc];
            charge(1);
            const auto& pool = f.cls->pool;
            switch (in.op) {
                case Op::NOP: f.pc++; break;
                case Op::ICONST: f.stack.push_back(Value::of_int(in.a)); f.pc++; break;
                case Op::LDC: {
                    const auto& e = pool.at(static_cast<std::size_t>(in.a));
                    if (e.kind == PoolKind::Int)
                        f.stack.push_back(Value::of_int(static_cast<std::int32_t>(std::stoll(e.text))));
                    else
                        f.stack.push_back(new_string(e.text));
                    f.pc++;
                    break;
                }
                case Op::ACONST_NULL: f.stack.push_back(Value::null()); f.pc++; break;
                case Op::LOAD: f.stack.push_back(f.locals.at(static_cast<std::size_t>(in.a))); f.pc++; break;
                case Op::STORE: f.locals.at(static_cast<std::size_t>(in.a)) = pop(f); f.pc++; break;
                case Op::GETSTATIC:
                case Op::PUTSTATIC: {
                    auto ref = parse_field_ref(pool.at(static_cast<std::size_t>(in.a)).text);
                    auto key = resolve_static_field(ref.owner, ref.name);
                    auto cls = key.substr(0, key.find('#'));
                    if (init_[cls] == InitState::none && ensure_init(cls)) break;
                    if (in.op == Op::GETSTATIC) {
                        f.stack.push_back(statics_[key]);
                    } else {
                        statics_[key] = pop(f);
                    }
                    f.pc++;
                    break;
                }
                case Op::GETFIELD: {
                    auto ref = parse_field_ref(pool.at(static_cast<std::size_t>(in.a)).text);
                    auto obj = pop(f);
                    if (obj.kind != Value::Kind::Ref) {
                        if (!raise(make_exception("NullPointerException", ""))) finished_ = true;
                        break;
                    }
                    auto key = resolve_instance_field(ref.owner, ref.name);
                    auto& fields = deref(obj).fields;
                    auto it = fields.find(key);
                    Value v = it != fields.end() ? it->second
                              : (ref.type == "int" || ref.type == "bool") ? Value::of_int(0)
                                                                          : Value::null();
                    f.stack.push_back(v);
                    f.pc++;
                    break;
                }
                case Op::PUTFIELD: {
                    auto ref = parse_field_ref(pool.at(static_cast<std::size_t>(in.a)).text);
                    auto v = pop(f);
                    auto obj = pop(f);
                    if (obj.kind != Value::Kind::Ref) {
                        if (!raise(make_exception("NullPointerException", ""))) finished_ = true;
                        break;
                    }
                    deref(obj).fields[resolve_instance_field(ref.owner, ref.name)] = v;
                    f.pc++;
                    break;
                }
                case Op::ADD:
                case Op::SUB:
                case Op::MUL: {
                    std::int64_t b = pop_int(f), a = pop_int(f);
                    std::int64_t r = in.op == Op::ADD ? a + b : in.op == Op::SUB ? a - b : a * b;
                    f.stack.push_back(Value::of_int(wrap(r)));
                    f.pc++;
                    break;
                }
                case Op::DIV:
                case Op::REM: {
                    std::int32_t b = pop_int(f), a = pop_int(f);
                    if (b == 0) {
                        if (!raise(make_exception("ArithmeticException", "/ by zero"))) finished_ = true;
                        break;
                    }
                    std::int32_t r;
                    if (a == std::numeric_limits<std::int32_t>::min() && b == -1)
                        r = in.op == Op::DIV ? a : 0;
                    else
                        r = in.op == Op::DIV ? a / b : a % b;
                    f.stack.push_back(Value::of_int(r));
                    f.pc++;
                    break;
                }
                case Op::NEG: f.stack.push_back(Value::of_int(wrap(-static_cast<std::int64_t>(pop_int(f))))); f.pc++; break;
                case Op::NOT: f.stack.push_back(Value::of_int(pop_int(f) == 0 ? 1 : 0)); f.pc++; break;
                case Op::EQ:
                case Op::NE: {
                    auto b = pop(f), a = pop(f);
                    bool eq = values_equal(a, b);
                    f.stack.push_back(Value::of_int((in.op == Op::EQ) == eq ? 1 : 0));
                    f.pc++;
                    break;
                }
                case Op::LT:
                case Op::LE:
                case Op::GT:
                case Op::GE: {
                    std::int32_t b = pop_int(f), a = pop_int(f);
                    bool r = in.op == Op::LT ? a < b : in.op == Op::LE ? a <= b : in.op == Op::GT ? a > b : a >= b;
                    f.stack.push_back(Value::of_int(r ? 1 : 0));
                    f.pc++;
                    break;
                }
                case Op::CONCAT: {
                    auto b = pop(f), a = pop(f);
                    auto s = render(a, static_cast<Tag>(in.a)) + render(b, static_cast<Tag>(in.b));
                    f.stack.push_back(new_string(std::move(s)));
                    f.pc++;
                    break;
                }
                case Op::BUILDER_NEW: f.stack.push_back(new_object("Builder", HeapObj::Kind::Builder)); f.pc++; break;
                case Op::BUILDER_APPEND: {
                    auto v = pop(f);
                    auto b = pop(f);
                    auto text = render(v, static_cast<Tag>(in.a));
                    auto& o = deref(b);
                    if (o.kind != HeapObj::Kind::Builder) throw Crash{"builder expected"};
                    o.text += text;
                    f.stack.push_back(b);
                    f.pc++;
                    break;
                }
                case Op::BUILDER_STR: {
                    auto b = pop(f);
                    auto& o = deref(b);
                    if (o.kind != HeapObj::Kind::Builder) throw Crash{"builder expected"};
                    std::string copy = o.text;
                    f.stack.push_back(new_string(std::move(copy)));
                    f.pc++;
                    break;
                }
                case Op::IFEQ:
                case Op::IFNE: {
                    auto v = pop_int(f);
                    bool jump = in.op == Op::IFEQ ? v == 0 : v != 0;
                    f.pc = jump ? f.code->index.at(in.a) : f.pc + 1;
                    break;
                }
                case Op::GOTO: f.pc = f.code->index.at(in.a); break;
                case Op::INVOKESTATIC:
                case Op::INVOKEVIRT:
                case Op::INVOKESPECIAL: {
                    auto ref = parse_method_ref(pool.at(static_cast<std::size_t>(in.a)).text);
                    if (in.op == Op::INVOKESTATIC && init_[ref.owner] == InitState::none && ensure_init(ref.owner))
                        break;
                    invoke(in.op, ref, f);
                    break;
                }
                case Op::NEW: {
                    const auto& cls = pool.at(static_cast<std::size_t>(in.a)).text;
                    if (!program_.find(cls) && !builtin_supers().count(cls)) throw Crash{"unresolved class " + cls};
                    if (init_[cls] == InitState::none && ensure_init(cls)) break;
                    f.stack.push_back(new_object(cls));
                    f.pc++;
                    break;
                }
                case Op::CHECKCAST: {
                    const auto& type = pool.at(static_cast<std::size_t>(in.a)).text;
                    auto v = pop(f);
                    f.stack.push_back(v);
                    if (v.kind == Value::Kind::Ref && !is_subclass(program_, runtime_class(v), type)) {
                        if (!raise(make_exception("ClassCastException", runtime_class(v) + " cannot be cast to " + type)))
                            finished_ = true;
                        break;
                    }
                    if (v.kind == Value::Kind::Int) throw Crash{"cast of primitive value"};
                    f.pc++;
                    break;
                }
                case Op::DUP: {
                    auto v = pop(f);
                    f.stack.push_back(v);
                    f.stack.push_back(v);
                    f.pc++;
                    break;
                }
                case Op::POP: pop(f); f.pc++; break;
                case Op::THROW: {
                    auto v = pop(f);
                    if (!raise(v)) finished_ = true;
                    break;
                }
                case Op::RETURN: do_return(false); break;
                case Op::IRETURN:
                case Op::ARETURN: do_return(true); break;
                case Op::PRINT: {
                    auto v = pop(f);
                    out_ += render(v, static_cast<Tag>(in.a));
                    out_ += '\n';
                    f.pc++;
                    break;
                }
            }
        }
    }

    const Program& program_;
    std::uint64_t fuel_;
    std::uint64_t steps_ = 0;
    std::string out_;
    std::vector<HeapObj> heap_;
    std::vector<Frame> frames_;
    std::unordered_map<const MethodBody*, Decoded> decoded_;
    std::unordered_map<std::string, InitState> init_;
    std::unordered_map<std::string, Value> statics_;
    const MethodBody* entry_ = nullptr;
    bool finished_ = false;
    bool has_return_ = false;
    Value return_value_;
    std::string uncaught_;
};

void add_recursive(std::map<std::string, BytecodeClass, std::less<>>& into, const BytecodeClass& bc) {
    into[bc.name] = bc;
    for (const auto& n : bc.nested) add_recursive(into, n);
}

}  // namespace

Program::Program(const std::vector<BytecodeClass>& classes) {
    for (const auto& c : classes) add(c);
}

void Program::add(const BytecodeClass& bc) { add_recursive(classes_, bc); }

const BytecodeClass* Program::find(std::string_view name) const {
    auto it = classes_.find(name);
    return it == classes_.end() ? nullptr : &it->second;
}

bool is_builtin_class(std::string_view name) {
    return builtin_supers().count(name) > 0 || name == "Builder";
}

bool is_subclass(const Program& program, std::string_view sub, std::string_view super) {
    std::string c(sub);
    for (int guard = 0; guard < 256 && !c.empty(); ++guard) {
        if (c == super) return true;
        if (auto* bc = program.find(c)) {
            c = bc->super_name;
            continue;
        }
        auto it = builtin_supers().find(c);
        if (it == builtin_supers().end()) return false;
        c = it->second;
    }
    return false;
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::timeout: return "timeout";
        case Verdict::crash: return "crash";
    }
    return "?";
}

int TestReport::count(Verdict v) const {
    int n = 0;
    for (const auto& r : results) n += r.verdict == v;
    return n;
}

Observation run_entry(const Program& program, const TestCase& test, std::uint64_t fuel) {
    Machine m(program, fuel);
    return m.run(test);
}

TestResult execute(const Program& program, const TestCase& test, std::uint64_t fuel) {
    auto obs = run_entry(program, test, fuel);
    TestResult r{test.id, Verdict::pass, {}};
    if (obs.outcome == "timeout") {
        r.verdict = Verdict::timeout;
        r.detail = "fuel exhausted after " + std::to_string(obs.steps) + " steps";
    } else if (obs.outcome == "crash") {
        r.verdict = Verdict::crash;
        r.detail = obs.crash_reason;
    } else if (obs.stdout_text != test.expected_stdout || obs.outcome != test.expected_outcome) {
        r.verdict = Verdict::fail;
        r.detail = line_diff(test.expected_stdout, obs.stdout_text);
        if (obs.outcome != test.expected_outcome)
            r.detail += "outcome: expected " + test.expected_outcome + ", got " + obs.outcome + "\n";
    }
    return r;
}

TestReport run_tests(const Program& program, const std::vector<TestCase>& tests, std::uint64_t fuel) {
    auto t0 = std::chrono::steady_clock::now();
    TestReport rep;
    for (const auto& t : tests) rep.results.push_back(execute(program, t, fuel));
    rep.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace mdlab::vm
