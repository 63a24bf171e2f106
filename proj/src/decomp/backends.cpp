#include <chrono>

#include "lift.hpp"

namespace mdlab::decomp {

std::string run_external(const DecompilerSpec& spec, const vm::BytecodeClass& bc, std::string& note, bool& ok);

std::string_view to_string(FailureMode m) {
    switch (m) {
        case FailureMode::empty_output: return "empty-output";
        case FailureMode::syntactic_error: return "syntactic-error";
        case FailureMode::deceptive: return "deceptive";
    }
    return "?";
}

DecompilerSpec literalist() {
    return {"literalist",
            DecompilerSpec::Kind::builtin,
            {{"bool-local", FailureMode::syntactic_error, "boolean locals are declared with their erased int type"},
             {"try-in-loop", FailureMode::empty_output, "gives up on exception handlers nested in loops"},
             {"super-call-upcast", FailureMode::syntactic_error, "null arguments to overloaded super constructors lose their cast"}},
            {},
            60,
            false};
}

DecompilerSpec sugarer() {
    return {"sugarer",
            DecompilerSpec::Kind::builtin,
            {{"self-typed-wrapper", FailureMode::syntactic_error,
              "keeps the extra argument of wrappers whose parameter is not a synthetic class"},
             {"blank-static-final-in-clinit", FailureMode::syntactic_error,
              "qualifies assignments to blank static finals in the static initializer"},
             {"super-call-upcast", FailureMode::syntactic_error, "null arguments to overloaded super constructors lose their cast"}},
            {},
            60,
            false};
}

DecompilerSpec optimist() {
    return {"optimist",
            DecompilerSpec::Kind::builtin,
            {{"static-setter", FailureMode::deceptive, "names the parameter after the static field it stores, then writes the parameter"},
             {"overload-downcast-call", FailureMode::deceptive, "drops argument casts, which can select another overload"},
             {"foreign-class-ref", FailureMode::syntactic_error, "prints classes of other compilation units by simple name"},
             {"try-in-loop", FailureMode::empty_output, "cannot place a break that leaves a handler inside a loop"},
             {"super-call-upcast", FailureMode::syntactic_error, "null arguments to overloaded super constructors lose their cast"}},
            {},
            60,
            false};
}

std::vector<DecompilerSpec> builtin_backends() { return {literalist(), sugarer(), optimist()}; }

std::optional<DecompilerSpec> builtin_by_name(std::string_view name) {
    for (auto& s : builtin_backends())
        if (s.name == name) return s;
    return std::nullopt;
}

DecompilerSpec external(std::string name, std::string command_template, int timeout_secs) {
    DecompilerSpec s;
    s.name = std::move(name);
    s.kind = DecompilerSpec::Kind::external;
    s.command = std::move(command_template);
    s.ext_timeout_secs = timeout_secs;
    return s;
}

DecompOutput decompile(const DecompilerSpec& spec, const vm::BytecodeClass& bc) {
    auto t0 = std::chrono::steady_clock::now();
    DecompOutput out;
    if (spec.kind == DecompilerSpec::Kind::external) {
        bool ok = false;
        auto text = run_external(spec, bc, out.note, ok);
        if (ok) out.source = std::move(text);
    } else {
        detail::Style st;
        if (spec.name == "literalist") {
            st = detail::literalist_style();
            st.decline_try_in_loop = true;
        } else if (spec.name == "sugarer") {
            st = detail::sugarer_style();
        } else if (spec.name == "optimist") {
            st = detail::optimist_style();
        } else {
            throw ContractViolation("unknown builtin decompiler: " + spec.name);
        }
        try {
            out.source = lang::pretty_print(detail::decompile_class(bc, st, spec.throw_body_stub));
        } catch (const detail::Decline& d) {
            out.note = "declined: " + d.reason;
        } catch (const std::exception& e) {
            out.note = std::string("crashed: ") + e.what();
        }
    }
    out.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// --- shapes --------------------------------------------------------------------------

namespace {

using vm::Op;

template <class F>
bool any_class(const vm::BytecodeClass& c, F&& f) {
    if (f(c)) return true;
    for (const auto& n : c.nested)
        if (any_class(n, f)) return true;
    return false;
}

template <class F>
bool any_method(const vm::BytecodeClass& top, F&& f) {
    return any_class(top, [&](const vm::BytecodeClass& c) {
        for (const auto& m : c.methods)
            if (f(c, m)) return true;
        return false;
    });
}

std::string top_of(const std::string& name) { return name.substr(0, name.find('$')); }

bool foreign(const std::string& type, const std::string& top) {
    return !detail::is_builtin_type(type) && top_of(type) != top;
}

bool pool_owner_foreign(const vm::PoolEntry& p, const std::string& top) {
    switch (p.kind) {
        case vm::PoolKind::Type: return foreign(p.text, top);
        case vm::PoolKind::Field: {
            auto f = vm::parse_field_ref(p.text);
            return foreign(f.owner, top) || foreign(f.type, top);
        }
        case vm::PoolKind::Method: {
            auto m = vm::parse_method_ref(p.text);
            if (foreign(m.owner, top) || foreign(m.ret, top)) return true;
            for (const auto& t : m.params)
                if (foreign(t, top)) return true;
            return false;
        }
        default: return false;
    }
}

bool shape_impl(std::string_view shape, const vm::BytecodeClass& top) {
    if (shape == "bool-local") {
        return any_method(top, [&](const vm::BytecodeClass& c, const vm::MethodBody& m) {
            return !(m.flags & vm::kSynthetic) && !detail::bool_locals(top, c, m).empty();
        });
    }
    if (shape == "try-in-loop") {
        return any_method(top, [](const vm::BytecodeClass&, const vm::MethodBody& m) { return detail::has_try_in_loop(m); });
    }
    if (shape == "self-typed-wrapper") {
        return any_method(top, [](const vm::BytecodeClass& c, const vm::MethodBody& m) {
            return m.name == "<init>" && (m.flags & vm::kSynthetic) && !m.params.empty() && m.params.back() == c.name;
        });
    }
    if (shape == "blank-static-final-in-clinit") {
        return any_method(top, [](const vm::BytecodeClass& c, const vm::MethodBody& m) {
            if (m.name != "<clinit>") return false;
            for (const auto& in : m.code) {
                if (in.op != Op::PUTSTATIC) continue;
                auto f = vm::parse_field_ref(c.pool.at(static_cast<std::size_t>(in.a)).text);
                if (f.owner != c.name) continue;
                auto* fd = c.find_field(f.name);
                if (fd && (fd->flags & vm::kFinal) && fd->constant < 0) return true;
            }
            return false;
        });
    }
    if (shape == "static-setter") {
        return any_method(top, [](const vm::BytecodeClass& c, const vm::MethodBody& m) {
            if (!m.is_static()) return false;
            for (std::size_t k = 0; k + 1 < m.code.size(); ++k) {
                if (m.code[k].op != Op::LOAD || m.code[k].a >= static_cast<int>(m.params.size())) continue;
                if (m.code[k + 1].op != Op::PUTSTATIC) continue;
                auto f = vm::parse_field_ref(c.pool.at(static_cast<std::size_t>(m.code[k + 1].a)).text);
                if (f.owner == c.name) return true;
            }
            return false;
        });
    }
    if (shape == "overload-downcast-call") {
        return any_method(top, [&](const vm::BytecodeClass& c, const vm::MethodBody& m) {
            for (std::size_t k = 0; k + 1 < m.code.size(); ++k) {
                if (m.code[k].op != Op::CHECKCAST) continue;
                auto op = m.code[k + 1].op;
                if (op != Op::INVOKESTATIC && op != Op::INVOKEVIRT) continue;
                auto ref = vm::parse_method_ref(c.pool.at(static_cast<std::size_t>(m.code[k + 1].a)).text);
                auto* owner = detail::find_class(top, ref.owner);
                if (!owner) continue;
                for (const auto& other : owner->methods)
                    if (other.name == ref.name && other.params.size() == ref.params.size() && other.params != ref.params)
                        return true;
            }
            return false;
        });
    }
    if (shape == "foreign-class-ref") {
        const std::string t = top.name;
        return any_class(top, [&](const vm::BytecodeClass& c) {
            if (foreign(c.super_name, t)) return true;
            for (const auto& p : c.pool)
                if (pool_owner_foreign(p, t)) return true;
            for (const auto& f : c.fields)
                if (foreign(f.type, t)) return true;
            for (const auto& m : c.methods) {
                if (foreign(m.ret, t)) return true;
                for (const auto& p : m.params)
                    if (foreign(p, t)) return true;
                for (const auto& l : m.locals)
                    if (foreign(l.type, t)) return true;
            }
            return false;
        });
    }
    if (shape == "super-call-upcast") {
        return any_method(top, [&](const vm::BytecodeClass& c, const vm::MethodBody& m) {
            if (m.name != "<init>" || m.code.empty() || m.code[0].op != Op::LOAD || m.code[0].a != 0) return false;
            bool null_arg = false;
            for (std::size_t k = 1; k < m.code.size(); ++k) {
                const auto& in = m.code[k];
                if (in.op == Op::ACONST_NULL) null_arg = true;
                if (in.op != Op::INVOKESPECIAL) continue;
                auto ref = vm::parse_method_ref(c.pool.at(static_cast<std::size_t>(in.a)).text);
                if (ref.name != "<init>" || ref.owner != c.super_name) return false;
                if (!null_arg) return false;
                auto* super = detail::find_class(top, ref.owner);
                if (!super) return false;
                int same_arity = 0;
                for (const auto& sm : super->methods)
                    if (sm.name == "<init>" && !(sm.flags & vm::kSynthetic) && sm.params.size() == ref.params.size()) ++same_arity;
                return same_arity >= 2;
            }
            return false;
        });
    }
    throw ContractViolation("unknown shape: " + std::string(shape));
}

}  // namespace

const std::vector<std::string>& all_shapes() {
    static const std::vector<std::string> shapes{"bool-local",        "try-in-loop",          "self-typed-wrapper",
                                                 "blank-static-final-in-clinit", "static-setter", "overload-downcast-call",
                                                 "foreign-class-ref", "super-call-upcast"};
    return shapes;
}

bool shape_present(std::string_view shape, const vm::BytecodeClass& bc) { return shape_impl(shape, bc); }

std::vector<std::string> shapes_of(const vm::BytecodeClass& bc) {
    std::vector<std::string> out;
    for (const auto& s : all_shapes())
        if (shape_present(s, bc)) out.push_back(s);
    return out;
}

std::vector<FailureEntry> predicted_failures(const DecompilerSpec& spec, const vm::BytecodeClass& bc) {
    std::vector<FailureEntry> out;
    for (const auto& f : spec.failure_profile)
        if (shape_present(f.shape, bc)) out.push_back(f);
    return out;
}

}  // namespace mdlab::decomp
