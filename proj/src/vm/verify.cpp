#include <algorithm>
#include <deque>
#include <unordered_map>

#include "mdlab/vm.hpp"

namespace mdlab::vm {
namespace {

struct Effect {
    int pops = 0;
    int pushes = 0;
};

bool pool_kind_ok(Op op, PoolKind k) {
    switch (op) {
        case Op::LDC: return k == PoolKind::Int || k == PoolKind::Str;
        case Op::GETSTATIC:
        case Op::PUTSTATIC:
        case Op::GETFIELD:
        case Op::PUTFIELD: return k == PoolKind::Field;
        case Op::INVOKESTATIC:
        case Op::INVOKEVIRT:
        case Op::INVOKESPECIAL: return k == PoolKind::Method;
        case Op::NEW:
        case Op::CHECKCAST: return k == PoolKind::Type;
        default: return false;
    }
}

Effect effect(const BytecodeClass& bc, const Instr& in) {
    switch (in.op) {
        case Op::NOP:
        case Op::GOTO:
        case Op::RETURN: return {0, 0};
        case Op::ICONST:
        case Op::LDC:
        case Op::ACONST_NULL:
        case Op::LOAD:
        case Op::GETSTATIC:
        case Op::BUILDER_NEW:
        case Op::NEW: return {0, 1};
        case Op::STORE:
        case Op::PUTSTATIC:
        case Op::IFEQ:
        case Op::IFNE:
        case Op::POP:
        case Op::THROW:
        case Op::IRETURN:
        case Op::ARETURN:
        case Op::PRINT: return {1, 0};
        case Op::GETFIELD:
        case Op::NEG:
        case Op::NOT:
        case Op::BUILDER_STR:
        case Op::CHECKCAST: return {1, 1};
        case Op::PUTFIELD: return {2, 0};
        case Op::ADD:
        case Op::SUB:
        case Op::MUL:
        case Op::DIV:
        case Op::REM:
        case Op::EQ:
        case Op::NE:
        case Op::LT:
        case Op::LE:
        case Op::GT:
        case Op::GE:
        case Op::CONCAT:
        case Op::BUILDER_APPEND: return {2, 1};
        case Op::DUP: return {1, 2};
        case Op::INVOKESTATIC:
        case Op::INVOKEVIRT:
        case Op::INVOKESPECIAL: {
            auto ref = parse_method_ref(bc.pool.at(static_cast<std::size_t>(in.a)).text);
            int pops = static_cast<int>(ref.params.size()) + (in.op == Op::INVOKESTATIC ? 0 : 1);
            return {pops, ref.ret == "void" ? 0 : 1};
        }
    }
    return {0, 0};
}

void verify_method(const BytecodeClass& bc, const MethodBody& m, Diagnostics& out) {
    auto where = [&](std::int32_t off) { return m.descriptor() + " @" + std::to_string(off) + ": "; };
    auto report = [&](std::int32_t off, const std::string& msg) {
        out.push_back({where(off) + msg, Span{static_cast<std::uint32_t>(off), static_cast<std::uint32_t>(off)},
                       Severity::error});
    };
    if (m.code.empty()) {
        report(0, "empty method body");
        return;
    }
    auto offs = m.offsets();
    std::unordered_map<std::int32_t, std::size_t> index;
    for (std::size_t i = 0; i < offs.size(); ++i) index[offs[i]] = i;
    const std::int32_t code_end = offs.back() + encoded_size(m.code.back().op);
    int declared = static_cast<int>(m.params.size()) + (m.is_static() ? 0 : 1);
    if (m.max_locals < declared) report(0, "max_locals smaller than parameter count");
    if (static_cast<int>(m.locals.size()) != m.max_locals) report(0, "local variable table size differs from max_locals");

    bool operands_ok = true;
    for (std::size_t i = 0; i < m.code.size(); ++i) {
        const auto& in = m.code[i];
        switch (operand_kind(in.op)) {
            case OperandKind::pool:
                if (in.a < 0 || static_cast<std::size_t>(in.a) >= bc.pool.size()) {
                    report(offs[i], "pool index #" + std::to_string(in.a) + " out of bounds");
                    operands_ok = false;
                } else if (!pool_kind_ok(in.op, bc.pool[static_cast<std::size_t>(in.a)].kind)) {
                    report(offs[i], "pool entry #" + std::to_string(in.a) + " has wrong kind for " +
                                        std::string(to_string(in.op)));
                    operands_ok = false;
                } else if (in.op == Op::INVOKESTATIC || in.op == Op::INVOKEVIRT || in.op == Op::INVOKESPECIAL) {
                    try {
                        parse_method_ref(bc.pool[static_cast<std::size_t>(in.a)].text);
                    } catch (const ToolError& e) {
                        report(offs[i], e.what());
                        operands_ok = false;
                    }
                }
                break;
            case OperandKind::local:
                if (in.a < 0 || in.a >= m.max_locals) report(offs[i], "local " + std::to_string(in.a) + " out of range");
                break;
            case OperandKind::branch:
                if (!index.count(in.a)) {
                    report(offs[i], "jump target " + std::to_string(in.a) + " is not an instruction boundary");
                    operands_ok = false;
                }
                break;
            case OperandKind::imm:
                if (in.a < -32768 || in.a > 32767) report(offs[i], "immediate out of 16-bit range");
                break;
            case OperandKind::tag:
            case OperandKind::tag2:
                if (in.a < 0 || in.a > 3 || in.b < 0 || in.b > 3) report(offs[i], "bad tag operand");
                break;
            case OperandKind::none: break;
        }
        if (m.ret == "void" && (in.op == Op::IRETURN || in.op == Op::ARETURN))
            report(offs[i], "value return from void method");
        if (m.ret != "void" && in.op == Op::RETURN) report(offs[i], "void return from non-void method");
    }
    for (const auto& h : m.handlers) {
        bool ok_start = index.count(h.start) > 0;
        bool ok_end = index.count(h.end) > 0 || h.end == code_end;
        if (!ok_start || !ok_end || h.start >= h.end) {
            report(h.start, "bad handler range");
            operands_ok = false;
        }
        if (!index.count(h.target)) {
            report(h.target, "handler target is not an instruction boundary");
            operands_ok = false;
        }
        if (h.type < 0 || static_cast<std::size_t>(h.type) >= bc.pool.size() ||
            bc.pool[static_cast<std::size_t>(h.type)].kind != PoolKind::Type)
            report(h.start, "handler type is not a type constant");
    }
    if (!operands_ok) return;

    // Stack depth dataflow.
    std::vector<int> depth(m.code.size(), -1);
    std::deque<std::size_t> work;
    auto flow = [&](std::size_t to, int d, std::int32_t from_off) {
        if (depth[to] == -1) {
            depth[to] = d;
            work.push_back(to);
        } else if (depth[to] != d) {
            report(from_off, "inconsistent stack depth at join " + std::to_string(offs[to]) + " (" +
                                 std::to_string(depth[to]) + " vs " + std::to_string(d) + ")");
        }
    };
    flow(0, 0, 0);
    for (const auto& h : m.handlers) flow(index.at(h.target), 1, h.target);
    while (!work.empty()) {
        auto i = work.front();
        work.pop_front();
        const auto& in = m.code[i];
        auto e = effect(bc, in);
        int d = depth[i];
        if (d < e.pops) {
            report(offs[i], "stack underflow");
            continue;
        }
        int nd = d - e.pops + e.pushes;
        if (nd > m.max_stack) report(offs[i], "stack exceeds max_stack");
        if (is_branch(in.op)) flow(index.at(in.a), nd, offs[i]);
        if (!is_terminator(in.op)) {
            if (i + 1 >= m.code.size()) {
                report(offs[i], "execution falls off the end of the code");
                continue;
            }
            flow(i + 1, nd, offs[i]);
        }
    }
}

void verify_class(const BytecodeClass& bc, Diagnostics& out) {
    for (const auto& f : bc.fields) {
        if (f.constant >= 0) {
            if (static_cast<std::size_t>(f.constant) >= bc.pool.size()) {
                out.push_back({bc.name + "#" + f.name + ": constant index out of bounds", {}, Severity::error});
            } else {
                auto k = bc.pool[static_cast<std::size_t>(f.constant)].kind;
                if (k != PoolKind::Int && k != PoolKind::Str)
                    out.push_back({bc.name + "#" + f.name + ": constant has wrong kind", {}, Severity::error});
            }
        }
    }
    for (const auto& m : bc.methods) verify_method(bc, m, out);
    for (const auto& n : bc.nested) verify_class(n, out);
}

}  // namespace

int compute_max_stack(const BytecodeClass& bc, const MethodBody& m) {
    if (m.code.empty()) return 0;
    auto offs = m.offsets();
    std::unordered_map<std::int32_t, std::size_t> index;
    for (std::size_t i = 0; i < offs.size(); ++i) index[offs[i]] = i;
    std::vector<int> depth(m.code.size(), -1);
    std::deque<std::size_t> work;
    int best = 0;
    bool ok = true;
    auto flow = [&](std::size_t to, int d) {
        if (depth[to] == -1) {
            depth[to] = d;
            work.push_back(to);
        } else if (depth[to] != d) {
            ok = false;
        }
    };
    flow(0, 0);
    for (const auto& h : m.handlers)
        if (index.count(h.target)) flow(index.at(h.target), 1);
    while (!work.empty()) {
        auto i = work.front();
        work.pop_front();
        const auto& in = m.code[i];
        auto e = effect(bc, in);
        int d = depth[i];
        best = std::max(best, d);
        if (d < e.pops) return -1;
        int nd = d - e.pops + e.pushes;
        best = std::max(best, nd);
        if (is_branch(in.op)) {
            if (!index.count(in.a)) return -1;
            flow(index.at(in.a), nd);
        }
        if (!is_terminator(in.op) && i + 1 < m.code.size()) flow(i + 1, nd);
    }
    return ok ? best : -1;
}

Diagnostics verify(const BytecodeClass& bc) {
    Diagnostics out;
    verify_class(bc, out);
    return out;
}

}  // namespace mdlab::vm
