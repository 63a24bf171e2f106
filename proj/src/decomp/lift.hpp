#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "internal.hpp"

namespace mdlab::decomp::detail {

using lang::Node;
using lang::NodeKind;

Node mk(NodeKind k, std::string text = {}, std::vector<Node> kids = {});
Node type_node(std::string text);
/// `a.b.C` as a Name/FieldAccess chain.
Node dotted_expr(const std::string& text);

/// Locals are emitted as placeholder names and renamed once all passes ran.
Node local_ref(int slot);
bool is_local_ref(const Node& n, int* slot = nullptr);

const vm::BytecodeClass* find_class(const vm::BytecodeClass& top, std::string_view name);
bool is_builtin_type(std::string_view t);

struct ClassCtx {
    const vm::BytecodeClass& top;
    const vm::BytecodeClass& cls;
    const Style& st;

    std::string spell(const std::string& bytecode_type) const;
};

struct LiftResult {
    Node body;                           // Block
    std::set<int> bool_evidence;         // slots used as booleans
    std::map<int, std::string> param_field;  // slot -> field it is stored into
    std::set<int> catch_slots;
};

/// Lifts and structures a method body. `slot_types` gives the type assumed for
/// each local slot. Throws Decline.
LiftResult lift_method(const ClassCtx& cx, const vm::MethodBody& m, const std::vector<std::string>& slot_types);

bool can_complete(const Node& stmt);

}  // namespace mdlab::decomp::detail
