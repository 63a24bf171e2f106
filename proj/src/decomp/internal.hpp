#pragma once

#include <set>
#include <string>

#include "mdlab/decomp.hpp"
#include "mdlab/lang.hpp"

namespace mdlab::decomp::detail {

enum class LocalNames { slot, debug, renamed };
enum class TypeNames { qualified, simple_own, simple_all };
enum class WrapperArg { by_method_flag, by_param_class_flag };

struct Style {
    LocalNames names = LocalNames::slot;
    TypeNames types = TypeNames::qualified;
    WrapperArg wrapper = WrapperArg::by_method_flag;
    bool erased_local_types = true;  // declare locals with their VAR type
    bool hoist_locals = true;
    bool reverse_concat = false;
    bool bare_own_fields = true;        // `f` instead of `this.f`
    bool bare_own_statics = true;       // `X` instead of `C.X`
    bool explicit_this_calls = true;    // `this.m()` instead of `m()`
    bool explicit_super = true;         // print `super();`
    bool keep_trailing_return = true;
    bool drop_tail_continue = false;
    bool inline_return_blocks = false;
    bool simplify_negation = false;
    bool fold_return_temps = false;
    bool insert_arg_casts = true;
    bool drop_arg_casts = false;
    bool decline_try_in_loop = false;
};

Style literalist_style();
Style sugarer_style();
Style optimist_style();

struct Decline {
    std::string reason;
};

/// Throws Decline when the class cannot be handled and `stub` is false.
lang::ClassAst decompile_class(const vm::BytecodeClass& top, const Style& style, bool stub);

/// Non-parameter local slots that are used as booleans despite their erased type.
std::set<int> bool_locals(const vm::BytecodeClass& top, const vm::BytecodeClass& owner, const vm::MethodBody& m);

bool has_try_in_loop(const vm::MethodBody& m);

}  // namespace mdlab::decomp::detail
