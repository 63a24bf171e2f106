#pragma once

#include <string>
#include <vector>

#include "doctest.h"
#include "mdlab/compiler.hpp"
#include "mdlab/lang.hpp"
#include "mdlab/vm.hpp"

namespace th {

inline mdlab::lang::ClassAst parse_ok(const std::string& src) {
    auto r = mdlab::lang::parse(src);
    if (!r.ok()) FAIL("parse failed: " << (r.diagnostics.empty() ? "" : r.diagnostics[0].message));
    return *r.ast;
}

inline std::vector<mdlab::vm::BytecodeClass> compile_ok(const std::vector<std::string>& srcs,
                                                        const mdlab::compiler::CompilerVariant& v) {
    std::vector<mdlab::lang::ClassAst> asts;
    for (const auto& s : srcs) asts.push_back(parse_ok(s));
    auto rs = mdlab::compiler::compile_all(asts, v);
    std::vector<mdlab::vm::BytecodeClass> out;
    for (auto& r : rs) {
        if (!r.ok()) FAIL("compile failed: " << (r.diagnostics.empty() ? "" : r.diagnostics[0].message));
        out.push_back(*r.bc);
    }
    return out;
}

inline mdlab::vm::Observation run(const std::vector<mdlab::vm::BytecodeClass>& classes, const std::string& entry,
                                  std::vector<mdlab::vm::Literal> args = {}) {
    mdlab::vm::Program p(classes);
    mdlab::vm::TestCase t;
    t.id = "t";
    t.entry = entry;
    t.args = std::move(args);
    return mdlab::vm::run_entry(p, t, mdlab::vm::kDefaultFuel);
}

inline mdlab::vm::Literal I(int v) {
    mdlab::vm::Literal l;
    l.kind = mdlab::vm::Literal::Kind::Int;
    l.i = v;
    return l;
}

inline mdlab::vm::Literal S(std::string v) {
    mdlab::vm::Literal l;
    l.kind = mdlab::vm::Literal::Kind::Str;
    l.s = std::move(v);
    return l;
}

}  // namespace th
