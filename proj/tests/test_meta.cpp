#include "helpers.hpp"
#include "mdlab/meta.hpp"

using namespace mdlab;
using compiler::CompilerVariant;

namespace {

const char* kLib = R"(class q.Lib {
    int get() { return 21; }
}
)";

// literalist fails on h, sugarer on the static block, optimist on u
const char* kDisjoint = R"(class p.D {
    static final int X;
    static { X = 5; }
    static int h(int x) { bool b = x > 3; if (b) { return 1; } return 0; }
    static int u(q.Lib l) { return l.get() + X; }
    static int probe(int x) { return h(x) + u(new q.Lib()); }
}
)";

const char* kSame = R"(class p.S {
    class Base {
        int k;
        Base(str s) { k = 1; }
        Base(p.S o) { k = 2; }
    }
    class Sub extends Base {
        Sub() { super((str) null); }
    }
    static int probe() { return new Sub().k; }
}
)";

const char* kLine = R"(class p.Line {
    static int calc(int a, int b) { int c = a * 2; return c + b; }
}
)";

// under B: sugarer fails on make and the static block, optimist on make and u,
// literalist on h
const char* kThree = R"(class p.T {
    static final int X;
    static { X = 5; }
    class Box {
        int v;
        private Box(int v) { this.v = v; }
    }
    static int make(q.Lib l) { return new Box(X).v + l.get(); }
    static int h(int x) { bool b = x > 3; if (b) { return 1; } return 0; }
    static int u(q.Lib l) { return l.get(); }
}
)";

struct Fixture {
    std::vector<vm::BytecodeClass> bcs;
    compiler::ClassEnv env;
    Fixture(const char* src, CompilerVariant v) : bcs(th::compile_ok({src, kLib}, v)), env(compiler::env_from_bytecode(bcs)) {}
};

std::vector<decomp::DecompilerSpec> order(std::initializer_list<const char*> names) {
    std::vector<decomp::DecompilerSpec> out;
    for (auto n : names) out.push_back(*decomp::builtin_by_name(n));
    return out;
}

std::string member_text(const std::string& src, const std::string& name) {
    auto ast = th::parse_ok(src);
    for (const auto& m : ast.members)
        if (m.decl.text == name) return src.substr(m.span().begin, m.span().end - m.span().begin);
    return {};
}

}  // namespace

TEST_CASE("fragment store keeps the first writer and refuses errored members") {
    meta::FragmentStore store;
    lang::TypeMember a, b;
    a.origin = "one";
    b.origin = "two";
    lang::MemberSignature sig{"p.C#f"};
    CHECK(store.offer(sig, a));
    CHECK_FALSE(store.offer(sig, b));
    CHECK(store.find(sig)->origin == "one");
    b.errored = true;
    CHECK_THROWS_AS(store.offer({"p.C#g"}, b), ContractViolation);
    CHECK(store.size() == 1);
}

TEST_CASE("completable and complete") {
    Fixture f(kDisjoint, CompilerVariant::A());
    auto lit = decomp::decompile(decomp::literalist(), f.bcs[0]);
    auto opt = decomp::decompile(decomp::optimist(), f.bcs[0]);
    auto sl = meta::make_solution(*lit.source, "literalist", CompilerVariant::A(), &f.env);
    auto so = meta::make_solution(*opt.source, "optimist", CompilerVariant::A(), &f.env);
    REQUIRE(sl);
    REQUIRE(so);
    meta::FragmentStore empty;
    CHECK_FALSE(meta::completable(*sl, empty));

    int errored = 0;
    for (const auto& m : sl->ast.members) errored += m.errored;
    CHECK(errored == 1);

    meta::FragmentStore store;
    for (const auto& m : so->ast.members)
        if (!m.errored) store.offer(lang::member_signature(m, so->ast.qualified_name), m);
    REQUIRE(meta::completable(*sl, store));
    meta::Provenance prov;
    auto merged = meta::complete(*sl, store, &prov);
    CHECK(prov.at("p.D.h(int)") == "optimist");
    CHECK(prov.at("p.D.probe(int)") == "literalist");
    CHECK(merged.members.size() == sl->ast.members.size());
    for (std::size_t i = 0; i < merged.members.size(); ++i)
        CHECK(merged.members[i].decl.text == sl->ast.members[i].decl.text);

    // the merged source differs from the base only inside the transplanted member
    auto base_text = lang::pretty_print(sl->ast);
    auto merged_text = lang::pretty_print(merged);
    auto hb = member_text(base_text, "h"), hm = member_text(merged_text, "h");
    CHECK(hb != hm);
    auto strip = merged_text;
    strip.replace(strip.find(hm), hm.size(), hb);
    CHECK(strip == base_text);

    auto clean = meta::make_solution(lang::pretty_print(merged), "x", CompilerVariant::A(), &f.env);
    CHECK(meta::completable(*clean, empty));
    CHECK(lang::pretty_print(meta::complete(*clean, empty)) == lang::pretty_print(merged));
}

TEST_CASE("meta: first backend suffices") {
    Fixture f(kLine, CompilerVariant::A());
    auto r = meta::meta_decompile(f.bcs[0], order({"literalist", "sugarer", "optimist"}), CompilerVariant::A(), &f.env);
    CHECK(r.success);
    CHECK(r.decompilers_used == 1);
    CHECK(r.invoked == std::vector<std::string>{"literalist"});
}

TEST_CASE("meta: disjoint failures merge into a passing class") {
    for (auto v : {CompilerVariant::A(), CompilerVariant::B()}) {
        CAPTURE(v.id);
        Fixture f(kDisjoint, v);
        for (const auto& d : decomp::builtin_backends()) {
            auto out = decomp::decompile(d, f.bcs[0]);
            REQUIRE(out.source);
            CHECK_FALSE(compiler::recompile_check(*out.source, v, &f.env).pass);
        }
        auto r = meta::meta_decompile(f.bcs[0], order({"literalist", "sugarer", "optimist"}), v, &f.env);
        REQUIRE(r.success);
        CHECK(r.decompilers_used == 2);
        CHECK(r.invoked.size() == 2);
        auto rc = compiler::recompile_check(r.source, v, &f.env);
        REQUIRE(rc.pass);
        std::vector<vm::BytecodeClass> prog{*rc.bc, f.bcs[1]};
        CHECK(th::run(prog, "p.D.probe(int)", {th::I(9)}).stdout_text == "27\n");
        CHECK(th::run(prog, "p.D.probe(int)", {th::I(1)}).stdout_text == "26\n");
    }
}

TEST_CASE("meta: all backends failing on one member is a failure") {
    Fixture f(kSame, CompilerVariant::A());
    auto r = meta::meta_decompile(f.bcs[0], order({"literalist", "sugarer", "optimist"}), CompilerVariant::A(), &f.env);
    CHECK_FALSE(r.success);
    CHECK(r.invoked.size() == 3);
    CHECK(r.provenance.empty());
}

TEST_CASE("meta: two errored members filled by two donors") {
    Fixture f(kThree, CompilerVariant::B());
    auto r = meta::meta_decompile(f.bcs[0], order({"sugarer", "optimist", "literalist"}), CompilerVariant::B(), &f.env);
    REQUIRE(r.success);
    CHECK(r.decompilers_used == 3);
    CHECK(r.provenance.at("p.T.make(q.Lib)") == "literalist");
    CHECK(r.provenance.at("p.T.<clinit#0>") == "optimist");
    CHECK(r.provenance.at("p.T.h(int)") == "sugarer");
}

TEST_CASE("meta: unparseable or empty output contributes nothing") {
    Fixture f(kLine, CompilerVariant::A());
    auto junk = decomp::external("junk", "printf 'class {'", 5);
    auto none = decomp::external("none", "exit 2", 5);
    auto r = meta::meta_decompile(f.bcs[0], {junk, none}, CompilerVariant::A(), &f.env);
    CHECK_FALSE(r.success);
    auto r2 = meta::meta_decompile(f.bcs[0], {junk, decomp::sugarer()}, CompilerVariant::A(), &f.env);
    CHECK(r2.success);
    CHECK(r2.decompilers_used == 1);
    CHECK_THROWS_AS(meta::meta_decompile(f.bcs[0], {}, CompilerVariant::A(), &f.env), ContractViolation);
}

TEST_CASE("meta: a rejecting oracle removes completable solutions") {
    Fixture f(kLine, CompilerVariant::A());
    int calls = 0;
    auto r = meta::meta_decompile(f.bcs[0], order({"literalist", "sugarer"}), CompilerVariant::A(), &f.env,
                                  [&](const std::string&) { ++calls; return false; });
    CHECK_FALSE(r.success);
    CHECK(calls == 2);
}
