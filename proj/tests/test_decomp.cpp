#include "helpers.hpp"
#include "mdlab/decomp.hpp"

using namespace mdlab;
using compiler::CompilerVariant;

namespace {

const char* kLine = R"(class p.Line {
    static int f;
    int g;
    static int calc(int a, int b) { int c = a * 2; int d = c + b; return d - 1; }
    void set(int v) { this.g = v + f; }
    static str msg(str s, int n) { return s + ":" + n; }
}
)";

const char* kBoolLocal = R"(class p.BL {
    static int h(int x) { bool b = x > 3; if (b) { return 1; } return 0; }
}
)";

const char* kSuperNull = R"(class p.S {
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

const char* kBlankFinal = R"(class p.F {
    static final int X;
    static { X = 5; }
    static int get() { return X; }
}
)";

const char* kSetter = R"(class p.St {
    static int count;
    static void setCount(int c) { count = c; }
    static int probe(int v) { setCount(v); return count; }
}
)";

const char* kOverload = R"(class p.Ov {
    static int k(Object o) { if (o == null) { return 0; } return k((str) o); }
    static int k(str s) { return 2; }
    static int probe(str s) { return k((Object) s); }
}
)";

const char* kWrapper = R"(class p.W {
    class Box {
        int v;
        private Box(int v) { this.v = v; }
    }
    static int make(int x) { return new Box(x).v; }
}
)";

const char* kLoopTry = R"(class p.Foo {
    static int foo(int i) {
        while (true) {
            try {
                if (i == 10) { throw new RuntimeException("ten"); }
                i = i + 1;
                continue;
            } catch (RuntimeException e) {
                break;
            }
        }
        return i;
    }
}
)";

const char* kUser = R"(class p.User {
    static int twice(q.Lib l) { return l.get() * 2; }
    static int probe() { return twice(new q.Lib()); }
}
)";

const char* kLib = R"(class q.Lib {
    int get() { return 21; }
}
)";

std::string decompile_ok(const decomp::DecompilerSpec& d, const vm::BytecodeClass& bc) {
    auto out = decomp::decompile(d, bc);
    if (!out.source) FAIL(d.name << " produced no output: " << out.note);
    return *out.source;
}

compiler::RecompileResult recompile(const std::string& src, const CompilerVariant& v,
                                    const std::vector<vm::BytecodeClass>& classpath = {}) {
    auto env = compiler::env_from_bytecode(classpath);
    return compiler::recompile_check(src, v, &env);
}

std::string probe(const vm::BytecodeClass& bc, const std::string& entry, std::vector<vm::Literal> args = {}) {
    auto o = th::run({bc}, entry, std::move(args));
    return o.outcome + "|" + o.stdout_text;
}

bool mentions(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

TEST_CASE("literalist round-trips straight-line code to identical bytecode") {
    for (auto v : {CompilerVariant::A(), CompilerVariant::B()}) {
        CAPTURE(v.id);
        auto bc = th::compile_ok({kLine}, v)[0];
        auto src = decompile_ok(decomp::literalist(), bc);
        CHECK(src.find("r0") != std::string::npos);
        auto rc = recompile(src, v);
        REQUIRE(rc.pass);
        auto diff = vm::bytecode_equal(vm::canonicalize_pool(bc), vm::canonicalize_pool(*rc.bc));
        CHECK_MESSAGE(diff.equal, diff.diff);
    }
}

TEST_CASE("all backends recompile simple code under both variants") {
    for (auto v : {CompilerVariant::A(), CompilerVariant::B()})
        for (const auto& d : decomp::builtin_backends()) {
            CAPTURE(v.id);
            CAPTURE(d.name);
            auto bc = th::compile_ok({kLine}, v)[0];
            auto rc = recompile(decompile_ok(d, bc), v);
            CHECK(rc.pass);
        }
}

TEST_CASE("literalist: boolean locals become int locals") {
    auto bc = th::compile_ok({kBoolLocal}, CompilerVariant::A())[0];
    CHECK(decomp::shape_present("bool-local", bc));
    CHECK_FALSE(recompile(decompile_ok(decomp::literalist(), bc), CompilerVariant::A()).pass);
    CHECK(recompile(decompile_ok(decomp::sugarer(), bc), CompilerVariant::A()).pass);
}

TEST_CASE("literalist declines try blocks inside loops") {
    auto bc = th::compile_ok({kLoopTry}, CompilerVariant::A())[0];
    CHECK(decomp::shape_present("try-in-loop", bc));
    auto out = decomp::decompile(decomp::literalist(), bc);
    CHECK(out.empty());
    auto rc = recompile(decompile_ok(decomp::sugarer(), bc), CompilerVariant::A());
    REQUIRE(rc.pass);
    CHECK(probe(*rc.bc, "p.Foo.foo(int)", {th::I(3)}) == probe(bc, "p.Foo.foo(int)", {th::I(3)}));
}

TEST_CASE("null argument to an overloaded super constructor is ambiguous for every backend") {
    auto bc = th::compile_ok({kSuperNull}, CompilerVariant::A())[0];
    CHECK(decomp::shape_present("super-call-upcast", bc));
    for (const auto& d : decomp::builtin_backends()) {
        CAPTURE(d.name);
        auto rc = recompile(decompile_ok(d, bc), CompilerVariant::A());
        CHECK_FALSE(rc.pass);
        CHECK(decomp::predicted_failures(d, bc).size() == 1);
    }
}

TEST_CASE("sugarer qualifies blank static final assignments") {
    auto bc = th::compile_ok({kBlankFinal}, CompilerVariant::A())[0];
    CHECK(decomp::shape_present("blank-static-final-in-clinit", bc));
    auto rc = recompile(decompile_ok(decomp::sugarer(), bc), CompilerVariant::A());
    REQUIRE_FALSE(rc.pass);
    CHECK(rc.diagnostics[0].message.find("final") != std::string::npos);
    CHECK(recompile(decompile_ok(decomp::literalist(), bc), CompilerVariant::A()).pass);
}

TEST_CASE("sugarer keeps the wrapper argument only under variant B") {
    auto a = th::compile_ok({kWrapper}, CompilerVariant::A())[0];
    auto b = th::compile_ok({kWrapper}, CompilerVariant::B())[0];
    CHECK_FALSE(decomp::shape_present("self-typed-wrapper", a));
    CHECK(decomp::shape_present("self-typed-wrapper", b));
    auto ra = recompile(decompile_ok(decomp::sugarer(), a), CompilerVariant::A());
    auto rb = recompile(decompile_ok(decomp::sugarer(), b), CompilerVariant::B());
    CHECK(ra.pass);
    CHECK_FALSE(rb.pass);
}

TEST_CASE("optimist: static setter writes its own parameter") {
    auto bc = th::compile_ok({kSetter}, CompilerVariant::A())[0];
    CHECK(decomp::shape_present("static-setter", bc));
    auto src = decompile_ok(decomp::optimist(), bc);
    auto rc = recompile(src, CompilerVariant::A());
    REQUIRE(rc.pass);
    CHECK(probe(bc, "p.St.probe(int)", {th::I(7)}) == "normal|7\n");
    CHECK(probe(*rc.bc, "p.St.probe(int)", {th::I(7)}) == "normal|0\n");
}

TEST_CASE("optimist: dropped downcast recurses into the wrong overload") {
    auto bc = th::compile_ok({kOverload}, CompilerVariant::A())[0];
    CHECK(decomp::shape_present("overload-downcast-call", bc));
    auto rc = recompile(decompile_ok(decomp::optimist(), bc), CompilerVariant::A());
    REQUIRE(rc.pass);
    CHECK(probe(bc, "p.Ov.probe(str)", {th::S("x")}) == "normal|2\n");
    CHECK(th::run({*rc.bc}, "p.Ov.k(Object)", {th::S("x")}).outcome == "timeout");
}

TEST_CASE("optimist: classes from other units lose their package") {
    auto bcs = th::compile_ok({kUser, kLib}, CompilerVariant::A());
    CHECK(decomp::shape_present("foreign-class-ref", bcs[0]));
    CHECK_FALSE(decomp::shape_present("foreign-class-ref", bcs[1]));
    auto rc = recompile(decompile_ok(decomp::optimist(), bcs[0]), CompilerVariant::A(), bcs);
    CHECK_FALSE(rc.pass);
    CHECK(recompile(decompile_ok(decomp::sugarer(), bcs[0]), CompilerVariant::A(), bcs).pass);
}

TEST_CASE("shape census and failure profiles") {
    auto bc = th::compile_ok({kLine}, CompilerVariant::A())[0];
    CHECK(decomp::shapes_of(bc).empty());
    auto lit = decomp::literalist();
    CHECK(lit.failure_profile.size() == 3);
    CHECK(decomp::to_string(decomp::FailureMode::deceptive) == "deceptive");
    auto set = th::compile_ok({kSetter}, CompilerVariant::A())[0];
    CHECK(mentions(decomp::shapes_of(set), "static-setter"));
    auto pf = decomp::predicted_failures(decomp::optimist(), set);
    REQUIRE(pf.size() == 1);
    CHECK(pf[0].mode == decomp::FailureMode::deceptive);
    CHECK(decomp::builtin_by_name("nope") == std::nullopt);
}

TEST_CASE("throw-body stub replaces the bodies of declined methods") {
    auto spec = decomp::literalist();
    spec.throw_body_stub = true;
    auto bc = th::compile_ok({kLoopTry}, CompilerVariant::A())[0];
    auto src = decompile_ok(spec, bc);
    CHECK(src.find("throw new RuntimeException(\"decompilation failed\")") != std::string::npos);
    auto rc = recompile(src, CompilerVariant::A());
    REQUIRE(rc.pass);
    CHECK(th::run({*rc.bc}, "p.Foo.foo(int)", {th::I(1)}).outcome == "throws:RuntimeException");
}

TEST_CASE("external adapter") {
    auto bc = th::compile_ok({kLine}, CompilerVariant::A())[0];
    auto echo = decomp::external("echo", "grep -q '^CLASS p.Line ' {input} && printf 'class p.Line { }'", 5);
    auto out = decomp::decompile(echo, bc);
    REQUIRE(out.source);
    CHECK(*out.source == "class p.Line { }");

    CHECK(decomp::decompile(decomp::external("fail", "exit 3", 5), bc).empty());
    CHECK(decomp::decompile(decomp::external("silent", "true", 5), bc).empty());
    auto slow = decomp::decompile(decomp::external("slow", "sleep 5; echo x", 1), bc);
    CHECK(slow.empty());
    CHECK(slow.note == "timed out");
    CHECK(slow.elapsed_ms < 4000);
}
