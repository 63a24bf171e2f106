#include "helpers.hpp"

using namespace mdlab;
using compiler::CompilerVariant;

namespace {

const char* kDigits = R"(class p.Utils {
    static final int BASE = 4 * 4;
    static int digits(int n) {
        int c = 0;
        while (n > 0) { n = n / 10; c = c + 1; }
        return c;
    }
    static void main() {
        print(BASE);
        print("d=" + digits(12345) + "/" + true);
    }
}
)";

const char* kNested = R"(class p.Outer {
    class Box {
        int v;
        private Box(int v) { this.v = v; }
        int get() { return v; }
    }
    static int make(int x) {
        Box b = new Box(x);
        return b.get();
    }
}
)";

}  // namespace

TEST_CASE("compiled program prints folded constants and concatenations") {
    for (auto v : {CompilerVariant::A(), CompilerVariant::B()}) {
        auto bcs = th::compile_ok({kDigits}, v);
        auto o = th::run(bcs, "p.Utils.main()");
        CHECK(o.outcome == "normal");
        CHECK(o.stdout_text == "16\nd=5/true\n");
    }
}

TEST_CASE("variants lower concatenation differently") {
    auto a = th::compile_ok({kDigits}, CompilerVariant::A());
    auto b = th::compile_ok({kDigits}, CompilerVariant::B());
    auto ta = vm::serialize(a[0]);
    auto tb = vm::serialize(b[0]);
    CHECK(ta.find("BUILDER_NEW") != std::string::npos);
    CHECK(tb.find("CONCAT") != std::string::npos);
    CHECK(tb.find("BUILDER_NEW") == std::string::npos);
}

TEST_CASE("empty class gets one synthetic default constructor") {
    auto bcs = th::compile_ok({"class A {}"}, CompilerVariant::A());
    REQUIRE(bcs[0].methods.size() == 1);
    CHECK(bcs[0].methods[0].name == "<init>");
    CHECK((bcs[0].methods[0].flags & vm::kSynthetic));
}

TEST_CASE("private nested constructor goes through a synthetic wrapper") {
    auto a = th::compile_ok({kNested}, CompilerVariant::A());
    auto b = th::compile_ok({kNested}, CompilerVariant::B());
    CHECK(th::run(a, "p.Outer.make(int)", {th::I(7)}).stdout_text == "7\n");
    CHECK(th::run(b, "p.Outer.make(int)", {th::I(7)}).stdout_text == "7\n");
    const auto& box_a = a[0].nested.at(0);
    CHECK(box_a.find_method("<init>", {"int", "p.Outer$1"}) != nullptr);
    REQUIRE(a[0].nested.size() == 2);
    CHECK(a[0].nested[1].name == "p.Outer$1");
    CHECK(b[0].nested.size() == 1);
    CHECK(b[0].nested[0].find_method("<init>", {"int", "p.Outer$Box"}) != nullptr);
}

TEST_CASE("type errors are reported per member and other members still compile") {
    auto ast = th::parse_ok("class A { static int f() { int x = true; return x; } static int g() { return 1; } }");
    auto r = compiler::compile(ast, CompilerVariant::A());
    CHECK_FALSE(r.ok());
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].message == "incompatible types: bool cannot be converted to int");
}

TEST_CASE("final assignment outside the initializer is rejected") {
    auto ast = th::parse_ok("class A { static final int X; static { A.X = 1; } }");
    auto r = compiler::compile(ast, CompilerVariant::A());
    REQUIRE_FALSE(r.ok());
    CHECK(r.diagnostics[0].message == "cannot assign a value to final variable X");
    auto ok = th::parse_ok("class A { static final int X; static { X = 1; } }");
    CHECK(compiler::compile(ok, CompilerVariant::A()).ok());
}

TEST_CASE("exceptions, try/catch and if/else run identically under both variants") {
    const char* src = R"(class q.T {
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
    static str sign(int x) {
        if (x < 0) { return "neg"; } else { return "pos"; }
    }
    static int div(int a, int b) { return a / b; }
}
)";
    for (auto v : {CompilerVariant::A(), CompilerVariant::B()}) {
        auto bcs = th::compile_ok({src}, v);
        CHECK(th::run(bcs, "q.T.foo(int)", {th::I(3)}).stdout_text == "10\n");
        CHECK(th::run(bcs, "q.T.sign(int)", {th::I(-2)}).stdout_text == "neg\n");
        CHECK(th::run(bcs, "q.T.div(int,int)", {th::I(1), th::I(0)}).outcome == "throws:ArithmeticException");
        CHECK(vm::verify(bcs[0]).empty());
    }
}
