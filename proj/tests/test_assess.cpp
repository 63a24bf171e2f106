#include "helpers.hpp"
#include "mdlab/assess.hpp"

using namespace mdlab;
using assess::Category;
using compiler::CompilerVariant;

namespace {

vm::TestCase test(std::string id, std::string entry, std::vector<vm::Literal> args, std::string out,
                  std::string outcome = "normal") {
    vm::TestCase t;
    t.id = std::move(id);
    t.entry = std::move(entry);
    t.args = std::move(args);
    t.expected_stdout = std::move(out);
    t.expected_outcome = std::move(outcome);
    return t;
}

vm::TestReport report_of(std::initializer_list<vm::Verdict> vs) {
    vm::TestReport r;
    for (auto v : vs) r.results.push_back({"t", v, ""});
    return r;
}

const char* kStraight = R"(class p.Line {
    int g;
    static int calc(int a, int b) { int c = a * 2; int d = c + b; return d - 1; }
    static str msg(str s, int n) { return s + ":" + n; }
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
}
)";

const char* kBranch = R"(class p.Br {
    static int sign(int x) { if (x < 0) { return 0 - 1; } else { return 1; } }
}
)";

}  // namespace

TEST_CASE("classify covers every stage combination") {
    using assess::StageFacts;
    CHECK(assess::classify({}) == Category::EmptyOutput);
    CHECK(assess::classify({true, false, std::nullopt, nullptr}) == Category::NotRecompilable);
    CHECK(assess::classify({true, true, true, nullptr}) == Category::StrictlyEquivalent);
    auto pass = report_of({vm::Verdict::pass, vm::Verdict::pass});
    auto fail = report_of({vm::Verdict::pass, vm::Verdict::fail});
    auto slow = report_of({vm::Verdict::timeout});
    auto crash = report_of({vm::Verdict::crash});
    CHECK(assess::classify({true, true, true, &pass}) == Category::StrictlyEquivalent);
    CHECK(assess::classify({true, true, false, &pass}) == Category::EquivModuloInputs);
    CHECK(assess::classify({true, true, false, &fail}) == Category::Deceptive);
    CHECK(assess::classify({true, true, false, &slow}) == Category::Deceptive);
    CHECK(assess::classify({true, true, false, &crash}) == Category::Deceptive);

    CHECK_THROWS_AS(assess::classify({false, true, std::nullopt, nullptr}), ContractViolation);
    CHECK_THROWS_AS(assess::classify({true, false, false, nullptr}), ContractViolation);
    CHECK_THROWS_AS(assess::classify({true, true, std::nullopt, nullptr}), ContractViolation);
    CHECK_THROWS_AS(assess::classify({true, true, false, nullptr}), ContractViolation);
    CHECK_THROWS_AS(assess::classify({true, true, true, &fail}), ContractViolation);
}

TEST_CASE("category names round trip") {
    for (auto c : {Category::EmptyOutput, Category::NotRecompilable, Category::Deceptive, Category::EquivModuloInputs,
                   Category::StrictlyEquivalent})
        CHECK(assess::category_from_string(assess::to_string(c)) == c);
    CHECK_FALSE(assess::category_from_string("Nope"));
}

TEST_CASE("literalist on straight-line code is strictly equivalent under both variants") {
    for (auto v : {CompilerVariant::A(), CompilerVariant::B()}) {
        CAPTURE(v.id);
        auto r = assess::assess(kStraight, v, decomp::literalist(), {});
        CHECK(r.category == Category::StrictlyEquivalent);
        REQUIRE(r.distortion);
        CHECK(r.distortion->original_nodes > 0);
        CHECK(r.bytecode_identical == true);
        CHECK_FALSE(r.test_report);
    }
}

TEST_CASE("optimist static setter is deceptive") {
    std::vector<vm::TestCase> tests{test("t1", "p.St.probe(int)", {th::I(7)}, "7\n"),
                                    test("t2", "p.St.probe(int)", {th::I(0)}, "0\n")};
    auto r = assess::assess(kSetter, CompilerVariant::A(), decomp::optimist(), tests);
    CHECK(r.category == Category::Deceptive);
    REQUIRE(r.test_report);
    auto c = assess::count_tests(*r.test_report);
    CHECK(c.pass == 1);
    CHECK(c.fail == 1);
    CHECK(assess::assess(kSetter, CompilerVariant::A(), decomp::literalist(), tests).category ==
          Category::StrictlyEquivalent);
}

TEST_CASE("nontermination after a dropped cast is deceptive through the fuel limit") {
    std::vector<vm::TestCase> tests{test("t1", "p.Ov.k(Object)", {th::S("x")}, "2\n")};
    assess::Options o;
    o.fuel = 200000;
    auto r = assess::assess(kOverload, CompilerVariant::A(), decomp::optimist(), tests, {}, o);
    CHECK(r.category == Category::Deceptive);
    REQUIRE(r.test_report);
    CHECK(assess::count_tests(*r.test_report).timeout == 1);
}

TEST_CASE("swapped branch polarity under B passes tests with different bytecode") {
    std::vector<vm::TestCase> tests{test("n", "p.Br.sign(int)", {th::I(-4)}, "-1\n"),
                                    test("p", "p.Br.sign(int)", {th::I(4)}, "1\n")};
    auto r = assess::assess(kBranch, CompilerVariant::B(), decomp::sugarer(), tests);
    CHECK(r.category == Category::EquivModuloInputs);
    CHECK(r.bytecode_identical == false);
}

TEST_CASE("empty output and recompilation failure stop the pipeline") {
    auto empty = assess::assess(kStraight, CompilerVariant::A(), decomp::external("x", "exit 1", 5), {});
    CHECK(empty.category == Category::EmptyOutput);
    CHECK_FALSE(empty.distortion);
    CHECK(empty.note == "exit status 1");

    auto bc = th::compile_ok({kStraight}, CompilerVariant::A())[0];
    assess::Subject s{th::parse_ok(kStraight), bc, {}};
    auto bad = assess::assess_output(s, CompilerVariant::A(), "manual",
                                     std::string("class p.Line { static int calc(int a) { return b; } }"), {});
    CHECK(bad.category == Category::NotRecompilable);
    CHECK(bad.distortion);
    CHECK_FALSE(bad.bytecode_identical);
    CHECK_FALSE(bad.note.empty());

    auto garbage = assess::assess_output(s, CompilerVariant::A(), "manual", std::string("class {"), {});
    CHECK(garbage.category == Category::NotRecompilable);
    CHECK_FALSE(garbage.distortion);
}

TEST_CASE("excluded tests are not run") {
    std::vector<vm::TestCase> tests{test("good", "p.St.probe(int)", {th::I(0)}, "0\n"),
                                    test("bad", "p.St.probe(int)", {th::I(7)}, "7\n")};
    assess::Options o;
    o.excluded_tests = {"bad"};
    auto r = assess::assess(kSetter, CompilerVariant::A(), decomp::optimist(), tests, {}, o);
    CHECK(r.category == Category::EquivModuloInputs);
}

TEST_CASE("records survive a JSON round trip") {
    std::vector<vm::TestCase> tests{test("t1", "p.St.probe(int)", {th::I(7)}, "7\n")};
    auto r = assess::assess(kSetter, CompilerVariant::B(), decomp::optimist(), tests);
    auto j = assess::to_json(r);
    CHECK(j["category"] == "Deceptive");
    CHECK(j["tests"]["fail"] == 1);
    CHECK(j.contains("elapsed_ms"));
    auto back = assess::record_from_json(j);
    CHECK(back.category == r.category);
    CHECK(back.compiler == "B");
    CHECK(assess::to_json(back).dump() == j.dump());
    CHECK_THROWS_AS(assess::record_from_json(nlohmann::json::object()), ToolError);
}
