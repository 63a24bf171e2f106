#include <random>

#include "helpers.hpp"
#include "mdlab/astdiff.hpp"
#include "mdlab/decomp.hpp"
#include "tree_oracle.hpp"

using namespace mdlab;
using astdiff::EditKind;
using astdiff::parse_tree;

namespace {

const std::vector<std::string> kAbc{"a", "b", "c"};

const char* kFoo = R"(class p.Foo {
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

void check_replay(const astdiff::Tree& a, const astdiff::Tree& b, const astdiff::EditScript& s) {
    CHECK(astdiff::to_string(astdiff::apply(a, s)) == astdiff::to_string(b));
}

}  // namespace

TEST_CASE("tree notation round trip") {
    auto t = parse_tree("a(b, c(d,e), f)");
    CHECK(t.size() == 6);
    CHECK(astdiff::to_string(t) == "a(b,c(d,e),f)");
    CHECK_THROWS_AS(parse_tree("a(b"), ContractViolation);
}

TEST_CASE("identity costs nothing") {
    auto t = parse_tree("a(b(c,d),e(f))");
    auto s = astdiff::edit_distance(t, t);
    CHECK(s.cost() == 0);
    CHECK(s.exact);
}

TEST_CASE("hand-checked small scripts") {
    struct Case {
        const char* a;
        const char* b;
        int cost;
    };
    // swap of two leaves: one move; rename: one update; extra wrapper: one insert
    // adopting both children; subtree relocation plus a rename: two edits.
    for (auto c : {Case{"a(b,c)", "a(c,b)", 1}, Case{"a(b)", "a(c)", 1}, Case{"a(b,c)", "a(x(b,c))", 1},
                   Case{"a(b(x),c)", "a(c,b(y))", 2}, Case{"a(b,c,d)", "a", 3}, Case{"r(p(x,y,z),q)", "r(p,q(x,y,z))", 3}}) {
        CAPTURE(c.a);
        CAPTURE(c.b);
        auto a = parse_tree(c.a), b = parse_tree(c.b);
        auto s = astdiff::edit_distance(a, b);
        CHECK(s.cost() == c.cost);
        check_replay(a, b, s);
    }
}

TEST_CASE("moves of identical subtrees are collapsed on large trees") {
    std::string mids;
    for (int i = 0; i < 12; ++i) mids += "m" + std::to_string(i) + "(x,y(z)),";
    std::string a = "root(" + mids + "tail(q(r,s)))";
    mids.pop_back();
    std::string b = "root(tail(q(r,s))," + mids + ")";
    auto ta = parse_tree(a), tb = parse_tree(b);
    auto s = astdiff::edit_distance(ta, tb);
    CHECK(s.cost() == 1);
    CHECK(s.count(EditKind::move) == 1);
    check_replay(ta, tb, s);
}

TEST_CASE("engine matches the brute-force oracle on small perturbed trees") {
    std::mt19937 rng(7);
    for (int k = 0; k < 120; ++k) {
        auto [a, b] = oracle::random_pair(rng, 6, 4, kAbc);
        CAPTURE(astdiff::to_string(a));
        CAPTURE(astdiff::to_string(b));
        int want = oracle::distance(a, b, kAbc, 4);
        REQUIRE(want >= 0);
        auto s = astdiff::edit_distance(a, b);
        CHECK(s.cost() == want);
        check_replay(a, b, s);
    }
}

TEST_CASE("replay holds on larger random trees") {
    std::mt19937 rng(11);
    for (int k = 0; k < 40; ++k) {
        auto a = oracle::random_tree(rng, 10 + static_cast<int>(rng() % 40), kAbc);
        auto b = oracle::random_tree(rng, 10 + static_cast<int>(rng() % 40), kAbc);
        auto s = astdiff::edit_distance(a, b);
        check_replay(a, b, s);
        CHECK(s.cost() <= static_cast<int>(a.size() + b.size()));
    }
}

TEST_CASE("deleting one statement costs at least one edit") {
    auto a = th::parse_ok("class p.M { void f() { print(1); print(2); } }");
    auto b = th::parse_ok("class p.M { void f() { print(1); } }");
    CHECK(astdiff::edit_distance(a, b).cost() >= 1);
}

TEST_CASE("normalize_names") {
    auto a = th::parse_ok("class p.R { int f(int x) { int y = x + 1; return y * x; } }");
    auto b = th::parse_ok("class p.R { int f(int r1) { int r2 = r1 + 1; return r2 * r1; } }");
    CHECK(astdiff::normalize_names(a).same_shape(astdiff::normalize_names(b)));
    CHECK_FALSE(a.same_shape(b));

    auto c = th::parse_ok(R"(class p.N {
    int t;
    int f(int a) {
        if (a > 0) { int t = a; print(t); }
        else { int t = 0 - a; print(t); }
        return a + t;
    }
})");
    auto n = astdiff::normalize_names(c);
    const auto& m = n.members[1].decl;  // Method: Type, Params, Block
    CHECK(m.kids[1].kids[0].text == "_v0");
    const auto& ifs = m.kids[2].kids[0];
    CHECK(ifs.kids[1].kids[0].text == "_v1");
    CHECK(ifs.kids[2].kids[0].text == "_v2");
    // the field reference after both blocks stays a field reference
    CHECK(lang::print_expr(m.kids[2].kids[1].kids[0]) == "_v0 + t");
    CHECK(n.members[0].decl.text == "t");
}

TEST_CASE("distortion of the Foo analog under the sugarer") {
    auto original = th::parse_ok(kFoo);
    auto bcs = th::compile_ok({kFoo}, compiler::CompilerVariant::A());
    auto out = decomp::decompile(decomp::sugarer(), bcs[0]);
    REQUIRE(out.source);
    auto d = astdiff::distortion(original, *out.source);
    REQUIRE(d);
    CHECK(d->edits == 3);
    CHECK(d->script.count(EditKind::move) == 1);
    CHECK(d->script.count(EditKind::remove) == 2);
    CHECK(d->normalized == doctest::Approx(3.0 / d->original_nodes));
    auto ta = astdiff::to_tree(astdiff::normalize_names(original));
    auto tb = astdiff::to_tree(astdiff::normalize_names(th::parse_ok(*out.source)));
    check_replay(ta, tb, d->script);

    auto self = astdiff::distortion(original, original);
    CHECK(self.edits == 0);
}
