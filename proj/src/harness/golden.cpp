#include "mdlab/harness.hpp"

namespace mdlab::harness {

namespace {

vm::Literal I(int v) {
    vm::Literal l;
    l.i = v;
    return l;
}

vm::Literal S(std::string v) {
    vm::Literal l;
    l.kind = vm::Literal::Kind::Str;
    l.s = std::move(v);
    return l;
}

vm::TestCase T(const std::string& cls, int k, std::string entry, std::vector<vm::Literal> args, std::string out,
               std::string outcome = "normal") {
    vm::TestCase t;
    t.id = cls + "#" + std::to_string(k);
    t.entry = cls + "." + entry;
    t.args = std::move(args);
    t.expected_stdout = std::move(out);
    t.expected_outcome = std::move(outcome);
    return t;
}

// Labels per cell in the order A/literalist A/sugarer A/optimist B/literalist
// B/sugarer B/optimist.
Expectations labels(std::initializer_list<const char*> six) {
    static const char* keys[] = {"A/literalist", "A/sugarer", "A/optimist", "B/literalist", "B/sugarer", "B/optimist"};
    Expectations e;
    int i = 0;
    for (auto l : six) e[keys[i++]] = l;
    return e;
}

constexpr const char* SE = "StrictlyEquivalent";
constexpr const char* EMI = "EquivModuloInputs";
constexpr const char* NR = "NotRecompilable";
constexpr const char* DEC = "Deceptive";
constexpr const char* EO = "EmptyOutput";

std::vector<GoldenClass> build() {
    std::vector<GoldenClass> g;
    auto add = [&](std::string name, std::string src, std::vector<vm::TestCase> tests, Expectations l,
                   const char* meta_a, const char* meta_b) {
        g.push_back({std::move(name), std::move(src), std::move(tests), std::move(l), {{"A", meta_a}, {"B", meta_b}}});
    };

    add("q.Lib", R"(class q.Lib {
    int base;
    Lib() { this.base = 20; }
    int get() { return this.base + 1; }
    static int twice(int x) { return x * 2; }
}
)",
        {T("q.Lib", 0, "twice(int)", {I(21)}, "42\n")}, labels({SE, SE, SE, SE, SE, SE}), "success", "success");

    add("golden.Line", R"(class golden.Line {
    static int calc(int a, int b) { int c = a * 2; int d = c + b; return d - 1; }
    static str msg(str s, int n) { return s + ":" + n; }
    static void show(int v) { print("v=" + v); print(v * 3); }
}
)",
        {T("golden.Line", 0, "calc(int,int)", {I(3), I(4)}, "9\n"),
         T("golden.Line", 1, "msg(str,int)", {S("a"), I(5)}, "a:5\n"),
         T("golden.Line", 2, "show(int)", {I(4)}, "v=4\n12\n")},
        labels({SE, SE, SE, SE, SE, SE}), "success", "success");

    add("golden.Branch", R"(class golden.Branch {
    static int clamp(int x) { if (x > 10) { return 10; } else { return x; } }
    static int sum(int n) { int s = 0; int i = 0; while (i < n) { s = s + i; i = i + 1; } return s; }
}
)",
        {T("golden.Branch", 0, "clamp(int)", {I(15)}, "10\n"), T("golden.Branch", 1, "clamp(int)", {I(7)}, "7\n"),
         T("golden.Branch", 2, "sum(int)", {I(5)}, "10\n")},
        labels({SE, SE, SE, EMI, EMI, EMI}), "success", "success");

    add("golden.Foo", R"(class golden.Foo {
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
)",
        {T("golden.Foo", 0, "foo(int)", {I(3)}, "10\n"), T("golden.Foo", 1, "foo(int)", {I(10)}, "10\n")},
        labels({EO, EMI, EO, EO, EMI, EO}), "success", "success");

    add("golden.Counter", R"(class golden.Counter {
    static int count;
    static void setCount(int c) { count = c; }
    static int probe(int v) { setCount(v); return count; }
}
)",
        {T("golden.Counter", 0, "probe(int)", {I(7)}, "7\n"), T("golden.Counter", 1, "probe(int)", {I(-2)}, "-2\n")},
        labels({SE, SE, DEC, SE, SE, DEC}), "success", "success");

    add("golden.Dispatch", R"(class golden.Dispatch {
    static int k(Object o) { if (o == null) { return 0; } return k((str) o); }
    static int k(str s) { return 2; }
}
)",
        {T("golden.Dispatch", 0, "k(Object)", {S("x")}, "2\n"), T("golden.Dispatch", 1, "k(str)", {S("y")}, "2\n")},
        labels({SE, SE, DEC, SE, SE, DEC}), "success", "success");

    add("golden.Wrap", R"(class golden.Wrap {
    class Box {
        int v;
        private Box(int v) { this.v = v; }
    }
    static int make(int x) { return new Box(x + 1).v; }
}
)",
        {T("golden.Wrap", 0, "make(int)", {I(4)}, "5\n")}, labels({SE, SE, SE, SE, NR, SE}), "success", "success");

    add("golden.Flag", R"(class golden.Flag {
    static int pick(int x) { bool b = x > 3; if (b) { return 1; } return 0; }
}
)",
        {T("golden.Flag", 0, "pick(int)", {I(9)}, "1\n"), T("golden.Flag", 1, "pick(int)", {I(2)}, "0\n")},
        labels({NR, SE, SE, NR, SE, SE}), "success", "success");

    add("golden.Limit", R"(class golden.Limit {
    static final int LIMIT;
    static { LIMIT = 40; }
    static int room(int used) { return LIMIT - used; }
}
)",
        {T("golden.Limit", 0, "room(int)", {I(15)}, "25\n")}, labels({SE, NR, SE, SE, NR, SE}), "success", "success");

    add("golden.User", R"(class golden.User {
    static int twice(q.Lib l) { return l.get() * 2; }
    static int probe() { return twice(new q.Lib()); }
}
)",
        {T("golden.User", 0, "probe()", {}, "42\n")}, labels({SE, SE, NR, SE, SE, NR}), "success", "success");

    add("golden.Ambig", R"(class golden.Ambig {
    class Base {
        int k;
        Base(str s) { k = 1; }
        Base(golden.Ambig o) { k = 2; }
    }
    class Sub extends Base {
        Sub() { super((str) null); }
    }
    static int probe() { return new Sub().k; }
}
)",
        {T("golden.Ambig", 0, "probe()", {}, "1\n")}, labels({NR, NR, NR, NR, NR, NR}), "failure", "failure");

    add("golden.Config", R"(class golden.Config {
    static final int BLANK;
    static { BLANK = 3; }
    static int level(int x) { bool hi = x > BLANK; if (hi) { return 2; } return 1; }
    static int probe(int x) { return level(x) * 10 + BLANK; }
}
)",
        {T("golden.Config", 0, "probe(int)", {I(5)}, "23\n"), T("golden.Config", 1, "probe(int)", {I(1)}, "13\n")},
        labels({NR, NR, SE, NR, NR, SE}), "success", "success");
    return g;
}

}  // namespace

const std::vector<GoldenClass>& golden_classes() {
    static const std::vector<GoldenClass> g = build();
    return g;
}

}  // namespace mdlab::harness
