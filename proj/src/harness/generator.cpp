#include <algorithm>
#include <random>

#include "mdlab/harness.hpp"

namespace mdlab::harness {

namespace {

enum class Effect { ok, syntactic, empty, deceptive };

// Effect of an ingredient on one backend, possibly depending on the variant.
struct Effects {
    Effect literalist = Effect::ok, sugarer = Effect::ok, optimist = Effect::ok;
    bool sugarer_b_only = false;  // sugarer effect applies only under variant B

    Effect get(const std::string& backend, const std::string& variant) const {
        if (backend == "literalist") return literalist;
        if (backend == "sugarer") return sugarer_b_only && variant != "B" ? Effect::ok : sugarer;
        return optimist;
    }
};

struct Probe {
    std::string entry;  // relative to the class: name(T1,T2)
    std::vector<vm::Literal> args;
};

struct Ingredient {
    std::string members;
    std::vector<Probe> probes;
    std::vector<std::string> tags;
    bool straight = true;
    Effects effects;
};

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

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    int range(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    template <class T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(range(0, static_cast<int>(v.size()) - 1))];
    }

    // --- ingredients; `n` keeps member names unique within one class -----------

    Ingredient arith(int n) {
        int k1 = range(2, 9), k2 = range(1, 50);
        auto op = pick<std::string>({"+", "-", "*"});
        Ingredient g;
        g.members = "    static int calc" + std::to_string(n) + "(int a, int b) { int c = a * " + std::to_string(k1) +
                    "; int d = c " + op + " b; return d + " + std::to_string(k2) + "; }\n";
        g.probes = {{"calc" + std::to_string(n) + "(int,int)", {I(range(-20, 20)), I(range(-20, 20))}},
                    {"calc" + std::to_string(n) + "(int,int)", {I(range(0, 100)), I(range(0, 9))}}};
        return g;
    }

    Ingredient field_math(int n) {
        auto s = std::to_string(n);
        int k = range(2, 30), c = range(1, 9);
        Ingredient g;
        g.members = "    static final int STEP" + s + " = " + std::to_string(c) + ";\n    static int seed" + s + " = " +
                    std::to_string(k) + ";\n    static int scaled" + s + "(int x) { return x * seed" + s + " + STEP" + s +
                    "; }\n";
        g.probes = {{"scaled" + s + "(int)", {I(range(-9, 9))}}};
        return g;
    }

    Ingredient instance(int n, const std::string& cls) {
        auto s = std::to_string(n);
        Ingredient g;
        g.members = "    int acc" + s + ";\n    int add" + s + "(int v) { this.acc" + s + " = this.acc" + s +
                    " + v; return this.acc" + s + "; }\n    static int twoAdds" + s + "(int a, int b) { " + cls +
                    " o = new " + cls + "(); o.add" + s + "(a); return o.add" + s + "(b); }\n";
        g.probes = {{"twoAdds" + s + "(int,int)", {I(range(0, 50)), I(range(0, 50))}}};
        return g;
    }

    Ingredient concat(int n) {
        auto s = std::to_string(n);
        auto sep = pick<std::string>({":", "-", "=", "/"});
        Ingredient g;
        g.members = "    static str label" + s + "(str name, int v) { return name + \"" + sep + "\" + v + \"!\"; }\n";
        g.probes = {{"label" + s + "(str,int)", {S(pick<std::string>({"ab", "x", "key"})), I(range(0, 99))}}};
        g.tags = {"concat-sugar"};
        return g;
    }

    Ingredient printer(int n) {
        auto s = std::to_string(n);
        int k = range(2, 7);
        Ingredient g;
        g.members = "    static void show" + s + "(int a) { print(\"v=\" + a); print(a * " + std::to_string(k) + "); }\n";
        g.probes = {{"show" + s + "(int)", {I(range(0, 40))}}};
        g.tags = {"concat-sugar"};
        return g;
    }

    Ingredient branchy(int n) {
        auto s = std::to_string(n);
        int k = range(3, 20);
        Ingredient g;
        g.members = "    static int clamp" + s + "(int x) { if (x > " + std::to_string(k) + ") { return " +
                    std::to_string(k) + "; } else { return x; } }\n    static int sum" + s +
                    "(int n) { int t = 0; int i = 0; while (i < n) { t = t + i; i = i + 1; } return t; }\n";
        g.probes = {{"clamp" + s + "(int)", {I(k + range(1, 5))}},
                    {"clamp" + s + "(int)", {I(k - range(1, 5))}},
                    {"sum" + s + "(int)", {I(range(0, 12))}}};
        g.straight = false;
        return g;
    }

    Ingredient wrapper(int n) {
        auto s = std::to_string(n);
        int k = range(1, 9);
        Ingredient g;
        g.members = "    class Box" + s + " {\n        int v;\n        private Box" + s +
                    "(int v) { this.v = v; }\n    }\n    static int make" + s + "(int x) { return new Box" + s + "(x + " +
                    std::to_string(k) + ").v; }\n";
        g.probes = {{"make" + s + "(int)", {I(range(0, 30))}}};
        g.tags = {"synthetic-wrapper", "nested-private-ctor"};
        g.straight = false;
        g.effects.sugarer = Effect::syntactic;
        g.effects.sugarer_b_only = true;
        return g;
    }

    Ingredient bool_local(int n) {
        auto s = std::to_string(n);
        int k = range(2, 12);
        Ingredient g;
        g.members = "    static int pick" + s + "(int x) { bool b = x > " + std::to_string(k) +
                    "; if (b) { return 1; } return 0; }\n";
        g.probes = {{"pick" + s + "(int)", {I(k + 2)}}, {"pick" + s + "(int)", {I(k - 2)}}};
        g.straight = false;
        g.effects.literalist = Effect::syntactic;
        return g;
    }

    Ingredient try_loop(int n) {
        auto s = std::to_string(n);
        int k = range(8, 15);
        Ingredient g;
        g.members = "    static int loop" + s +
                    "(int i) {\n        while (true) {\n            try {\n                if (i == " + std::to_string(k) +
                    ") { throw new RuntimeException(\"stop\"); }\n                i = i + 1;\n                continue;\n"
                    "            } catch (RuntimeException e) {\n                break;\n            }\n        }\n"
                    "        return i;\n    }\n";
        g.probes = {{"loop" + s + "(int)", {I(range(0, k))}}};
        g.tags = {"try-catch-loop"};
        g.straight = false;
        g.effects.literalist = Effect::empty;
        g.effects.optimist = Effect::empty;
        return g;
    }

    Ingredient super_upcast(int n, const std::string& cls) {
        auto s = std::to_string(n);
        Ingredient g;
        g.members = "    class Base" + s + " {\n        int k;\n        Base" + s + "(str s) { k = 1; }\n        Base" + s +
                    "(" + cls + " o) { k = 2; }\n    }\n    class Sub" + s + " extends Base" + s + " {\n        Sub" + s +
                    "() { super((str) null); }\n    }\n    static int kind" + s + "() { return new Sub" + s + "().k; }\n";
        g.probes = {{"kind" + s + "()", {}}};
        g.tags = {"overload-hazard"};
        g.straight = false;
        g.effects = {Effect::syntactic, Effect::syntactic, Effect::syntactic, false};
        return g;
    }

    Ingredient blank_final(int n) {
        auto s = std::to_string(n);
        int k = range(10, 90);
        Ingredient g;
        g.members = "    static final int LIMIT" + s + ";\n    static { LIMIT" + s + " = " + std::to_string(k) +
                    "; }\n    static int room" + s + "(int used) { return LIMIT" + s + " - used; }\n";
        g.probes = {{"room" + s + "(int)", {I(range(0, 9))}}};
        g.effects.sugarer = Effect::syntactic;
        return g;
    }

    Ingredient setter(int n) {
        auto s = std::to_string(n);
        Ingredient g;
        g.members = "    static int count" + s + ";\n    static void setCount" + s + "(int c) { count" + s +
                    " = c; }\n    static int probe" + s + "(int v) { setCount" + s + "(v); return count" + s + "; }\n";
        g.probes = {{"probe" + s + "(int)", {I(range(1, 99))}}, {"probe" + s + "(int)", {I(-range(1, 99))}}};
        g.tags = {"static-setter"};
        g.effects.optimist = Effect::deceptive;
        return g;
    }

    Ingredient overload(int n) {
        auto s = std::to_string(n);
        int k = range(2, 9);
        Ingredient g;
        g.members = "    static int k" + s + "(Object o) { if (o == null) { return 0; } return k" + s +
                    "((str) o); }\n    static int k" + s + "(str s) { return " + std::to_string(k) + "; }\n";
        g.probes = {{"k" + s + "(Object)", {S("x")}}};
        g.tags = {"overload-hazard"};
        g.straight = false;
        g.effects.optimist = Effect::deceptive;
        return g;
    }

    Ingredient foreign(int n) {
        auto s = std::to_string(n);
        int k = range(2, 5);
        Ingredient g;
        g.members = "    static int viaLib" + s + "(q.Lib l) { return l.get() * " + std::to_string(k) +
                    "; }\n    static int useLib" + s + "() { return viaLib" + s + "(new q.Lib()); }\n";
        g.probes = {{"useLib" + s + "()", {}}};
        g.effects.optimist = Effect::syntactic;
        return g;
    }

private:
    std::mt19937_64 rng_;
};

struct Recipe {
    std::string role;
    std::string stem;  // class simple-name stem
};

// Ingredients per recipe, in member order.
std::vector<Ingredient> cook(Gen& g, const std::string& role, const std::string& cls) {
    int n = 0;
    auto filler = [&]() {
        switch (g.range(0, 2)) {
            case 0: return g.arith(n++);
            case 1: return g.field_math(n++);
            default: return g.instance(n++, cls);
        }
    };
    std::vector<Ingredient> v;
    if (role == "straight") {
        v.push_back(g.arith(n++));
        v.push_back(filler());
        v.push_back(filler());
    } else if (role == "concat") {
        v.push_back(g.concat(n++));
        v.push_back(g.printer(n++));
        v.push_back(filler());
    } else if (role == "branchy") {
        v.push_back(g.branchy(n++));
        v.push_back(filler());
    } else if (role == "wrapper") {
        v.push_back(g.wrapper(n++));
        v.push_back(filler());
    } else if (role == "try-loop") {
        v.push_back(g.try_loop(n++));
        v.push_back(filler());
    } else if (role == "setter") {
        v.push_back(g.setter(n++));
        v.push_back(filler());
    } else if (role == "overload") {
        v.push_back(g.overload(n++));
        v.push_back(filler());
    } else if (role == "disjoint") {
        v.push_back(g.bool_local(n++));
        v.push_back(filler());
        v.push_back(g.blank_final(n++));
        v.push_back(g.foreign(n++));
    } else if (role == "same-member") {
        v.push_back(g.super_upcast(n++, cls));
        v.push_back(filler());
    } else if (role == "unique-literalist") {
        v.push_back(g.blank_final(n++));
        v.push_back(g.foreign(n++));
    } else if (role == "unique-sugarer") {
        v.push_back(g.bool_local(n++));
        v.push_back(g.foreign(n++));
    } else if (role == "unique-optimist") {
        v.push_back(g.bool_local(n++));
        v.push_back(g.blank_final(n++));
    } else {
        throw ContractViolation("unknown recipe " + role);
    }
    return v;
}

// Recipes that guarantee the corpus minimums, followed by the rotation used to
// fill the remaining slots.
const std::vector<std::string> kQuota = {
    "disjoint", "disjoint",          "disjoint",       "disjoint",        "disjoint",    "disjoint", "disjoint",
    "disjoint", "disjoint",          "disjoint",       "same-member",     "same-member", "same-member",
    "straight", "straight",          "straight",       "straight",        "straight",    "concat",   "concat",
    "concat",   "wrapper",           "wrapper",        "setter",          "overload",    "try-loop",
    "unique-literalist", "unique-sugarer", "unique-optimist"};
const std::vector<std::string> kRotation = {"straight", "concat",   "branchy",           "wrapper",
                                            "disjoint", "branchy",  "unique-literalist", "unique-sugarer",
                                            "unique-optimist", "try-loop", "same-member"};

std::string stem_of(const std::string& role) {
    std::string out;
    bool up = true;
    for (char c : role) {
        if (c == '-') {
            up = true;
            continue;
        }
        out += up ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c;
        up = false;
    }
    return out;
}

std::string effect_label(Effect e) {
    switch (e) {
        case Effect::ok: return "success";
        case Effect::syntactic: return "NotRecompilable";
        case Effect::empty: return "EmptyOutput";
        case Effect::deceptive: return "Deceptive";
    }
    return "";
}

int severity(Effect e) {
    switch (e) {
        case Effect::empty: return 3;
        case Effect::syntactic: return 2;
        case Effect::deceptive: return 1;
        default: return 0;
    }
}

}  // namespace

std::size_t Corpus::index_of(std::string_view qualified_name) const {
    for (std::size_t i = 0; i < manifest.classes.size(); ++i)
        if (manifest.classes[i].qualified_name == qualified_name) return i;
    throw ContractViolation("no corpus class " + std::string(qualified_name));
}

std::string cell_key(const std::string& compiler, const std::string& decompiler) {
    return compiler + "/" + decompiler;
}

Corpus gen_corpus(std::uint64_t seed, int size) {
    if (size < kMinCorpusSize)
        throw ContractViolation("corpus size must be at least " + std::to_string(kMinCorpusSize));
    Corpus c;
    c.manifest.seed = seed;
    c.manifest.size = size;

    for (const auto& gc : golden_classes()) {
        ClassEntry e;
        e.qualified_name = gc.qualified_name;
        e.role = "golden";
        e.golden = true;
        e.expected = gc.labels;
        e.expected_meta = gc.meta;
        c.manifest.classes.push_back(e);
        c.sources.push_back(gc.source);
        c.tests.push_back(gc.tests);
    }

    std::vector<std::string> roles;
    for (int i = 0; static_cast<int>(roles.size()) < size - kMinCorpusSize; ++i)
        roles.push_back(i < static_cast<int>(kQuota.size()) ? kQuota[static_cast<std::size_t>(i)]
                                                             : kRotation[(static_cast<std::size_t>(i) - kQuota.size()) %
                                                                         kRotation.size()]);

    Gen g(seed);
    std::map<std::string, int> serial;
    const std::vector<std::string> backends{"literalist", "sugarer", "optimist"};
    for (const auto& role : roles) {
        int k = serial[role]++;
        std::string num = (k < 10 ? "0" : "") + std::to_string(k);
        std::string cls = "gen." + stem_of(role) + num;
        auto parts = cook(g, role, cls);

        std::string src = "class " + cls + " {\n";
        std::set<std::string> tags;
        bool straight = true;
        std::vector<vm::TestCase> tests;
        for (const auto& p : parts) {
            src += p.members;
            tags.insert(p.tags.begin(), p.tags.end());
            straight = straight && p.straight;
            for (const auto& pr : p.probes) {
                vm::TestCase t;
                t.id = cls + "#" + std::to_string(tests.size());
                t.entry = cls + "." + pr.entry;
                t.args = pr.args;
                tests.push_back(std::move(t));
            }
        }
        src += "}\n";
        if (straight) tags.insert("straight-line");

        ClassEntry e;
        e.qualified_name = cls;
        e.role = role;
        e.feature_tags.assign(tags.begin(), tags.end());
        for (std::string v : {"A", "B"}) {
            // an empty backend contributes nothing to meta; otherwise an
            // ingredient is recoverable when some backend compiles it
            std::vector<std::string> usable;
            for (const auto& b : backends) {
                Effect worst = Effect::ok;
                for (const auto& p : parts) {
                    Effect ef = p.effects.get(b, v);
                    if (severity(ef) > severity(worst)) worst = ef;
                }
                e.expected[cell_key(v, b)] = effect_label(worst);
                if (worst != Effect::empty) usable.push_back(b);
            }
            bool meta_ok = true;
            for (const auto& p : parts) {
                bool any = false;
                for (const auto& b : usable) any = any || p.effects.get(b, v) != Effect::syntactic;
                meta_ok = meta_ok && any;
            }
            e.expected_meta[v] = meta_ok ? "success" : "failure";
        }
        c.manifest.classes.push_back(e);
        c.sources.push_back(src);
        c.tests.push_back(std::move(tests));
    }

    // golden tags and expected test outputs come from the compiled originals
    auto bcs = compile_corpus(c, compiler::CompilerVariant::A());
    vm::Program program(bcs);
    for (std::size_t i = 0; i < c.manifest.classes.size(); ++i) {
        auto& e = c.manifest.classes[i];
        e.path = "src/" + e.qualified_name + ".mj";
        e.test_files = {"tests/" + e.qualified_name + ".tj"};
        if (e.golden) {
            auto t = tags_from_bytecode(bcs[i]);
            e.feature_tags.assign(t.begin(), t.end());
            continue;
        }
        for (auto& t : c.tests[i]) {
            auto obs = vm::run_entry(program, t, vm::kDefaultFuel);
            if (obs.outcome != "normal" && !obs.outcome.starts_with("throws:"))
                throw ToolError("generated test " + t.id + " does not terminate normally: " + obs.outcome);
            t.expected_stdout = obs.stdout_text;
            t.expected_outcome = obs.outcome;
        }
    }
    return c;
}

}  // namespace mdlab::harness
