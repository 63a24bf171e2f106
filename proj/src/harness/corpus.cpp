#include <fstream>
#include <sstream>

#include "mdlab/harness.hpp"

namespace mdlab::harness {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ToolError("cannot read " + p.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ToolError("cannot write " + p.string());
    out << text;
}

template <class F>
bool any_class(const vm::BytecodeClass& c, F&& f) {
    if (f(c)) return true;
    for (const auto& n : c.nested)
        if (any_class(n, f)) return true;
    return false;
}

bool has_op(const vm::BytecodeClass& top, std::initializer_list<vm::Op> ops) {
    return any_class(top, [&](const vm::BytecodeClass& c) {
        for (const auto& m : c.methods)
            for (const auto& in : m.code)
                for (auto op : ops)
                    if (in.op == op) return true;
        return false;
    });
}

}  // namespace

const std::vector<std::string>& tag_vocabulary() {
    static const std::vector<std::string> v{"concat-sugar",    "synthetic-wrapper", "nested-private-ctor",
                                            "overload-hazard", "straight-line",     "try-catch-loop",
                                            "static-setter"};
    return v;
}

std::set<std::string> tags_from_bytecode(const vm::BytecodeClass& bc) {
    using vm::Op;
    std::set<std::string> t;
    if (has_op(bc, {Op::CONCAT, Op::BUILDER_NEW})) t.insert("concat-sugar");
    bool synthetic = any_class(bc, [](const vm::BytecodeClass& c) {
        for (const auto& m : c.methods)
            if ((m.flags & vm::kSynthetic) && m.name == "<init>" && !m.params.empty()) return true;
        return false;
    });
    if (synthetic) t.insert("synthetic-wrapper");
    for (const auto& n : bc.nested)
        for (const auto& m : n.methods)
            if (m.name == "<init>" && (m.flags & vm::kPrivate)) t.insert("nested-private-ctor");
    if (decomp::shape_present("overload-downcast-call", bc) || decomp::shape_present("super-call-upcast", bc))
        t.insert("overload-hazard");
    if (decomp::shape_present("try-in-loop", bc)) t.insert("try-catch-loop");
    if (decomp::shape_present("static-setter", bc)) t.insert("static-setter");
    bool handlers = any_class(bc, [](const vm::BytecodeClass& c) {
        for (const auto& m : c.methods)
            if (!m.handlers.empty()) return true;
        return false;
    });
    if (bc.nested.empty() && !handlers && !has_op(bc, {Op::IFEQ, Op::IFNE, Op::GOTO})) t.insert("straight-line");
    return t;
}

std::vector<vm::BytecodeClass> compile_corpus(const Corpus& corpus, const compiler::CompilerVariant& variant) {
    std::vector<lang::ClassAst> asts;
    for (std::size_t i = 0; i < corpus.sources.size(); ++i) {
        auto r = lang::parse(corpus.sources[i]);
        if (!r.ok())
            throw ToolError(corpus.manifest.classes[i].qualified_name + ": " +
                            (r.diagnostics.empty() ? "parse error" : format_diagnostic(r.diagnostics[0], corpus.sources[i])));
        asts.push_back(std::move(*r.ast));
    }
    auto results = compiler::compile_all(asts, variant);
    std::vector<vm::BytecodeClass> out;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (!results[i].ok())
            throw ToolError(corpus.manifest.classes[i].qualified_name + " does not compile under " + variant.id + ": " +
                            (results[i].diagnostics.empty()
                                 ? std::string("unknown error")
                                 : format_diagnostic(results[i].diagnostics[0], corpus.sources[i])));
        out.push_back(std::move(*results[i].bc));
    }
    return out;
}

std::vector<std::string> lint(const Corpus& corpus) {
    std::vector<std::string> problems;
    const auto& classes = corpus.manifest.classes;
    if (corpus.sources.size() != classes.size() || corpus.tests.size() != classes.size())
        return {"manifest, sources and tests disagree in length"};
    std::set<std::string> names, ids;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        const auto& e = classes[i];
        if (!names.insert(e.qualified_name).second) problems.push_back("duplicate class " + e.qualified_name);
        for (const auto& t : e.feature_tags)
            if (std::find(tag_vocabulary().begin(), tag_vocabulary().end(), t) == tag_vocabulary().end())
                problems.push_back(e.qualified_name + ": unknown tag " + t);
        if (corpus.tests[i].empty()) problems.push_back(e.qualified_name + ": no tests");
        for (const auto& t : corpus.tests[i])
            if (!ids.insert(t.id).second) problems.push_back("duplicate test id " + t.id);
    }
    for (auto v : {compiler::CompilerVariant::A(), compiler::CompilerVariant::B()}) {
        std::vector<vm::BytecodeClass> bcs;
        try {
            bcs = compile_corpus(corpus, v);
        } catch (const ToolError& e) {
            problems.push_back(e.what());
            continue;
        }
        vm::Program program(bcs);
        for (std::size_t i = 0; i < classes.size(); ++i) {
            const auto& e = classes[i];
            auto want = tags_from_bytecode(bcs[i]);
            std::set<std::string> have(e.feature_tags.begin(), e.feature_tags.end());
            if (want != have) {
                std::string w, h;
                for (const auto& t : want) w += " " + t;
                for (const auto& t : have) h += " " + t;
                problems.push_back(e.qualified_name + " (" + v.id + "): tags [" + h + " ] but bytecode shows [" + w +
                                   " ]");
            }
            auto rep = vm::run_tests(program, corpus.tests[i]);
            for (const auto& r : rep.results)
                if (r.verdict != vm::Verdict::pass)
                    problems.push_back(r.id + " (" + v.id + ") " + std::string(vm::to_string(r.verdict)) +
                                       " on the original: " + r.detail);
        }
    }
    return problems;
}

nlohmann::json to_json(const CorpusManifest& m) {
    nlohmann::json j;
    j["seed"] = m.seed;
    j["size"] = m.size;
    j["classes"] = nlohmann::json::array();
    for (const auto& e : m.classes) {
        j["classes"].push_back({{"path", e.path},
                                {"qualified_name", e.qualified_name},
                                {"feature_tags", e.feature_tags},
                                {"test_files", e.test_files},
                                {"role", e.role},
                                {"golden", e.golden},
                                {"expected", e.expected},
                                {"expected_meta", e.expected_meta}});
    }
    return j;
}

CorpusManifest manifest_from_json(const nlohmann::json& j) {
    CorpusManifest m;
    try {
        m.seed = j.at("seed").get<std::uint64_t>();
        m.size = j.at("size").get<int>();
        for (const auto& c : j.at("classes")) {
            ClassEntry e;
            e.path = c.at("path").get<std::string>();
            e.qualified_name = c.at("qualified_name").get<std::string>();
            e.feature_tags = c.at("feature_tags").get<std::vector<std::string>>();
            e.test_files = c.at("test_files").get<std::vector<std::string>>();
            e.role = c.value("role", "");
            e.golden = c.value("golden", false);
            e.expected = c.value("expected", Expectations{});
            e.expected_meta = c.value("expected_meta", std::map<std::string, std::string>{});
            m.classes.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ToolError(std::string("malformed manifest: ") + e.what());
    }
    return m;
}

void write_corpus(const Corpus& corpus, const fs::path& dir) {
    for (std::size_t i = 0; i < corpus.manifest.classes.size(); ++i) {
        const auto& e = corpus.manifest.classes[i];
        write_file(dir / e.path, corpus.sources[i]);
        if (e.test_files.size() != 1) throw ContractViolation("write_corpus: one test file per class expected");
        write_file(dir / e.test_files[0], vm::format_tests(corpus.tests[i]));
    }
    write_file(dir / "manifest.json", to_json(corpus.manifest).dump(2) + "\n");
}

Corpus load_corpus(const fs::path& dir) {
    Corpus c;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(dir / "manifest.json"));
    } catch (const nlohmann::json::parse_error& e) {
        throw ToolError(std::string("manifest.json: ") + e.what());
    }
    c.manifest = manifest_from_json(j);
    for (const auto& e : c.manifest.classes) {
        if (!fs::exists(dir / e.path)) throw ToolError("missing corpus file " + e.path);
        c.sources.push_back(read_file(dir / e.path));
        std::vector<vm::TestCase> tests;
        for (const auto& tf : e.test_files) {
            auto more = vm::parse_tests(read_file(dir / tf));
            tests.insert(tests.end(), more.begin(), more.end());
        }
        c.tests.push_back(std::move(tests));
    }
    return c;
}

}  // namespace mdlab::harness
