#include "mdlab/assess.hpp"

#include <chrono>

namespace mdlab::assess {

namespace {

constexpr const char* kNames[] = {"EmptyOutput", "NotRecompilable", "Deceptive", "EquivModuloInputs",
                                  "StrictlyEquivalent"};

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<vm::TestCase> kept_tests(const std::vector<vm::TestCase>& tests, const Options& o) {
    std::vector<vm::TestCase> out;
    for (const auto& t : tests)
        if (!o.excluded_tests.count(t.id)) out.push_back(t);
    return out;
}

}  // namespace

std::string_view to_string(Category c) { return kNames[static_cast<int>(c)]; }

std::optional<Category> category_from_string(std::string_view s) {
    for (int i = 0; i < 5; ++i)
        if (s == kNames[i]) return static_cast<Category>(i);
    return std::nullopt;
}

TestCounts count_tests(const vm::TestReport& report) {
    TestCounts c;
    c.pass = report.count(vm::Verdict::pass);
    c.fail = report.count(vm::Verdict::fail) + report.count(vm::Verdict::crash);
    c.timeout = report.count(vm::Verdict::timeout);
    return c;
}

Category classify(const StageFacts& f) {
    if (!f.has_output) {
        if (f.recompiled || f.bytecode_identical || f.tests)
            throw ContractViolation("classify: later stages present without decompiler output");
        return Category::EmptyOutput;
    }
    if (!f.recompiled) {
        if (f.bytecode_identical || f.tests)
            throw ContractViolation("classify: bytecode or tests present without recompilation");
        return Category::NotRecompilable;
    }
    if (!f.bytecode_identical) throw ContractViolation("classify: recompiled without bytecode comparison");
    if (f.tests && f.tests->results.empty()) throw ContractViolation("classify: empty test report");
    bool failed = false;
    if (f.tests) {
        auto c = count_tests(*f.tests);
        failed = c.fail + c.timeout > 0;
    }
    if (*f.bytecode_identical) {
        if (failed) throw ContractViolation("classify: identical bytecode but failing tests");
        return Category::StrictlyEquivalent;
    }
    if (!f.tests) throw ContractViolation("classify: bytecode differs and no tests decide the class");
    return failed ? Category::Deceptive : Category::EquivModuloInputs;
}

AssessmentRecord assess_output(const Subject& subject, const compiler::CompilerVariant& variant,
                               const std::string& decompiler_name, const std::optional<std::string>& source,
                               const std::vector<vm::BytecodeClass>& classpath, const Options& options) {
    auto t0 = std::chrono::steady_clock::now();
    AssessmentRecord r;
    r.class_name = subject.ast.qualified_name;
    r.compiler = variant.id;
    r.decompiler = decompiler_name;
    r.source = source;
    StageFacts facts;
    facts.has_output = source.has_value();
    if (!source) {
        r.category = classify(facts);
        r.elapsed_ms = ms_since(t0);
        return r;
    }

    r.distortion = astdiff::distortion(subject.ast, *source);

    std::vector<vm::BytecodeClass> others;
    for (const auto& c : classpath)
        if (c.name != subject.bytecode.name) others.push_back(c);
    auto env = compiler::env_from_bytecode(others);
    auto rc = compiler::recompile_check(*source, variant, &env);
    r.diagnostics = rc.diagnostics;
    facts.recompiled = rc.pass;
    if (!rc.pass) {
        if (!rc.diagnostics.empty()) r.note = rc.diagnostics.front().message;
        r.category = classify(facts);
        r.elapsed_ms = ms_since(t0);
        return r;
    }
    r.recompiled = rc.bc;

    auto diff = vm::bytecode_equal(vm::canonicalize_pool(subject.bytecode), vm::canonicalize_pool(*rc.bc));
    r.bytecode_identical = diff.equal;
    facts.bytecode_identical = diff.equal;

    auto tests = kept_tests(subject.tests, options);
    if (!tests.empty()) {
        vm::Program program(others);
        program.add(*rc.bc);
        r.test_report = vm::run_tests(program, tests, options.fuel);
        facts.tests = &*r.test_report;
    }
    r.category = classify(facts);
    r.elapsed_ms = ms_since(t0);
    return r;
}

AssessmentRecord assess(const Subject& subject, const compiler::CompilerVariant& variant,
                        const decomp::DecompilerSpec& decompiler, const std::vector<vm::BytecodeClass>& classpath,
                        const Options& options) {
    auto t0 = std::chrono::steady_clock::now();
    auto out = decomp::decompile(decompiler, subject.bytecode);
    auto r = assess_output(subject, variant, decompiler.name, out.source, classpath, options);
    if (out.empty()) r.note = out.note;
    r.elapsed_ms = ms_since(t0);
    return r;
}

AssessmentRecord assess(const std::string& class_src, const compiler::CompilerVariant& variant,
                        const decomp::DecompilerSpec& decompiler, const std::vector<vm::TestCase>& tests,
                        const std::vector<vm::BytecodeClass>& classpath, const Options& options) {
    auto parsed = lang::parse(class_src);
    if (!parsed.ok())
        throw ContractViolation("assess: subject does not parse: " +
                                (parsed.diagnostics.empty() ? std::string() : parsed.diagnostics[0].message));
    auto env = compiler::env_from_bytecode(classpath);
    auto cr = compiler::compile(*parsed.ast, variant, &env);
    if (!cr.ok())
        throw ContractViolation("assess: subject does not compile: " +
                                (cr.diagnostics.empty() ? std::string() : cr.diagnostics[0].message));
    Subject s{*parsed.ast, *cr.bc, tests};
    return assess(s, variant, decompiler, classpath, options);
}

nlohmann::json to_json(const AssessmentRecord& r) {
    nlohmann::json j;
    j["class"] = r.class_name;
    j["compiler"] = r.compiler;
    j["decompiler"] = r.decompiler;
    j["category"] = std::string(to_string(r.category));
    if (r.distortion)
        j["distortion"] = {{"edits", r.distortion->edits},
                           {"nodes", r.distortion->original_nodes},
                           {"normalized", r.distortion->normalized}};
    else
        j["distortion"] = nullptr;
    j["bytecode_identical"] = r.bytecode_identical ? nlohmann::json(*r.bytecode_identical) : nlohmann::json(nullptr);
    if (r.test_report) {
        auto c = count_tests(*r.test_report);
        j["tests"] = {{"pass", c.pass}, {"fail", c.fail}, {"timeout", c.timeout}};
    } else {
        j["tests"] = nullptr;
    }
    j["elapsed_ms"] = r.elapsed_ms;
    return j;
}

AssessmentRecord record_from_json(const nlohmann::json& j) {
    AssessmentRecord r;
    try {
        r.class_name = j.at("class").get<std::string>();
        r.compiler = j.at("compiler").get<std::string>();
        r.decompiler = j.at("decompiler").get<std::string>();
        auto cat = category_from_string(j.at("category").get<std::string>());
        if (!cat) throw ToolError("unknown category " + j.at("category").dump());
        r.category = *cat;
        if (!j.at("distortion").is_null()) {
            astdiff::Distortion d;
            d.edits = j["distortion"].at("edits").get<int>();
            d.original_nodes = j["distortion"].at("nodes").get<int>();
            d.normalized = j["distortion"].at("normalized").get<double>();
            r.distortion = d;
        }
        if (!j.at("bytecode_identical").is_null()) r.bytecode_identical = j["bytecode_identical"].get<bool>();
        if (!j.at("tests").is_null()) {
            vm::TestReport rep;
            auto add = [&](const char* key, vm::Verdict v) {
                for (int i = 0, n = j["tests"].at(key).get<int>(); i < n; ++i) rep.results.push_back({"", v, ""});
            };
            add("pass", vm::Verdict::pass);
            add("fail", vm::Verdict::fail);
            add("timeout", vm::Verdict::timeout);
            r.test_report = std::move(rep);
        }
        if (j.contains("elapsed_ms")) r.elapsed_ms = j["elapsed_ms"].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ToolError(std::string("malformed record: ") + e.what());
    }
    return r;
}

}  // namespace mdlab::assess
