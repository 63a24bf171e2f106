#include "mdlab/mdlab.h"

#include <cstring>
#include <fstream>
#include <string>

#include "mdlab/assess.hpp"
#include "mdlab/astdiff.hpp"
#include "mdlab/harness.hpp"
#include "mdlab/meta.hpp"
#include "mdlab/report.hpp"

using namespace mdlab;
namespace fs = std::filesystem;

struct mdlab_ctx {
    std::string config_text;
    harness::Config config;
    int jobs = 1;
    std::string error;
};

namespace {

// Carries a status out of a helper.
struct Failure {
    mdlab_status status;
    std::string message;
};

char* dup(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.data(), s.size() + 1);
    return p;
}

void need(const void* p, const char* what) {
    if (!p) throw Failure{MDLAB_E_ARG, std::string(what) + " is null"};
}

template <class F>
mdlab_status guarded(mdlab_ctx* ctx, F&& f) {
    if (!ctx) return MDLAB_E_ARG;
    ctx->error.clear();
    try {
        f();
        return MDLAB_OK;
    } catch (const Failure& e) {
        ctx->error = e.message;
        return e.status;
    } catch (const ContractViolation& e) {
        ctx->error = e.what();
        return MDLAB_E_CONTRACT;
    } catch (const ToolError& e) {
        ctx->error = e.what();
        return MDLAB_E_TOOL;
    } catch (const fs::filesystem_error& e) {
        ctx->error = e.what();
        return MDLAB_E_IO;
    } catch (const std::exception& e) {
        ctx->error = e.what();
        return MDLAB_E_TOOL;
    }
}

compiler::CompilerVariant variant_of(const char* id) {
    need(id, "variant");
    std::string v(id);
    if (v != "A" && v != "B") throw Failure{MDLAB_E_ARG, "unknown compiler variant " + v};
    return compiler::CompilerVariant::by_id(v);
}

lang::ClassAst parse_source(const char* text, const char* what) {
    need(text, what);
    auto r = lang::parse(text);
    if (!r.ok())
        throw Failure{MDLAB_E_PARSE, std::string(what) + ": " +
                                         (r.diagnostics.empty() ? "parse error" : format_diagnostic(r.diagnostics[0], text))};
    return *r.ast;
}

vm::BytecodeClass load_mjc(const char* text) {
    need(text, "mjc");
    auto r = vm::deserialize(text);
    if (!r.bc) throw Failure{MDLAB_E_PARSE, "mjc: " + r.error};
    return *r.bc;
}

std::vector<vm::BytecodeClass> classpath(const char* dir, const compiler::CompilerVariant& v,
                                         const std::string& exclude) {
    if (!dir) return {};
    auto corpus = harness::load_corpus(dir);
    std::vector<vm::BytecodeClass> out;
    for (auto& bc : harness::compile_corpus(corpus, v))
        if (bc.name != exclude) out.push_back(std::move(bc));
    return out;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Failure{MDLAB_E_IO, "cannot write " + p.string()};
    out << text;
}

}  // namespace

extern "C" {

const char* mdlab_version(void) { return "1.0.0"; }

const char* mdlab_status_name(mdlab_status s) {
    switch (s) {
        case MDLAB_OK: return "ok";
        case MDLAB_E_ARG: return "invalid argument";
        case MDLAB_E_IO: return "i/o error";
        case MDLAB_E_PARSE: return "parse error";
        case MDLAB_E_COMPILE: return "compile error";
        case MDLAB_E_CONTRACT: return "contract violation";
        case MDLAB_E_TOOL: return "tool fault";
        case MDLAB_E_FAILED: return "failed";
    }
    return "unknown status";
}

mdlab_status mdlab_ctx_new(const char* config_path, mdlab_ctx** out) {
    if (!out) return MDLAB_E_ARG;
    *out = nullptr;
    auto* ctx = new (std::nothrow) mdlab_ctx;
    if (!ctx) return MDLAB_E_TOOL;
    auto st = guarded(ctx, [&] {
        if (config_path) {
            std::ifstream in(config_path);
            if (!in) throw Failure{MDLAB_E_IO, std::string("cannot read config ") + config_path};
            ctx->config_text.assign(std::istreambuf_iterator<char>(in), {});
            ctx->config = harness::Config::parse(ctx->config_text);
        }
    });
    if (st != MDLAB_OK) {
        delete ctx;
        return st;
    }
    *out = ctx;
    return MDLAB_OK;
}

void mdlab_ctx_free(mdlab_ctx* ctx) { delete ctx; }

mdlab_status mdlab_ctx_set(mdlab_ctx* ctx, const char* key, const char* value) {
    return guarded(ctx, [&] {
        need(key, "key");
        need(value, "value");
        std::string text = ctx->config_text + "\n" + key + " = " + value + "\n";
        ctx->config = harness::Config::parse(text);
        ctx->config_text = std::move(text);
    });
}

void mdlab_ctx_set_jobs(mdlab_ctx* ctx, int jobs) {
    if (ctx && jobs > 0) ctx->jobs = jobs;
}

const char* mdlab_ctx_last_error(const mdlab_ctx* ctx) { return ctx ? ctx->error.c_str() : "null context"; }

void mdlab_free(char* s) { std::free(s); }

mdlab_status mdlab_gen_corpus(mdlab_ctx* ctx, const char* dir, uint64_t seed, int size) {
    return guarded(ctx, [&] {
        need(dir, "dir");
        if (size < harness::kMinCorpusSize)
            throw Failure{MDLAB_E_ARG, "corpus size must be at least " + std::to_string(harness::kMinCorpusSize)};
        harness::write_corpus(harness::gen_corpus(seed, size), dir);
    });
}

mdlab_status mdlab_lint(mdlab_ctx* ctx, const char* corpus_dir, char** problems) {
    return guarded(ctx, [&] {
        need(corpus_dir, "corpus_dir");
        need(problems, "problems");
        std::string text;
        for (const auto& p : harness::lint(harness::load_corpus(corpus_dir))) text += p + "\n";
        *problems = dup(text);
    });
}

mdlab_status mdlab_compile(mdlab_ctx* ctx, const char* source, const char* variant, const char* classpath_dir,
                           char** mjc) {
    return guarded(ctx, [&] {
        need(mjc, "mjc");
        auto v = variant_of(variant);
        auto ast = parse_source(source, "source");
        auto env = compiler::env_from_bytecode(classpath(classpath_dir, v, ast.qualified_name));
        auto r = compiler::compile(ast, v, &env);
        if (!r.ok()) {
            std::string msg;
            for (const auto& d : r.diagnostics) msg += format_diagnostic(d, source) + "\n";
            throw Failure{MDLAB_E_COMPILE, msg};
        }
        *mjc = dup(vm::serialize(*r.bc));
    });
}

mdlab_status mdlab_compile_corpus(mdlab_ctx* ctx, const char* corpus_dir, const char* variant, const char* out_dir) {
    return guarded(ctx, [&] {
        need(corpus_dir, "corpus_dir");
        need(out_dir, "out_dir");
        auto v = variant_of(variant);
        auto corpus = harness::load_corpus(corpus_dir);
        fs::create_directories(out_dir);
        for (const auto& bc : harness::compile_corpus(corpus, v))
            write_text(fs::path(out_dir) / (bc.name + ".mjc"), vm::serialize(bc));
    });
}

mdlab_status mdlab_decompile(mdlab_ctx* ctx, const char* mjc, const char* decompiler, char** source) {
    return guarded(ctx, [&] {
        need(decompiler, "decompiler");
        need(source, "source");
        auto bc = load_mjc(mjc);
        auto out = decomp::decompile(ctx->config.backend(decompiler), bc);
        if (out.empty()) throw Failure{MDLAB_E_FAILED, out.note};
        *source = dup(*out.source);
    });
}

mdlab_status mdlab_assess(mdlab_ctx* ctx, const char* source, const char* variant, const char* decompiler,
                          const char* tests, const char* classpath_dir, char** record_json) {
    return guarded(ctx, [&] {
        need(decompiler, "decompiler");
        need(record_json, "record_json");
        auto v = variant_of(variant);
        auto ast = parse_source(source, "source");
        auto cp = classpath(classpath_dir, v, ast.qualified_name);
        std::vector<vm::TestCase> tcs;
        if (tests) tcs = vm::parse_tests(tests);
        assess::Options o;
        o.fuel = ctx->config.fuel;
        o.excluded_tests = ctx->config.excluded_tests;
        auto r = assess::assess(std::string(source), v, ctx->config.backend(decompiler), tcs, cp, o);
        *record_json = dup(assess::to_json(r).dump());
    });
}

mdlab_status mdlab_meta(mdlab_ctx* ctx, const char* mjc, const char* variant, const char* classpath_dir, char** source,
                        char** result_json) {
    mdlab_status failed = MDLAB_OK;
    auto st = guarded(ctx, [&] {
        need(result_json, "result_json");
        auto v = variant_of(variant);
        auto bc = load_mjc(mjc);
        auto env = compiler::env_from_bytecode(classpath(classpath_dir, v, bc.name));
        auto r = meta::meta_decompile(bc, ctx->config.meta_order(), v, &env);
        *result_json = dup(meta::to_json(r, bc.name, v.id).dump());
        if (source) *source = r.success ? dup(r.source) : nullptr;
        if (!r.success) {
            ctx->error = "no completable solution recompiled";
            failed = MDLAB_E_FAILED;
        }
    });
    return st != MDLAB_OK ? st : failed;
}

mdlab_status mdlab_diff(mdlab_ctx* ctx, const char* original, const char* decompiled, char** script_json) {
    return guarded(ctx, [&] {
        need(script_json, "script_json");
        auto a = parse_source(original, "original");
        auto b = parse_source(decompiled, "decompiled");
        auto d = astdiff::distortion(a, b);
        nlohmann::json j;
        j["edits"] = d.edits;
        j["exact"] = d.script.exact;
        j["original_nodes"] = d.original_nodes;
        j["normalized"] = d.normalized;
        j["script"] = nlohmann::json::array();
        for (const auto& e : d.script.edits) {
            nlohmann::json x{{"kind", std::string(astdiff::to_string(e.kind))}, {"node", e.node}};
            if (e.kind == astdiff::EditKind::insert || e.kind == astdiff::EditKind::update) x["label"] = e.label;
            if (e.kind == astdiff::EditKind::insert || e.kind == astdiff::EditKind::move) {
                x["parent"] = e.parent;
                x["position"] = e.position;
            }
            if (e.kind == astdiff::EditKind::insert) x["count"] = e.count;
            j["script"].push_back(std::move(x));
        }
        *script_json = dup(j.dump());
    });
}

mdlab_status mdlab_run(mdlab_ctx* ctx, const char* corpus_dir, const char* out_dir, const char* work_dir,
                       char** report_json) {
    return guarded(ctx, [&] {
        need(corpus_dir, "corpus_dir");
        need(out_dir, "out_dir");
        auto corpus = harness::load_corpus(corpus_dir);
        auto problems = harness::lint(corpus);
        if (!problems.empty()) {
            std::string msg = "corpus lint failed:";
            for (const auto& p : problems) msg += "\n  " + p;
            throw Failure{MDLAB_E_CONTRACT, msg};
        }
        fs::path out(out_dir);
        fs::create_directories(out);
        harness::RunOptions o;
        o.jobs = ctx->jobs;
        o.records_out = out / "records.jsonl";
        o.meta_out = out / "meta.jsonl";
        if (work_dir) o.scratch = fs::path(work_dir);
        auto r = harness::run_experiment(corpus, ctx->config, o);
        if (!r.faults.empty()) {
            std::string msg = std::to_string(r.faults.size()) + " tool fault(s):";
            for (const auto& f : r.faults)
                msg += "\n  " + f.class_name + "/" + f.compiler + "/" + f.decompiler + ": " + f.message;
            write_text(out / "faults.txt", msg + "\n");
            throw Failure{MDLAB_E_TOOL, msg};
        }
        std::vector<nlohmann::json> metas;
        for (const auto& m : r.meta) metas.push_back(meta::to_json(m.result, m.class_name, m.compiler));
        auto rep = report::build(r.records, metas);
        auto text = report::canonical(rep);
        write_text(out / "report.json", text);
        write_text(out / "summary.csv", report::to_csv(report::summarize(r.records)));
        if (report_json) *report_json = dup(text);
    });
}

mdlab_status mdlab_report(mdlab_ctx* ctx, const char* records_path, const char* meta_path, char** report_json,
                          char** csv) {
    return guarded(ctx, [&] {
        need(records_path, "records_path");
        need(report_json, "report_json");
        std::vector<assess::AssessmentRecord> records;
        for (const auto& j : report::read_json_lines(records_path)) records.push_back(assess::record_from_json(j));
        std::vector<nlohmann::json> metas;
        if (meta_path) metas = report::read_json_lines(meta_path);
        auto rep = report::build(records, metas);
        *report_json = dup(report::canonical(rep));
        if (csv) *csv = dup(report::to_csv(report::summarize(records)));
    });
}

}  // extern "C"
