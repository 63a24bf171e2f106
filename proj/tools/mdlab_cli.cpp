#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mdlab/mdlab.h"

namespace fs = std::filesystem;

namespace {

struct Owned {
    char* p = nullptr;
    ~Owned() { mdlab_free(p); }
    std::string str() const { return p ? p : ""; }
};

std::string slurp(const std::string& path) {
    std::ostringstream ss;
    if (path == "-") {
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CLI::ValidationError("cannot read " + path);
    ss << in.rdbuf();
    return ss.str();
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw CLI::ValidationError("cannot write " + out_path);
    out << text;
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

int fail(mdlab_ctx* ctx, mdlab_status st) {
    if (st != MDLAB_OK) std::cerr << "mdlab: " << mdlab_status_name(st) << ": " << mdlab_ctx_last_error(ctx) << "\n";
    return static_cast<int>(st);
}

int usage(const std::string& msg) {
    std::cerr << "mdlab: " << msg << "\n";
    return MDLAB_E_ARG;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decompiler assessment lab"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", mdlab_version());

    std::string config_path, corpus, out, order;
    std::vector<std::string> settings;
    int jobs = 1, ext_timeout = 0;
    std::uint64_t seed = 1;
    app.add_option("--config", config_path, "configuration file")->check(CLI::ExistingFile);
    app.add_option("--corpus", corpus, "corpus directory");
    app.add_option("--jobs,-j", jobs, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "generator seed");
    app.add_option("--out,-o", out, "output file or directory");
    app.add_option("--ext-timeout-secs", ext_timeout, "timeout for external decompilers (default 60)")
        ->check(CLI::PositiveNumber);
    app.add_option("--set", settings, "override one configuration key, key=value");

    std::vector<std::string> inputs;
    std::string input2, tests, variant = "A", decompiler = "literalist", records, meta_rows, csv, work;
    int size = 60;

    auto* gen = app.add_subcommand("gen-corpus", "generate a seeded corpus into --out");
    gen->add_option("--size", size, "number of classes");

    auto* lint = app.add_subcommand("lint", "check the --corpus");

    auto* comp = app.add_subcommand("compile", "compile source files, or the whole --corpus into --out");
    comp->add_option("sources", inputs, "source files (- for stdin)");
    comp->add_option("--variant,--compiler,-c", variant, "A or B");

    auto* dec = app.add_subcommand("decompile", "decompile a class file");
    dec->add_option("class", inputs, "class file or -")->required()->expected(1);
    dec->add_option("--decompiler,-d", decompiler, "backend name");

    auto* ass = app.add_subcommand("assess", "assess one decompiler on one source class");
    ass->add_option("source", inputs, "source file")->required()->expected(1);
    ass->add_option("--variant,--compiler,-c", variant, "A or B");
    ass->add_option("--decompiler,-d", decompiler, "backend name");
    ass->add_option("--tests", tests, "test file");

    auto* met = app.add_subcommand("meta", "meta-decompile a class file");
    met->add_option("class", inputs, "class file or -")->required()->expected(1);
    met->add_option("--variant,--compiler,-c", variant, "compiler that produced the class");
    met->add_option("--order", order, "backend order, comma separated");

    auto* dif = app.add_subcommand("diff", "edit script between two sources");
    dif->add_option("original", inputs, "original source")->required()->expected(1);
    dif->add_option("decompiled", input2, "decompiled source")->required();

    auto* run = app.add_subcommand("run", "run the experiment on --corpus into --out");
    run->add_option("--work", work, "scratch directory");

    auto* rep = app.add_subcommand("report", "summarize record files");
    rep->add_option("--records", records, "records.jsonl")->required()->check(CLI::ExistingFile);
    rep->add_option("--meta", meta_rows, "meta.jsonl")->check(CLI::ExistingFile);
    rep->add_option("--csv", csv, "summary CSV file");

    CLI11_PARSE(app, argc, argv);

    mdlab_ctx* raw = nullptr;
    if (auto st = mdlab_ctx_new(opt(config_path), &raw); st != MDLAB_OK) {
        std::cerr << "mdlab: " << mdlab_status_name(st) << ": cannot load configuration\n";
        return st;
    }
    std::unique_ptr<mdlab_ctx, void (*)(mdlab_ctx*)> ctx(raw, mdlab_ctx_free);
    mdlab_ctx_set_jobs(raw, jobs);
    if (ext_timeout > 0) settings.push_back("external_timeout=" + std::to_string(ext_timeout));
    if (!order.empty()) settings.push_back("order=" + order);
    for (const auto& s : settings) {
        auto eq = s.find('=');
        if (eq == std::string::npos) return usage("--set expects key=value, got " + s);
        if (auto st = mdlab_ctx_set(raw, s.substr(0, eq).c_str(), s.substr(eq + 1).c_str()); st != MDLAB_OK)
            return fail(raw, st);
    }

    try {
        if (gen->parsed()) {
            if (out.empty()) return usage("gen-corpus needs --out");
            return fail(raw, mdlab_gen_corpus(raw, out.c_str(), seed, size));
        }

        if (lint->parsed()) {
            if (corpus.empty()) return usage("lint needs --corpus");
            Owned problems;
            if (auto st = mdlab_lint(raw, corpus.c_str(), &problems.p); st != MDLAB_OK) return fail(raw, st);
            std::cout << problems.str();
            return problems.str().empty() ? 0 : static_cast<int>(MDLAB_E_FAILED);
        }

        if (comp->parsed()) {
            if (inputs.empty()) {
                if (corpus.empty() || out.empty()) return usage("compile needs source files or --corpus with --out");
                return fail(raw, mdlab_compile_corpus(raw, corpus.c_str(), variant.c_str(), out.c_str()));
            }
            if (!out.empty()) fs::create_directories(out);
            for (const auto& in : inputs) {
                auto src = slurp(in);
                Owned mjc;
                auto st = mdlab_compile(raw, src.c_str(), variant.c_str(), opt(corpus), &mjc.p);
                if (st != MDLAB_OK) return fail(raw, st);
                auto stem = in == "-" ? std::string("stdin") : fs::path(in).stem().string();
                emit(mjc.str(), out.empty() ? "" : (fs::path(out) / (stem + ".mjc")).string());
            }
            return 0;
        }

        if (dec->parsed()) {
            auto mjc = slurp(inputs[0]);
            Owned src;
            auto st = mdlab_decompile(raw, mjc.c_str(), decompiler.c_str(), &src.p);
            if (st == MDLAB_OK) emit(src.str(), out);
            return fail(raw, st);
        }

        if (ass->parsed()) {
            auto src = slurp(inputs[0]);
            std::string tj = tests.empty() ? std::string() : slurp(tests);
            Owned rec;
            auto st = mdlab_assess(raw, src.c_str(), variant.c_str(), decompiler.c_str(), opt(tj), opt(corpus), &rec.p);
            if (st == MDLAB_OK) std::cout << rec.str() << "\n";
            return fail(raw, st);
        }

        if (met->parsed()) {
            auto mjc = slurp(inputs[0]);
            Owned src, result;
            auto st = mdlab_meta(raw, mjc.c_str(), variant.c_str(), opt(corpus), &src.p, &result.p);
            if (result.p) std::cerr << result.str() << "\n";
            if (st == MDLAB_OK) emit(src.str(), out);
            return fail(raw, st);
        }

        if (dif->parsed()) {
            auto a = slurp(inputs[0]), b = slurp(input2);
            Owned script;
            auto st = mdlab_diff(raw, a.c_str(), b.c_str(), &script.p);
            if (st == MDLAB_OK) std::cout << script.str() << "\n";
            return fail(raw, st);
        }

        if (run->parsed()) {
            if (corpus.empty() || out.empty()) return usage("run needs --corpus and --out");
            auto st = mdlab_run(raw, corpus.c_str(), out.c_str(), opt(work), nullptr);
            if (st == MDLAB_OK) std::cerr << "mdlab: wrote " << (fs::path(out) / "report.json").string() << "\n";
            return fail(raw, st);
        }

        if (rep->parsed()) {
            Owned report, table;
            auto st = mdlab_report(raw, records.c_str(), opt(meta_rows), &report.p, &table.p);
            if (st != MDLAB_OK) return fail(raw, st);
            emit(report.str(), out);
            if (!csv.empty()) emit(table.str(), csv);
            return 0;
        }
    } catch (const CLI::Error& e) {
        std::cerr << "mdlab: " << e.what() << "\n";
        return MDLAB_E_IO;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "mdlab: " << e.what() << "\n";
        return MDLAB_E_IO;
    }
    return 0;
}
