#include <atomic>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <thread>

#include "mdlab/harness.hpp"

namespace mdlab::harness {

namespace fs = std::filesystem;

namespace {

struct Task {
    std::size_t cls = 0;
    std::size_t comp = 0;
    int dec = -1;  // -1: meta
};

struct Slot {
    std::optional<assess::AssessmentRecord> record;
    std::optional<MetaRow> meta;
    std::optional<ToolFault> fault;
    bool done = false;
};

void write_scratch(const fs::path& root, const assess::AssessmentRecord& r) {
    auto dir = root / r.class_name / r.compiler / r.decompiler;
    fs::create_directories(dir);
    if (r.source) std::ofstream(dir / "decompiled.mj") << *r.source;
    if (r.recompiled) std::ofstream(dir / "recompiled.mjc") << vm::serialize(*r.recompiled);
    std::ofstream diag(dir / "diagnostics.txt");
    if (!r.note.empty()) diag << r.note << "\n";
    for (const auto& d : r.diagnostics) diag << d.span.begin << "-" << d.span.end << ": " << d.message << "\n";
}

}  // namespace

ExperimentResult run_experiment(const Corpus& corpus, const Config& config, const RunOptions& options) {
    if (options.jobs < 1) throw ContractViolation("run_experiment: jobs must be positive");
    std::vector<compiler::CompilerVariant> variants;
    for (const auto& id : config.compilers) variants.push_back(compiler::CompilerVariant::by_id(id));
    auto backends = config.backends();
    auto order = config.meta_order();

    std::vector<std::vector<vm::BytecodeClass>> compiled;
    for (const auto& v : variants) compiled.push_back(compile_corpus(corpus, v));
    std::vector<lang::ClassAst> asts;
    for (const auto& s : corpus.sources) asts.push_back(*lang::parse(s).ast);

    std::vector<Task> tasks;
    for (std::size_t c = 0; c < corpus.sources.size(); ++c)
        for (std::size_t v = 0; v < variants.size(); ++v) {
            for (std::size_t d = 0; d < backends.size(); ++d) tasks.push_back({c, v, static_cast<int>(d)});
            if (config.run_meta) tasks.push_back({c, v, -1});
        }

    assess::Options aopt;
    aopt.fuel = config.fuel;
    aopt.excluded_tests = config.excluded_tests;

    std::vector<Slot> slots(tasks.size());
    std::mutex mu;
    std::condition_variable cv;
    std::atomic<std::size_t> next{0};

    auto work = [&]() {
        for (;;) {
            std::size_t i = next++;
            if (i >= tasks.size()) return;
            const auto& t = tasks[i];
            const auto& v = variants[t.comp];
            const auto& cp = compiled[t.comp];
            assess::Subject subject{asts[t.cls], cp[t.cls], corpus.tests[t.cls]};
            Slot s;
            std::string dname = t.dec < 0 ? "meta" : backends[static_cast<std::size_t>(t.dec)].name;
            try {
                if (t.dec >= 0) {
                    s.record = assess::assess(subject, v, backends[static_cast<std::size_t>(t.dec)], cp, aopt);
                } else {
                    std::vector<vm::BytecodeClass> others;
                    for (std::size_t k = 0; k < cp.size(); ++k)
                        if (k != t.cls) others.push_back(cp[k]);
                    auto env = compiler::env_from_bytecode(others);
                    auto m = meta::meta_decompile(cp[t.cls], order, v, &env);
                    std::optional<std::string> src;
                    if (m.success) src = m.source;
                    s.record = assess::assess_output(subject, v, "meta", src, cp, aopt);
                    s.meta = MetaRow{subject.ast.qualified_name, v.id, std::move(m)};
                }
                if (options.scratch) write_scratch(*options.scratch, *s.record);
            } catch (const std::exception& e) {
                s.record.reset();
                s.meta.reset();
                s.fault = ToolFault{subject.ast.qualified_name, v.id, dname, e.what()};
            }
            s.done = true;
            {
                std::lock_guard<std::mutex> lock(mu);
                slots[i] = std::move(s);
            }
            cv.notify_one();
        }
    };

    std::optional<std::ofstream> rec_out, meta_out;
    if (options.records_out) {
        rec_out.emplace(*options.records_out);
        if (!*rec_out) throw ToolError("cannot write " + options.records_out->string());
    }
    if (options.meta_out) {
        meta_out.emplace(*options.meta_out);
        if (!*meta_out) throw ToolError("cannot write " + options.meta_out->string());
    }

    std::vector<std::thread> pool;
    int n = std::min<int>(options.jobs, static_cast<int>(std::max<std::size_t>(tasks.size(), 1)));
    for (int k = 0; k < n; ++k) pool.emplace_back(work);

    ExperimentResult result;
    for (std::size_t flushed = 0; flushed < tasks.size(); ++flushed) {
        Slot s;
        {
            std::unique_lock<std::mutex> lock(mu);
            cv.wait(lock, [&] { return slots[flushed].done; });
            s = std::move(slots[flushed]);
        }
        if (s.record) {
            if (rec_out) *rec_out << assess::to_json(*s.record).dump() << "\n" << std::flush;
            s.record->source.reset();
            s.record->recompiled.reset();
            result.records.push_back(std::move(*s.record));
        }
        if (s.meta) {
            if (meta_out)
                *meta_out << meta::to_json(s.meta->result, s.meta->class_name, s.meta->compiler).dump() << "\n"
                          << std::flush;
            result.meta.push_back(std::move(*s.meta));
        }
        if (s.fault) result.faults.push_back(std::move(*s.fault));
    }
    for (auto& th : pool) th.join();
    return result;
}

}  // namespace mdlab::harness
