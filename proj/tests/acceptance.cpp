// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mdlab/assess.hpp"
#include "mdlab/astdiff.hpp"
#include "mdlab/decomp.hpp"
#include "mdlab/harness.hpp"
#include "mdlab/meta.hpp"
#include "mdlab/report.hpp"
#include "report_fixture.hpp"
#include "tree_oracle.hpp"

using namespace mdlab;
using assess::Category;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void verdict(int n, bool ok, const std::string& detail) {
    std::cout << "criterion " << n << ": " << (ok ? "PASS" : "FAIL") << "  " << detail << std::endl;
    if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string secs(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2fs", s);
    return buf;
}

bool passes(Category c) { return c == Category::StrictlyEquivalent || c == Category::EquivModuloInputs; }

struct Run {
    harness::Corpus corpus;
    harness::ExperimentResult result;
    std::map<std::string, const assess::AssessmentRecord*> by_key;
    std::map<std::string, const meta::MetaResult*> meta_by_key;
    std::string canonical;
    double seconds = 0;

    const assess::AssessmentRecord* rec(const std::string& cls, const std::string& comp, const std::string& dec) const {
        auto it = by_key.find(cls + "/" + comp + "/" + dec);
        return it == by_key.end() ? nullptr : it->second;
    }
};

std::string canonical_of(const harness::ExperimentResult& r) {
    std::vector<nlohmann::json> metas;
    for (const auto& m : r.meta) metas.push_back(meta::to_json(m.result, m.class_name, m.compiler));
    return report::canonical(report::build(r.records, metas));
}

void index(Run& run) {
    for (const auto& r : run.result.records) run.by_key[r.class_name + "/" + r.compiler + "/" + r.decompiler] = &r;
    for (const auto& m : run.result.meta) run.meta_by_key[m.class_name + "/" + m.compiler] = &m.result;
}

const std::vector<std::string> kCompilers{"A", "B"};
const std::vector<std::string> kBackends{"literalist", "sugarer", "optimist"};

// 1: seeded corpus, full grid, golden labels, wall time.
void criterion1(Run& run, const fs::path& root) {
    auto t0 = Clock::now();
    auto dir = root / "corpus";
    harness::write_corpus(harness::gen_corpus(1, 60), dir);
    run.corpus = harness::load_corpus(dir);
    auto problems = harness::lint(run.corpus);
    harness::RunOptions o;
    o.jobs = 8;
    o.records_out = root / "records.jsonl";
    o.meta_out = root / "meta.jsonl";
    run.result = harness::run_experiment(run.corpus, harness::Config{}, o);
    run.seconds = seconds_since(t0);
    index(run);
    run.canonical = canonical_of(run.result);

    std::size_t cells = 0, missing = 0;
    int golden_ok = 0, golden_total = 0;
    for (const auto& e : run.corpus.manifest.classes) {
        bool ok = true;
        for (const auto& c : kCompilers) {
            for (const auto& d : kBackends) {
                ++cells;
                const auto* r = run.rec(e.qualified_name, c, d);
                if (!r) {
                    ++missing;
                    ok = false;
                    continue;
                }
                if (e.golden && std::string(assess::to_string(r->category)) != e.expected.at(harness::cell_key(c, d))) {
                    std::cout << "    golden mismatch " << e.qualified_name << " " << c << "/" << d << ": got "
                              << assess::to_string(r->category) << ", labeled " << e.expected.at(harness::cell_key(c, d))
                              << "\n";
                    ok = false;
                }
            }
            if (e.golden) {
                auto it = run.meta_by_key.find(e.qualified_name + "/" + c);
                std::string got = it == run.meta_by_key.end() ? "missing" : it->second->success ? "success" : "failure";
                if (got != e.expected_meta.at(c)) {
                    std::cout << "    golden meta mismatch " << e.qualified_name << " " << c << ": " << got << "\n";
                    ok = false;
                }
            }
        }
        if (e.golden) {
            ++golden_total;
            golden_ok += ok;
        }
    }
    bool ok = problems.empty() && run.result.faults.empty() && run.corpus.manifest.classes.size() == 60 &&
              missing == 0 && cells == 360 && golden_total == 12 && golden_ok == 12 && run.seconds < 60;
    verdict(1, ok,
            "classes=" + std::to_string(run.corpus.manifest.classes.size()) + " cells=" + std::to_string(cells) +
                " missing=" + std::to_string(missing) + " lint=" + std::to_string(problems.size()) +
                " faults=" + std::to_string(run.result.faults.size()) + " golden=" + std::to_string(golden_ok) + "/" +
                std::to_string(golden_total) + " time=" + secs(run.seconds));
}

// 2: straight-line classes are strictly equivalent under the literalist.
void criterion2(const Run& run) {
    int n = 0, ok = 0;
    for (const auto& e : run.corpus.manifest.classes) {
        if (std::find(e.feature_tags.begin(), e.feature_tags.end(), "straight-line") == e.feature_tags.end()) continue;
        for (const auto& c : kCompilers) {
            ++n;
            const auto* r = run.rec(e.qualified_name, c, "literalist");
            if (r && r->category == Category::StrictlyEquivalent)
                ++ok;
            else
                std::cout << "    " << e.qualified_name << " " << c << ": "
                          << (r ? assess::to_string(r->category) : "missing") << "\n";
        }
    }
    verdict(2, n > 0 && ok == n, "straight-line cells StrictlyEquivalent " + std::to_string(ok) + "/" + std::to_string(n));
}

// 3: tree diff against a brute-force oracle, plus identity and replay on the corpus.
void criterion3(const Run& run) {
    auto t0 = Clock::now();
    const std::vector<std::string> abc{"a", "b", "c"};
    std::mt19937 rng(2024);
    int agree = 0, replay_ok = 0;
    const int pairs = 500;
    for (int k = 0; k < pairs; ++k) {
        auto [a, b] = oracle::random_pair(rng, 6, 4, abc);
        int want = oracle::distance(a, b, abc, 4);
        auto s = astdiff::edit_distance(a, b);
        if (want >= 0 && s.cost() == want) ++agree;
        else std::cout << "    oracle mismatch " << astdiff::to_string(a) << " -> " << astdiff::to_string(b) << "\n";
        if (astdiff::to_string(astdiff::apply(a, s)) == astdiff::to_string(b)) ++replay_ok;
    }

    int asts = 0, identity = 0, replays = 0, replay_total = 0;
    for (std::size_t i = 0; i < run.corpus.sources.size(); ++i) {
        auto parsed = lang::parse(run.corpus.sources[i]);
        if (!parsed.ok()) continue;
        ++asts;
        auto ta = astdiff::to_tree(astdiff::normalize_names(*parsed.ast));
        identity += astdiff::edit_distance(ta, ta).cost() == 0;
    }
    for (const auto& c : kCompilers) {
        auto v = compiler::CompilerVariant::by_id(c);
        auto bcs = harness::compile_corpus(run.corpus, v);
        for (std::size_t i = 0; i < bcs.size(); ++i) {
            auto orig = lang::parse(run.corpus.sources[i]);
            auto ta = astdiff::to_tree(astdiff::normalize_names(*orig.ast));
            for (const auto& d : kBackends) {
                auto out = decomp::decompile(*decomp::builtin_by_name(d), bcs[i]);
                if (out.empty()) continue;
                auto dec = lang::parse(*out.source);
                if (!dec.ok()) continue;
                auto tb = astdiff::to_tree(astdiff::normalize_names(*dec.ast));
                ++replay_total;
                auto s = astdiff::edit_distance(ta, tb);
                replays += astdiff::to_string(astdiff::apply(ta, s)) == astdiff::to_string(tb);
            }
        }
    }
    double t = seconds_since(t0);
    bool ok = agree == pairs && replay_ok == pairs && identity == asts &&
              asts == static_cast<int>(run.corpus.sources.size()) && replays == replay_total && t < 30;
    verdict(3, ok,
            "oracle=" + std::to_string(agree) + "/" + std::to_string(pairs) + " replay(random)=" +
                std::to_string(replay_ok) + "/" + std::to_string(pairs) + " identity=" + std::to_string(identity) + "/" +
                std::to_string(asts) + " replay(corpus)=" + std::to_string(replays) + "/" +
                std::to_string(replay_total) + " time=" + secs(t));
}

// 4: the loop/try/break class under the sugarer.
void criterion4(const Run& run) {
    const auto& src = run.corpus.sources[run.corpus.index_of("golden.Foo")];
    auto ast = *lang::parse(src).ast;
    auto bc = *compiler::compile(ast, compiler::CompilerVariant::A()).bc;
    auto out = decomp::decompile(decomp::sugarer(), bc);
    if (out.empty()) {
        verdict(4, false, "sugarer produced no output: " + out.note);
        return;
    }
    auto d = astdiff::distortion(ast, *out.source);
    if (!d) {
        verdict(4, false, "sugarer output does not parse");
        return;
    }
    const auto& s = d->script;
    int mv = s.count(astdiff::EditKind::move), rm = s.count(astdiff::EditKind::remove);
    bool ok = s.cost() == 3 && mv == 1 && rm == 2;
    verdict(4, ok,
            "edits=" + std::to_string(s.cost()) + " moves=" + std::to_string(mv) + " deletes=" + std::to_string(rm) +
                " exact=" + (s.exact ? "yes" : "no"));
}

Category category_for(decomp::FailureMode m) {
    switch (m) {
        case decomp::FailureMode::empty_output: return Category::EmptyOutput;
        case decomp::FailureMode::syntactic_error: return Category::NotRecompilable;
        case decomp::FailureMode::deceptive: return Category::Deceptive;
    }
    return Category::EmptyOutput;
}

// 5: every backend has something only it gets right, each declared weakness
// fires as declared, and the sugarer has a compiler-dependent class.
void criterion5(const Run& run) {
    bool ok = true;
    std::ostringstream detail;

    std::vector<assess::AssessmentRecord> base;
    for (const auto& r : run.result.records)
        if (r.decompiler != "meta") base.push_back(r);
    auto ov = report::overlap(base);
    detail << "unique";
    for (const auto& d : kBackends) {
        long n = ov.unique_success.count(d) ? ov.unique_success.at(d) : 0;
        detail << " " << d << "=" << n;
        ok = ok && n > 0;
    }

    std::map<std::string, std::vector<vm::BytecodeClass>> bcs;
    for (const auto& c : kCompilers) bcs[c] = harness::compile_corpus(run.corpus, compiler::CompilerVariant::by_id(c));
    int fired = 0, declared = 0;
    for (const auto& d : kBackends) {
        auto spec = *decomp::builtin_by_name(d);
        for (const auto& w : spec.failure_profile) {
            ++declared;
            int witnesses = 0, agreeing = 0;
            for (const auto& c : kCompilers)
                for (std::size_t i = 0; i < bcs[c].size(); ++i) {
                    auto pred = decomp::predicted_failures(spec, bcs[c][i]);
                    if (pred.size() != 1 || pred[0].shape != w.shape) continue;
                    ++witnesses;
                    const auto* r = run.rec(run.corpus.manifest.classes[i].qualified_name, c, d);
                    agreeing += r && r->category == category_for(w.mode);
                }
            bool fires = witnesses > 0 && agreeing == witnesses;
            if (!fires)
                std::cout << "    " << d << " weakness " << w.shape << " (" << decomp::to_string(w.mode)
                          << "): " << agreeing << "/" << witnesses << " witnesses agree\n";
            fired += fires;
        }
    }
    ok = ok && declared > 0 && fired == declared;
    detail << " weaknesses=" << fired << "/" << declared;

    int split = 0;
    for (const auto& e : run.corpus.manifest.classes) {
        const auto* a = run.rec(e.qualified_name, "A", "sugarer");
        const auto* b = run.rec(e.qualified_name, "B", "sugarer");
        split += a && b && passes(a->category) && !passes(b->category);
    }
    ok = ok && split > 0;
    detail << " sugarer A-pass/B-fail classes=" << split;
    verdict(5, ok, detail.str());
}

// 6: meta-decompilation on the disjoint and same-member classes, run standalone.
void criterion6(const Run& run) {
    auto t0 = Clock::now();
    harness::Config cfg;
    int disjoint = 0, disjoint_ok = 0, same = 0, same_failed = 0;
    for (const auto& c : kCompilers) {
        auto v = compiler::CompilerVariant::by_id(c);
        auto bcs = harness::compile_corpus(run.corpus, v);
        for (std::size_t i = 0; i < bcs.size(); ++i) {
            const auto& e = run.corpus.manifest.classes[i];
            if (e.role != "disjoint" && e.role != "same-member") continue;
            std::vector<vm::BytecodeClass> cp;
            for (std::size_t j = 0; j < bcs.size(); ++j)
                if (j != i) cp.push_back(bcs[j]);
            auto env = compiler::env_from_bytecode(cp);
            auto r = meta::meta_decompile(bcs[i], cfg.meta_order(), v, &env);
            if (e.role == "same-member") {
                ++same;
                same_failed += !r.success;
                continue;
            }
            ++disjoint;
            if (!r.success) {
                std::cout << "    meta failed on " << e.qualified_name << " " << c << "\n";
                continue;
            }
            assess::Subject subject{*lang::parse(run.corpus.sources[i]).ast, bcs[i], run.corpus.tests[i]};
            auto rec = assess::assess_output(subject, v, "meta", r.source, cp);
            if (passes(rec.category) && r.decompilers_used >= 2)
                ++disjoint_ok;
            else
                std::cout << "    " << e.qualified_name << " " << c << ": " << assess::to_string(rec.category)
                          << " used=" << r.decompilers_used << "\n";
        }
    }
    double t = seconds_since(t0);
    bool ok = disjoint >= 20 && disjoint_ok == disjoint && same >= 6 && same_failed == same && t < 60;
    verdict(6, ok,
            "disjoint " + std::to_string(disjoint_ok) + "/" + std::to_string(disjoint) +
                " succeed and pass tests, same-member " + std::to_string(same_failed) + "/" + std::to_string(same) +
                " fail (cells over both compilers) time=" + secs(t));
}

// 7: the setter and overload bugs are classified Deceptive.
void criterion7(const Run& run) {
    bool ok = true;
    int timeouts = 0;
    std::ostringstream detail;
    for (const char* cls : {"golden.Counter", "golden.Dispatch"})
        for (const auto& c : kCompilers) {
            const auto* r = run.rec(cls, c, "optimist");
            bool dec = r && r->category == Category::Deceptive;
            ok = ok && dec;
            detail << cls << "/" << c << "=" << (r ? assess::to_string(r->category) : "missing") << " ";
            if (r && r->test_report && std::string(cls) == "golden.Dispatch") {
                auto n = assess::count_tests(*r->test_report);
                timeouts += n.timeout > 0;
            }
        }
    ok = ok && timeouts == 2;
    detail << "overload cells with a timeout=" << timeouts << "/2";
    verdict(7, ok, detail.str());
}

// 8: job count does not change the canonical report.
void criterion8(const Run& run, const fs::path& root) {
    harness::RunOptions o;
    o.jobs = 1;
    o.records_out = root / "records.serial.jsonl";
    auto serial = harness::run_experiment(run.corpus, harness::Config{}, o);
    auto text = canonical_of(serial);
    std::size_t first_diff = 0;
    while (first_diff < text.size() && first_diff < run.canonical.size() && text[first_diff] == run.canonical[first_diff])
        ++first_diff;
    bool same = text == run.canonical;
    verdict(8, same,
            std::string("jobs 1 vs 8 canonical JSON ") + (same ? "byte-identical" : "differs at byte " + std::to_string(first_diff)) +
                " (" + std::to_string(text.size()) + " bytes)");
}

std::string ratio3(long num, long den) {
    if (den == 0) return "null";
    long long scaled = (static_cast<long long>(num) * 1000 * 2 + den) / (2LL * den);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld.%03lld", scaled / 1000, scaled % 1000);
    return buf;
}

// 9: summary arithmetic on the real run and on the hand-tallied fixture.
void criterion9(const Run& run) {
    auto table = report::summarize(run.result.records);
    auto violations = report::check_invariants(table);
    int mismatches = 0;

    std::map<std::string, std::map<Category, long>> counts;
    for (const auto& r : run.result.records) ++counts[r.decompiler][r.category];
    for (const auto& row : table.rows) {
        const auto& c = counts[row.decompiler];
        auto get = [&](Category k) { return c.count(k) ? c.at(k) : 0L; };
        long se = get(Category::StrictlyEquivalent), emi = get(Category::EquivModuloInputs),
             dec = get(Category::Deceptive), nr = get(Category::NotRecompilable), eo = get(Category::EmptyOutput);
        long total = se + emi + dec + nr + eo;
        mismatches += row.total != total || total != 120;
        mismatches += row.recompilable != se + emi + dec;
        mismatches += row.pass_tests != se + emi;
        mismatches += row.deceptive != dec;
        mismatches += row.deceptive_rate().text().value_or("null") != ratio3(dec, dec + se + emi);
        mismatches += row.pass_ratio().text().value_or("null") != ratio3(se + emi, total);
    }
    long union_pass = 0, union_rec = 0;
    for (const auto& e : run.corpus.manifest.classes)
        for (const auto& c : kCompilers) {
            bool p = false, r = false;
            for (const auto& d : kBackends) {
                auto cat = run.rec(e.qualified_name, c, d)->category;
                p = p || passes(cat);
                r = r || passes(cat) || cat == Category::Deceptive;
            }
            union_pass += p;
            union_rec += r;
        }
    mismatches += table.union_row.pass_tests != union_pass || table.union_row.recompilable != union_rec;

    auto fx = report::summarize(fixture::ten_records());
    int fixture_bad = 0;
    const fixture::Expected* want[] = {&fixture::kD1, &fixture::kD2};
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& r = fx.rows[i];
        const auto& w = *want[i];
        fixture_bad += r.total != w.total || r.recompilable != w.recompilable || r.pass_tests != w.pass ||
                       r.deceptive != w.deceptive || *r.recompilable_ratio().text() != w.rec_ratio ||
                       *r.pass_ratio().text() != w.pass_ratio || *r.deceptive_rate().text() != w.dec_rate;
    }
    fixture_bad += fx.cells != fixture::kCells || fx.union_row.recompilable != fixture::kUnionRecompilable ||
                   fx.union_row.pass_tests != fixture::kUnionPass;
    fixture_bad += !report::check_invariants(fx).empty();

    bool ok = violations.empty() && mismatches == 0 && fixture_bad == 0;
    verdict(9, ok,
            "run: invariant violations=" + std::to_string(violations.size()) +
                " recount mismatches=" + std::to_string(mismatches) + "; fixture mismatches=" + std::to_string(fixture_bad));
}

}  // namespace

int main() {
    auto root = fs::temp_directory_path() / "mdlab_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);
    Run run;
    try {
        criterion1(run, root);
    } catch (const std::exception& e) {
        verdict(1, false, std::string("exception: ") + e.what());
        std::cout << "remaining criteria need the seeded run; stopping\n";
        return 1;
    }
    auto guard = [](int n, auto&& f) {
        try {
            f();
        } catch (const std::exception& e) {
            verdict(n, false, std::string("exception: ") + e.what());
        }
    };
    guard(2, [&] { criterion2(run); });
    guard(3, [&] { criterion3(run); });
    guard(4, [&] { criterion4(run); });
    guard(5, [&] { criterion5(run); });
    guard(6, [&] { criterion6(run); });
    guard(7, [&] { criterion7(run); });
    guard(8, [&] { criterion8(run, root); });
    guard(9, [&] { criterion9(run); });
    fs::remove_all(root);
    std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed")) << "\n";
    return failures ? 1 : 0;
}
