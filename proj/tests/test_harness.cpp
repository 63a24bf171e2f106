#include <filesystem>

#include "doctest.h"
#include "mdlab/harness.hpp"
#include "mdlab/report.hpp"

using namespace mdlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("mdlab_harness_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("corpus generation is deterministic in the seed") {
    auto a = harness::gen_corpus(7, 30), b = harness::gen_corpus(7, 30), c = harness::gen_corpus(8, 30);
    CHECK(a.sources == b.sources);
    CHECK(harness::to_json(a.manifest) == harness::to_json(b.manifest));
    CHECK(a.sources != c.sources);
    CHECK(a.manifest.classes.size() == 30);
    CHECK_THROWS_AS(harness::gen_corpus(1, harness::kMinCorpusSize - 1), ContractViolation);

    auto g = harness::gen_corpus(3, harness::kMinCorpusSize);
    for (const auto& e : g.manifest.classes) CHECK(e.golden);
}

TEST_CASE("generated corpus lints clean and survives a disk round trip") {
    auto corpus = harness::gen_corpus(5, 24);
    CHECK(harness::lint(corpus).empty());

    auto dir = scratch("rt");
    harness::write_corpus(corpus, dir);
    CHECK(fs::exists(dir / "manifest.json"));
    auto back = harness::load_corpus(dir);
    CHECK(back.sources == corpus.sources);
    CHECK(harness::to_json(back.manifest) == harness::to_json(corpus.manifest));
    REQUIRE(back.tests.size() == corpus.tests.size());
    for (std::size_t i = 0; i < back.tests.size(); ++i)
        CHECK(vm::format_tests(back.tests[i]) == vm::format_tests(corpus.tests[i]));
    fs::remove_all(dir);
}

TEST_CASE("lint reports tag mismatches, failing tests and missing tests") {
    auto corpus = harness::gen_corpus(5, harness::kMinCorpusSize);
    auto line = corpus.index_of("golden.Line");
    corpus.manifest.classes[line].feature_tags.push_back("try-catch-loop");
    auto branch = corpus.index_of("golden.Branch");
    corpus.tests[branch][0].expected_stdout += "x";
    auto flag = corpus.index_of("golden.Flag");
    corpus.tests[flag].clear();
    corpus.manifest.classes[0].feature_tags.push_back("no-such-tag");

    auto problems = harness::lint(corpus);
    auto has = [&](const std::string& needle) {
        for (const auto& p : problems)
            if (p.find(needle) != std::string::npos) return true;
        return false;
    };
    CHECK(has("golden.Line (A): tags"));
    CHECK(has(corpus.tests[branch][0].id));
    CHECK(has("golden.Flag: no tests"));
    CHECK(has("unknown tag no-such-tag"));
}

TEST_CASE("config parsing") {
    auto c = harness::Config::parse(R"(
# experiment
compilers = ["B"]
decompilers = ["optimist", "literalist"]
order = ["optimist"]
fuel = 5000
exclude = ["t1", "t2"]
throw_body_stub = true
meta = false

[external]
tool = "cat {input}"
)");
    CHECK(c.compilers == std::vector<std::string>{"B"});
    CHECK(c.decompilers == std::vector<std::string>{"optimist", "literalist"});
    CHECK(c.meta_order().size() == 1);
    CHECK(c.fuel == 5000);
    CHECK(c.excluded_tests == std::set<std::string>{"t1", "t2"});
    CHECK_FALSE(c.run_meta);
    CHECK(c.backend("optimist").throw_body_stub);
    CHECK(c.externals.at("tool") == "cat {input}");
    CHECK(c.backend("tool").name == "tool");

    auto d = harness::Config::parse("");
    CHECK(d.compilers == std::vector<std::string>{"A", "B"});
    CHECK(d.order == std::vector<std::string>{"literalist", "sugarer", "optimist"});
    CHECK(d.run_meta);

    CHECK_THROWS_AS(harness::Config::parse("decompilers = [\"nope\"]"), ToolError);
    CHECK_THROWS_AS(harness::Config::parse("colour = blue"), ToolError);
    CHECK_THROWS_AS(harness::Config::parse("fuel = -3"), ToolError);
    CHECK_THROWS_AS(harness::Config::parse("meta = maybe"), ToolError);
    CHECK_THROWS_AS(harness::Config::parse("[plugins]"), ToolError);
}

TEST_CASE("runner covers the grid and is independent of the job count") {
    auto corpus = harness::gen_corpus(11, 16);
    harness::Config cfg;
    harness::RunOptions one, many;
    many.jobs = 4;
    auto dir = scratch("run");
    many.records_out = dir / "records.jsonl";
    many.scratch = dir / "work";
    fs::create_directories(dir);
    auto r1 = harness::run_experiment(corpus, cfg, one);
    auto r4 = harness::run_experiment(corpus, cfg, many);
    CHECK(r1.faults.empty());
    CHECK(r1.records.size() == 16 * 2 * 4);
    CHECK(r1.meta.size() == 16 * 2);

    auto canon = [](const harness::ExperimentResult& r) {
        std::vector<nlohmann::json> metas;
        for (const auto& m : r.meta) metas.push_back(meta::to_json(m.result, m.class_name, m.compiler));
        return report::canonical(report::build(r.records, metas));
    };
    CHECK(canon(r1) == canon(r4));
    CHECK(report::read_json_lines(many.records_out->string()).size() == r4.records.size());

    auto& first = corpus.manifest.classes[0].qualified_name;
    CHECK(fs::exists(dir / "work" / first / "A" / "literalist" / "decompiled.mj"));
    CHECK(fs::exists(dir / "work" / first / "B" / "meta"));
    fs::remove_all(dir);
}

TEST_CASE("runner honours a reduced grid") {
    auto corpus = harness::gen_corpus(2, harness::kMinCorpusSize);
    auto cfg = harness::Config::parse("compilers = [\"A\"]\ndecompilers = [\"sugarer\"]\nmeta = false\n");
    auto r = harness::run_experiment(corpus, cfg);
    CHECK(r.records.size() == harness::kMinCorpusSize);
    CHECK(r.meta.empty());
    for (const auto& rec : r.records) {
        CAPTURE(rec.class_name);
        const auto& e = corpus.manifest.classes[corpus.index_of(rec.class_name)];
        CHECK(std::string(assess::to_string(rec.category)) == e.expected.at("A/sugarer"));
    }
}
