#include <fstream>

#include "doctest.h"
#include "mdlab/report.hpp"
#include "report_fixture.hpp"

using namespace mdlab;
using assess::Category;
using report::Ratio;

TEST_CASE("ratio renders three decimals rounding half up") {
    CHECK(*Ratio{1, 3}.text() == "0.333");
    CHECK(*Ratio{2, 3}.text() == "0.667");
    CHECK(*Ratio{1, 16}.text() == "0.063");
    CHECK(*Ratio{1, 8}.text() == "0.125");
    CHECK(*Ratio{5, 5}.text() == "1.000");
    CHECK(*Ratio{0, 7}.text() == "0.000");
    CHECK_FALSE(Ratio{0, 0}.text().has_value());
}

TEST_CASE("summary of the hand-tallied fixture") {
    auto t = report::summarize(fixture::ten_records());
    REQUIRE(t.rows.size() == 2);
    const fixture::Expected* want[] = {&fixture::kD1, &fixture::kD2};
    for (int i = 0; i < 2; ++i) {
        const auto& r = t.rows[static_cast<std::size_t>(i)];
        CAPTURE(r.decompiler);
        CHECK(r.total == want[i]->total);
        CHECK(r.recompilable == want[i]->recompilable);
        CHECK(r.pass_tests == want[i]->pass);
        CHECK(r.deceptive == want[i]->deceptive);
        CHECK(*r.recompilable_ratio().text() == want[i]->rec_ratio);
        CHECK(*r.pass_ratio().text() == want[i]->pass_ratio);
        CHECK(*r.deceptive_rate().text() == want[i]->dec_rate);
    }
    CHECK(t.rows[0].categories.at(Category::EmptyOutput) == 1);
    CHECK(t.rows[1].categories.at(Category::NotRecompilable) == 2);
    CHECK(t.cells == fixture::kCells);
    CHECK(t.union_row.recompilable == fixture::kUnionRecompilable);
    CHECK(t.union_row.pass_tests == fixture::kUnionPass);
    CHECK(report::check_invariants(t).empty());
}

TEST_CASE("summary rejects incomplete, duplicated and empty inputs") {
    auto recs = fixture::ten_records();
    CHECK_THROWS_AS(report::summarize({}), ToolError);

    auto missing = recs;
    missing.pop_back();
    CHECK_THROWS_WITH_AS(report::summarize(missing), doctest::Contains("missing c5/A/d2"), ToolError);

    auto dup = recs;
    dup.push_back(recs[0]);
    CHECK_THROWS_WITH_AS(report::summarize(dup), doctest::Contains("duplicate c1/A/d1"), ToolError);

    report::Grid g;
    g.compilers = {"A", "B"};
    CHECK_THROWS_AS(report::summarize(recs, g), ToolError);
}

TEST_CASE("meta rows stay out of the union row") {
    auto recs = fixture::ten_records();
    for (const char* c : {"c1", "c2", "c3", "c4", "c5"}) recs.push_back(fixture::rec(c, "meta", Category::StrictlyEquivalent));
    auto t = report::summarize(recs);
    REQUIRE(t.rows.size() == 3);
    CHECK(t.rows[2].pass_tests == 5);
    CHECK(t.union_row.pass_tests == fixture::kUnionPass);
    CHECK(report::check_invariants(t).empty());

    auto o = report::overlap(recs);
    CHECK(o.unique_success.at("d1") == 1);
    CHECK(o.unique_success.at("d2") == 1);
    CHECK(o.all_fail == std::set<std::string>{"c4|A", "c5|A"});
    CHECK(o.all_success == std::set<std::string>{"c1|A"});
    CHECK(o.meta_recovered == std::set<std::string>{"c4|A", "c5|A"});
    CHECK(o.successes.at("c2|A") == std::set<std::string>{"d1"});
}

TEST_CASE("invariant checker flags a broken table") {
    auto t = report::summarize(fixture::ten_records());
    t.rows[0].pass_tests += 1;
    t.union_row.recompilable = 1;
    auto v = report::check_invariants(t);
    CHECK(v.size() >= 3);
}

TEST_CASE("provenance statistics count successes only") {
    meta::MetaResult a, b, c;
    a.success = true;
    a.decompilers_used = 2;
    a.provenance = {{"k#f", "x"}, {"k.m()", "y"}, {"k.n()", "x"}};
    b.success = true;
    b.decompilers_used = 1;
    b.provenance = {{"k.m()", "x"}};
    c.provenance = {{"k.m()", "z"}};
    auto p = report::provenance_stats({a, b, c});
    CHECK(p.successes == 2);
    CHECK(p.failures == 1);
    CHECK(p.decompilers_used.at(1) == 1);
    CHECK(p.decompilers_used.at(2) == 1);
    CHECK(p.origin_members.at("x") == 3);
    CHECK(p.origin_members.at("y") == 1);
    CHECK(p.origin_classes.at("x") == 2);
    CHECK_FALSE(p.origin_members.count("z"));
}

TEST_CASE("canonical form drops timings and csv lines match the table") {
    auto j = report::build(fixture::ten_records(), {});
    auto text = report::canonical(j);
    CHECK(text.find("elapsed_ms") == std::string::npos);
    CHECK(text.back() == '\n');
    CHECK(j["summary"]["rows"][0]["deceptive_rate"] == "0.333");
    CHECK(j["summary"]["union"]["pass_ratio"] == "0.600");
    CHECK(j["invariant_violations"].empty());

    auto csv = report::to_csv(report::summarize(fixture::ten_records()));
    CHECK(csv.find("\nd1,5,3,0.600,2,0.400,1,0.333,1,1,1,1,1\n") != std::string::npos);
    CHECK(csv.find("\nd2,5,3,0.600,2,0.400,1,0.333,0,2,1,0,2\n") != std::string::npos);
    CHECK(csv.find("\nunion,5,4,0.800,3,0.600,") != std::string::npos);
}

TEST_CASE("records round trip through json lines") {
    auto dir = std::filesystem::temp_directory_path() / "mdlab_report_rt";
    std::filesystem::create_directories(dir);
    auto path = (dir / "records.jsonl").string();
    {
        std::ofstream out(path);
        for (const auto& r : fixture::ten_records()) out << assess::to_json(r).dump() << "\n";
    }
    std::vector<assess::AssessmentRecord> back;
    for (const auto& j : report::read_json_lines(path)) back.push_back(assess::record_from_json(j));
    CHECK(report::canonical(report::build(back, {})) == report::canonical(report::build(fixture::ten_records(), {})));
    {
        std::ofstream out(path, std::ios::app);
        out << "{not json\n";
    }
    CHECK_THROWS_AS(report::read_json_lines(path), ToolError);
    std::filesystem::remove_all(dir);
}
