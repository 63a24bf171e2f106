#pragma once

// Aggregation of assessment records into summary tables.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "mdlab/assess.hpp"
#include "mdlab/meta.hpp"

namespace mdlab::report {

/// Exact ratio; `den == 0` renders as null.
struct Ratio {
    long num = 0, den = 0;
    std::optional<std::string> text() const;  // 3 decimals
    bool operator==(const Ratio&) const = default;
};

struct Row {
    std::string decompiler;
    long total = 0;
    std::map<assess::Category, long> categories;
    long recompilable = 0;
    long pass_tests = 0;  // StrictlyEquivalent + EquivModuloInputs
    long deceptive = 0;

    Ratio recompilable_ratio() const { return {recompilable, total}; }
    Ratio pass_ratio() const { return {pass_tests, total}; }
    Ratio deceptive_rate() const { return {deceptive, deceptive + pass_tests}; }
};

struct SummaryTable {
    std::vector<Row> rows;  // one per decompiler, in first-seen order
    Row union_row;          // any non-meta decompiler per (class, compiler) cell; no category counts
    long cells = 0;         // classes x compilers
};

/// The grid every record set must cover. Empty members are inferred from the records.
struct Grid {
    std::vector<std::string> classes, compilers, decompilers;
};

/// Throws ToolError listing missing or duplicate grid cells, and on an empty input.
SummaryTable summarize(const std::vector<assess::AssessmentRecord>& records, const Grid& grid = {});

struct OverlapReport {
    std::map<std::string, std::set<std::string>> successes;  // "class|compiler" -> decompilers
    std::map<std::string, long> unique_success;
    std::set<std::string> all_fail, all_success;
    std::set<std::string> meta_recovered;  // all-fail cells where the meta record passes
};

/// `meta_name` records are excluded from the sets and used for meta_recovered.
OverlapReport overlap(const std::vector<assess::AssessmentRecord>& records, const std::string& meta_name = "meta");

struct ProvenanceStats {
    std::map<int, long> decompilers_used;        // successes only
    std::map<std::string, long> origin_members;  // transplanted or kept members per origin
    std::map<std::string, long> origin_classes;  // successes each origin contributed to
    long successes = 0, failures = 0;
};
ProvenanceStats provenance_stats(const std::vector<meta::MetaResult>& results);

/// Violations of conservation, union dominance, count bounds and the
/// deceptive-rate identity. Empty when all hold.
std::vector<std::string> check_invariants(const SummaryTable& t);

nlohmann::json to_json(const SummaryTable& t);
nlohmann::json to_json(const OverlapReport& o);
nlohmann::json to_json(const ProvenanceStats& p);
std::string to_csv(const SummaryTable& t);

/// Full report: summary, overlap, provenance, the records and the meta rows.
nlohmann::json build(const std::vector<assess::AssessmentRecord>& records, const std::vector<nlohmann::json>& meta_rows);

/// Sorted keys, elapsed-time fields removed at every depth.
std::string canonical(const nlohmann::json& j);

std::vector<nlohmann::json> read_json_lines(const std::string& path);

}  // namespace mdlab::report
