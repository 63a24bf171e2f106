#include "mdlab/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace mdlab::report {

using assess::Category;

namespace {

constexpr Category kAll[] = {Category::EmptyOutput, Category::NotRecompilable, Category::Deceptive,
                             Category::EquivModuloInputs, Category::StrictlyEquivalent};

bool passes(Category c) { return c == Category::StrictlyEquivalent || c == Category::EquivModuloInputs; }
bool recompiles(Category c) { return passes(c) || c == Category::Deceptive; }

std::string cell(const std::string& cls, const std::string& comp) { return cls + "|" + comp; }

template <class T>
void add_unique(std::vector<T>& v, const T& x) {
    if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
}

nlohmann::json ratio_json(const Ratio& r) {
    auto t = r.text();
    return t ? nlohmann::json(*t) : nlohmann::json(nullptr);
}

nlohmann::json row_json(const Row& r, bool with_categories) {
    nlohmann::json j;
    j["decompiler"] = r.decompiler;
    j["total"] = r.total;
    j["recompilable"] = r.recompilable;
    j["recompilable_ratio"] = ratio_json(r.recompilable_ratio());
    j["pass_tests"] = r.pass_tests;
    j["pass_ratio"] = ratio_json(r.pass_ratio());
    if (with_categories) {
        j["deceptive"] = r.deceptive;
        j["deceptive_rate"] = ratio_json(r.deceptive_rate());
        nlohmann::json c = nlohmann::json::object();
        for (auto k : kAll) c[std::string(assess::to_string(k))] = r.categories.count(k) ? r.categories.at(k) : 0;
        j["categories"] = c;
    }
    return j;
}

void strip(nlohmann::json& j) {
    if (j.is_object()) {
        j.erase("elapsed_ms");
        for (auto& v : j) strip(v);
    } else if (j.is_array()) {
        for (auto& v : j) strip(v);
    }
}

}  // namespace

std::optional<std::string> Ratio::text() const {
    if (den == 0) return std::nullopt;
    // round half up on the exact rational
    long scaled = (num * 2000 + den) / (2 * den);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%ld.%03ld", scaled / 1000, scaled % 1000);
    return std::string(buf);
}

SummaryTable summarize(const std::vector<assess::AssessmentRecord>& records, const Grid& declared) {
    if (records.empty()) throw ToolError("summarize: no records");
    Grid g = declared;
    std::vector<std::string> seen_cls, seen_comp, seen_dec;
    for (const auto& r : records) {
        add_unique(seen_cls, r.class_name);
        add_unique(seen_comp, r.compiler);
        add_unique(seen_dec, r.decompiler);
    }
    if (g.classes.empty()) g.classes = seen_cls;
    if (g.compilers.empty()) g.compilers = seen_comp;
    if (g.decompilers.empty()) g.decompilers = seen_dec;

    std::map<std::string, const assess::AssessmentRecord*> by_key;
    std::vector<std::string> problems;
    for (const auto& r : records) {
        auto key = r.class_name + "/" + r.compiler + "/" + r.decompiler;
        if (!by_key.emplace(key, &r).second) problems.push_back("duplicate " + key);
    }
    for (const auto& c : g.classes)
        for (const auto& v : g.compilers)
            for (const auto& d : g.decompilers)
                if (!by_key.count(c + "/" + v + "/" + d)) problems.push_back("missing " + c + "/" + v + "/" + d);
    if (by_key.size() > g.classes.size() * g.compilers.size() * g.decompilers.size())
        problems.push_back("records outside the declared grid");
    if (!problems.empty()) {
        std::string msg = "summarize: incomplete grid:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw ToolError(msg);
    }

    SummaryTable t;
    t.cells = static_cast<long>(g.classes.size() * g.compilers.size());
    t.union_row.decompiler = "union";
    t.union_row.total = t.cells;
    for (const auto& d : g.decompilers) {
        Row row;
        row.decompiler = d;
        for (const auto& c : g.classes)
            for (const auto& v : g.compilers) {
                auto cat = by_key.at(c + "/" + v + "/" + d)->category;
                ++row.total;
                ++row.categories[cat];
                row.recompilable += recompiles(cat);
                row.pass_tests += passes(cat);
                row.deceptive += cat == Category::Deceptive;
            }
        t.rows.push_back(std::move(row));
    }
    for (const auto& c : g.classes)
        for (const auto& v : g.compilers) {
            bool rec = false, pass = false;
            for (const auto& d : g.decompilers) {
                if (d == "meta") continue;
                auto cat = by_key.at(c + "/" + v + "/" + d)->category;
                rec = rec || recompiles(cat);
                pass = pass || passes(cat);
            }
            t.union_row.recompilable += rec;
            t.union_row.pass_tests += pass;
        }
    return t;
}

OverlapReport overlap(const std::vector<assess::AssessmentRecord>& records, const std::string& meta_name) {
    if (records.empty()) throw ToolError("overlap: no records");
    OverlapReport o;
    std::vector<std::string> decs;
    std::map<std::string, bool> meta_pass;
    for (const auto& r : records) {
        auto k = cell(r.class_name, r.compiler);
        if (r.decompiler == meta_name) {
            meta_pass[k] = passes(r.category);
            continue;
        }
        add_unique(decs, r.decompiler);
        auto& s = o.successes[k];
        if (passes(r.category)) s.insert(r.decompiler);
    }
    for (const auto& d : decs) o.unique_success[d] = 0;
    for (const auto& [k, s] : o.successes) {
        if (s.size() == 1) ++o.unique_success[*s.begin()];
        if (s.empty()) {
            o.all_fail.insert(k);
            if (meta_pass.count(k) && meta_pass[k]) o.meta_recovered.insert(k);
        }
        if (s.size() == decs.size()) o.all_success.insert(k);
    }
    return o;
}

ProvenanceStats provenance_stats(const std::vector<meta::MetaResult>& results) {
    ProvenanceStats p;
    for (const auto& r : results) {
        if (!r.success) {
            ++p.failures;
            continue;
        }
        ++p.successes;
        ++p.decompilers_used[r.decompilers_used];
        std::set<std::string> origins;
        for (const auto& [sig, origin] : r.provenance) {
            ++p.origin_members[origin];
            origins.insert(origin);
        }
        for (const auto& o : origins) ++p.origin_classes[o];
    }
    return p;
}

std::vector<std::string> check_invariants(const SummaryTable& t) {
    std::vector<std::string> v;
    long best_rec = 0, best_pass = 0;
    for (const auto& r : t.rows) {
        long sum = 0;
        for (const auto& [c, n] : r.categories) sum += n;
        if (sum != r.total) v.push_back(r.decompiler + ": categories sum to " + std::to_string(sum));
        if (r.total != t.cells) v.push_back(r.decompiler + ": total differs from the cell count");
        long rec = 0, pass = 0, dec = 0;
        for (const auto& [c, n] : r.categories) {
            rec += recompiles(c) ? n : 0;
            pass += passes(c) ? n : 0;
            dec += c == Category::Deceptive ? n : 0;
        }
        if (rec != r.recompilable || pass != r.pass_tests || dec != r.deceptive)
            v.push_back(r.decompiler + ": derived counts disagree with categories");
        if (r.pass_tests > r.recompilable || r.recompilable > r.total) v.push_back(r.decompiler + ": count above its bound");
        auto rate = r.deceptive_rate();
        if (rate.num != r.deceptive || rate.den != r.deceptive + r.pass_tests)
            v.push_back(r.decompiler + ": deceptive rate is not deceptive/(deceptive+pass)");
        if (r.decompiler != "meta") {
            best_rec = std::max(best_rec, r.recompilable);
            best_pass = std::max(best_pass, r.pass_tests);
        }
    }
    if (t.union_row.recompilable < best_rec || t.union_row.pass_tests < best_pass)
        v.push_back("union row below the best single decompiler");
    if (t.union_row.recompilable > t.cells || t.union_row.pass_tests > t.union_row.recompilable)
        v.push_back("union row above its bound");
    return v;
}

nlohmann::json to_json(const SummaryTable& t) {
    nlohmann::json j;
    j["cells"] = t.cells;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : t.rows) j["rows"].push_back(row_json(r, true));
    j["union"] = row_json(t.union_row, false);
    return j;
}

nlohmann::json to_json(const OverlapReport& o) {
    nlohmann::json j;
    nlohmann::json s = nlohmann::json::object();
    for (const auto& [k, v] : o.successes) s[k] = v;
    j["successes"] = s;
    j["unique_success"] = o.unique_success;
    j["all_fail"] = o.all_fail;
    j["all_success"] = o.all_success;
    j["meta_recovered"] = o.meta_recovered;
    return j;
}

nlohmann::json to_json(const ProvenanceStats& p) {
    nlohmann::json j;
    nlohmann::json used = nlohmann::json::object();
    for (const auto& [k, n] : p.decompilers_used) used[std::to_string(k)] = n;
    j["decompilers_used"] = used;
    j["origin_members"] = p.origin_members;
    j["origin_classes"] = p.origin_classes;
    j["successes"] = p.successes;
    j["failures"] = p.failures;
    return j;
}

std::string to_csv(const SummaryTable& t) {
    std::string out = "decompiler,total,recompilable,recompilable_ratio,pass_tests,pass_ratio,deceptive,deceptive_rate";
    for (auto c : kAll) out += "," + std::string(assess::to_string(c));
    out += "\n";
    auto line = [&](const Row& r, bool cats) {
        out += r.decompiler + "," + std::to_string(r.total) + "," + std::to_string(r.recompilable) + "," +
               r.recompilable_ratio().text().value_or("") + "," + std::to_string(r.pass_tests) + "," +
               r.pass_ratio().text().value_or("") + ",";
        if (cats) {
            out += std::to_string(r.deceptive) + "," + r.deceptive_rate().text().value_or("");
            for (auto c : kAll) out += "," + std::to_string(r.categories.count(c) ? r.categories.at(c) : 0);
        } else {
            out += ",";
            for (std::size_t i = 0; i < std::size(kAll); ++i) out += ",";
        }
        out += "\n";
    };
    for (const auto& r : t.rows) line(r, true);
    line(t.union_row, false);
    return out;
}

nlohmann::json build(const std::vector<assess::AssessmentRecord>& records, const std::vector<nlohmann::json>& meta_rows) {
    auto summary = summarize(records);
    nlohmann::json j;
    j["summary"] = to_json(summary);
    j["invariant_violations"] = check_invariants(summary);
    j["overlap"] = to_json(overlap(records));
    std::vector<meta::MetaResult> metas;
    for (const auto& m : meta_rows) metas.push_back(meta::result_from_json(m));
    j["provenance"] = to_json(provenance_stats(metas));
    j["records"] = nlohmann::json::array();
    for (const auto& r : records) j["records"].push_back(assess::to_json(r));
    j["meta"] = meta_rows;
    return j;
}

std::string canonical(const nlohmann::json& j) {
    nlohmann::json c = j;
    strip(c);
    return c.dump(2) + "\n";
}

std::vector<nlohmann::json> read_json_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ToolError("cannot read " + path);
    std::vector<nlohmann::json> out;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            out.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::parse_error& e) {
            throw ToolError(path + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace mdlab::report
