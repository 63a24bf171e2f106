#pragma once

// Ten records over 5 classes x 1 compiler x 2 decompilers with tallies worked
// out by hand.

#include <string>
#include <vector>

#include "mdlab/assess.hpp"

namespace fixture {

using mdlab::assess::AssessmentRecord;
using mdlab::assess::Category;

inline AssessmentRecord rec(const std::string& cls, const std::string& dec, Category c) {
    AssessmentRecord r;
    r.class_name = cls;
    r.compiler = "A";
    r.decompiler = dec;
    r.category = c;
    r.elapsed_ms = 1.5;
    return r;
}

//        d1    d2
//   c1   SE    SE
//   c2   EMI   NR
//   c3   DEC   SE
//   c4   NR    NR
//   c5   EO    DEC
inline std::vector<AssessmentRecord> ten_records() {
    return {
        rec("c1", "d1", Category::StrictlyEquivalent), rec("c1", "d2", Category::StrictlyEquivalent),
        rec("c2", "d1", Category::EquivModuloInputs),  rec("c2", "d2", Category::NotRecompilable),
        rec("c3", "d1", Category::Deceptive),          rec("c3", "d2", Category::StrictlyEquivalent),
        rec("c4", "d1", Category::NotRecompilable),    rec("c4", "d2", Category::NotRecompilable),
        rec("c5", "d1", Category::EmptyOutput),        rec("c5", "d2", Category::Deceptive),
    };
}

// Hand tallies.
struct Expected {
    long total, recompilable, pass, deceptive;
    const char *rec_ratio, *pass_ratio, *dec_rate;
};
inline constexpr Expected kD1{5, 3, 2, 1, "0.600", "0.400", "0.333"};
inline constexpr Expected kD2{5, 3, 2, 1, "0.600", "0.400", "0.333"};
inline constexpr long kCells = 5;
inline constexpr long kUnionRecompilable = 4;  // c1 c2 c3 c5
inline constexpr long kUnionPass = 3;          // c1 c2 c3

}  // namespace fixture
