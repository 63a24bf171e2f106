#include <sstream>

#include "mdlab/lang.hpp"
#include "mdlab/vm.hpp"

namespace mdlab::vm {
namespace {

std::string decode_quoted(std::string_view q, std::size_t& i) {
    if (i >= q.size() || q[i] != '"') throw ToolError("string literal expected in test file");
    std::string out;
    ++i;
    while (i < q.size() && q[i] != '"') {
        char c = q[i++];
        if (c != '\\') {
            out += c;
            continue;
        }
        if (i >= q.size()) break;
        char e = q[i++];
        switch (e) {
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case '"': out += '"'; break;
            case '\\': out += '\\'; break;
            default: throw ToolError("bad escape in test file");
        }
    }
    if (i >= q.size()) throw ToolError("unterminated string in test file");
    ++i;
    return out;
}

std::vector<Literal> parse_args(std::string_view text) {
    std::vector<Literal> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == ' ' || text[i] == '\t') {
            ++i;
            continue;
        }
        Literal lit;
        if (text[i] == '"') {
            lit.kind = Literal::Kind::Str;
            lit.s = decode_quoted(text, i);
        } else {
            auto j = text.find_first_of(" \t", i);
            if (j == std::string_view::npos) j = text.size();
            auto word = std::string(text.substr(i, j - i));
            i = j;
            if (word == "true" || word == "false") {
                lit.kind = Literal::Kind::Bool;
                lit.i = word == "true";
            } else if (word == "null") {
                lit.kind = Literal::Kind::Null;
            } else {
                lit.kind = Literal::Kind::Int;
                try {
                    std::size_t used = 0;
                    long long v = std::stoll(word, &used);
                    if (used != word.size() || v < INT32_MIN || v > INT32_MAX) throw std::out_of_range(word);
                    lit.i = static_cast<std::int32_t>(v);
                } catch (const std::exception&) {
                    throw ToolError("bad test argument: " + word);
                }
            }
        }
        out.push_back(std::move(lit));
    }
    return out;
}

}  // namespace

std::string Literal::render() const {
    switch (kind) {
        case Kind::Int: return std::to_string(i);
        case Kind::Bool: return i ? "true" : "false";
        case Kind::Str: return lang::quote(s);
        case Kind::Null: return "null";
    }
    return "";
}

std::vector<TestCase> parse_tests(std::string_view text) {
    std::vector<TestCase> out;
    std::istringstream in{std::string(text)};
    std::string line;
    TestCase* cur = nullptr;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.starts_with("//")) continue;
        auto sp = line.find(' ');
        auto key = line.substr(0, sp);
        auto rest = sp == std::string::npos ? std::string() : line.substr(sp + 1);
        if (key == "TEST") {
            out.push_back({});
            cur = &out.back();
            cur->id = rest;
            continue;
        }
        if (!cur) throw ToolError("test file: TEST expected before " + key);
        if (key == "ENTRY") {
            cur->entry = rest;
        } else if (key == "ARGS") {
            cur->args = parse_args(rest);
        } else if (key == "EXPECT") {
            std::size_t i = 0;
            cur->expected_stdout = decode_quoted(rest, i);
        } else if (key == "OUTCOME") {
            if (rest != "normal" && !rest.starts_with("throws:")) throw ToolError("bad OUTCOME: " + rest);
            cur->expected_outcome = rest;
        } else {
            throw ToolError("test file: unknown key " + key);
        }
    }
    for (const auto& t : out)
        if (t.id.empty() || t.entry.empty()) throw ToolError("test file: incomplete test block");
    return out;
}

std::string format_tests(const std::vector<TestCase>& tests) {
    std::string out;
    for (std::size_t k = 0; k < tests.size(); ++k) {
        const auto& t = tests[k];
        if (k) out += '\n';
        out += "TEST " + t.id + "\n";
        out += "ENTRY " + t.entry + "\n";
        out += "ARGS";
        for (const auto& a : t.args) out += " " + a.render();
        out += "\n";
        out += "EXPECT " + lang::quote(t.expected_stdout) + "\n";
        out += "OUTCOME " + t.expected_outcome + "\n";
    }
    return out;
}

}  // namespace mdlab::vm
