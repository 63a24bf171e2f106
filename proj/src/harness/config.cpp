#include <fstream>
#include <sstream>

#include "mdlab/harness.hpp"

namespace mdlab::harness {

namespace {

std::string trim(std::string s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string unquote(std::string v) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
    return v;
}

std::vector<std::string> list(const std::string& v) {
    std::string s = v;
    if (!s.empty() && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = unquote(trim(item));
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

bool boolean(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ToolError("config: " + key + " expects true or false");
}

std::uint64_t number(const std::string& key, const std::string& v) {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        throw ToolError("config: " + key + " expects a non-negative integer");
    try {
        std::size_t used = 0;
        auto n = std::stoull(v, &used);
        if (used == v.size()) return n;
    } catch (const std::exception&) {
    }
    throw ToolError("config: " + key + " expects a non-negative integer");
}

}  // namespace

Config Config::parse(std::string_view text) {
    Config c;
    std::istringstream in{std::string(text)};
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos && line.find('"') == std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            if (section != "external") throw ToolError("config line " + std::to_string(lineno) + ": unknown section");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ToolError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq)), value = unquote(trim(line.substr(eq + 1)));
        if (section == "external" || key.starts_with("external.")) {
            if (key.starts_with("external.")) key = key.substr(9);
            c.externals[key] = value;
        } else if (key == "compilers") {
            c.compilers = list(value);
        } else if (key == "decompilers") {
            c.decompilers = list(value);
        } else if (key == "order") {
            c.order = list(value);
        } else if (key == "fuel") {
            c.fuel = number(key, value);
        } else if (key == "exclude") {
            auto l = list(value);
            c.excluded_tests = {l.begin(), l.end()};
        } else if (key == "external_timeout") {
            c.external_timeout_secs = static_cast<int>(number(key, value));
        } else if (key == "throw_body_stub") {
            c.throw_body_stub = boolean(key, value);
        } else if (key == "meta") {
            c.run_meta = boolean(key, value);
        } else {
            throw ToolError("config line " + std::to_string(lineno) + ": unknown key " + key);
        }
    }
    for (const auto& v : c.compilers) compiler::CompilerVariant::by_id(v);
    for (const auto& d : c.decompilers) c.backend(d);
    for (const auto& d : c.order) c.backend(d);
    return c;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ToolError("cannot read config " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return parse(s.str());
}

decomp::DecompilerSpec Config::backend(const std::string& name) const {
    auto it = externals.find(name);
    decomp::DecompilerSpec spec;
    if (it != externals.end()) {
        spec = decomp::external(name, it->second, external_timeout_secs);
    } else if (auto b = decomp::builtin_by_name(name)) {
        spec = *b;
    } else {
        throw ToolError("unknown decompiler " + name);
    }
    spec.throw_body_stub = throw_body_stub;
    return spec;
}

std::vector<decomp::DecompilerSpec> Config::backends() const {
    std::vector<decomp::DecompilerSpec> out;
    for (const auto& d : decompilers) out.push_back(backend(d));
    return out;
}

std::vector<decomp::DecompilerSpec> Config::meta_order() const {
    std::vector<decomp::DecompilerSpec> out;
    for (const auto& d : order) out.push_back(backend(d));
    return out;
}

}  // namespace mdlab::harness
