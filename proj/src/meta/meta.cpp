#include "mdlab/meta.hpp"

#include <set>

namespace mdlab::meta {

bool FragmentStore::offer(const lang::MemberSignature& sig, const lang::TypeMember& member) {
    if (member.errored) throw ContractViolation("fragment store: errored member " + sig.text);
    return entries_.emplace(sig, member).second;
}

const lang::TypeMember* FragmentStore::find(const lang::MemberSignature& sig) const {
    auto it = entries_.find(sig);
    return it == entries_.end() ? nullptr : &it->second;
}

std::optional<DecompSolution> make_solution(const std::string& source, const std::string& decompiler,
                                            const compiler::CompilerVariant& variant,
                                            const compiler::ClassEnv* classpath) {
    auto parsed = lang::parse(source);
    if (!parsed.ok()) return std::nullopt;
    auto cr = compiler::compile(*parsed.ast, variant, classpath);
    auto annotated = lang::annotate_errors(*parsed.ast, cr.diagnostics);
    DecompSolution s{std::move(annotated.ast), decompiler, annotated.class_level_errors > 0};
    for (auto& m : s.ast.members) m.origin = decompiler;
    return s;
}

bool completable(const DecompSolution& s, const FragmentStore& store) {
    if (s.class_level_error) return false;
    for (const auto& m : s.ast.members)
        if (m.errored && !store.contains(lang::member_signature(m, s.ast.qualified_name))) return false;
    return true;
}

lang::ClassAst complete(const DecompSolution& s, const FragmentStore& store, Provenance* provenance) {
    lang::ClassAst out = s.ast;
    for (auto& m : out.members) {
        auto sig = lang::member_signature(m, out.qualified_name);
        if (m.errored) {
            const auto* f = store.find(sig);
            if (!f) throw ContractViolation("complete: no fragment for " + sig.text);
            int ordinal = m.static_ordinal;
            m = *f;
            m.static_ordinal = ordinal;
        }
        if (provenance) (*provenance)[sig.text] = m.origin;
    }
    return out;
}

Oracle recompile_oracle(const compiler::CompilerVariant& variant, const compiler::ClassEnv* classpath) {
    return [variant, classpath](const std::string& source) {
        return compiler::recompile_check(source, variant, classpath).pass;
    };
}

MetaResult meta_decompile(const vm::BytecodeClass& bc, const std::vector<decomp::DecompilerSpec>& order,
                          const compiler::CompilerVariant& variant, const compiler::ClassEnv* classpath,
                          const Oracle& oracle) {
    if (order.empty()) throw ContractViolation("meta_decompile: empty decompiler order");
    Oracle accept = oracle ? oracle : recompile_oracle(variant, classpath);
    MetaResult result;
    FragmentStore store;
    std::vector<DecompSolution> solutions;

    for (const auto& d : order) {
        result.invoked.push_back(d.name);
        auto out = decomp::decompile(d, bc);
        if (out.empty()) continue;
        auto s = make_solution(*out.source, d.name, variant, classpath);
        if (!s) continue;
        for (const auto& m : s->ast.members)
            if (!m.errored) store.offer(lang::member_signature(m, s->ast.qualified_name), m);
        solutions.push_back(std::move(*s));

        std::vector<DecompSolution> kept;
        for (std::size_t i = 0; i < solutions.size(); ++i) {
            auto& sol = solutions[i];
            if (!completable(sol, store)) {
                kept.push_back(std::move(sol));
                continue;
            }
            Provenance prov;
            auto merged = complete(sol, store, &prov);
            auto text = lang::pretty_print(merged);
            if (accept(text)) {
                result.success = true;
                result.source = std::move(text);
                result.provenance = std::move(prov);
                std::set<std::string> origins;
                for (const auto& [sig, origin] : result.provenance) origins.insert(origin);
                result.decompilers_used = static_cast<int>(origins.size());
                return result;
            }
        }
        solutions = std::move(kept);
    }
    return result;
}

nlohmann::json to_json(const MetaResult& r, const std::string& class_name, const std::string& compiler) {
    nlohmann::json j;
    j["class"] = class_name;
    j["compiler"] = compiler;
    j["status"] = r.success ? "success" : "failure";
    j["provenance"] = r.provenance;
    j["decompilers_used"] = r.decompilers_used;
    j["invoked"] = r.invoked;
    return j;
}

MetaResult result_from_json(const nlohmann::json& j) {
    MetaResult r;
    try {
        r.success = j.at("status").get<std::string>() == "success";
        r.provenance = j.at("provenance").get<Provenance>();
        r.decompilers_used = j.at("decompilers_used").get<int>();
        r.invoked = j.value("invoked", std::vector<std::string>{});
    } catch (const nlohmann::json::exception& e) {
        throw ToolError(std::string("malformed meta result: ") + e.what());
    }
    return r;
}

}  // namespace mdlab::meta
