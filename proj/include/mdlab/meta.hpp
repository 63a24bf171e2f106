#pragma once

// Meta-decompilation: merge error-free members from several backends into one
// recompilable class.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mdlab/compiler.hpp"
#include "mdlab/decomp.hpp"
#include "mdlab/lang.hpp"

namespace mdlab::meta {

class FragmentStore {
public:
    /// Adds `member` unless its signature is already present. Errored members
    /// are a contract violation.
    bool offer(const lang::MemberSignature& sig, const lang::TypeMember& member);
    const lang::TypeMember* find(const lang::MemberSignature& sig) const;
    bool contains(const lang::MemberSignature& sig) const { return find(sig) != nullptr; }
    std::size_t size() const { return entries_.size(); }
    const std::map<lang::MemberSignature, lang::TypeMember>& entries() const { return entries_; }

private:
    std::map<lang::MemberSignature, lang::TypeMember> entries_;
};

struct DecompSolution {
    lang::ClassAst ast;  // members carry errored flags and origin
    std::string base_decompiler;
    bool class_level_error = false;
};

/// Parses and compiles one backend's output and annotates the members that
/// received errors. nullopt when the text does not parse.
std::optional<DecompSolution> make_solution(const std::string& source, const std::string& decompiler,
                                            const compiler::CompilerVariant& variant,
                                            const compiler::ClassEnv* classpath = nullptr);

bool completable(const DecompSolution& s, const FragmentStore& store);

/// Provenance is keyed by member signature text.
using Provenance = std::map<std::string, std::string>;

lang::ClassAst complete(const DecompSolution& s, const FragmentStore& store, Provenance* provenance = nullptr);

/// Decides whether a completed source is acceptable. The default is the
/// recompilation oracle.
using Oracle = std::function<bool(const std::string& source)>;
Oracle recompile_oracle(const compiler::CompilerVariant& variant, const compiler::ClassEnv* classpath);

struct MetaResult {
    bool success = false;
    std::string source;
    Provenance provenance;
    int decompilers_used = 0;
    std::vector<std::string> invoked;  // backends in invocation order
};

MetaResult meta_decompile(const vm::BytecodeClass& bc, const std::vector<decomp::DecompilerSpec>& order,
                          const compiler::CompilerVariant& variant, const compiler::ClassEnv* classpath = nullptr,
                          const Oracle& oracle = {});

nlohmann::json to_json(const MetaResult& r, const std::string& class_name, const std::string& compiler);
/// The source text is not part of the JSON form and comes back empty.
MetaResult result_from_json(const nlohmann::json& j);

}  // namespace mdlab::meta
