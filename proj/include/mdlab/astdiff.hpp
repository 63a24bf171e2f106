#pragma once

// Ordered labeled tree differencing with insert/delete/update/move edits.

#include <optional>
#include <string>
#include <vector>

#include "mdlab/lang.hpp"

namespace mdlab::astdiff {

struct Tree {
    std::string label;
    std::vector<Tree> kids;

    std::size_t size() const;
    bool operator==(const Tree&) const = default;
};

/// Parses the bracket notation `a(b,c(d))` used by tests and the CLI.
Tree parse_tree(std::string_view text);
std::string to_string(const Tree& t);

Tree to_tree(const lang::ClassAst& ast);

enum class EditKind { insert, remove, update, move };
std::string_view to_string(EditKind k);

/// Node ids: source nodes are numbered in preorder from 0, inserted nodes get
/// the next free ids in script order, and -1 is the virtual root above the
/// top-level node(s).
struct Edit {
    EditKind kind = EditKind::update;
    int node = 0;
    std::string label;  // insert/update: new label; remove/move: current label
    int parent = -1;    // insert/move
    int position = 0;   // insert/move: child index under parent
    int count = 0;      // insert: number of consecutive children adopted
};

struct EditScript {
    std::vector<Edit> edits;
    bool exact = false;  // proven minimal

    int cost() const { return static_cast<int>(edits.size()); }
    int count(EditKind k) const;
};

/// Replays a script on `source`. Throws ContractViolation on an invalid edit
/// or when the result is not a single tree.
Tree apply(const Tree& source, const EditScript& script);

EditScript edit_distance(const Tree& a, const Tree& b);
EditScript edit_distance(const lang::ClassAst& a, const lang::ClassAst& b);

/// Alpha-renames parameters and locals to declaration-order indices
/// (`_v0`, `_v1`, ...), fresh per method body.
lang::ClassAst normalize_names(const lang::ClassAst& ast);

struct Distortion {
    int edits = 0;
    int original_nodes = 0;
    double normalized = 0;
    EditScript script;
};

Distortion distortion(const lang::ClassAst& original, const lang::ClassAst& decompiled);
/// Parses `decompiled_source`; nullopt when it does not parse.
std::optional<Distortion> distortion(const lang::ClassAst& original, std::string_view decompiled_source);

}  // namespace mdlab::astdiff
