#pragma once

#include <map>
#include <string>
#include <vector>

#include "mdlab/astdiff.hpp"

namespace mdlab::astdiff::detail {

struct Labels {
    std::map<std::string, int> ids;
    std::vector<std::string> names;

    int intern(const std::string& s);
};

/// Flat preorder tree; node i has parent[i] (-1 for top level).
struct FTree {
    std::vector<int> label;
    std::vector<int> parent;
    std::vector<std::vector<int>> kids;
    std::vector<int> top;  // top-level nodes

    int size() const { return static_cast<int>(label.size()); }
    int subtree_end(int i) const;  // one past the last preorder index in i's subtree
};

FTree flatten(const Tree& t, Labels& labels);

/// Internal edit with interned label. For positional edits `node` and
/// `parent` are preorder indices instead of ids.
struct IEdit {
    EditKind kind = EditKind::update;
    int node = 0;
    int label = 0;
    int parent = -1;
    int position = 0;
    int count = 0;
};

/// Mutable tree addressed by stable ids. Id -1 is the virtual root.
class WTree {
public:
    explicit WTree(const FTree& t);

    void apply(const IEdit& e);  // throws ContractViolation
    std::vector<int> preorder() const;
    int next_id() const { return static_cast<int>(nodes_.size()) - 1; }
    int label(int id) const { return at(id).label; }
    int parent(int id) const { return at(id).parent; }
    const std::vector<int>& kids(int id) const { return at(id).kids; }
    bool alive(int id) const;
    bool in_subtree(int id, int root) const;
    /// Converts a positional edit on the current shape into an id edit.
    IEdit resolve(const IEdit& positional) const;
    FTree freeze() const;

private:
    struct N {
        int label = 0;
        int parent = -1;
        std::vector<int> kids;
        bool alive = true;
    };
    N& at(int id);
    const N& at(int id) const;
    std::vector<N> nodes_;  // index id + 1
};

Tree unflatten(const FTree& t, const Labels& labels);

/// Exact search bounded by `limit` edits; returns positional edits from a to b
/// or nothing when no script within the limit exists. `exhausted` is set when
/// the state budget ran out before the bound was settled.
std::optional<std::vector<IEdit>> exact_search(const FTree& a, const FTree& b, int label_count, int limit,
                                               bool& exhausted);

}  // namespace mdlab::astdiff::detail
