#pragma once

// Brute-force tree edit distance over insert/delete/update/move, used as the
// reference for the differencing engine. Written against the nested Tree type
// only; shares no code with the engine.

#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "mdlab/astdiff.hpp"

namespace oracle {

using mdlab::astdiff::Tree;
using Path = std::vector<int>;

inline Tree* at(Tree& root, const Path& p) {
    Tree* t = &root;
    for (int i : p) t = &t->kids[static_cast<std::size_t>(i)];
    return t;
}

inline void paths(const Tree& t, Path& cur, std::vector<Path>& out) {
    out.push_back(cur);
    for (std::size_t i = 0; i < t.kids.size(); ++i) {
        cur.push_back(static_cast<int>(i));
        paths(t.kids[i], cur, out);
        cur.pop_back();
    }
}

inline std::vector<Path> paths(const Tree& t) {
    std::vector<Path> out;
    Path cur;
    paths(t, cur, out);
    return out;
}

/// All forests one edit away; `root` is a virtual root holding the forest.
inline std::vector<Tree> neighbors(const Tree& root, const std::vector<std::string>& alphabet) {
    std::vector<Tree> out;
    auto all = paths(root);
    for (const auto& p : all) {
        if (p.empty()) continue;
        for (const auto& l : alphabet) {
            if (l == at(const_cast<Tree&>(root), p)->label) continue;
            Tree c = root;
            at(c, p)->label = l;
            out.push_back(std::move(c));
        }
        Tree c = root;
        Path pp(p.begin(), p.end() - 1);
        Tree* parent = at(c, pp);
        auto idx = static_cast<std::size_t>(p.back());
        Tree gone = std::move(parent->kids[idx]);
        parent->kids.erase(parent->kids.begin() + static_cast<long>(idx));
        parent->kids.insert(parent->kids.begin() + static_cast<long>(idx), gone.kids.begin(), gone.kids.end());
        out.push_back(std::move(c));
    }
    for (const auto& p : all) {
        std::size_t m = at(const_cast<Tree&>(root), p)->kids.size();
        for (std::size_t i = 0; i <= m; ++i)
            for (std::size_t j = i; j <= m; ++j)
                for (const auto& l : alphabet) {
                    Tree c = root;
                    Tree* t = at(c, p);
                    Tree n{l, {}};
                    n.kids.assign(t->kids.begin() + static_cast<long>(i), t->kids.begin() + static_cast<long>(j));
                    t->kids.erase(t->kids.begin() + static_cast<long>(i), t->kids.begin() + static_cast<long>(j));
                    t->kids.insert(t->kids.begin() + static_cast<long>(i), std::move(n));
                    out.push_back(std::move(c));
                }
    }
    for (const auto& x : all) {
        if (x.empty()) continue;
        Tree cut = root;
        Path xp(x.begin(), x.end() - 1);
        Tree* parent = at(cut, xp);
        auto idx = static_cast<std::size_t>(x.back());
        Tree sub = std::move(parent->kids[idx]);
        parent->kids.erase(parent->kids.begin() + static_cast<long>(idx));
        for (const auto& q : paths(cut)) {
            std::size_t m = at(cut, q)->kids.size();
            for (std::size_t pos = 0; pos <= m; ++pos) {
                if (q == xp && pos == idx) continue;
                Tree c = cut;
                Tree* t = at(c, q);
                t->kids.insert(t->kids.begin() + static_cast<long>(pos), sub);
                out.push_back(std::move(c));
            }
        }
    }
    return out;
}

inline std::string key(const Tree& t) { return mdlab::astdiff::to_string(t); }

/// Minimum number of edits turning `a` into `b`, or -1 when above `limit`.
inline int distance(const Tree& a, const Tree& b, const std::vector<std::string>& alphabet, int limit) {
    Tree ra{"^", {a}}, rb{"^", {b}};
    if (key(ra) == key(rb)) return 0;
    struct Side {
        std::unordered_map<std::string, int> seen;
        std::vector<Tree> frontier;
        int depth = 0;
    } f, g;
    f.seen[key(ra)] = 0;
    f.frontier.push_back(ra);
    g.seen[key(rb)] = 0;
    g.frontier.push_back(rb);
    while (f.depth + g.depth < limit) {
        Side& me = f.frontier.size() <= g.frontier.size() ? f : g;
        Side& other = &me == &f ? g : f;
        std::vector<Tree> next;
        int best = -1;
        for (const auto& t : me.frontier)
            for (auto& n : neighbors(t, alphabet)) {
                auto k = key(n);
                if (me.seen.count(k)) continue;
                me.seen[k] = me.depth + 1;
                auto hit = other.seen.find(k);
                if (hit != other.seen.end() && (best < 0 || me.depth + 1 + hit->second < best))
                    best = me.depth + 1 + hit->second;
                next.push_back(std::move(n));
            }
        if (best >= 0) return best;
        me.frontier = std::move(next);
        ++me.depth;
        if (me.frontier.empty()) return -1;
    }
    return -1;
}

inline Tree random_tree(std::mt19937& rng, int n, const std::vector<std::string>& alphabet) {
    std::vector<Tree> nodes(static_cast<std::size_t>(n));
    std::vector<int> parent(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
        nodes[static_cast<std::size_t>(i)].label = alphabet[rng() % alphabet.size()];
        if (i) parent[static_cast<std::size_t>(i)] = static_cast<int>(rng() % static_cast<unsigned>(i));
    }
    for (int i = n - 1; i > 0; --i) {
        auto& p = nodes[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
        p.kids.insert(p.kids.begin(), std::move(nodes[static_cast<std::size_t>(i)]));
    }
    return nodes[0];
}

/// A random tree and a copy perturbed by up to `max_edits` random edits, both
/// with at most `max_nodes` nodes.
inline std::pair<Tree, Tree> random_pair(std::mt19937& rng, int max_nodes, int max_edits,
                                         const std::vector<std::string>& alphabet) {
    Tree a = random_tree(rng, 1 + static_cast<int>(rng() % static_cast<unsigned>(max_nodes)), alphabet);
    Tree cur{"^", {a}};
    int k = static_cast<int>(rng() % static_cast<unsigned>(max_edits + 1));
    for (int e = 0; e < k; ++e) {
        std::vector<Tree> ok;
        for (auto& n : neighbors(cur, alphabet))
            if (n.kids.size() == 1 && n.size() <= static_cast<std::size_t>(max_nodes) + 1) ok.push_back(std::move(n));
        cur = ok[rng() % ok.size()];
    }
    return {a, cur.kids[0]};
}

}  // namespace oracle
