#include <algorithm>
#include <unordered_map>

#include "internal.hpp"

namespace mdlab::astdiff::detail {

namespace {

// A forest as its preorder sequence of (label, depth) byte pairs.
using State = std::string;

constexpr std::size_t kBudget = 400000;

State encode(const FTree& t) {
    State s;
    std::vector<int> depth(static_cast<std::size_t>(t.size()), 0);
    for (int i = 0; i < t.size(); ++i) {
        int p = t.parent[static_cast<std::size_t>(i)];
        depth[static_cast<std::size_t>(i)] = p < 0 ? 0 : depth[static_cast<std::size_t>(p)] + 1;
        s += static_cast<char>(t.label[static_cast<std::size_t>(i)]);
        s += static_cast<char>(depth[static_cast<std::size_t>(i)]);
    }
    return s;
}

FTree decode(const State& s) {
    FTree t;
    std::vector<int> stack;
    for (std::size_t k = 0; k < s.size(); k += 2) {
        int d = static_cast<unsigned char>(s[k + 1]);
        stack.resize(static_cast<std::size_t>(d));
        int p = d == 0 ? -1 : stack.back();
        int id = t.size();
        t.label.push_back(static_cast<unsigned char>(s[k]));
        t.parent.push_back(p);
        t.kids.emplace_back();
        if (p < 0)
            t.top.push_back(id);
        else
            t.kids[static_cast<std::size_t>(p)].push_back(id);
        stack.push_back(id);
    }
    return t;
}

struct Shape {
    int n = 0;
    std::vector<int> depth, end, parent;
    std::vector<std::vector<int>> kids;  // index 0 is the virtual root, node k at k + 1

    explicit Shape(const State& s) {
        n = static_cast<int>(s.size() / 2);
        depth.resize(static_cast<std::size_t>(n));
        end.resize(static_cast<std::size_t>(n));
        parent.resize(static_cast<std::size_t>(n));
        kids.resize(static_cast<std::size_t>(n) + 1);
        std::vector<int> stack;
        for (int k = 0; k < n; ++k) {
            int d = static_cast<unsigned char>(s[static_cast<std::size_t>(2 * k + 1)]);
            depth[static_cast<std::size_t>(k)] = d;
            while (static_cast<int>(stack.size()) > d) {
                end[static_cast<std::size_t>(stack.back())] = k;
                stack.pop_back();
            }
            int p = stack.empty() ? -1 : stack.back();
            parent[static_cast<std::size_t>(k)] = p;
            kids[static_cast<std::size_t>(p + 1)].push_back(k);
            stack.push_back(k);
        }
        for (int k : stack) end[static_cast<std::size_t>(k)] = n;
    }
    const std::vector<int>& children(int p) const { return kids[static_cast<std::size_t>(p + 1)]; }
    int stop(int p) const { return p < 0 ? n : end[static_cast<std::size_t>(p)]; }
    int child_depth(int p) const { return p < 0 ? 0 : depth[static_cast<std::size_t>(p)] + 1; }
};

void shift(State& s, std::size_t from, std::size_t to, int delta) {
    for (std::size_t k = from; k < to; ++k) s[2 * k + 1] = static_cast<char>(s[2 * k + 1] + delta);
}

template <class F>
void successors(const State& s, int label_count, F&& visit) {
    Shape sh(s);
    const int n = sh.n;
    for (int k = 0; k < n; ++k) {
        int cur = static_cast<unsigned char>(s[static_cast<std::size_t>(2 * k)]);
        for (int l = 0; l < label_count; ++l) {
            if (l == cur) continue;
            State t = s;
            t[static_cast<std::size_t>(2 * k)] = static_cast<char>(l);
            visit(t, IEdit{EditKind::update, k, l, -1, 0, 0});
        }
    }
    for (int k = 0; k < n; ++k) {
        State t = s;
        shift(t, static_cast<std::size_t>(k + 1), static_cast<std::size_t>(sh.end[static_cast<std::size_t>(k)]), -1);
        t.erase(static_cast<std::size_t>(2 * k), 2);
        visit(t, IEdit{EditKind::remove, k, 0, -1, 0, 0});
    }
    for (int p = -1; p < n; ++p) {
        const auto& c = sh.children(p);
        int m = static_cast<int>(c.size());
        auto start = [&](int i) { return i < m ? c[static_cast<std::size_t>(i)] : sh.stop(p); };
        for (int pos = 0; pos <= m; ++pos) {
            for (int cnt = 0; pos + cnt <= m; ++cnt) {
                int at = start(pos), stop = start(pos + cnt);
                for (int l = 0; l < label_count; ++l) {
                    State t = s;
                    shift(t, static_cast<std::size_t>(at), static_cast<std::size_t>(stop), 1);
                    char node[2] = {static_cast<char>(l), static_cast<char>(sh.child_depth(p))};
                    t.insert(static_cast<std::size_t>(2 * at), node, 2);
                    visit(t, IEdit{EditKind::insert, 0, l, p, pos, cnt});
                }
            }
        }
    }
    for (int x = 0; x < n; ++x) {
        int xe = sh.end[static_cast<std::size_t>(x)];
        int len = xe - x;
        State region = s.substr(static_cast<std::size_t>(2 * x), static_cast<std::size_t>(2 * len));
        State rest = s;
        rest.erase(static_cast<std::size_t>(2 * x), static_cast<std::size_t>(2 * len));
        Shape rs(rest);
        int old_parent = sh.parent[static_cast<std::size_t>(x)];
        const auto& siblings = sh.children(old_parent);
        int old_pos = static_cast<int>(std::find(siblings.begin(), siblings.end(), x) - siblings.begin());
        int xd = sh.depth[static_cast<std::size_t>(x)];
        for (int p = -1; p < rs.n; ++p) {
            int orig_p = p < 0 ? -1 : (p < x ? p : p + len);
            const auto& c = rs.children(p);
            int m = static_cast<int>(c.size());
            for (int pos = 0; pos <= m; ++pos) {
                if (orig_p == old_parent && pos == old_pos) continue;
                int at = pos < m ? c[static_cast<std::size_t>(pos)] : rs.stop(p);
                State r = region;
                shift(r, 0, static_cast<std::size_t>(len), rs.child_depth(p) - xd);
                State t = rest;
                t.insert(static_cast<std::size_t>(2 * at), r);
                visit(t, IEdit{EditKind::move, x, 0, orig_p, pos, 0});
            }
        }
    }
}

struct Entry {
    State state;
    int parent = -1;
    IEdit edit;
    int depth = 0;
};

struct Side {
    std::vector<Entry> entries;
    std::unordered_map<State, int> index;
    std::size_t frontier_begin = 0;
    int depth = 0;

    explicit Side(State root) {
        index.emplace(root, 0);
        entries.push_back(Entry{std::move(root), -1, {}, 0});
    }
    std::size_t frontier_size() const { return entries.size() - frontier_begin; }
};

// Positional edit on the child state that undoes `e` applied to `from`.
IEdit invert(const State& from, const IEdit& e) {
    WTree w(decode(from));
    IEdit id = w.resolve(e);
    IEdit inv;
    if (id.kind == EditKind::update) {
        inv = IEdit{EditKind::update, id.node, w.label(id.node), -1, 0, 0};
    } else if (id.kind == EditKind::remove) {
        int p = w.parent(id.node);
        const auto& sib = w.kids(p);
        int pos = static_cast<int>(std::find(sib.begin(), sib.end(), id.node) - sib.begin());
        inv = IEdit{EditKind::insert, 0, w.label(id.node), p, pos, static_cast<int>(w.kids(id.node).size())};
    } else if (id.kind == EditKind::insert) {
        inv = IEdit{EditKind::remove, id.node, 0, -1, 0, 0};
    } else {
        int p = w.parent(id.node);
        const auto& sib = w.kids(p);
        int pos = static_cast<int>(std::find(sib.begin(), sib.end(), id.node) - sib.begin());
        inv = IEdit{EditKind::move, id.node, 0, p, pos, 0};
    }
    w.apply(id);
    auto order = w.preorder();
    auto index_of = [&](int node) {
        if (node == -1) return -1;
        return static_cast<int>(std::find(order.begin(), order.end(), node) - order.begin());
    };
    if (inv.kind != EditKind::insert) inv.node = index_of(inv.node);
    inv.parent = index_of(inv.parent);
    return inv;
}

}  // namespace

std::optional<std::vector<IEdit>> exact_search(const FTree& a, const FTree& b, int label_count, int limit,
                                               bool& exhausted) {
    exhausted = false;
    if (label_count > 120 || a.size() > 60 || b.size() > 60) {
        exhausted = true;
        return std::nullopt;
    }
    State src = encode(a), dst = encode(b);
    if (src == dst) return std::vector<IEdit>{};
    Side fwd(src), bwd(dst);
    int best = -1;
    int meet_f = -1, meet_b = -1;
    while (fwd.depth + bwd.depth < limit) {
        bool forward = fwd.frontier_size() <= bwd.frontier_size();
        Side& me = forward ? fwd : bwd;
        Side& other = forward ? bwd : fwd;
        std::size_t begin = me.frontier_begin, end = me.entries.size();
        if (begin == end) return std::nullopt;
        for (std::size_t k = begin; k < end; ++k) {
            State cur = me.entries[k].state;
            successors(cur, label_count, [&](State& next, const IEdit& e) {
                if (me.index.count(next)) return;
                int idx = static_cast<int>(me.entries.size());
                me.index.emplace(next, idx);
                auto hit = other.index.find(next);
                if (hit != other.index.end()) {
                    int total = me.depth + 1 + other.entries[static_cast<std::size_t>(hit->second)].depth;
                    if (best < 0 || total < best) {
                        best = total;
                        meet_f = forward ? idx : hit->second;
                        meet_b = forward ? hit->second : idx;
                    }
                }
                me.entries.push_back(Entry{std::move(next), static_cast<int>(k), e, me.depth + 1});
            });
            if (fwd.entries.size() + bwd.entries.size() > kBudget) {
                exhausted = true;
                return std::nullopt;
            }
        }
        me.frontier_begin = end;
        ++me.depth;
        if (best >= 0) break;
    }
    if (best < 0) return std::nullopt;

    std::vector<IEdit> path;
    for (int k = meet_f; fwd.entries[static_cast<std::size_t>(k)].parent >= 0; k = fwd.entries[static_cast<std::size_t>(k)].parent)
        path.push_back(fwd.entries[static_cast<std::size_t>(k)].edit);
    std::reverse(path.begin(), path.end());
    for (int k = meet_b; bwd.entries[static_cast<std::size_t>(k)].parent >= 0; k = bwd.entries[static_cast<std::size_t>(k)].parent) {
        const auto& e = bwd.entries[static_cast<std::size_t>(k)];
        path.push_back(invert(bwd.entries[static_cast<std::size_t>(e.parent)].state, e.edit));
    }
    return path;
}

}  // namespace mdlab::astdiff::detail
