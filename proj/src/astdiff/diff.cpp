#include <algorithm>
#include <functional>
#include <set>

#include "internal.hpp"

namespace mdlab::astdiff {

namespace {

using detail::FTree;
using detail::IEdit;
using detail::Labels;
using detail::WTree;

constexpr int kForbidden = 1 << 20;

// Postorder view with a virtual root appended as the last node.
struct Post {
    std::vector<int> pre;  // postorder index -> preorder index, -1 for the virtual root
    std::vector<int> lml;  // leftmost leaf in postorder
    std::vector<int> keyroots;

    int size() const { return static_cast<int>(pre.size()); }
};

Post postorder(const FTree& t) {
    Post p;
    std::function<int(int)> visit = [&](int node) {
        const auto& kids = node == -1 ? t.top : t.kids[static_cast<std::size_t>(node)];
        int first = -1;
        for (int k : kids) {
            int l = visit(k);
            if (first < 0) first = l;
        }
        int me = p.size();
        p.pre.push_back(node);
        p.lml.push_back(first < 0 ? me : first);
        return p.lml.back();
    };
    visit(-1);
    std::vector<char> seen(p.pre.size(), 0);
    for (int i = p.size() - 1; i >= 0; --i) {
        if (seen[static_cast<std::size_t>(p.lml[static_cast<std::size_t>(i)])]) continue;
        seen[static_cast<std::size_t>(p.lml[static_cast<std::size_t>(i)])] = 1;
        p.keyroots.push_back(i);
    }
    std::sort(p.keyroots.begin(), p.keyroots.end());
    return p;
}

class Zss {
public:
    Zss(const FTree& a, const FTree& b, const std::vector<char>& forbid_a, const std::vector<char>& forbid_b)
        : a_(a), b_(b), pa_(postorder(a)), pb_(postorder(b)), fa_(forbid_a), fb_(forbid_b) {
        na_ = pa_.size();
        nb_ = pb_.size();
        td_.assign(static_cast<std::size_t>(na_) * static_cast<std::size_t>(nb_), 0);
        for (int i : pa_.keyroots)
            for (int j : pb_.keyroots) forest(i, j, true);
    }

    /// Mapping as preorder pairs, virtual roots excluded.
    std::vector<int> mapping() {
        std::vector<int> m(static_cast<std::size_t>(a_.size()), -1);
        std::vector<std::pair<int, int>> todo{{na_ - 1, nb_ - 1}};
        while (!todo.empty()) {
            auto [i, j] = todo.back();
            todo.pop_back();
            forest(i, j, false);
            int li = lml_a(i), lj = lml_b(j);
            int x = i, y = j;
            while (x >= li || y >= lj) {
                int xi = x - li + 1, yj = y - lj + 1;
                if (x >= li && y >= lj) {
                    if (lml_a(x) == li && lml_b(y) == lj) {
                        if (fd(xi, yj) == fd(xi - 1, yj - 1) + ren(x, y)) {
                            int pa = pa_.pre[static_cast<std::size_t>(x)], pb = pb_.pre[static_cast<std::size_t>(y)];
                            if (pa >= 0 && pb >= 0) m[static_cast<std::size_t>(pa)] = pb;
                            --x;
                            --y;
                            continue;
                        }
                    } else if (fd(xi, yj) == fd(lml_a(x) - li, lml_b(y) - lj) + td(x, y)) {
                        todo.emplace_back(x, y);
                        x = lml_a(x) - 1;
                        y = lml_b(y) - 1;
                        continue;
                    }
                }
                if (x >= li && fd(xi, yj) == fd(xi - 1, yj) + 1) {
                    --x;
                    continue;
                }
                --y;
            }
        }
        return m;
    }

private:
    int lml_a(int i) const { return pa_.lml[static_cast<std::size_t>(i)]; }
    int lml_b(int j) const { return pb_.lml[static_cast<std::size_t>(j)]; }
    int& td(int i, int j) { return td_[static_cast<std::size_t>(i) * static_cast<std::size_t>(nb_) + static_cast<std::size_t>(j)]; }
    int& fd(int x, int y) { return fd_[static_cast<std::size_t>(x) * static_cast<std::size_t>(w_) + static_cast<std::size_t>(y)]; }

    int ren(int x, int y) const {
        int p = pa_.pre[static_cast<std::size_t>(x)], q = pb_.pre[static_cast<std::size_t>(y)];
        if (p < 0 || q < 0) return p == q ? 0 : kForbidden;
        if (fa_[static_cast<std::size_t>(p)] || fb_[static_cast<std::size_t>(q)]) return kForbidden;
        return a_.label[static_cast<std::size_t>(p)] == b_.label[static_cast<std::size_t>(q)] ? 0 : 1;
    }

    void forest(int i, int j, bool fill) {
        int li = lml_a(i), lj = lml_b(j);
        int h = i - li + 2;
        w_ = j - lj + 2;
        fd_.assign(static_cast<std::size_t>(h) * static_cast<std::size_t>(w_), 0);
        for (int x = 1; x < h; ++x) fd(x, 0) = fd(x - 1, 0) + 1;
        for (int y = 1; y < w_; ++y) fd(0, y) = fd(0, y - 1) + 1;
        for (int x = li; x <= i; ++x) {
            int xi = x - li + 1;
            for (int y = lj; y <= j; ++y) {
                int yj = y - lj + 1;
                int best = std::min(fd(xi - 1, yj), fd(xi, yj - 1)) + 1;
                if (lml_a(x) == li && lml_b(y) == lj) {
                    best = std::min(best, fd(xi - 1, yj - 1) + ren(x, y));
                    if (fill) td(x, y) = best;
                } else {
                    best = std::min(best, fd(lml_a(x) - li, lml_b(y) - lj) + td(x, y));
                }
                fd(xi, yj) = best;
            }
        }
    }

    const FTree& a_;
    const FTree& b_;
    Post pa_, pb_;
    const std::vector<char>& fa_;
    const std::vector<char>& fb_;
    int na_ = 0, nb_ = 0, w_ = 0;
    std::vector<int> td_;
    std::vector<int> fd_;
};

// Structural identity of subtrees across both trees.
struct Shapes {
    std::vector<int> a, b;
    std::vector<int> size_a, size_b;
};

Shapes shapes(const FTree& a, const FTree& b) {
    std::map<std::pair<int, std::vector<int>>, int> table;
    auto run = [&](const FTree& t, std::vector<int>& out, std::vector<int>& size) {
        out.assign(static_cast<std::size_t>(t.size()), 0);
        size.assign(static_cast<std::size_t>(t.size()), 1);
        for (int i = t.size() - 1; i >= 0; --i) {
            std::vector<int> key;
            for (int k : t.kids[static_cast<std::size_t>(i)]) {
                key.push_back(out[static_cast<std::size_t>(k)]);
                size[static_cast<std::size_t>(i)] += size[static_cast<std::size_t>(k)];
            }
            auto [it, fresh] = table.emplace(std::make_pair(t.label[static_cast<std::size_t>(i)], std::move(key)),
                                             static_cast<int>(table.size()));
            out[static_cast<std::size_t>(i)] = it->second;
        }
    };
    Shapes s;
    run(a, s.a, s.size_a);
    run(b, s.b, s.size_b);
    return s;
}

struct Candidate {
    std::vector<int> map_a;                   // a -> b
    std::vector<std::pair<int, int>> moves;   // (a root, b root)
    int cost = 0;
};

Candidate collapse(const FTree& a, const FTree& b, const Shapes& sh, std::vector<int> map_a) {
    Candidate c;
    std::vector<int> map_b(static_cast<std::size_t>(b.size()), -1);
    for (int i = 0; i < a.size(); ++i)
        if (map_a[static_cast<std::size_t>(i)] >= 0) map_b[static_cast<std::size_t>(map_a[static_cast<std::size_t>(i)])] = i;

    auto fully = [](const FTree& t, const std::vector<int>& m) {
        std::vector<char> f(static_cast<std::size_t>(t.size()), 0);
        for (int i = t.size() - 1; i >= 0; --i) {
            bool ok = m[static_cast<std::size_t>(i)] < 0;
            for (int k : t.kids[static_cast<std::size_t>(i)]) ok = ok && f[static_cast<std::size_t>(k)];
            f[static_cast<std::size_t>(i)] = ok;
        }
        return f;
    };
    auto del = fully(a, map_a);
    auto ins = fully(b, map_b);

    std::map<int, std::vector<int>> by_shape;
    for (int i = 0; i < a.size(); ++i)
        if (del[static_cast<std::size_t>(i)]) by_shape[sh.a[static_cast<std::size_t>(i)]].push_back(i);

    std::vector<int> order;
    for (int j = 0; j < b.size(); ++j)
        if (ins[static_cast<std::size_t>(j)]) order.push_back(j);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        return sh.size_b[static_cast<std::size_t>(x)] > sh.size_b[static_cast<std::size_t>(y)];
    });

    std::vector<char> used_a(static_cast<std::size_t>(a.size()), 0), used_b(static_cast<std::size_t>(b.size()), 0);
    for (int j : order) {
        if (used_b[static_cast<std::size_t>(j)]) continue;
        auto it = by_shape.find(sh.b[static_cast<std::size_t>(j)]);
        if (it == by_shape.end()) continue;
        for (int i : it->second) {
            int n = sh.size_a[static_cast<std::size_t>(i)];
            bool free = true;
            for (int k = i; k < i + n; ++k) free = free && !used_a[static_cast<std::size_t>(k)];
            if (!free) continue;
            for (int k = 0; k < n; ++k) {
                used_a[static_cast<std::size_t>(i + k)] = 1;
                used_b[static_cast<std::size_t>(j + k)] = 1;
            }
            c.moves.emplace_back(i, j);
            break;
        }
    }
    int cost = static_cast<int>(c.moves.size());
    for (int i = 0; i < a.size(); ++i) {
        int m = map_a[static_cast<std::size_t>(i)];
        if (m < 0)
            cost += used_a[static_cast<std::size_t>(i)] ? 0 : 1;
        else if (a.label[static_cast<std::size_t>(i)] != b.label[static_cast<std::size_t>(m)])
            ++cost;
    }
    for (int j = 0; j < b.size(); ++j)
        if (map_b[static_cast<std::size_t>(j)] < 0 && !used_b[static_cast<std::size_t>(j)]) ++cost;
    c.map_a = std::move(map_a);
    c.cost = cost;
    return c;
}

Edit to_public(const IEdit& e, const Labels& labels) {
    return Edit{e.kind, e.node, labels.names.at(static_cast<std::size_t>(e.label)), e.parent, e.position, e.count};
}

// Records an id edit, filling in the current label for delete/move.
void emit(WTree& w, IEdit e, const Labels& labels, EditScript& out) {
    if (e.kind == EditKind::remove || e.kind == EditKind::move) e.label = w.label(e.node);
    w.apply(e);
    out.edits.push_back(to_public(e, labels));
}

EditScript build_script(const FTree& a, const FTree& b, const Candidate& c, const Labels& labels) {
    EditScript out;
    WTree w(a);
    std::vector<char> in_move_a(static_cast<std::size_t>(a.size()), 0);
    std::vector<int> move_root_b(static_cast<std::size_t>(b.size()), -1);
    std::vector<char> in_move_b(static_cast<std::size_t>(b.size()), 0);
    for (auto [i, j] : c.moves) {
        int n = a.subtree_end(i) - i;
        for (int k = 0; k < n; ++k) {
            in_move_a[static_cast<std::size_t>(i + k)] = 1;
            in_move_b[static_cast<std::size_t>(j + k)] = 1;
        }
        move_root_b[static_cast<std::size_t>(j)] = i;
    }

    for (int i = a.size() - 1; i >= 0; --i)
        if (c.map_a[static_cast<std::size_t>(i)] < 0 && !in_move_a[static_cast<std::size_t>(i)])
            emit(w, IEdit{EditKind::remove, i, 0, -1, 0, 0}, labels, out);
    for (int i = 0; i < a.size(); ++i) {
        int m = c.map_a[static_cast<std::size_t>(i)];
        if (m >= 0 && a.label[static_cast<std::size_t>(i)] != b.label[static_cast<std::size_t>(m)])
            emit(w, IEdit{EditKind::update, i, b.label[static_cast<std::size_t>(m)], -1, 0, 0}, labels, out);
    }

    std::vector<int> key(static_cast<std::size_t>(a.size() + b.size()), -1);
    std::vector<int> img(static_cast<std::size_t>(b.size()), -2);
    for (int i = 0; i < a.size(); ++i) {
        int m = c.map_a[static_cast<std::size_t>(i)];
        if (m >= 0) {
            key[static_cast<std::size_t>(i)] = m;
            img[static_cast<std::size_t>(m)] = i;
        }
    }
    auto key_of = [&](int id) { return id >= 0 ? key[static_cast<std::size_t>(id)] : -1; };

    for (int j = 0; j < b.size(); ++j) {
        if (img[static_cast<std::size_t>(j)] != -2) continue;
        int bp = b.parent[static_cast<std::size_t>(j)];
        int p = bp < 0 ? -1 : img[static_cast<std::size_t>(bp)];
        int end = b.subtree_end(j);
        if (move_root_b[static_cast<std::size_t>(j)] >= 0) {
            int i = move_root_b[static_cast<std::size_t>(j)];
            int pos = 0, idx = 0;
            for (int k : w.kids(p)) {
                if (k == i) continue;
                ++idx;
                int kk = key_of(k);
                if (kk >= 0 && kk < j) pos = idx;
            }
            emit(w, IEdit{EditKind::move, i, 0, p, pos, 0}, labels, out);
            for (int k = 0; k < end - j; ++k) {
                key[static_cast<std::size_t>(i + k)] = j + k;
                img[static_cast<std::size_t>(j + k)] = i + k;
            }
            continue;
        }
        if (in_move_b[static_cast<std::size_t>(j)]) continue;
        const auto& kids = w.kids(p);
        int first = -1, last = -1, after = 0;
        for (int idx = 0; idx < static_cast<int>(kids.size()); ++idx) {
            int kk = key_of(kids[static_cast<std::size_t>(idx)]);
            if (kk < 0) continue;
            if (kk > j && kk < end) {
                if (first < 0) first = idx;
                last = idx;
            } else if (kk < j) {
                after = idx + 1;
            }
        }
        int id = w.next_id();
        IEdit e{EditKind::insert, id, b.label[static_cast<std::size_t>(j)], p, after, 0};
        if (first >= 0) {
            e.position = first;
            e.count = last - first + 1;
        }
        emit(w, e, labels, out);
        key[static_cast<std::size_t>(id)] = j;
        img[static_cast<std::size_t>(j)] = id;
    }
    return out;
}

Candidate heuristic(const FTree& a, const FTree& b) {
    Shapes sh = shapes(a, b);
    std::vector<char> fa(static_cast<std::size_t>(a.size()), 0), fb(static_cast<std::size_t>(b.size()), 0);
    auto run = [&] { return collapse(a, b, sh, Zss(a, b, fa, fb).mapping()); };
    Candidate best = run();

    std::map<int, int> count_a, count_b;
    for (int s : sh.a) ++count_a[s];
    for (int s : sh.b) ++count_b[s];
    std::map<int, int> where_b;
    for (int j = 0; j < b.size(); ++j) where_b[sh.b[static_cast<std::size_t>(j)]] = j;
    std::vector<std::pair<int, int>> anchors;
    for (int i = 0; i < a.size(); ++i) {
        int s = sh.a[static_cast<std::size_t>(i)];
        if (sh.size_a[static_cast<std::size_t>(i)] < 2 || count_a[s] != 1 || count_b[s] != 1) continue;
        anchors.emplace_back(i, where_b[s]);
    }
    std::stable_sort(anchors.begin(), anchors.end(), [&](auto x, auto y) {
        return sh.size_a[static_cast<std::size_t>(x.first)] > sh.size_a[static_cast<std::size_t>(y.first)];
    });
    int tries = 0;
    for (auto [i, j] : anchors) {
        if (best.map_a[static_cast<std::size_t>(i)] == j) continue;
        if (fa[static_cast<std::size_t>(i)] || fb[static_cast<std::size_t>(j)]) continue;
        if (++tries > 24) break;
        auto saved_a = fa, saved_b = fb;
        for (int k = i; k < a.subtree_end(i); ++k) fa[static_cast<std::size_t>(k)] = 1;
        for (int k = j; k < b.subtree_end(j); ++k) fb[static_cast<std::size_t>(k)] = 1;
        Candidate c = run();
        if (c.cost < best.cost) {
            best = std::move(c);
        } else {
            fa = std::move(saved_a);
            fb = std::move(saved_b);
        }
    }
    return best;
}

}  // namespace

EditScript edit_distance(const Tree& ta, const Tree& tb) {
    Labels labels;
    FTree a = detail::flatten(ta, labels);
    FTree b = detail::flatten(tb, labels);
    Candidate c = heuristic(a, b);
    EditScript script = build_script(a, b, c, labels);
    if (script.cost() == 0) {
        script.exact = true;
        return script;
    }
    if (a.size() <= 8 && b.size() <= 8) {
        bool exhausted = false;
        auto path = detail::exact_search(a, b, static_cast<int>(labels.names.size()), script.cost() - 1, exhausted);
        if (path) {
            EditScript exact;
            WTree w(a);
            for (const auto& p : *path) emit(w, w.resolve(p), labels, exact);
            exact.exact = true;
            return exact;
        }
        script.exact = !exhausted;
    }
    return script;
}

EditScript edit_distance(const lang::ClassAst& a, const lang::ClassAst& b) { return edit_distance(to_tree(a), to_tree(b)); }

Distortion distortion(const lang::ClassAst& original, const lang::ClassAst& decompiled) {
    Tree a = to_tree(normalize_names(original));
    Tree b = to_tree(normalize_names(decompiled));
    Distortion d;
    d.script = edit_distance(a, b);
    d.edits = d.script.cost();
    d.original_nodes = static_cast<int>(a.size());
    d.normalized = static_cast<double>(d.edits) / d.original_nodes;
    return d;
}

std::optional<Distortion> distortion(const lang::ClassAst& original, std::string_view decompiled_source) {
    auto p = lang::parse(decompiled_source);
    if (!p.ok()) return std::nullopt;
    return distortion(original, *p.ast);
}

}  // namespace mdlab::astdiff
