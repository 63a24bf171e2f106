#include <algorithm>
#include <functional>

#include "internal.hpp"

namespace mdlab::astdiff {

std::size_t Tree::size() const {
    std::size_t n = 1;
    for (const auto& k : kids) n += k.size();
    return n;
}

std::string_view to_string(EditKind k) {
    switch (k) {
        case EditKind::insert: return "insert";
        case EditKind::remove: return "delete";
        case EditKind::update: return "update";
        case EditKind::move: return "move";
    }
    return "?";
}

int EditScript::count(EditKind k) const {
    return static_cast<int>(std::count_if(edits.begin(), edits.end(), [&](const Edit& e) { return e.kind == k; }));
}

Tree parse_tree(std::string_view text) {
    std::size_t pos = 0;
    auto skip = [&] {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\n' || text[pos] == '\t')) ++pos;
    };
    std::function<Tree()> node = [&]() -> Tree {
        skip();
        Tree t;
        while (pos < text.size() && text[pos] != '(' && text[pos] != ')' && text[pos] != ',') t.label += text[pos++];
        while (!t.label.empty() && t.label.back() == ' ') t.label.pop_back();
        if (t.label.empty()) throw ContractViolation("tree syntax: empty label at offset " + std::to_string(pos));
        skip();
        if (pos < text.size() && text[pos] == '(') {
            ++pos;
            while (true) {
                t.kids.push_back(node());
                skip();
                if (pos < text.size() && text[pos] == ',') {
                    ++pos;
                    continue;
                }
                if (pos < text.size() && text[pos] == ')') {
                    ++pos;
                    break;
                }
                throw ContractViolation("tree syntax: expected ',' or ')' at offset " + std::to_string(pos));
            }
        }
        return t;
    };
    Tree t = node();
    skip();
    if (pos != text.size()) throw ContractViolation("tree syntax: trailing text at offset " + std::to_string(pos));
    return t;
}

std::string to_string(const Tree& t) {
    std::string out = t.label;
    if (!t.kids.empty()) {
        out += '(';
        for (std::size_t i = 0; i < t.kids.size(); ++i) {
            if (i) out += ',';
            out += to_string(t.kids[i]);
        }
        out += ')';
    }
    return out;
}

namespace {

std::string node_label(const lang::Node& n) {
    std::string s(lang::to_string(n.kind));
    if (!n.text.empty()) s += ":" + n.text;
    if (n.modifiers) {
        s += " [";
        if (n.modifiers & lang::kPrivate) s += "private ";
        if (n.modifiers & lang::kStatic) s += "static ";
        if (n.modifiers & lang::kFinal) s += "final ";
        s.back() = ']';
    }
    return s;
}

Tree convert(const lang::Node& n) {
    Tree t{node_label(n), {}};
    t.kids.reserve(n.kids.size());
    for (const auto& k : n.kids) t.kids.push_back(convert(k));
    return t;
}

}  // namespace

Tree to_tree(const lang::ClassAst& ast) {
    Tree root{"Class:" + ast.qualified_name, {}};
    if (!ast.super_name.empty() && ast.super_name != "Object") root.label += " extends " + ast.super_name;
    for (const auto& m : ast.members) root.kids.push_back(convert(m.decl));
    return root;
}

namespace detail {

int Labels::intern(const std::string& s) {
    auto [it, fresh] = ids.emplace(s, static_cast<int>(names.size()));
    if (fresh) names.push_back(s);
    return it->second;
}

int FTree::subtree_end(int i) const {
    const auto& k = kids[static_cast<std::size_t>(i)];
    return k.empty() ? i + 1 : subtree_end(k.back());
}

FTree flatten(const Tree& t, Labels& labels) {
    FTree f;
    std::function<void(const Tree&, int)> walk = [&](const Tree& n, int parent) {
        int id = f.size();
        f.label.push_back(labels.intern(n.label));
        f.parent.push_back(parent);
        f.kids.emplace_back();
        if (parent < 0)
            f.top.push_back(id);
        else
            f.kids[static_cast<std::size_t>(parent)].push_back(id);
        for (const auto& k : n.kids) walk(k, id);
    };
    walk(t, -1);
    return f;
}

Tree unflatten(const FTree& t, const Labels& labels) {
    if (t.top.size() != 1) throw ContractViolation("edit script result is a forest of " + std::to_string(t.top.size()) + " trees");
    std::function<Tree(int)> build = [&](int i) {
        Tree n{labels.names.at(static_cast<std::size_t>(t.label[static_cast<std::size_t>(i)])), {}};
        for (int k : t.kids[static_cast<std::size_t>(i)]) n.kids.push_back(build(k));
        return n;
    };
    return build(t.top[0]);
}

WTree::WTree(const FTree& t) {
    nodes_.resize(static_cast<std::size_t>(t.size()) + 1);
    nodes_[0].label = -1;
    nodes_[0].kids = t.top;
    for (int i = 0; i < t.size(); ++i) {
        auto& n = nodes_[static_cast<std::size_t>(i) + 1];
        n.label = t.label[static_cast<std::size_t>(i)];
        n.parent = t.parent[static_cast<std::size_t>(i)];
        n.kids = t.kids[static_cast<std::size_t>(i)];
    }
}

WTree::N& WTree::at(int id) {
    if (id < -1 || id + 1 >= static_cast<int>(nodes_.size()) || !nodes_[static_cast<std::size_t>(id + 1)].alive)
        throw ContractViolation("edit refers to unknown node " + std::to_string(id));
    return nodes_[static_cast<std::size_t>(id + 1)];
}

const WTree::N& WTree::at(int id) const { return const_cast<WTree*>(this)->at(id); }

bool WTree::alive(int id) const {
    return id >= -1 && id + 1 < static_cast<int>(nodes_.size()) && nodes_[static_cast<std::size_t>(id + 1)].alive;
}

bool WTree::in_subtree(int id, int root) const {
    for (int x = id; x != -1; x = at(x).parent)
        if (x == root) return true;
    return root == -1;
}

std::vector<int> WTree::preorder() const {
    std::vector<int> out;
    std::vector<int> stack(at(-1).kids.rbegin(), at(-1).kids.rend());
    while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        out.push_back(x);
        const auto& k = at(x).kids;
        stack.insert(stack.end(), k.rbegin(), k.rend());
    }
    return out;
}

FTree WTree::freeze() const {
    FTree f;
    auto order = preorder();
    std::map<int, int> index;
    for (int x : order) index[x] = static_cast<int>(index.size());
    for (int x : order) {
        int p = at(x).parent;
        int pi = p == -1 ? -1 : index.at(p);
        int id = f.size();
        f.label.push_back(at(x).label);
        f.parent.push_back(pi);
        f.kids.emplace_back();
        if (pi < 0)
            f.top.push_back(id);
        else
            f.kids[static_cast<std::size_t>(pi)].push_back(id);
    }
    return f;
}

IEdit WTree::resolve(const IEdit& e) const {
    auto order = preorder();
    auto id_of = [&](int idx) {
        if (idx == -1) return -1;
        if (idx < 0 || idx >= static_cast<int>(order.size())) throw ContractViolation("positional edit out of range");
        return order[static_cast<std::size_t>(idx)];
    };
    IEdit r = e;
    if (e.kind == EditKind::insert)
        r.node = next_id();
    else
        r.node = id_of(e.node);
    r.parent = id_of(e.parent);
    return r;
}

void WTree::apply(const IEdit& e) {
    auto bad = [](const std::string& why) { throw ContractViolation("invalid edit: " + why); };
    switch (e.kind) {
        case EditKind::update: {
            if (e.node == -1) bad("update of the virtual root");
            at(e.node).label = e.label;
            break;
        }
        case EditKind::remove: {
            if (e.node == -1) bad("delete of the virtual root");
            auto& n = at(e.node);
            auto& siblings = at(n.parent).kids;
            auto it = std::find(siblings.begin(), siblings.end(), e.node);
            auto kids = n.kids;
            for (int k : kids) at(k).parent = n.parent;
            it = siblings.erase(it);
            siblings.insert(it, kids.begin(), kids.end());
            n.kids.clear();
            n.alive = false;
            break;
        }
        case EditKind::insert: {
            if (e.node != next_id()) bad("insert must use the next free id " + std::to_string(next_id()));
            auto& p = at(e.parent);
            int c = static_cast<int>(p.kids.size());
            if (e.position < 0 || e.count < 0 || e.position + e.count > c) bad("insert range out of bounds");
            N n;
            n.label = e.label;
            n.parent = e.parent;
            n.kids.assign(p.kids.begin() + e.position, p.kids.begin() + e.position + e.count);
            p.kids.erase(p.kids.begin() + e.position, p.kids.begin() + e.position + e.count);
            p.kids.insert(p.kids.begin() + e.position, e.node);
            auto adopted = n.kids;
            nodes_.push_back(std::move(n));
            for (int k : adopted) at(k).parent = e.node;
            break;
        }
        case EditKind::move: {
            if (e.node == -1) bad("move of the virtual root");
            if (in_subtree(e.parent, e.node)) bad("move into own subtree");
            auto& n = at(e.node);
            auto& old = at(n.parent).kids;
            old.erase(std::find(old.begin(), old.end(), e.node));
            auto& p = at(e.parent);
            if (e.position < 0 || e.position > static_cast<int>(p.kids.size())) bad("move position out of bounds");
            p.kids.insert(p.kids.begin() + e.position, e.node);
            n.parent = e.parent;
            break;
        }
    }
}

}  // namespace detail

Tree apply(const Tree& source, const EditScript& script) {
    detail::Labels labels;
    auto f = detail::flatten(source, labels);
    detail::WTree w(f);
    for (const auto& e : script.edits) {
        detail::IEdit ie{e.kind, e.node, 0, e.parent, e.position, e.count};
        if (e.kind == EditKind::insert || e.kind == EditKind::update)
            ie.label = labels.intern(e.label);
        else if (w.alive(e.node) && e.node != -1)
            ie.label = w.label(e.node);
        w.apply(ie);
    }
    return detail::unflatten(w.freeze(), labels);
}

}  // namespace mdlab::astdiff
