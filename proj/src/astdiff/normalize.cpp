#include <map>

#include "mdlab/astdiff.hpp"

namespace mdlab::astdiff {

namespace {

using lang::Node;
using lang::NodeKind;

class Renamer {
public:
    void member(Node& n) {
        switch (n.kind) {
            case NodeKind::Method:
                body(n.kids[1], n.kids[2]);
                break;
            case NodeKind::Constructor:
                body(n.kids[0], n.kids[1]);
                break;
            case NodeKind::StaticBlock:
                next_ = 0;
                walk(n.kids[0]);
                break;
            case NodeKind::NestedClass:
                for (std::size_t k = 1; k < n.kids.size(); ++k) member(n.kids[k]);
                break;
            default:
                break;
        }
    }

private:
    void body(Node& params, Node& block) {
        next_ = 0;
        scopes_.emplace_back();
        for (auto& p : params.kids) declare(p.text);
        walk(block);
        scopes_.pop_back();
    }

    void declare(std::string& name) {
        std::string fresh = "_v" + std::to_string(next_++);
        scopes_.back()[name] = fresh;
        name = fresh;
    }

    void walk(Node& n) {
        switch (n.kind) {
            case NodeKind::Type:
                return;
            case NodeKind::Block:
                scopes_.emplace_back();
                for (auto& k : n.kids) walk(k);
                scopes_.pop_back();
                return;
            case NodeKind::VarDecl:
                if (n.kids.size() > 1) walk(n.kids[1]);
                declare(n.text);
                return;
            case NodeKind::Catch:
                scopes_.emplace_back();
                declare(n.text);
                walk(n.kids[1]);
                scopes_.pop_back();
                return;
            case NodeKind::Name:
                for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
                    auto f = it->find(n.text);
                    if (f != it->end()) {
                        n.text = f->second;
                        break;
                    }
                }
                return;
            default:
                for (auto& k : n.kids) walk(k);
        }
    }

    std::vector<std::map<std::string, std::string>> scopes_;
    int next_ = 0;
};

}  // namespace

lang::ClassAst normalize_names(const lang::ClassAst& ast) {
    lang::ClassAst out = ast;
    for (auto& m : out.members) Renamer().member(m.decl);
    return out;
}

}  // namespace mdlab::astdiff
