#pragma once

// Rooted planar trees with depth-first vertex ordinals, the direction
// convention at each vertex, subdivision, component decompositions relative
// to a set of essential vertices, and the derived trees F(T) and O(T).

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "error.hpp"

namespace treebraid {

using Vertex = int;

/// An edge (iota, tau) with iota < tau; its ordinal is tau.
struct Edge {
    Vertex iota = 0;
    Vertex tau = 0;

    Vertex ordinal() const { return tau; }
    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

class PlanarTree {
public:
    using ChildMap = std::vector<std::pair<std::string, std::vector<std::string>>>;

    PlanarTree() = default;

    /// Builds a tree from planar child lists keyed by label. Ordinals are
    /// assigned by the pre-order walk taking children in list order.
    static PlanarTree from_children(std::string name, const std::string& root, const ChildMap& children)
    {
        std::map<std::string, std::vector<std::string>> kids;
        std::set<std::string> labels{root};
        for (const auto& [parent, list] : children) {
            if (kids.count(parent))
                fail(ErrorKind::Parse, "duplicate child list for vertex '" + parent + "'");
            kids[parent] = list;
            labels.insert(parent);
            for (const auto& c : list)
                labels.insert(c);
        }

        PlanarTree t;
        t.name_ = std::move(name);
        std::map<std::string, Vertex> seen;
        // iterative pre-order walk
        std::vector<std::pair<std::string, Vertex>> stack{{root, -1}};
        while (!stack.empty()) {
            auto [lab, par] = stack.back();
            stack.pop_back();
            if (seen.count(lab))
                fail(ErrorKind::Parse, "vertex '" + lab + "' reached twice: input has a cycle or repeated child");
            Vertex v = static_cast<Vertex>(t.label_.size());
            seen[lab] = v;
            t.label_.push_back(lab);
            t.parent_.push_back(par);
            t.children_.emplace_back();
            if (par >= 0)
                t.children_[par].push_back(v);
            auto it = kids.find(lab);
            if (it != kids.end())
                for (auto c = it->second.rbegin(); c != it->second.rend(); ++c)
                    stack.emplace_back(*c, v);
        }
        if (seen.size() != labels.size())
            fail(ErrorKind::Parse, "tree is disconnected: " + std::to_string(labels.size() - seen.size()) +
                                       " vertices unreachable from the root");
        if (t.children_[0].size() != 1)
            fail(ErrorKind::Parse, "root must have degree 1");
        t.finish();
        return t;
    }

    /// Parses the JSON tree format {"name", "root", "children_of": {label: [labels]}}.
    static PlanarTree parse(const std::string& text)
    {
        nlohmann::ordered_json j;
        try {
            j = nlohmann::ordered_json::parse(text);
        } catch (const std::exception& e) {
            fail(ErrorKind::Parse, std::string("malformed tree JSON: ") + e.what());
        }
        if (!j.is_object() || !j.contains("root") || !j["root"].is_string() || !j.contains("children_of") ||
            !j["children_of"].is_object())
            fail(ErrorKind::Parse, "tree JSON needs a string 'root' and an object 'children_of'");
        ChildMap children;
        for (auto& [key, val] : j["children_of"].items()) {
            if (!val.is_array())
                fail(ErrorKind::Parse, "children_of['" + key + "'] is not an array");
            std::vector<std::string> list;
            for (auto& c : val) {
                if (!c.is_string())
                    fail(ErrorKind::Parse, "child labels must be strings");
                list.push_back(c.get<std::string>());
            }
            children.emplace_back(key, std::move(list));
        }
        std::string name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : "";
        return from_children(name, j["root"].get<std::string>(), children);
    }

    nlohmann::ordered_json to_json() const
    {
        nlohmann::ordered_json j;
        j["name"] = name_;
        j["root"] = label_[0];
        nlohmann::ordered_json kids = nlohmann::ordered_json::object();
        for (Vertex v = 0; v < size(); ++v) {
            if (children_[v].empty())
                continue;
            auto arr = nlohmann::ordered_json::array();
            for (Vertex c : children_[v])
                arr.push_back(label_[c]);
            kids[label_[v]] = arr;
        }
        j["children_of"] = kids;
        return j;
    }

    nlohmann::ordered_json ordinals_json() const
    {
        nlohmann::ordered_json m = nlohmann::ordered_json::object();
        for (Vertex v = 0; v < size(); ++v)
            m[label_[v]] = v;
        return {{"ordinal_of", m}};
    }

    ChildMap child_map() const
    {
        ChildMap out;
        for (Vertex v = 0; v < size(); ++v) {
            if (children_[v].empty())
                continue;
            std::vector<std::string> list;
            for (Vertex c : children_[v])
                list.push_back(label_[c]);
            out.emplace_back(label_[v], std::move(list));
        }
        return out;
    }

    const std::string& name() const { return name_; }
    int size() const { return static_cast<int>(label_.size()); }
    Vertex root() const { return 0; }
    Vertex parent(Vertex v) const { return parent_[v]; }
    const std::vector<Vertex>& children(Vertex v) const { return children_[v]; }
    int degree(Vertex v) const { return static_cast<int>(children_[v].size()) + (v == 0 ? 0 : 1); }
    bool is_essential(Vertex v) const { return degree(v) >= 3; }
    bool is_leaf(Vertex v) const { return v != 0 && children_[v].empty(); }
    const std::string& label(Vertex v) const { return label_[v]; }

    std::optional<Vertex> find(const std::string& label) const
    {
        auto it = ordinal_.find(label);
        if (it == ordinal_.end())
            return std::nullopt;
        return it->second;
    }

    Vertex ordinal_of(const std::string& label) const
    {
        auto v = find(label);
        if (!v)
            fail(ErrorKind::Invalid, "unknown vertex label '" + label + "'");
        return *v;
    }

    /// The edge e_v = (parent(v), v).
    Edge edge_to(Vertex v) const { return {parent_[v], v}; }

    int edge_count() const { return size() - 1; }

    bool adjacent(Vertex a, Vertex b) const
    {
        return (a != b) && ((a > 0 && parent_[a] == b) || (b > 0 && parent_[b] == a));
    }

    /// True when a lies on the path from v to the root (a == v included).
    bool is_ancestor(Vertex a, Vertex v) const { return a <= v && v < subtree_end_[a]; }

    Vertex subtree_end(Vertex v) const { return subtree_end_[v]; }

    /// Direction index of neighbour w as seen from x.
    int direction(Vertex x, Vertex w) const
    {
        if (!adjacent(x, w))
            fail(ErrorKind::Invalid, "vertex " + std::to_string(w) + " is not adjacent to " + std::to_string(x));
        if (x == 0)
            return 1;
        if (w == parent_[x])
            return 0;
        const auto& ch = children_[x];
        return static_cast<int>(std::find(ch.begin(), ch.end(), w) - ch.begin()) + 1;
    }

    /// The neighbour of x in x-direction j.
    Vertex neighbor(Vertex x, int j) const
    {
        if (x == 0) {
            if (j != 1)
                fail(ErrorKind::Invalid, "the root only has direction 1");
            return children_[0][0];
        }
        if (j == 0)
            return parent_[x];
        if (j < 1 || j > static_cast<int>(children_[x].size()))
            fail(ErrorKind::Invalid, "direction " + std::to_string(j) + " out of range at vertex " + std::to_string(x));
        return children_[x][j - 1];
    }

    /// Direction from x that leads to v (v != x).
    int direction_toward(Vertex x, Vertex v) const
    {
        if (x == v)
            fail(ErrorKind::Invalid, "direction_toward needs distinct vertices");
        if (!is_ancestor(x, v))
            return x == 0 ? 1 : 0;
        const auto& ch = children_[x];
        // children are in increasing pre-order, so the containing subtree is the last child <= v
        auto it = std::upper_bound(ch.begin(), ch.end(), v);
        return static_cast<int>(it - ch.begin());
    }

    std::vector<Vertex> essential_vertices() const
    {
        std::vector<Vertex> out;
        for (Vertex v = 0; v < size(); ++v)
            if (is_essential(v))
                out.push_back(v);
        return out;
    }

    /// Vertices on the path from a to b, both included.
    std::vector<Vertex> path(Vertex a, Vertex b) const
    {
        std::vector<Vertex> up, down;
        while (!is_ancestor(a, b)) {
            up.push_back(a);
            a = parent_[a];
        }
        while (b != a) {
            down.push_back(b);
            b = parent_[b];
        }
        up.push_back(a);
        up.insert(up.end(), down.rbegin(), down.rend());
        return up;
    }

    friend bool operator==(const PlanarTree& a, const PlanarTree& b)
    {
        return a.label_ == b.label_ && a.parent_ == b.parent_ && a.children_ == b.children_;
    }

private:
    void finish()
    {
        ordinal_.clear();
        for (Vertex v = 0; v < size(); ++v)
            ordinal_[label_[v]] = v;
        subtree_end_.assign(size(), 0);
        for (Vertex v = size() - 1; v >= 0; --v) {
            subtree_end_[v] = v + 1;
            if (!children_[v].empty())
                subtree_end_[v] = subtree_end_[children_[v].back()];
        }
    }

    std::string name_;
    std::vector<std::string> label_;
    std::vector<Vertex> parent_;
    std::vector<std::vector<Vertex>> children_;
    std::vector<Vertex> subtree_end_;
    std::map<std::string, Vertex> ordinal_;
};

// ---------------------------------------------------------------------------
// Subdivision

/// Maximal chains between vertices of degree != 2, as vertex sequences from
/// the vertex nearer the root downwards.
inline std::vector<std::vector<Vertex>> branch_chains(const PlanarTree& t)
{
    std::vector<std::vector<Vertex>> chains;
    for (Vertex v = 0; v < t.size(); ++v) {
        if (t.degree(v) == 2)
            continue;
        for (Vertex c : t.children(v)) {
            std::vector<Vertex> chain{v, c};
            while (t.degree(chain.back()) == 2)
                chain.push_back(t.children(chain.back())[0]);
            chains.push_back(std::move(chain));
        }
    }
    return chains;
}

/// Every path between distinct vertices of degree != 2 has at least n-1 edges.
inline bool is_sufficiently_subdivided(const PlanarTree& t, int n)
{
    if (t.size() < n)
        return false;
    for (const auto& chain : branch_chains(t))
        if (static_cast<int>(chain.size()) - 1 < n - 1)
            return false;
    return true;
}

/// Minimal subdivision for n particles. Fresh vertices are inserted on the
/// first edge of each short chain and labelled "<top>-<next>:<i>", so the
/// output for n+1 refines the output for n.
inline PlanarTree subdivide_for_n(const PlanarTree& t, int n)
{
    require(n >= 1, ErrorKind::Invalid, "particle count must be positive");
    std::map<Vertex, std::vector<std::string>> kids;
    for (Vertex v = 0; v < t.size(); ++v)
        for (Vertex c : t.children(v))
            kids[v].push_back(t.label(c));
    std::vector<std::pair<std::string, std::vector<std::string>>> extra;
    for (const auto& chain : branch_chains(t)) {
        int have = static_cast<int>(chain.size()) - 1;
        int need = std::max(0, n - 1 - have);
        if (need == 0)
            continue;
        Vertex top = chain[0], next = chain[1];
        std::string base = t.label(top) + "-" + t.label(next) + ":";
        auto& list = kids[top];
        auto it = std::find(list.begin(), list.end(), t.label(next));
        *it = base + "1";
        for (int i = 1; i <= need; ++i) {
            std::string child = i == need ? t.label(next) : base + std::to_string(i + 1);
            extra.push_back({base + std::to_string(i), {child}});
        }
    }
    PlanarTree::ChildMap cm;
    for (Vertex v = 0; v < t.size(); ++v)
        if (kids.count(v))
            cm.emplace_back(t.label(v), kids[v]);
    cm.insert(cm.end(), extra.begin(), extra.end());
    return PlanarTree::from_children(t.name(), t.label(0), cm);
}

/// Removes every non-root degree-2 vertex, joining its neighbours.
inline PlanarTree smooth(const PlanarTree& t)
{
    PlanarTree::ChildMap cm;
    for (Vertex v = 0; v < t.size(); ++v) {
        if (t.children(v).empty() || (v != 0 && t.degree(v) == 2))
            continue;
        std::vector<std::string> list;
        for (Vertex c : t.children(v)) {
            while (t.degree(c) == 2)
                c = t.children(c)[0];
            list.push_back(t.label(c));
        }
        cm.emplace_back(t.label(v), std::move(list));
    }
    return PlanarTree::from_children(t.name(), t.label(0), cm);
}

// ---------------------------------------------------------------------------
// Components of T - {x_1, ..., x_m}

struct Component {
    int anchor = 0;     // i: 0 for the root component, else 1-based anchor index
    int direction = 1;  // l
    std::vector<Vertex> vertices;
    std::vector<Vertex> bounding;
    std::vector<Vertex> pruned; // bounding minus the own anchor
};

class ComponentDecomposition {
public:
    ComponentDecomposition() = default;

    ComponentDecomposition(const PlanarTree& t, std::vector<Vertex> anchors) : anchors_(std::move(anchors))
    {
        for (std::size_t i = 0; i < anchors_.size(); ++i) {
            Vertex x = anchors_[i];
            require(x > 0 && x < t.size() && t.is_essential(x), ErrorKind::Invalid,
                    "anchor " + std::to_string(x) + " is not an essential vertex");
            require(i == 0 || anchors_[i - 1] < x, ErrorKind::Invalid, "anchors must be strictly increasing");
        }
        std::vector<int> anchor_index(t.size(), 0);
        for (std::size_t i = 0; i < anchors_.size(); ++i)
            anchor_index[anchors_[i]] = static_cast<int>(i) + 1;

        // component slots: root component first, then (i, l) for l = 1..d-1
        offset_.push_back(0);
        comps_.push_back({0, 1, {}, {}, {}});
        for (std::size_t i = 0; i < anchors_.size(); ++i) {
            offset_.push_back(static_cast<int>(comps_.size()));
            for (int l = 1; l < t.degree(anchors_[i]); ++l)
                comps_.push_back({static_cast<int>(i) + 1, l, {}, {}, {}});
        }
        for (std::size_t i = 0; i < anchors_.size(); ++i)
            comps_[offset_[i + 1]].bounding.clear();

        // nearest strict anchor ancestor, computed in pre-order
        std::vector<Vertex> up(t.size(), -1);
        for (Vertex v = 1; v < t.size(); ++v) {
            Vertex p = t.parent(v);
            up[v] = anchor_index[p] ? p : up[p];
        }
        component_of_.assign(t.size(), -1);
        for (Vertex v = 0; v < t.size(); ++v) {
            int slot = slot_below(t, up[v], v, anchor_index);
            if (anchor_index[v]) {
                comps_[slot].bounding.push_back(v);
                continue;
            }
            component_of_[v] = slot;
            comps_[slot].vertices.push_back(v);
        }
        for (std::size_t i = 0; i < anchors_.size(); ++i)
            for (int l = 1; l < t.degree(anchors_[i]); ++l)
                comps_[offset_[i + 1] + l - 1].bounding.push_back(anchors_[i]);
        for (auto& c : comps_) {
            std::sort(c.bounding.begin(), c.bounding.end());
            for (Vertex b : c.bounding)
                if (c.anchor == 0 || b != anchors_[c.anchor - 1])
                    c.pruned.push_back(b);
        }
    }

    const std::vector<Vertex>& anchors() const { return anchors_; }
    const std::vector<Component>& all() const { return comps_; }
    std::size_t count() const { return comps_.size(); }

    const Component& at(int i, int l) const
    {
        if (i == 0) {
            require(l == 1, ErrorKind::Invalid, "root component has direction 1 only");
            return comps_[0];
        }
        int idx = offset_[i] + l - 1;
        require(idx < static_cast<int>(comps_.size()) && comps_[idx].anchor == i, ErrorKind::Invalid,
                "component index out of range");
        return comps_[idx];
    }

    /// Index into all() of the component holding a non-anchor vertex.
    int component_of(Vertex v) const { return component_of_[v]; }

private:
    int slot_below(const PlanarTree& t, Vertex up, Vertex v, const std::vector<int>& anchor_index) const
    {
        if (up < 0)
            return 0;
        return offset_[anchor_index[up]] + t.direction_toward(up, v) - 1;
    }

    std::vector<Vertex> anchors_;
    std::vector<int> offset_;
    std::vector<Component> comps_;
    std::vector<int> component_of_;
};

inline ComponentDecomposition components(const PlanarTree& t, std::vector<Vertex> anchors)
{
    return ComponentDecomposition(t, std::move(anchors));
}

/// Vertex sets of the components of T - {x}, indexed by x-direction.
inline std::vector<std::vector<Vertex>> split_at(const PlanarTree& t, Vertex x)
{
    std::vector<std::vector<Vertex>> parts(t.degree(x));
    for (Vertex v = 0; v < t.size(); ++v) {
        if (v == x)
            continue;
        int j = t.direction_toward(x, v);
        parts[x == 0 ? 0 : j].push_back(v);
    }
    return parts;
}

// ---------------------------------------------------------------------------
// Unrooted labelled trees (F(T) need not have a degree-1 root)

struct LabeledTree {
    std::vector<std::string> labels;
    std::vector<std::vector<int>> adj;

    int size() const { return static_cast<int>(labels.size()); }
    int degree(int v) const { return static_cast<int>(adj[v].size()); }

    std::optional<int> find(const std::string& label) const
    {
        for (int v = 0; v < size(); ++v)
            if (labels[v] == label)
                return v;
        return std::nullopt;
    }
};

/// F(T): delete all leaves (the root included), then smooth every degree-2
/// vertex. Surviving vertices keep their labels from T.
inline LabeledTree prune_and_smooth(const PlanarTree& t)
{
    require(!t.essential_vertices().empty(), ErrorKind::Hypothesis, "F(T) of a path is empty");
    std::vector<int> keep(t.size(), -1);
    LabeledTree f;
    for (Vertex v = 0; v < t.size(); ++v)
        if (t.degree(v) > 1) {
            keep[v] = f.size();
            f.labels.push_back(t.label(v));
            f.adj.emplace_back();
        }
    for (Vertex v = 1; v < t.size(); ++v)
        if (keep[v] >= 0 && keep[t.parent(v)] >= 0) {
            f.adj[keep[v]].push_back(keep[t.parent(v)]);
            f.adj[keep[t.parent(v)]].push_back(keep[v]);
        }
    // smooth bivalent vertices
    std::vector<bool> alive(f.size(), true);
    bool changed = true;
    while (changed) {
        changed = false;
        for (int v = 0; v < f.size(); ++v) {
            if (!alive[v] || f.degree(v) != 2)
                continue;
            int a = f.adj[v][0], b = f.adj[v][1];
            std::replace(f.adj[a].begin(), f.adj[a].end(), v, b);
            std::replace(f.adj[b].begin(), f.adj[b].end(), v, a);
            f.adj[v].clear();
            alive[v] = false;
            changed = true;
        }
    }
    LabeledTree out;
    std::vector<int> remap(f.size(), -1);
    for (int v = 0; v < f.size(); ++v)
        if (alive[v]) {
            remap[v] = out.size();
            out.labels.push_back(f.labels[v]);
        }
    out.adj.resize(out.size());
    for (int v = 0; v < f.size(); ++v)
        if (alive[v])
            for (int w : f.adj[v])
                out.adj[remap[v]].push_back(remap[w]);
    return out;
}

/// O(T): each vertex x of degree d > 3 becomes a path x^1 ... x^{d-2} of
/// degree-3 vertices. x^1 keeps the label of x; x^j is labelled "x^j".
inline PlanarTree binarize(const PlanarTree& t)
{
    for (Vertex v = 1; v < t.size(); ++v)
        require(t.degree(v) != 2, ErrorKind::Invalid, "binarize needs a tree without degree-2 vertices");
    PlanarTree::ChildMap cm;
    for (Vertex v = 0; v < t.size(); ++v) {
        const auto& ch = t.children(v);
        if (ch.empty())
            continue;
        if (v == 0 || t.degree(v) <= 3) {
            std::vector<std::string> list;
            for (Vertex c : ch)
                list.push_back(t.label(c));
            cm.emplace_back(t.label(v), std::move(list));
            continue;
        }
        int di = t.degree(v) - 1; // children y^1 .. y^di
        auto name = [&](int j) { return j == 1 ? t.label(v) : t.label(v) + "^" + std::to_string(j); };
        for (int j = 1; j <= di - 2; ++j)
            cm.emplace_back(name(j), std::vector<std::string>{t.label(ch[j - 1]), name(j + 1)});
        cm.emplace_back(name(di - 1), std::vector<std::string>{t.label(ch[di - 2]), t.label(ch[di - 1])});
    }
    return PlanarTree::from_children(t.name(), t.label(0), cm);
}

} // namespace treebraid
