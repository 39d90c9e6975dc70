#pragma once

// Oriented arcs in a tree, the crossing counts eta_j(v), allowable
// collections, and the minimal number of arcs allowable for all degree-3
// vertices.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "tc.hpp"
#include "tree.hpp"

namespace treebraid {

/// A simple path, oriented from path.front() to path.back().
struct OrientedArc {
    std::vector<Vertex> path;

    Vertex from() const { return path.front(); }
    Vertex to() const { return path.back(); }
    friend bool operator==(const OrientedArc&, const OrientedArc&) = default;
    friend auto operator<=>(const OrientedArc&, const OrientedArc&) = default;
};

using ArcCollection = std::vector<OrientedArc>;

inline void require_arc(const OrientedArc& a, const PlanarTree& t)
{
    require(a.path.size() >= 2, ErrorKind::Invalid, "an arc needs at least one edge");
    std::set<Vertex> seen;
    for (std::size_t i = 0; i < a.path.size(); ++i) {
        require(a.path[i] >= 0 && a.path[i] < t.size(), ErrorKind::Invalid, "arc vertex out of range");
        require(seen.insert(a.path[i]).second, ErrorKind::Invalid, "arc repeats a vertex");
        if (i)
            require(t.adjacent(a.path[i - 1], a.path[i]), ErrorKind::Invalid,
                    "arc steps between non-adjacent vertices " + t.label(a.path[i - 1]) + " and " +
                        t.label(a.path[i]));
    }
}

inline OrientedArc arc_between(Vertex a, Vertex b, const PlanarTree& t)
{
    require(a != b, ErrorKind::Invalid, "an arc needs distinct endpoints");
    return {t.path(a, b)};
}

inline std::string to_string(const OrientedArc& a, const PlanarTree& t)
{
    std::string out;
    for (std::size_t i = 0; i < a.path.size(); ++i)
        out += (i ? " -> " : "") + t.label(a.path[i]);
    return out;
}

/// Parses "v0 -> v1 -> ... -> vk" with external labels.
inline OrientedArc parse_arc(const std::string& text, const PlanarTree& t)
{
    OrientedArc a;
    std::size_t pos = 0;
    for (;;) {
        std::size_t next = text.find("->", pos);
        std::string label = text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        label.erase(0, label.find_first_not_of(" \t"));
        label.erase(label.find_last_not_of(" \t") + 1);
        auto v = t.find(label);
        if (!v)
            fail(ErrorKind::Parse, "unknown vertex '" + label + "' in arc '" + text + "'");
        a.path.push_back(*v);
        if (next == std::string::npos)
            break;
        pos = next + 2;
    }
    if (a.path.size() < 2)
        fail(ErrorKind::Parse, "arc '" + text + "' needs at least two vertices");
    require_arc(a, t);
    return a;
}

inline nlohmann::ordered_json arcs_to_json(const ArcCollection& arcs, const PlanarTree& t)
{
    auto j = nlohmann::ordered_json::array();
    for (const auto& a : arcs)
        j.push_back(to_string(a, t));
    return j;
}

/// Sum over arcs through v of +1 when the arc runs toward v on the edge in
/// direction j, -1 when it runs away.
inline int eta(Vertex v, int j, const ArcCollection& arcs, const PlanarTree& t)
{
    require(j >= 0 && j < t.degree(v), ErrorKind::Invalid, "direction out of range");
    int total = 0;
    for (const auto& a : arcs) {
        auto it = std::find(a.path.begin(), a.path.end(), v);
        if (it == a.path.end())
            continue;
        std::size_t i = it - a.path.begin();
        if (i > 0 && t.direction(v, a.path[i - 1]) == j)
            ++total;
        if (i + 1 < a.path.size() && t.direction(v, a.path[i + 1]) == j)
            --total;
    }
    return total;
}

/// Empty when the collection is allowable for U; otherwise the first failing vertex.
inline std::optional<Vertex> is_allowable(const ArcCollection& arcs, const std::vector<Vertex>& U,
                                          const PlanarTree& t)
{
    for (Vertex v : U) {
        bool endpoint = std::any_of(arcs.begin(), arcs.end(),
                                    [&](const OrientedArc& a) { return a.from() == v || a.to() == v; });
        bool nonzero = false;
        for (int j = 0; j < t.degree(v) && !nonzero && !endpoint; ++j)
            nonzero = eta(v, j, arcs, t) != 0;
        if (endpoint || !nonzero)
            return v;
    }
    return std::nullopt;
}

inline std::vector<Vertex> degree_three_vertices(const PlanarTree& t) { return split_essential(t).three; }

struct AllowableResult {
    int p = 0;
    ArcCollection arcs;
};

/// Tree on which the arc search runs: every chain between vertices of
/// degree other than 2 gets an interior vertex.
inline PlanarTree arc_search_tree(const PlanarTree& t) { return subdivide_for_n(t, 3); }

/// Minimal number of arcs allowable for all degree-3 vertices, with a
/// witness. Arcs end at leaves or inside chains: an endpoint cannot be a
/// degree-3 vertex, and ending at a vertex of degree > 3 crosses the same
/// degree-3 vertices as ending inside the chain just before it. The search
/// branches on the first failing vertex, which every completion must cross.
/// `t` must have an interior vertex on every chain (see arc_search_tree).
inline AllowableResult min_allowable_p(const PlanarTree& t, SearchBudget budget = {})
{
    const auto three = degree_three_vertices(t);
    if (three.empty())
        return {};
    std::vector<int> index(t.size(), -1);
    for (std::size_t q = 0; q < three.size(); ++q)
        index[three[q]] = static_cast<int>(q);
    std::vector<Vertex> ends;
    for (const auto& chain : branch_chains(t)) {
        require(chain.size() >= 3 || t.degree(chain.front()) == 1 || t.degree(chain.back()) == 1,
                ErrorKind::Invalid, "arc search needs an interior vertex on every chain between essential vertices");
        if (t.degree(chain.front()) == 1)
            ends.push_back(chain.front());
        if (t.degree(chain.back()) == 1)
            ends.push_back(chain.back());
        else if (t.degree(chain.front()) != 1)
            ends.push_back(chain[1]);
    }
    std::sort(ends.begin(), ends.end());
    ends.erase(std::unique(ends.begin(), ends.end()), ends.end());

    struct Crossing {
        int v;
        int in;
        int out;
    };
    std::vector<OrientedArc> arcs;
    std::vector<std::vector<Crossing>> crossings;
    std::vector<std::vector<int>> through(three.size());
    for (Vertex a : ends)
        for (Vertex b : ends) {
            if (a == b)
                continue;
            auto arc = arc_between(a, b, t);
            std::vector<Crossing> cr;
            for (std::size_t i = 1; i + 1 < arc.path.size(); ++i)
                if (int q = index[arc.path[i]]; q >= 0)
                    cr.push_back({q, t.direction(arc.path[i], arc.path[i - 1]),
                                  t.direction(arc.path[i], arc.path[i + 1])});
            if (cr.empty())
                continue;
            for (const auto& c : cr)
                through[c.v].push_back(static_cast<int>(arcs.size()));
            arcs.push_back(std::move(arc));
            crossings.push_back(std::move(cr));
        }
    std::vector<bool> fleaf(three.size());
    for (std::size_t q = 0; q < three.size(); ++q)
        fleaf[q] = pruned_degree(t, three[q]) <= 1;

    std::vector<std::array<int, 3>> eta_at(three.size(), {0, 0, 0});
    std::vector<int> hits(three.size(), 0);
    std::vector<int> chosen;
    std::set<std::vector<int>> seen;
    std::int64_t nodes = 0;
    auto apply = [&](int a, int sign) {
        for (const auto& c : crossings[a]) {
            eta_at[c.v][c.in] += sign;
            eta_at[c.v][c.out] -= sign;
            hits[c.v] += sign;
        }
    };
    auto failing = [&]() -> int {
        for (std::size_t q = 0; q < three.size(); ++q)
            if (eta_at[q][0] == 0 && eta_at[q][1] == 0 && eta_at[q][2] == 0)
                return static_cast<int>(q);
        return -1;
    };
    auto dfs = [&](auto&& self, int left) -> bool {
        require(++nodes <= budget.max_nodes, ErrorKind::Budget, "arc search exceeds its node budget");
        int v = failing();
        if (v < 0)
            return true;
        if (left == 0)
            return false;
        int uncovered = 0;
        for (std::size_t q = 0; q < three.size(); ++q)
            uncovered += fleaf[q] && hits[q] == 0;
        if ((uncovered + 1) / 2 > left)
            return false;
        for (int a : through[v]) {
            auto key = chosen;
            key.push_back(a);
            std::sort(key.begin(), key.end());
            if (!seen.insert(key).second)
                continue;
            chosen.push_back(a);
            apply(a, 1);
            bool ok = self(self, left - 1);
            if (ok)
                return true;
            apply(a, -1);
            chosen.pop_back();
        }
        return false;
    };
    for (int p = 1; p <= static_cast<int>(three.size()) + 1; ++p) {
        seen.clear();
        bool found = false;
        try {
            found = dfs(dfs, p);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Budget)
                throw;
            fail(ErrorKind::Budget, "arc search exceeds its node budget; p >= " + std::to_string(p));
        }
        if (found) {
            AllowableResult r{p, {}};
            for (int a : chosen)
                r.arcs.push_back(arcs[a]);
            std::sort(r.arcs.begin(), r.arcs.end());
            return r;
        }
    }
    fail(ErrorKind::Budget, "no allowable collection with at most k+1 arcs");
}

namespace detail {

// Leaves and vertices of degree > 3 in direction j of x, nearest first.
inline std::vector<Vertex> arc_targets(const PlanarTree& t, Vertex x, int j)
{
    std::vector<std::pair<int, Vertex>> found;
    for (Vertex v = 0; v < t.size(); ++v)
        if (v != x && (t.degree(v) == 1 || t.degree(v) > 3) && t.direction_toward(x, v) == j)
            found.emplace_back(static_cast<int>(t.path(x, v).size()), v);
    std::sort(found.begin(), found.end());
    std::vector<Vertex> out;
    for (auto [d, v] : found)
        out.push_back(v);
    return out;
}

// Directions of x whose component holds no essential vertex.
inline std::vector<int> leaf_legs(const PlanarTree& t, Vertex x)
{
    std::vector<bool> busy(t.degree(x), false);
    for (Vertex v : t.essential_vertices())
        if (v != x)
            busy[t.direction_toward(x, v)] = true;
    std::vector<int> out;
    for (int j = 0; j < t.degree(x); ++j)
        if (!busy[j])
            out.push_back(j);
    return out;
}

} // namespace detail

/// Arcs from an h_2 witness: the i-th vertices of V1 and V2 are joined and
/// the path is extended past both ends, through a leaf leg when the end is
/// not essential in F(T) and otherwise to a leaf or a vertex of degree > 3.
/// Among the extensions the first allowable combination is returned.
inline ArcCollection arcs_from_hs_witness(std::vector<Vertex> v1, std::vector<Vertex> v2, const PlanarTree& t,
                                          SearchBudget budget = {})
{
    const auto three = degree_three_vertices(t);
    for (const auto* set : {&v1, &v2})
        for (Vertex v : *set)
            require(std::find(three.begin(), three.end(), v) != three.end(), ErrorKind::Invalid,
                    "witness vertex " + t.label(v) + " does not have degree 3");
    std::sort(v1.begin(), v1.end());
    std::sort(v2.begin(), v2.end());
    if (v1.size() < v2.size())
        std::swap(v1, v2);
    // options per pair: full arcs, preferred first
    std::vector<std::vector<OrientedArc>> options;
    for (std::size_t i = 0; i < v1.size(); ++i) {
        Vertex x = v1[i], y = i < v2.size() ? v2[i] : v1[i];
        auto ends_at = [&](Vertex v, std::optional<int> avoid, std::optional<int> avoid2) {
            std::vector<std::pair<int, Vertex>> out;
            auto legs = detail::leaf_legs(t, v);
            bool prefer_legs = pruned_degree(t, v) < 3 && !legs.empty();
            for (int j = 0; j < t.degree(v); ++j) {
                if (j == avoid || j == avoid2)
                    continue;
                bool leg = std::find(legs.begin(), legs.end(), j) != legs.end();
                if (prefer_legs && !leg)
                    continue;
                for (Vertex g : detail::arc_targets(t, v, j))
                    out.emplace_back(j, g);
            }
            return out;
        };
        std::optional<int> toward_y, toward_x;
        if (x != y) {
            toward_y = t.direction_toward(x, y);
            toward_x = t.direction_toward(y, x);
        }
        std::vector<OrientedArc> opts;
        for (auto [js, g] : ends_at(x, toward_y, std::nullopt))
            for (auto [je, d] : ends_at(y, toward_x, x == y ? std::optional<int>(js) : std::nullopt))
                opts.push_back(arc_between(g, d, t));
        require(!opts.empty(), ErrorKind::Invalid, "no extension for the pair " + t.label(x) + ", " + t.label(y));
        options.push_back(std::move(opts));
    }
    ArcCollection current, first;
    for (const auto& o : options)
        first.push_back(o.front());
    std::int64_t nodes = 0;
    auto dfs = [&](auto&& self, std::size_t i) -> bool {
        if (++nodes > budget.max_nodes)
            return false;
        if (i == options.size())
            return !is_allowable(current, three, t).has_value();
        for (const auto& a : options[i]) {
            current.push_back(a);
            if (self(self, i + 1))
                return true;
            current.pop_back();
        }
        return false;
    };
    if (dfs(dfs, 0))
        return current;
    return first;
}

} // namespace treebraid
