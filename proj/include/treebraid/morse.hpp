#pragma once

// The Farley-Sabalka gradient field on UD^nT and the symbolic form of its
// critical cells, {k|x1,p1,q1|...|xm,pm,qm}.

#include <algorithm>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cell.hpp"
#include "error.hpp"
#include "tree.hpp"

namespace treebraid {

// ---------------------------------------------------------------------------
// Ingredient classification

/// Occupancy of a cell: 1 where a vertex-ingredient sits, 2 on edge endpoints.
inline std::vector<char> occupancy(const Cell& c, const PlanarTree& t)
{
    std::vector<char> occ(t.size(), 0);
    for (int code : c.items) {
        Vertex v = code_position(code);
        if (is_edge_code(code)) {
            occ[v] = 2;
            occ[t.parent(v)] = 2;
        } else {
            occ[v] = 1;
        }
    }
    return occ;
}

inline bool is_blocked(const std::vector<char>& occ, const PlanarTree& t, Vertex v)
{
    return v == 0 || occ[t.parent(v)] != 0;
}

/// Disrespecting iff some vertex-ingredient z adjacent to iota has iota < z < tau.
inline bool is_order_respecting(const std::vector<char>& occ, const PlanarTree& t, Vertex tau)
{
    Vertex iota = t.parent(tau);
    for (Vertex z : t.children(iota)) {
        if (z >= tau)
            break;
        if (occ[z] == 1)
            return false;
    }
    return true;
}

inline bool classify_vertex(const Cell& c, const PlanarTree& t, Vertex v)
{
    require(c.has_vertex(v), ErrorKind::Invalid, std::to_string(v) + " is not a vertex-ingredient");
    return is_blocked(occupancy(c, t), t, v);
}

inline bool classify_edge(const Cell& c, const PlanarTree& t, Vertex tau)
{
    require(c.has_edge(tau), ErrorKind::Invalid, "edge with tau " + std::to_string(tau) + " is not an ingredient");
    return is_order_respecting(occupancy(c, t), t, tau);
}

/// A cell is critical by ingredients iff all vertices are blocked and all
/// edges disrespect the order.
inline bool all_ingredients_critical(const Cell& c, const PlanarTree& t)
{
    auto occ = occupancy(c, t);
    for (int code : c.items) {
        Vertex v = code_position(code);
        if (is_edge_code(code) ? is_order_respecting(occ, t, v) : !is_blocked(occ, t, v))
            return false;
    }
    return true;
}

enum class FsKind { Critical, Redundant, Collapsible };

struct FsStatus {
    FsKind kind = FsKind::Critical;
    Cell partner; // W(c) when redundant, the cell c is W of when collapsible
};

/// Scans ingredients by position; the first non-critical one decides.
inline FsStatus fs_status(const Cell& c, const PlanarTree& t)
{
    auto occ = occupancy(c, t);
    for (int code : c.items) {
        Vertex v = code_position(code);
        if (is_edge_code(code)) {
            if (is_order_respecting(occ, t, v))
                return {FsKind::Collapsible, c.replaced(code, vertex_code(v))};
        } else if (!is_blocked(occ, t, v)) {
            return {FsKind::Redundant, c.replaced(code, edge_code(v))};
        }
    }
    return {FsKind::Critical, {}};
}

// ---------------------------------------------------------------------------
// Symbolic critical cells

struct Block {
    Vertex x = 0;
    std::vector<int> p;
    std::vector<int> q;

    friend bool operator==(const Block&, const Block&) = default;
    friend auto operator<=>(const Block&, const Block&) = default;
};

struct CriticalCell {
    int k = 0;
    std::vector<Block> blocks;

    int dim() const { return static_cast<int>(blocks.size()); }

    int particles() const
    {
        int total = k + dim();
        for (const auto& b : blocks)
            total += std::accumulate(b.p.begin(), b.p.end(), 0) + std::accumulate(b.q.begin(), b.q.end(), 0);
        return total;
    }

    friend bool operator==(const CriticalCell&, const CriticalCell&) = default;
    friend auto operator<=>(const CriticalCell&, const CriticalCell&) = default;
};

namespace detail {
inline void put_vector(std::ostream& os, const std::vector<int>& v)
{
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i)
        os << (i ? "," : "") << v[i];
    os << ')';
}
} // namespace detail

inline std::string to_string(const CriticalCell& c, const PlanarTree& t)
{
    std::ostringstream os;
    os << '{' << c.k;
    for (const auto& b : c.blocks) {
        os << '|' << t.label(b.x) << ',';
        detail::put_vector(os, b.p);
        os << ',';
        detail::put_vector(os, b.q);
    }
    os << '}';
    return os.str();
}

/// Checks the structural invariants against t and n; returns the problem or "".
inline std::string critical_cell_problem(const CriticalCell& c, const PlanarTree& t, int n)
{
    if (c.k < 0)
        return "k is negative";
    for (std::size_t i = 0; i < c.blocks.size(); ++i) {
        const auto& b = c.blocks[i];
        if (b.x <= 0 || b.x >= t.size() || !t.is_essential(b.x))
            return "block vertex is not essential";
        if (i && c.blocks[i - 1].x >= b.x)
            return "block vertices must increase";
        int r = static_cast<int>(b.p.size()), s = static_cast<int>(b.q.size());
        if (r < 1 || s < 1 || r + s != t.degree(b.x) - 1)
            return "block at " + t.label(b.x) + " needs r,s >= 1 with r+s = " + std::to_string(t.degree(b.x) - 1);
        auto neg = [](int v) { return v < 0; };
        if (std::any_of(b.p.begin(), b.p.end(), neg) || std::any_of(b.q.begin(), b.q.end(), neg))
            return "negative particle count at " + t.label(b.x);
        if (std::all_of(b.p.begin(), b.p.end(), [](int v) { return v == 0; }))
            return "p has no positive entry at " + t.label(b.x);
    }
    if (c.particles() != n)
        return "particle count " + std::to_string(c.particles()) + " differs from n = " + std::to_string(n);
    return "";
}

inline void require_valid(const CriticalCell& c, const PlanarTree& t, int n)
{
    auto problem = critical_cell_problem(c, t, n);
    require(problem.empty(), ErrorKind::Invalid, to_string(c, t) + ": " + problem);
}

/// Parses "{k|x,(p..),(q..)|...}" with external vertex labels.
inline CriticalCell parse_critical(const std::string& text, const PlanarTree& t)
{
    std::string s;
    for (char ch : text)
        if (ch != ' ')
            s += ch;
    if (s.size() < 3 || s.front() != '{' || s.back() != '}')
        fail(ErrorKind::Parse, "critical cell must be enclosed in braces: '" + text + "'");
    s = s.substr(1, s.size() - 2);
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string part; std::getline(ss, part, '|');)
        parts.push_back(part);
    auto to_int = [&](const std::string& v) {
        if (v.empty() || !std::all_of(v.begin(), v.end(), [](char ch) { return std::isdigit((unsigned char)ch); }))
            fail(ErrorKind::Parse, "expected a non-negative integer, got '" + v + "' in '" + text + "'");
        return std::stoi(v);
    };
    CriticalCell c;
    if (parts.empty())
        fail(ErrorKind::Parse, "empty critical cell");
    c.k = to_int(parts[0]);
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const auto& part = parts[i];
        auto open = part.find(",(");
        if (open == std::string::npos)
            fail(ErrorKind::Parse, "block '" + part + "' lacks vectors");
        Block b;
        auto v = t.find(part.substr(0, open));
        if (!v)
            fail(ErrorKind::Parse, "unknown vertex label '" + part.substr(0, open) + "'");
        b.x = *v;
        auto mid = part.find("),(", open);
        if (mid == std::string::npos || part.back() != ')')
            fail(ErrorKind::Parse, "block '" + part + "' needs two parenthesized vectors");
        auto read = [&](const std::string& body) {
            std::vector<int> out;
            std::stringstream vs(body);
            for (std::string x; std::getline(vs, x, ',');)
                out.push_back(to_int(x));
            return out;
        };
        b.p = read(part.substr(open + 2, mid - open - 2));
        b.q = read(part.substr(mid + 3, part.size() - mid - 4));
        c.blocks.push_back(std::move(b));
    }
    return c;
}

/// The geometric cell of a symbol. Stacks run along consecutive ordinals.
inline Cell decode(const CriticalCell& c, const PlanarTree& t, int n)
{
    require_valid(c, t, n);
    std::vector<char> used(t.size(), 0);
    std::vector<int> codes;
    auto place = [&](Vertex v) {
        require(v < t.size() && !used[v], ErrorKind::Hypothesis,
                to_string(c, t) + " does not fit: stacks overlap or run past the tree; subdivide further");
        used[v] = 1;
        codes.push_back(vertex_code(v));
    };
    // stacks follow the left-most descending path: v, v+1, ... each the first child of the last
    auto stack = [&](Vertex from, int count) {
        for (int j = 0; j < count; ++j) {
            Vertex v = from + j;
            require(v < t.size() && (j == 0 || t.parent(v) == v - 1), ErrorKind::Hypothesis,
                    to_string(c, t) + " does not fit on the tree; subdivide further");
            place(v);
        }
    };
    for (const auto& b : c.blocks) {
        int r = static_cast<int>(b.p.size());
        Vertex y = t.neighbor(b.x, r + 1);
        require(!used[b.x] && !used[y], ErrorKind::Hypothesis, to_string(c, t) + " has overlapping blocks");
        used[b.x] = used[y] = 1;
        codes.push_back(edge_code(y));
    }
    stack(0, c.k);
    for (const auto& b : c.blocks) {
        int r = static_cast<int>(b.p.size());
        for (int i = 1; i <= r; ++i)
            stack(t.neighbor(b.x, i), b.p[i - 1]);
        Vertex y = t.neighbor(b.x, r + 1);
        if (b.q[0] > 0) {
            require(!t.children(y).empty(), ErrorKind::Hypothesis, to_string(c, t) + " runs past a leaf");
            stack(y + 1, b.q[0]);
        }
        for (std::size_t i = 1; i < b.q.size(); ++i)
            stack(t.neighbor(b.x, r + 1 + static_cast<int>(i)), b.q[i]);
    }
    return Cell(std::move(codes));
}

/// Symbol of a critical cell given geometrically.
inline CriticalCell encode(const Cell& cell, const PlanarTree& t)
{
    require(all_ingredients_critical(cell, t), ErrorKind::Invalid, to_string(cell, t) + " is not critical");
    std::vector<std::pair<Vertex, int>> edge_at;
    for (Vertex tau : cell.edges())
        edge_at.emplace_back(t.parent(tau), t.direction(t.parent(tau), tau) - 1);
    std::sort(edge_at.begin(), edge_at.end());
    std::vector<Vertex> anchors;
    std::vector<int> rs;
    for (auto [x, r] : edge_at) {
        anchors.push_back(x);
        rs.push_back(r);
    }
    ComponentDecomposition cd(t, anchors);
    CriticalCell c;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        Block b;
        b.x = anchors[i];
        b.p.assign(rs[i], 0);
        b.q.assign(t.degree(b.x) - 1 - rs[i], 0);
        c.blocks.push_back(std::move(b));
    }
    for (Vertex v : cell.vertices()) {
        const auto& comp = cd.all()[cd.component_of(v)];
        if (comp.anchor == 0) {
            ++c.k;
            continue;
        }
        auto& b = c.blocks[comp.anchor - 1];
        int r = static_cast<int>(b.p.size());
        if (comp.direction <= r)
            ++b.p[comp.direction - 1];
        else
            ++b.q[comp.direction - r - 1];
    }
    return c;
}

// ---------------------------------------------------------------------------
// Enumeration of critical cells by symbol

namespace detail {

/// Calls f(vector) for every way of writing total as an ordered sum of len
/// non-negative parts, in lexicographically decreasing order of the first part.
template <class F>
void compositions(int total, int len, F&& f)
{
    std::vector<int> v(len, 0);
    auto rec = [&](auto&& self, int i, int left) -> void {
        if (i == len - 1) {
            v[i] = left;
            f(v);
            return;
        }
        for (int a = left; a >= 0; --a) {
            v[i] = a;
            self(self, i + 1, left - a);
        }
    };
    if (len == 0) {
        if (total == 0)
            f(v);
        return;
    }
    rec(rec, 0, total);
}

} // namespace detail

/// Every critical cell of UD^nT of the requested dimension (all when dim is
/// empty), in symbolic form. Each symbol is decoded and checked critical.
inline std::vector<CriticalCell> critical_cells(const PlanarTree& t, int n, std::optional<int> dim = std::nullopt,
                                                std::size_t max_cells = 50'000'000)
{
    require_subdivided(t, n);
    auto ess = t.essential_vertices();
    std::vector<CriticalCell> out;
    int lo = dim.value_or(0), hi = dim.value_or(std::min<int>(static_cast<int>(ess.size()), n / 2));
    for (int d = lo; d <= hi; ++d) {
        if (d > static_cast<int>(ess.size()) || 2 * d > n)
            continue;
        // block vertex subsets of size d, lexicographic
        std::vector<int> pick(d);
        std::iota(pick.begin(), pick.end(), 0);
        while (true) {
            std::vector<Vertex> xs;
            for (int i : pick)
                xs.push_back(ess[i]);
            // r choices per block
            std::vector<int> r(d, 1);
            while (true) {
                int slots = 1;
                for (int i = 0; i < d; ++i)
                    slots += t.degree(xs[i]) - 1;
                detail::compositions(n - d, slots, [&](const std::vector<int>& a) {
                    CriticalCell c;
                    c.k = a[0];
                    int at = 1;
                    for (int i = 0; i < d; ++i) {
                        Block b{xs[i], {}, {}};
                        int deg = t.degree(xs[i]);
                        b.p.assign(a.begin() + at, a.begin() + at + r[i]);
                        b.q.assign(a.begin() + at + r[i], a.begin() + at + deg - 1);
                        at += deg - 1;
                        if (std::all_of(b.p.begin(), b.p.end(), [](int v) { return v == 0; }))
                            return;
                        c.blocks.push_back(std::move(b));
                    }
                    require(out.size() < max_cells, ErrorKind::Budget, "too many critical cells");
                    out.push_back(std::move(c));
                });
                int i = d - 1;
                while (i >= 0 && r[i] == t.degree(xs[i]) - 2)
                    r[i--] = 1;
                if (i < 0)
                    break;
                ++r[i];
            }
            int i = d - 1;
            while (i >= 0 && pick[i] == static_cast<int>(ess.size()) - d + i)
                --i;
            if (i < 0)
                break;
            ++pick[i];
            for (int j = i + 1; j < d; ++j)
                pick[j] = pick[j - 1] + 1;
        }
    }
    return out;
}

/// Largest dimension of a critical cell: min(m, floor(n/2)).
inline int homological_dimension(const PlanarTree& t, int n)
{
    return std::min(static_cast<int>(t.essential_vertices().size()), n / 2);
}

/// B(v) for a degree-3 vertex: the edge to the direction-2 neighbour and v+1.
inline std::pair<Vertex, Vertex> block(const PlanarTree& t, Vertex v)
{
    require(v != 0 && t.degree(v) == 3, ErrorKind::Invalid, "block needs a non-root vertex of degree 3");
    return {t.neighbor(v, 2), v + 1};
}

} // namespace treebraid
