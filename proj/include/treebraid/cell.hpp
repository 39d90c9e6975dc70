#pragma once

// Cells of the discrete configuration space UD^nT, their enumeration and the
// signed cellular boundary.
//
// An ingredient is stored as an integer code: vertex v -> 2v, the edge whose
// larger endpoint is t -> 2t+1. Sorting codes sorts ingredients by position
// (vertex ordinal, or tau for an edge), which is the canonical order.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "tree.hpp"

namespace treebraid {

inline int vertex_code(Vertex v) { return 2 * v; }
inline int edge_code(Vertex tau) { return 2 * tau + 1; }
inline bool is_edge_code(int c) { return c & 1; }
inline Vertex code_position(int c) { return c >> 1; }

struct Cell {
    std::vector<int> items; // sorted ingredient codes

    Cell() = default;
    explicit Cell(std::vector<int> codes) : items(std::move(codes)) { std::sort(items.begin(), items.end()); }

    int size() const { return static_cast<int>(items.size()); }

    int dim() const
    {
        return static_cast<int>(std::count_if(items.begin(), items.end(), is_edge_code));
    }

    bool has_vertex(Vertex v) const { return std::binary_search(items.begin(), items.end(), vertex_code(v)); }
    bool has_edge(Vertex tau) const { return std::binary_search(items.begin(), items.end(), edge_code(tau)); }

    std::vector<Vertex> vertices() const
    {
        std::vector<Vertex> out;
        for (int c : items)
            if (!is_edge_code(c))
                out.push_back(code_position(c));
        return out;
    }

    /// Edge-ingredients by tau, in increasing order.
    std::vector<Vertex> edges() const
    {
        std::vector<Vertex> out;
        for (int c : items)
            if (is_edge_code(c))
                out.push_back(code_position(c));
        return out;
    }

    /// Copy with one ingredient code swapped for another.
    Cell replaced(int from, int to) const
    {
        Cell c = *this;
        auto it = std::lower_bound(c.items.begin(), c.items.end(), from);
        c.items.erase(it);
        c.items.insert(std::lower_bound(c.items.begin(), c.items.end(), to), to);
        return c;
    }

    friend bool operator==(const Cell&, const Cell&) = default;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

using SignedChain = std::map<Cell, long long>;

inline void add_term(SignedChain& chain, const Cell& c, long long coef)
{
    if (coef == 0)
        return;
    auto [it, fresh] = chain.emplace(c, coef);
    if (!fresh && (it->second += coef) == 0)
        chain.erase(it);
}

/// "{0, (3,7), 12}" with ordinals.
inline std::string to_string(const Cell& c, const PlanarTree& t)
{
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < c.items.size(); ++i) {
        if (i)
            os << ", ";
        Vertex v = code_position(c.items[i]);
        if (is_edge_code(c.items[i]))
            os << '(' << t.parent(v) << ',' << v << ')';
        else
            os << v;
    }
    os << '}';
    return os.str();
}

inline std::string to_string(const SignedChain& chain, const PlanarTree& t)
{
    if (chain.empty())
        return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [c, k] : chain) {
        os << (k < 0 ? (first ? "-" : " - ") : (first ? "" : " + "));
        if (k != 1 && k != -1)
            os << (k < 0 ? -k : k) << '*';
        os << to_string(c, t);
        first = false;
    }
    return os.str();
}

/// True when every ingredient exists in t and closures are pairwise disjoint.
inline bool is_valid_cell(const Cell& c, const PlanarTree& t)
{
    std::vector<char> used(t.size(), 0);
    auto take = [&](Vertex v) {
        if (v < 0 || v >= t.size() || used[v])
            return false;
        used[v] = 1;
        return true;
    };
    for (int code : c.items) {
        Vertex v = code_position(code);
        if (is_edge_code(code)) {
            if (v <= 0 || v >= t.size() || !take(v) || !take(t.parent(v)))
                return false;
        } else if (!take(v)) {
            return false;
        }
    }
    return std::is_sorted(c.items.begin(), c.items.end());
}

/// Parses "{0, (3,7), 12}" (ordinals) and validates it against t.
inline Cell parse_cell(const std::string& text, const PlanarTree& t)
{
    std::vector<int> codes;
    std::size_t i = 0;
    auto skip = [&] {
        while (i < text.size() && (text[i] == ' ' || text[i] == ','))
            ++i;
    };
    auto number = [&]() -> int {
        std::size_t start = i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
            ++i;
        if (start == i)
            fail(ErrorKind::Parse, "expected an ordinal in cell '" + text + "'");
        return std::stoi(text.substr(start, i - start));
    };
    while (i < text.size() && text[i] == ' ')
        ++i;
    if (i >= text.size() || text[i++] != '{')
        fail(ErrorKind::Parse, "cell must start with '{'");
    for (skip(); i < text.size() && text[i] != '}'; skip()) {
        if (text[i] == '(') {
            ++i;
            int a = number();
            skip();
            int b = number();
            if (i >= text.size() || text[i++] != ')')
                fail(ErrorKind::Parse, "unterminated edge in cell '" + text + "'");
            if (a > b)
                std::swap(a, b);
            if (b >= t.size() || t.parent(b) != a)
                fail(ErrorKind::Parse, "(" + std::to_string(a) + "," + std::to_string(b) + ") is not an edge");
            codes.push_back(edge_code(b));
        } else {
            codes.push_back(vertex_code(number()));
        }
    }
    if (i >= text.size())
        fail(ErrorKind::Parse, "cell must end with '}'");
    Cell c(std::move(codes));
    if (!is_valid_cell(c, t))
        fail(ErrorKind::Parse, "ingredients of '" + text + "' overlap or do not exist");
    return c;
}

/// Signed boundary. The k-th edge (0-based, by tau) contributes
/// (-1)^k [c with e->tau] - (-1)^k [c with e->iota].
inline SignedChain boundary(const Cell& c, const PlanarTree& t)
{
    SignedChain out;
    int k = 0;
    for (int code : c.items) {
        if (!is_edge_code(code))
            continue;
        Vertex tau = code_position(code);
        long long sign = (k % 2) ? -1 : 1;
        add_term(out, c.replaced(code, vertex_code(tau)), sign);
        add_term(out, c.replaced(code, vertex_code(t.parent(tau))), -sign);
        ++k;
    }
    return out;
}

struct EnumerationBudget {
    std::int64_t max_cells = 5'000'000;
};

/// Calls visit(const Cell&) for every cell of UD^nT in canonical
/// (lexicographic code) order. dim < 0 means all dimensions.
template <class Visit>
void for_each_cell(const PlanarTree& t, int n, int dim, Visit&& visit)
{
    const int codes = 2 * t.size();
    std::vector<char> used(t.size(), 0);
    std::vector<int> current;
    current.reserve(n);
    auto rec = [&](auto&& self, int from, int edges) -> void {
        if (static_cast<int>(current.size()) == n) {
            if (dim < 0 || edges == dim) {
                Cell c;
                c.items = current;
                visit(c);
            }
            return;
        }
        for (int code = from; code < codes; ++code) {
            Vertex v = code_position(code);
            bool edge = is_edge_code(code);
            if (edge && (v == 0 || (dim >= 0 && edges == dim)))
                continue;
            if (used[v] || (edge && used[t.parent(v)]))
                continue;
            used[v] = 1;
            if (edge)
                used[t.parent(v)] = 1;
            current.push_back(code);
            self(self, code + 1, edges + edge);
            current.pop_back();
            used[v] = 0;
            if (edge)
                used[t.parent(v)] = 0;
        }
    };
    rec(rec, 0, 0);
}

inline void require_subdivided(const PlanarTree& t, int n)
{
    require(n >= 1, ErrorKind::Invalid, "particle count must be positive");
    require(is_sufficiently_subdivided(t, n), ErrorKind::Hypothesis,
            "tree is not sufficiently subdivided for n=" + std::to_string(n) + "; apply subdivide_for_n first");
}

/// Number of cells per dimension, counted without materializing them.
inline std::vector<std::int64_t> cell_counts(const PlanarTree& t, int n)
{
    std::vector<std::int64_t> counts;
    for_each_cell(t, n, -1, [&](const Cell& c) {
        int d = c.dim();
        if (d >= static_cast<int>(counts.size()))
            counts.resize(d + 1, 0);
        ++counts[d];
    });
    return counts;
}

inline std::vector<Cell> enumerate_cells(const PlanarTree& t, int n, std::optional<int> dim = std::nullopt,
                                         EnumerationBudget budget = {})
{
    require_subdivided(t, n);
    std::vector<Cell> out;
    for_each_cell(t, n, dim.value_or(-1), [&](const Cell& c) {
        if (static_cast<std::int64_t>(out.size()) >= budget.max_cells)
            fail(ErrorKind::Budget, "cell enumeration exceeds the budget of " + std::to_string(budget.max_cells));
        out.push_back(c);
    });
    return out;
}

} // namespace treebraid
