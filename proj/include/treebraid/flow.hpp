#pragma once

// Gradient paths of the Farley-Sabalka field: the projection of a cell onto
// critical cells, the Morse boundary and coboundary, reduction of 1-cells to
// critical ones and the factorization of critical m-cells into 1-cells.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cell.hpp"
#include "error.hpp"
#include "morse.hpp"
#include "tree.hpp"

namespace treebraid {

/// <boundary(upper), lower>, for lower a face of upper.
inline long long incidence(const Cell& upper, const Cell& lower, const PlanarTree& t)
{
    int k = 0;
    for (int code : upper.items) {
        if (!is_edge_code(code))
            continue;
        if (!std::binary_search(lower.items.begin(), lower.items.end(), code)) {
            Vertex tau = code_position(code);
            long long sign = (k % 2) ? -1 : 1;
            if (lower.has_vertex(tau))
                return sign;
            if (lower.has_vertex(t.parent(tau)))
                return -sign;
            return 0;
        }
        ++k;
    }
    return 0;
}

/// Cells having c as a face, each with its incidence number.
inline std::vector<std::pair<Cell, long long>> cofaces(const Cell& c, const PlanarTree& t)
{
    auto occ = occupancy(c, t);
    std::vector<std::pair<Cell, long long>> out;
    for (int code : c.items) {
        if (is_edge_code(code))
            continue;
        Vertex v = code_position(code);
        std::vector<Vertex> nbrs(t.children(v).begin(), t.children(v).end());
        if (v != 0)
            nbrs.push_back(t.parent(v));
        for (Vertex w : nbrs) {
            if (occ[w])
                continue;
            Cell y = c.replaced(code, edge_code(std::max(v, w)));
            out.emplace_back(y, incidence(y, c, t));
        }
    }
    return out;
}

struct FlowBudget {
    std::int64_t max_steps = 10'000'000;
};

/// Memoized gradient-path sums for one complex. Walks through a cell that is
/// already in progress raise an error: that would be a closed W-path.
class MorseFlow {
public:
    MorseFlow(const PlanarTree& t, int n, FlowBudget budget = {}) : t_(t), n_(n), budget_(budget)
    {
        require_subdivided(t, n);
    }

    /// Image of a cell under the flow to critical cells of the same dimension.
    const SignedChain& project(const Cell& b)
    {
        if (auto it = down_.find(b); it != down_.end())
            return it->second;
        step();
        SignedChain out;
        auto st = fs_status(b, t_);
        if (st.kind == FsKind::Critical) {
            out[b] = 1;
        } else if (st.kind == FsKind::Redundant) {
            require(active_.insert(b).second, ErrorKind::Invalid,
                    "closed gradient path through " + to_string(b, t_));
            const Cell& w = st.partner;
            long long eps = incidence(w, b, t_);
            for (const auto& [face, k] : boundary(w, t_)) {
                if (face == b)
                    continue;
                SignedChain sub = project(face);
                for (const auto& [c, m] : sub)
                    add_term(out, c, -eps * k * m);
            }
            active_.erase(b);
        }
        return down_.emplace(b, std::move(out)).first->second;
    }

    /// Morse boundary of a critical cell: the projection of its boundary.
    SignedChain morse_boundary(const Cell& c)
    {
        SignedChain out;
        for (const auto& [face, k] : boundary(c, t_))
            for (const auto& [d, m] : project(face))
                add_term(out, d, k * m);
        return out;
    }

    /// Morse coboundary of a critical cell: sums over upper gradient paths
    /// ending in critical cells one dimension up.
    const SignedChain& coboundary(const Cell& a)
    {
        if (auto it = up_.find(a); it != up_.end())
            return it->second;
        step();
        require(active_up_.insert(a).second, ErrorKind::Invalid,
                "closed gradient path through " + to_string(a, t_));
        SignedChain out;
        for (const auto& [y, inc] : cofaces(a, t_)) {
            auto st = fs_status(y, t_);
            if (st.kind == FsKind::Critical) {
                add_term(out, y, inc);
            } else if (st.kind == FsKind::Collapsible && st.partner != a) {
                long long eps = incidence(y, st.partner, t_);
                SignedChain sub = coboundary(st.partner);
                for (const auto& [c, m] : sub)
                    add_term(out, c, -eps * inc * m);
            }
        }
        active_up_.erase(a);
        return up_.emplace(a, std::move(out)).first->second;
    }

    std::int64_t steps() const { return steps_; }
    const PlanarTree& tree() const { return t_; }
    int particles() const { return n_; }

private:
    void step()
    {
        require(++steps_ <= budget_.max_steps, ErrorKind::Budget,
                "gradient path search exceeds " + std::to_string(budget_.max_steps) + " steps");
    }

    const PlanarTree& t_;
    int n_;
    FlowBudget budget_;
    std::int64_t steps_ = 0;
    std::map<Cell, SignedChain> down_, up_;
    std::set<Cell> active_, active_up_;
};

inline SignedChain morse_coboundary(const CriticalCell& c, const PlanarTree& t, int n, FlowBudget budget = {})
{
    MorseFlow flow(t, n, budget);
    return flow.coboundary(decode(c, t, n));
}

/// The critical 1-cell a 1-cell flows to, with the sign of the path.
struct Reduction {
    CriticalCell cell;
    long long sign = 1;
};

inline Reduction reduce_to_critical(const Cell& one_cell, MorseFlow& flow)
{
    require(one_cell.dim() == 1, ErrorKind::Invalid, "reduce_to_critical needs a 1-cell");
    const auto& image = flow.project(one_cell);
    require(!image.empty(), ErrorKind::Invalid,
            to_string(one_cell, flow.tree()) + " collapses; it flows to no critical 1-cell");
    require(image.size() == 1 && (image.begin()->second == 1 || image.begin()->second == -1), ErrorKind::Invalid,
            to_string(one_cell, flow.tree()) + " flows to " + to_string(image, flow.tree()));
    return {encode(image.begin()->first, flow.tree()), image.begin()->second};
}

/// d_i: the cell with every edge except the i-th (0-based, by anchor) replaced
/// by its smaller endpoint.
inline Cell factor_cell(const CriticalCell& c, const PlanarTree& t, int n, int i)
{
    Cell cell = decode(c, t, n);
    for (int j = 0; j < c.dim(); ++j) {
        if (j == i)
            continue;
        const auto& b = c.blocks[j];
        Vertex tau = t.neighbor(b.x, static_cast<int>(b.p.size()) + 1);
        cell = cell.replaced(edge_code(tau), vertex_code(b.x));
    }
    return cell;
}

/// Closed form of the reduction of d_i: count particles by x_i-direction.
inline CriticalCell factor_closed_form(const CriticalCell& c, const PlanarTree& t, int n, int i)
{
    Cell d = factor_cell(c, t, n, i);
    const auto& b = c.blocks[i];
    int r = static_cast<int>(b.p.size());
    CriticalCell out;
    Block nb{b.x, std::vector<int>(r, 0), std::vector<int>(b.q.size(), 0)};
    for (Vertex v : d.vertices()) {
        int dir = t.direction_toward(b.x, v);
        if (dir == 0)
            ++out.k;
        else if (dir <= r)
            ++nb.p[dir - 1];
        else
            ++nb.q[dir - r - 1];
    }
    out.blocks.push_back(std::move(nb));
    return out;
}

/// Critical 1-cells whose strong product is c.
inline std::vector<CriticalCell> factorize(const CriticalCell& c, const PlanarTree& t, int n)
{
    require(c.dim() >= 1, ErrorKind::Invalid, "factorize needs a cell of positive dimension");
    std::vector<CriticalCell> out;
    for (int i = 0; i < c.dim(); ++i)
        out.push_back(factor_closed_form(c, t, n, i));
    return out;
}

/// Same factors obtained by following gradient paths from each d_i.
inline std::vector<Reduction> factorize_by_flow(const CriticalCell& c, MorseFlow& flow)
{
    std::vector<Reduction> out;
    for (int i = 0; i < c.dim(); ++i)
        out.push_back(reduce_to_critical(factor_cell(c, flow.tree(), flow.particles(), i), flow));
    return out;
}

// ---------------------------------------------------------------------------
// Whole-complex audit of the field

struct FieldReport {
    std::vector<std::int64_t> cells;    // per dimension
    std::vector<std::int64_t> critical; // per dimension
    std::int64_t pairs = 0;
    std::int64_t pairing_violations = 0;    // partner not mutual, or dimension wrong
    std::int64_t ingredient_mismatches = 0; // critical by pairing but not by ingredients, or vice versa
    bool acyclic = true;
    std::string first_problem;

    bool ok() const { return pairing_violations == 0 && ingredient_mismatches == 0 && acyclic; }
};

/// Checks on every cell that W is a vector field, that critical cells by
/// pairing and by ingredients coincide, and that W has no closed paths.
inline FieldReport audit_field(const PlanarTree& t, int n, EnumerationBudget budget = {})
{
    require_subdivided(t, n);
    FieldReport rep;
    std::vector<std::vector<Cell>> cells;
    std::int64_t total = 0;
    for_each_cell(t, n, -1, [&](const Cell& c) {
        require(++total <= budget.max_cells, ErrorKind::Budget, "field audit exceeds the cell budget");
        int d = c.dim();
        if (d >= static_cast<int>(cells.size()))
            cells.resize(d + 1);
        cells[d].push_back(c);
    });
    auto note = [&](const std::string& what) {
        if (rep.first_problem.empty())
            rep.first_problem = what;
    };
    const int top = static_cast<int>(cells.size());
    rep.cells.assign(top, 0);
    rep.critical.assign(top, 0);
    // paired[d][i]: the cell appears in some pair
    std::vector<std::vector<char>> paired(top);
    for (int d = 0; d < top; ++d)
        paired[d].assign(cells[d].size(), 0);
    auto index = [&](const Cell& c) -> std::int64_t {
        int d = c.dim();
        if (d >= top)
            return -1;
        auto it = std::lower_bound(cells[d].begin(), cells[d].end(), c);
        return (it != cells[d].end() && *it == c) ? it - cells[d].begin() : -1;
    };
    for (int d = 0; d < top; ++d) {
        rep.cells[d] = static_cast<std::int64_t>(cells[d].size());
        for (std::size_t i = 0; i < cells[d].size(); ++i) {
            const Cell& c = cells[d][i];
            auto st = fs_status(c, t);
            if (st.kind == FsKind::Redundant) {
                auto back = fs_status(st.partner, t);
                std::int64_t j = index(st.partner);
                if (j < 0 || back.kind != FsKind::Collapsible || back.partner != c ||
                    incidence(st.partner, c, t) == 0) {
                    ++rep.pairing_violations;
                    note("pairing of " + to_string(c, t) + " is not mutual");
                    continue;
                }
                if (paired[d][i] || paired[d + 1][j]) {
                    ++rep.pairing_violations;
                    note(to_string(c, t) + " lies in two pairs");
                }
                paired[d][i] = paired[d + 1][j] = 1;
                ++rep.pairs;
            } else if (st.kind == FsKind::Collapsible) {
                auto back = fs_status(st.partner, t);
                if (back.kind != FsKind::Redundant || back.partner != c) {
                    ++rep.pairing_violations;
                    note("collapsible " + to_string(c, t) + " has no mutual partner");
                }
            }
        }
    }
    for (int d = 0; d < top; ++d)
        for (std::size_t i = 0; i < cells[d].size(); ++i) {
            bool crit = !paired[d][i];
            rep.critical[d] += crit;
            if (crit != all_ingredients_critical(cells[d][i], t)) {
                ++rep.ingredient_mismatches;
                note("criticality of " + to_string(cells[d][i], t) + " depends on the test used");
            }
        }
    // closed W-paths: b -> b' for redundant b and b' != b a redundant face of W(b)
    for (int d = 0; d + 1 < top && rep.acyclic; ++d) {
        std::vector<char> color(cells[d].size(), 0); // 0 new, 1 open, 2 done
        for (std::size_t s = 0; s < cells[d].size() && rep.acyclic; ++s) {
            if (color[s])
                continue;
            std::vector<std::pair<std::int64_t, std::vector<std::int64_t>>> stack;
            auto successors = [&](std::int64_t i) {
                std::vector<std::int64_t> next;
                auto st = fs_status(cells[d][i], t);
                if (st.kind != FsKind::Redundant)
                    return next;
                for (const auto& [face, k] : boundary(st.partner, t))
                    if (face != cells[d][i])
                        next.push_back(index(face));
                return next;
            };
            color[s] = 1;
            stack.emplace_back(s, successors(s));
            while (!stack.empty() && rep.acyclic) {
                auto& [i, next] = stack.back();
                if (next.empty()) {
                    color[i] = 2;
                    stack.pop_back();
                    continue;
                }
                std::int64_t j = next.back();
                next.pop_back();
                if (color[j] == 1) {
                    rep.acyclic = false;
                    note("closed gradient path through " + to_string(cells[d][j], t));
                } else if (color[j] == 0) {
                    color[j] = 1;
                    stack.emplace_back(j, successors(j));
                }
            }
        }
    }
    return rep;
}

} // namespace treebraid
