#pragma once

// Cup products computed on the cube complex itself: critical cochains are
// pulled back along the flow projection, multiplied with the Serre diagonal
// of each cube, and evaluated on the flow-invariant chain of a critical cell.
// Nothing here uses interaction parameters, so it serves as an independent
// check of the symbolic product formulas.

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "cell.hpp"
#include "flow.hpp"
#include "morse.hpp"

namespace treebraid {

/// Sign turning the block order (by x) of a critical cell's edges into the
/// cube orientation (by tau).
inline int block_orientation(const Cell& c, const PlanarTree& t)
{
    std::vector<Vertex> by_x;
    for (Vertex tau : c.edges())
        by_x.push_back(t.parent(tau));
    // edges() is tau-sorted; count inversions of iota along it
    int inv = 0;
    for (std::size_t i = 0; i < by_x.size(); ++i)
        for (std::size_t j = i + 1; j < by_x.size(); ++j)
            inv += by_x[i] > by_x[j];
    return inv % 2 ? -1 : 1;
}

struct OracleBudget {
    std::int64_t max_chain = 10'000'000;
};

class CubicalCupOracle {
public:
    CubicalCupOracle(const PlanarTree& t, int n, OracleBudget budget = {}, FlowBudget flow_budget = {})
        : t_(t), n_(n), flow_(t, n, flow_budget), budget_(budget)
    {
    }

    /// Evaluates a linear functional on the flow-invariant chain of a critical
    /// cell c. That chain is c + sum over faces f of c of <dc,f> H(f), where for
    /// redundant f, H(f) = -eps_f (W(f) + sum_{g != f} <dW(f),g> H(g)) and H is
    /// zero elsewhere; only the scalar value of H under the functional is kept.
    template <class Functional>
    long long evaluate_invariant(const Cell& c, Functional&& value)
    {
        std::map<Cell, long long> memo;
        std::set<Cell> active;
        std::int64_t steps = 0;
        auto h = [&](auto&& self, const Cell& f) -> long long {
            if (auto it = memo.find(f); it != memo.end())
                return it->second;
            auto st = fs_status(f, t_);
            if (st.kind != FsKind::Redundant)
                return 0;
            require(++steps <= budget_.max_chain, ErrorKind::Budget, "oracle exceeds its step budget");
            require(active.insert(f).second, ErrorKind::Invalid, "closed gradient path in oracle");
            const Cell& w = st.partner;
            long long eps = incidence(w, f, t_);
            long long total = value(w);
            for (const auto& [g, k] : boundary(w, t_))
                if (g != f)
                    total += k * self(self, g);
            active.erase(f);
            return memo[f] = -eps * total;
        };
        long long total = value(c);
        for (const auto& [f, k] : boundary(c, t_))
            total += k * h(h, f);
        return total;
    }

    /// Value of the pulled-back dual of critical cell a on an arbitrary cell.
    long long pullback(const Cell& a, const Cell& s)
    {
        if (s.dim() != a.dim())
            return 0;
        const auto& image = flow_.project(s);
        auto it = image.find(a);
        return it == image.end() ? 0 : it->second;
    }

    /// (alpha cup beta)(s) with the Serre diagonal; alpha, beta duals of
    /// critical cells given in cube orientation.
    long long cup_on_cube(const Cell& a, const Cell& b, const Cell& s)
    {
        const int p = a.dim(), q = b.dim();
        auto edges = s.edges();
        const int m = static_cast<int>(edges.size());
        if (p + q != m)
            return 0;
        long long total = 0;
        for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
            if (__builtin_popcount(mask) != p)
                continue;
            Cell front = s, back = s;
            int swaps = 0;
            for (int i = 0; i < m; ++i) {
                bool in_front = (mask >> i) & 1;
                if (!in_front) {
                    front = front.replaced(edge_code(edges[i]), vertex_code(t_.parent(edges[i])));
                    swaps += __builtin_popcount(mask >> (i + 1));
                } else {
                    back = back.replaced(edge_code(edges[i]), vertex_code(edges[i]));
                }
            }
            long long va = pullback(a, front);
            if (va == 0)
                continue;
            long long vb = pullback(b, back);
            total += (swaps % 2 ? -1 : 1) * va * vb;
        }
        return total;
    }

    /// Coefficient of the dual of c in dual(a) cup dual(b), all three in
    /// block orientation.
    long long coefficient(const CriticalCell& a, const CriticalCell& b, const CriticalCell& c)
    {
        Cell ga = decode(a, t_, n_), gb = decode(b, t_, n_), gc = decode(c, t_, n_);
        long long total = evaluate_invariant(gc, [&](const Cell& s) { return cup_on_cube(ga, gb, s); });
        return total * block_orientation(ga, t_) * block_orientation(gb, t_) * block_orientation(gc, t_);
    }

    /// The full product over critical cells of dimension dim(a)+dim(b).
    std::map<CriticalCell, long long> product(const CriticalCell& a, const CriticalCell& b,
                                              const std::vector<CriticalCell>& candidates)
    {
        std::map<CriticalCell, long long> out;
        for (const auto& c : candidates) {
            if (c.dim() != a.dim() + b.dim())
                continue;
            if (long long k = coefficient(a, b, c))
                out[c] = k;
        }
        return out;
    }

    MorseFlow& flow() { return flow_; }

private:
    const PlanarTree& t_;
    int n_;
    MorseFlow flow_;
    OracleBudget budget_;
};

} // namespace treebraid
