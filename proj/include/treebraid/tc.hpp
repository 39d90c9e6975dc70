#pragma once

// Zero-divisor cup-length in the s-fold tensor power of the Morse cohomology
// ring, witness cells for the lower bounds on TC_s(UD^nT), and the matching
// upper bound s * hdim.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "flow.hpp"
#include "morse.hpp"
#include "ring.hpp"
#include "tree.hpp"

namespace treebraid {

// ---------------------------------------------------------------------------
// Tensor powers

/// Element of H*(X)^{tensor s}: integer combination of s-tuples of critical cells.
struct TensorClass {
    int s = 0;
    std::map<std::vector<CriticalCell>, long long> terms;

    bool is_zero() const { return terms.empty(); }

    void add(const std::vector<CriticalCell>& tuple, long long k)
    {
        if (k == 0)
            return;
        auto [it, fresh] = terms.emplace(tuple, k);
        if (!fresh && (it->second += k) == 0)
            terms.erase(it);
    }
};

inline std::string to_string(const TensorClass& u, const PlanarTree& t)
{
    if (u.is_zero())
        return "0";
    std::vector<std::pair<std::string, long long>> parts;
    for (const auto& [tuple, k] : u.terms) {
        std::string s;
        for (std::size_t i = 0; i < tuple.size(); ++i)
            s += (i ? " (x) " : "") + to_string(tuple[i], t);
        parts.emplace_back(s, k);
    }
    std::sort(parts.begin(), parts.end());
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        long long k = parts[i].second;
        out += i == 0 ? (k < 0 ? "-" : "") : (k < 0 ? " - " : " + ");
        if (std::llabs(k) != 1)
            out += std::to_string(std::llabs(k)) + " ";
        out += parts[i].first;
    }
    return out;
}

/// 1 (x) ... (x) c (x) ... (x) 1 with c in slot `slot` (0-based).
inline TensorClass slot_class(const CohomologyClass& c, int slot, int s, int n)
{
    require(slot >= 0 && slot < s, ErrorKind::Invalid, "slot out of range");
    TensorClass out{s, {}};
    std::vector<CriticalCell> tuple(s, CriticalCell{n, {}});
    for (const auto& [cell, k] : c) {
        tuple[slot] = cell;
        out.add(tuple, k);
    }
    return out;
}

inline TensorClass operator-(TensorClass a, const TensorClass& b)
{
    for (const auto& [tuple, k] : b.terms)
        a.add(tuple, -k);
    return a;
}

/// The zero-divisor attached to c in slot i (1-based): c in slot i minus c
/// in slot i+1, and for i = s, c in the last slot minus c in the first.
inline TensorClass zero_divisor(const CohomologyClass& c, int i, int s, int n)
{
    require(s >= 2 && i >= 1 && i <= s, ErrorKind::Invalid, "zero divisor slot out of range");
    if (i < s)
        return slot_class(c, i - 1, s, n) - slot_class(c, i, s, n);
    return slot_class(c, s - 1, s, n) - slot_class(c, 0, s, n);
}

namespace detail {

inline int degree_of(const CohomologyClass& c) { return c.empty() ? 0 : c.begin()->first.dim(); }

// Koszul sign for (u_1 (x) ... ) . (v_1 (x) ...): (-1)^{sum_{i>j} |u_i||v_j|}
template <class DegU, class DegV>
int koszul(int s, DegU du, DegV dv)
{
    int parity = 0;
    for (int j = 0; j < s; ++j) {
        if (dv(j) % 2 == 0)
            continue;
        for (int i = j + 1; i < s; ++i)
            parity += du(i);
    }
    return parity % 2 ? -1 : 1;
}

} // namespace detail

struct TensorBudget {
    std::int64_t max_terms = 10'000'000;
};

/// Slotwise cup with the Koszul sign. Terms with a slot of degree above
/// `cap` (when given) are dropped.
inline TensorClass tensor_multiply(const TensorClass& u, const TensorClass& v, CupEngine& engine,
                                   std::optional<int> cap = std::nullopt, TensorBudget budget = {})
{
    require(u.s == v.s, ErrorKind::Invalid, "tensor arity mismatch");
    const int s = u.s;
    TensorClass out{s, {}};
    for (const auto& [tu, ku] : u.terms)
        for (const auto& [tv, kv] : v.terms) {
            bool skip = false;
            for (int i = 0; i < s && !skip; ++i)
                skip = cap && tu[i].dim() + tv[i].dim() > *cap;
            if (skip)
                continue;
            int sign = detail::koszul(s, [&](int i) { return tu[i].dim(); }, [&](int j) { return tv[j].dim(); });
            // expand the slotwise products
            std::vector<std::pair<std::vector<CriticalCell>, long long>> acc{{{}, sign * ku * kv}};
            for (int i = 0; i < s && !acc.empty(); ++i) {
                CohomologyClass p = engine.cup(tu[i], tv[i]);
                std::vector<std::pair<std::vector<CriticalCell>, long long>> next;
                for (const auto& [prefix, k] : acc)
                    for (const auto& [cell, m] : p) {
                        auto tuple = prefix;
                        tuple.push_back(cell);
                        next.emplace_back(std::move(tuple), k * m);
                    }
                acc = std::move(next);
            }
            for (const auto& [tuple, k] : acc)
                out.add(tuple, k);
            require(static_cast<std::int64_t>(out.terms.size()) <= budget.max_terms, ErrorKind::Budget,
                    "tensor expansion exceeds its term budget");
        }
    return out;
}

/// Restriction along the iterated diagonal: each term goes to the cup of its
/// slots in order.
inline CohomologyClass diagonal_restriction(const TensorClass& u, CupEngine& engine)
{
    CohomologyClass out;
    for (const auto& [tuple, k] : u.terms) {
        std::vector<CohomologyClass> slots;
        for (const auto& c : tuple)
            slots.push_back(basis_class(c));
        add_class(out, engine.cup(slots), k);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Certificates

/// A zero-divisor kept in factored form: a class placed in two slots with
/// opposite signs. The full TensorClass is `tensor()`.
struct ZeroDivisor {
    CohomologyClass cls;
    int slot = 1; // 1-based, as in zero_divisor
    int s = 2;

    int plus_slot() const { return slot - 1; }
    int minus_slot() const { return slot < s ? slot : 0; }
    TensorClass tensor(int n) const { return zero_divisor(cls, slot, s, n); }
};

struct BoundCertificate {
    std::string theorem;
    int s = 0;
    int n = 0;
    int bound = 0;   // zero-divisors whose product was verified nonzero (0 if unverified)
    int claimed = 0; // the bound the theorem states
    int upper = 0;
    std::vector<std::string> witnesses;
    std::vector<std::string> surviving_term;
    long long coefficient = 0;
    bool verified = false;
    std::string method;
    std::string note;

    nlohmann::ordered_json to_json() const
    {
        nlohmann::ordered_json j;
        j["theorem"] = theorem;
        j["s"] = s;
        j["n"] = n;
        j["bound"] = bound;
        j["claimed_bound"] = claimed;
        j["upper_bound"] = upper;
        j["witnesses"] = witnesses;
        j["surviving_term"] = surviving_term;
        j["coefficient"] = coefficient;
        j["verified"] = verified;
        j["method"] = method;
        if (!note.empty())
            j["note"] = note;
        return j;
    }
};

/// s * min(m, floor(n/2)).
inline int upper_bound(const PlanarTree& t, int n, int s)
{
    return s * homological_dimension(t, n);
}

namespace detail {

// Walks the terms of the product of the zero-divisors (taken in order) whose
// slot degrees are exactly `want`, calling leaf(sign, slot products) for
// each. Partial slot products are memoized and a vanishing one prunes.
template <class Leaf>
void for_each_assignment(const std::vector<ZeroDivisor>& factors, const std::vector<int>& want, CupEngine& engine,
                         TensorBudget budget, Leaf&& leaf)
{
    const int s = static_cast<int>(want.size());
    const int f_count = static_cast<int>(factors.size());
    // how much degree the remaining factors can still bring to each slot
    std::vector<std::vector<int>> reach(f_count + 1, std::vector<int>(s, 0));
    for (int f = f_count - 1; f >= 0; --f) {
        reach[f] = reach[f + 1];
        require(factors[f].s == s, ErrorKind::Invalid, "zero-divisor arity differs from the target");
        int d = degree_of(factors[f].cls);
        reach[f][factors[f].plus_slot()] += d;
        if (factors[f].minus_slot() != factors[f].plus_slot())
            reach[f][factors[f].minus_slot()] += d;
    }
    std::map<std::vector<int>, CohomologyClass> memo; // factor sequence -> product
    auto product = [&](const std::vector<int>& seq) -> const CohomologyClass& {
        if (auto it = memo.find(seq); it != memo.end())
            return it->second;
        // extend the longest memoized prefix one factor at a time
        std::size_t len = seq.size();
        std::vector<int> prefix(seq);
        const CohomologyClass* base = nullptr;
        while (!base) {
            if (len == 0) {
                base = &memo.emplace(std::vector<int>{}, unit_class(engine.particles())).first->second;
                break;
            }
            prefix.resize(--len);
            if (auto it = memo.find(prefix); it != memo.end())
                base = &it->second;
        }
        for (; len < seq.size(); ++len) {
            prefix.push_back(seq[len]);
            require(static_cast<std::int64_t>(memo.size()) < budget.max_terms, ErrorKind::Budget,
                    "zero-divisor product exceeds its budget");
            base = &memo.emplace(prefix, engine.cup(*base, factors[seq[len]].cls)).first->second;
        }
        return *base;
    };
    std::vector<std::vector<int>> seqs(s);
    std::vector<int> deg(s, 0);
    std::vector<const CohomologyClass*> slots(s);
    auto dfs = [&](auto&& self, int f, long long sign) -> void {
        for (int i = 0; i < s; ++i)
            if (deg[i] > want[i] || deg[i] + reach[f][i] < want[i])
                return;
        if (f == f_count) {
            for (int i = 0; i < s; ++i)
                slots[i] = &product(seqs[i]);
            leaf(sign, slots);
            return;
        }
        const auto& z = factors[f];
        int d = degree_of(z.cls);
        for (int side = 0; side < 2; ++side) {
            int slot = side == 0 ? z.plus_slot() : z.minus_slot();
            long long sg = side == 0 ? sign : -sign;
            int parity = 0;
            for (int i = slot + 1; i < s; ++i)
                parity += deg[i];
            if (parity % 2 && d % 2)
                sg = -sg;
            seqs[slot].push_back(f);
            deg[slot] += d;
            if (!product(seqs[slot]).empty())
                self(self, f + 1, sg);
            deg[slot] -= d;
            seqs[slot].pop_back();
        }
    };
    dfs(dfs, 0, 1);
}

} // namespace detail

/// Coefficient of the tuple `target` in the product of the zero-divisors,
/// taken in the given order.
inline long long target_coefficient(const std::vector<ZeroDivisor>& factors, const std::vector<CriticalCell>& target,
                                    CupEngine& engine, TensorBudget budget = {})
{
    std::vector<int> want;
    for (const auto& c : target)
        want.push_back(c.dim());
    long long total = 0;
    detail::for_each_assignment(factors, want, engine, budget,
                                [&](long long sign, const std::vector<const CohomologyClass*>& slots) {
                                    long long k = sign;
                                    for (std::size_t i = 0; i < slots.size() && k; ++i) {
                                        auto it = slots[i]->find(target[i]);
                                        k = it == slots[i]->end() ? 0 : k * it->second;
                                    }
                                    total += k;
                                });
    return total;
}

/// The part of the product of the zero-divisors with the given slot degrees.
inline TensorClass product_in_degrees(const std::vector<ZeroDivisor>& factors, const std::vector<int>& want,
                                      CupEngine& engine, TensorBudget budget = {})
{
    const int s = static_cast<int>(want.size());
    TensorClass out{s, {}};
    detail::for_each_assignment(
        factors, want, engine, budget, [&](long long sign, const std::vector<const CohomologyClass*>& slots) {
            std::vector<std::pair<std::vector<CriticalCell>, long long>> acc{{{}, sign}};
            for (int i = 0; i < s; ++i) {
                std::vector<std::pair<std::vector<CriticalCell>, long long>> next;
                for (const auto& [prefix, k] : acc)
                    for (const auto& [cell, m] : *slots[i]) {
                        auto tuple = prefix;
                        tuple.push_back(cell);
                        next.emplace_back(std::move(tuple), k * m);
                    }
                acc = std::move(next);
            }
            for (const auto& [tuple, k] : acc)
                out.add(tuple, k);
            require(static_cast<std::int64_t>(out.terms.size()) <= budget.max_terms, ErrorKind::Budget,
                    "zero-divisor product exceeds its term budget");
        });
    return out;
}

/// Full expansion of the product of the zero-divisors, dropping terms whose
/// slot degree exceeds hdim. Verified iff some term survives.
inline BoundCertificate expand_and_certify(const std::vector<ZeroDivisor>& factors, CupEngine& engine,
                                           TensorBudget budget = {})
{
    require(!factors.empty(), ErrorKind::Invalid, "no zero-divisors to multiply");
    const PlanarTree& t = engine.tree();
    const int n = engine.particles();
    const int s = factors[0].s;
    const int cap = homological_dimension(t, n);
    TensorClass acc = slot_class(unit_class(n), 0, s, n);
    for (const auto& z : factors) {
        acc = tensor_multiply(acc, z.tensor(n), engine, cap, budget);
        if (acc.is_zero())
            break;
    }
    BoundCertificate cert;
    cert.theorem = "expansion";
    cert.s = s;
    cert.n = n;
    cert.claimed = static_cast<int>(factors.size());
    cert.upper = upper_bound(t, n, s);
    cert.method = "full expansion";
    cert.verified = !acc.is_zero();
    if (cert.verified) {
        cert.bound = static_cast<int>(factors.size());
        const auto& [tuple, k] = *acc.terms.begin();
        for (const auto& c : tuple)
            cert.surviving_term.push_back(to_string(c, t));
        cert.coefficient = k;
    }
    return cert;
}

// ---------------------------------------------------------------------------
// Witness cells

/// Essential vertices split by degree, each list increasing.
struct EssentialSplit {
    std::vector<Vertex> big;   // degree > 3
    std::vector<Vertex> three; // degree 3

    int m() const { return static_cast<int>(big.size() + three.size()); }
    int k() const { return static_cast<int>(three.size()); }
};

inline EssentialSplit split_essential(const PlanarTree& t)
{
    EssentialSplit e;
    for (Vertex v : t.essential_vertices())
        (t.degree(v) == 3 ? e.three : e.big).push_back(v);
    return e;
}

namespace detail {

// codes of {(x,u), z} (upper) or {(x,z), w} (lower) with w<z<u the first
// three neighbours of x above it
inline void add_big_pattern(std::vector<int>& codes, const PlanarTree& t, Vertex x, bool upper)
{
    Vertex w = t.neighbor(x, 1), z = t.neighbor(x, 2), u = t.neighbor(x, 3);
    if (upper) {
        codes.push_back(edge_code(u));
        codes.push_back(vertex_code(z));
    } else {
        codes.push_back(edge_code(z));
        codes.push_back(vertex_code(w));
    }
}

inline void add_block(std::vector<int>& codes, const PlanarTree& t, Vertex y)
{
    auto [tau, v] = block(t, y);
    codes.push_back(edge_code(tau));
    codes.push_back(vertex_code(v));
}

// Encodes the ingredients and fills the remaining particles in at the root.
inline CriticalCell finish_cell(std::vector<int> codes, const PlanarTree& t, int n)
{
    Cell c(std::move(codes));
    require(is_valid_cell(c, t), ErrorKind::Invalid, "witness ingredients overlap: " + to_string(c, t));
    require(c.size() <= n, ErrorKind::Hypothesis,
            "witness " + to_string(c, t) + " needs more than " + std::to_string(n) + " particles");
    CriticalCell out = encode(c, t);
    out.k += n - c.size();
    require_valid(out, t, n);
    return out;
}

} // namespace detail

/// True when every cell contains an edge at x in the same direction.
inline bool edge_shared_by_all(const std::vector<CriticalCell>& cells, const Block& b)
{
    return std::all_of(cells.begin(), cells.end(), [&](const CriticalCell& c) {
        return std::any_of(c.blocks.begin(), c.blocks.end(),
                           [&](const Block& o) { return o.x == b.x && o.p.size() == b.p.size(); });
    });
}

/// The zero-divisors built from a witness family: cell i is factored into
/// 1-cells a_i^1..a_i^m, and each factor becomes the class
/// <a_i^j> when its edge sits at a degree-3 vertex and is common to all
/// cells, a_i^j itself otherwise. The order is slot by slot, factor by factor.
inline std::vector<ZeroDivisor> family_zero_divisors(const std::vector<CriticalCell>& cells, const PlanarTree& t,
                                                     int n, BracketReading reading = BracketReading::WithLeading)
{
    const int s = static_cast<int>(cells.size());
    std::vector<ZeroDivisor> out;
    for (int i = 0; i < s; ++i)
        for (const auto& a : factorize(cells[i], t, n)) {
            const Block& b = a.blocks[0];
            CohomologyClass cls;
            if (t.degree(b.x) == 3 && edge_shared_by_all(cells, b))
                cls = bracket_class(a.k, b.x, b.p[0], b.q[0], t, n, reading);
            else
                cls = basis_class(a);
            out.push_back({std::move(cls), i + 1, s});
        }
    return out;
}

/// Certifies a witness family by the coefficient of c_1 (x) ... (x) c_s in
/// the product of its zero-divisors.
inline BoundCertificate certify_family(const std::string& theorem, const std::vector<CriticalCell>& cells,
                                       CupEngine& engine, int claimed,
                                       BracketReading reading = BracketReading::WithLeading, TensorBudget budget = {})
{
    const PlanarTree& t = engine.tree();
    const int n = engine.particles();
    const int s = static_cast<int>(cells.size());
    BoundCertificate cert;
    cert.theorem = theorem;
    cert.s = s;
    cert.n = n;
    cert.claimed = claimed;
    cert.upper = upper_bound(t, n, s);
    cert.method = "coefficient of the witness tuple";
    for (const auto& c : cells)
        cert.witnesses.push_back(to_string(c, t));
    auto factors = family_zero_divisors(cells, t, n, reading);
    cert.coefficient = target_coefficient(factors, cells, engine, budget);
    cert.verified = cert.coefficient != 0;
    if (cert.verified) {
        cert.bound = static_cast<int>(factors.size());
        cert.surviving_term = cert.witnesses;
    }
    if (cert.verified && cert.bound != claimed)
        cert.note = "witness cells have dimension " + std::to_string(cells[0].dim()) + "; the product certifies " +
                    std::to_string(cert.bound) + ", not " + std::to_string(claimed);
    return cert;
}

/// Witness cells for s(m-k+l) with n = 2(m-k+l)+eps, l <= floor(k/s)(s-1).
inline std::vector<CriticalCell> pars_witnesses(const PlanarTree& t, int n, int s)
{
    require(s >= 2, ErrorKind::Invalid, "s must be at least 2");
    auto e = split_essential(t);
    const int m = e.m(), k = e.k();
    const int l = n / 2 - (m - k);
    const int j = k / s;
    require(l >= 0 && l <= j * (s - 1), ErrorKind::Hypothesis,
            "n = " + std::to_string(n) + " is not 2(m-k+l)+eps with 0 <= l <= floor(k/s)(s-1) (m=" +
                std::to_string(m) + ", k=" + std::to_string(k) + ")");
    // U_i = y_{(i-1)j+1} .. y_{ij}; V_i = union of the others
    std::vector<std::vector<Vertex>> V(s);
    for (int i = 0; i < s; ++i)
        for (int other = 0; other < s; ++other)
            if (other != i)
                for (int q = other * j; q < (other + 1) * j; ++q)
                    V[i].push_back(e.three[q]);
    std::vector<CriticalCell> cells;
    for (int i = 1; i <= s; ++i) {
        std::vector<int> codes;
        for (Vertex x : e.big)
            detail::add_big_pattern(codes, t, x, i % 2 == 0);
        auto& vi = V[i - 1];
        std::sort(vi.begin(), vi.end());
        for (int q = 0; q < l; ++q)
            detail::add_block(codes, t, vi[q]);
        cells.push_back(detail::finish_cell(std::move(codes), t, n));
    }
    return cells;
}

inline BoundCertificate theorem_pars(const PlanarTree& t, int n, int s, CupEngine& engine,
                                     TensorBudget budget = {})
{
    auto cells = pars_witnesses(t, n, s);
    const int claimed = s * (n / 2); // m-k+l = floor(n/2)
    if (cells[0].dim() == 0) {
        BoundCertificate cert;
        cert.theorem = "pars";
        cert.s = s;
        cert.n = n;
        cert.upper = upper_bound(t, n, s);
        cert.verified = true;
        cert.method = "empty product";
        return cert;
    }
    return certify_family("pars", cells, engine, claimed, BracketReading::WithLeading, budget);
}

// ---------------------------------------------------------------------------
// h_s(T)

/// Degree of an essential vertex in F(T): the number of its directions that
/// contain another essential vertex.
inline int pruned_degree(const PlanarTree& t, Vertex x)
{
    std::set<int> dirs;
    for (Vertex v : t.essential_vertices())
        if (v != x)
            dirs.insert(t.direction_toward(x, v));
    return static_cast<int>(dirs.size());
}

struct HsResult {
    int h = 0;
    std::vector<std::vector<Vertex>> sets;
};

/// AtMost follows the definition (|V_i| <= h). Equal asks for |V_i| = h,
/// as the arc construction assumes.
enum class HsSizes { AtMost, Equal };

struct SearchBudget {
    std::int64_t max_nodes = 50'000'000;
    std::int64_t max_families = 256; // witness families tried by theorem_tercero
};

namespace detail {

// Data shared by h_s and the set searches: for each degree-3 vertex that
// needs an imbalance, the degree-3 vertices lying in each of its directions
// as masks over the degree-3 list.
struct ImbalanceData {
    std::vector<Vertex> three;
    std::vector<int> must_cover;                       // indices of F-leaves
    std::vector<std::vector<std::uint64_t>> sides;     // per imbalance vertex, per direction
    std::vector<int> imbalance_vertex;                 // index into three

    static ImbalanceData build(const PlanarTree& t, const std::vector<Vertex>& three,
                               const std::vector<Vertex>& imbalance)
    {
        require(three.size() <= 64, ErrorKind::Budget, "more than 64 degree-3 vertices");
        ImbalanceData d;
        d.three = three;
        for (Vertex y : imbalance) {
            std::vector<std::uint64_t> masks(t.degree(y), 0);
            for (std::size_t q = 0; q < three.size(); ++q)
                if (three[q] != y)
                    masks[t.direction_toward(y, three[q])] |= std::uint64_t{1} << q;
            d.sides.push_back(std::move(masks));
            d.imbalance_vertex.push_back(
                static_cast<int>(std::find(three.begin(), three.end(), y) - three.begin()));
        }
        return d;
    }

    bool imbalanced(const std::vector<std::uint64_t>& sets, std::size_t which) const
    {
        for (auto side : sides[which]) {
            int first = std::popcount(sets[0] & side);
            for (std::size_t i = 1; i < sets.size(); ++i)
                if (std::popcount(sets[i] & side) != first)
                    return true;
        }
        return false;
    }
};

} // namespace detail

namespace detail {

// Calls accept on every family V_1..V_s with sizes bounded by h that covers
// the F-leaves and unbalances every other degree-3 vertex, until accept
// returns true. With canonical set, families differing by a relabelling of
// the sets are visited once.
template <class Accept>
bool search_hs_sets(const PlanarTree& t, int s, int h, HsSizes sizes_rule, bool canonical, SearchBudget budget,
                    std::int64_t& nodes, Accept&& accept)
{
    auto e = split_essential(t);
    std::vector<Vertex> imbalance;
    std::uint64_t cover = 0;
    for (std::size_t q = 0; q < e.three.size(); ++q) {
        int fd = pruned_degree(t, e.three[q]);
        if (fd == 1)
            cover |= std::uint64_t{1} << q;
        else if (fd > 1)
            imbalance.push_back(e.three[q]);
    }
    auto data = ImbalanceData::build(t, e.three, imbalance);
    const int kk = e.k();
    std::vector<std::uint64_t> sets(s, 0);
    std::vector<int> sizes(s, 0);
    // masks per vertex; with canonical, columns stay in non-increasing order
    auto dfs = [&](auto&& self, int q, std::uint64_t tied) -> bool {
        require(++nodes <= budget.max_nodes, ErrorKind::Budget, "h_s search exceeds its node budget");
        if (q == kk) {
            if (sizes_rule == HsSizes::Equal && std::count(sizes.begin(), sizes.end(), h) != s)
                return false;
            for (std::size_t w = 0; w < data.sides.size(); ++w)
                if (!data.imbalanced(sets, w))
                    return false;
            HsResult r{h, {}};
            for (int i = 0; i < s; ++i) {
                r.sets.emplace_back();
                for (int b = 0; b < kk; ++b)
                    if (sets[i] >> b & 1)
                        r.sets.back().push_back(e.three[b]);
            }
            return accept(r);
        }
        bool must = cover >> q & 1;
        for (std::uint32_t mask = (1u << s) - 1;; --mask) {
            if (!(must && mask == 0)) {
                bool ok = true;
                std::uint64_t next_tied = tied;
                for (int i = 0; i + 1 < s && canonical; ++i) {
                    if (!(tied >> i & 1))
                        continue;
                    int a = mask >> i & 1, b = mask >> (i + 1) & 1;
                    if (a < b)
                        ok = false;
                    else if (a > b)
                        next_tied &= ~(std::uint64_t{1} << i);
                }
                for (int i = 0; i < s && ok; ++i)
                    ok = sizes[i] + static_cast<int>(mask >> i & 1) <= h;
                if (ok) {
                    for (int i = 0; i < s; ++i)
                        if (mask >> i & 1) {
                            sets[i] |= std::uint64_t{1} << q;
                            ++sizes[i];
                        }
                    bool done = self(self, q + 1, next_tied);
                    for (int i = 0; i < s; ++i)
                        if (mask >> i & 1) {
                            sets[i] &= ~(std::uint64_t{1} << q);
                            --sizes[i];
                        }
                    if (done)
                        return true;
                }
            }
            if (mask == 0)
                break;
        }
        return false;
    };
    return dfs(dfs, 0, (std::uint64_t{1} << (s - 1)) - 1);
}

} // namespace detail

/// Smallest h admitting sets V_1..V_s of degree-3 vertices with |V_i| <= h,
/// covering every degree-3 vertex that is a leaf of F(T), and unbalanced on
/// some side of every other degree-3 vertex that is essential in F(T).
/// Empty when no assignment exists.
inline std::optional<HsResult> compute_hs(const PlanarTree& t, int s, SearchBudget budget = {},
                                          HsSizes sizes_rule = HsSizes::AtMost)
{
    require(s >= 2, ErrorKind::Invalid, "s must be at least 2");
    require(!t.essential_vertices().empty(), ErrorKind::Hypothesis, "h_s needs an essential vertex");
    const int kk = split_essential(t).k();
    std::int64_t nodes = 0;
    for (int h = 0; h <= kk; ++h) {
        std::optional<HsResult> found;
        if (detail::search_hs_sets(t, s, h, sizes_rule, true, budget, nodes, [&](const HsResult& r) {
                found = r;
                return true;
            }))
            return found;
    }
    return std::nullopt;
}

/// Every family of sets realising h_s = h, in search order, until visit
/// returns true. Relabellings of the sets count as different families.
template <class Visit>
bool for_each_hs_sets(const PlanarTree& t, int s, int h, Visit&& visit, SearchBudget budget = {},
                      HsSizes sizes_rule = HsSizes::AtMost)
{
    std::int64_t nodes = 0;
    return detail::search_hs_sets(t, s, h, sizes_rule, false, budget, nodes, std::forward<Visit>(visit));
}

// ---------------------------------------------------------------------------
// Bounds from sets of degree-3 vertices

/// Cells with n >= 2m + h_s(T): every degree-3 vertex carries its block and
/// the vertices y+2 for y in V_i are added to cell i.
inline std::vector<CriticalCell> tercero_witnesses(const PlanarTree& t, int n, const HsResult& hs)
{
    auto e = split_essential(t);
    const int s = static_cast<int>(hs.sets.size());
    require(n >= 2 * e.m() + hs.h, ErrorKind::Hypothesis,
            "n = " + std::to_string(n) + " is below 2m + h_s = " + std::to_string(2 * e.m() + hs.h));
    std::vector<CriticalCell> cells;
    for (int i = 1; i <= s; ++i) {
        std::vector<int> codes;
        for (Vertex x : e.big)
            detail::add_big_pattern(codes, t, x, i % 2 == 0);
        for (Vertex y : e.three)
            detail::add_block(codes, t, y);
        for (Vertex y : hs.sets[i - 1])
            codes.push_back(vertex_code(y + 2));
        cells.push_back(detail::finish_cell(std::move(codes), t, n));
    }
    return cells;
}

/// The witness family depends on the choice of sets realising h_s, and the
/// first choice need not certify. Families are tried in search order, up to
/// search.max_families, and the first certified one is returned.
inline BoundCertificate theorem_tercero(const PlanarTree& t, int n, int s, CupEngine& engine,
                                        SearchBudget search = {}, TensorBudget budget = {},
                                        HsSizes sizes = HsSizes::AtMost)
{
    auto hs = compute_hs(t, s, search, sizes);
    require(hs.has_value(), ErrorKind::Hypothesis, "h_s is undefined: no valid assignment of degree-3 vertices");
    const int claimed = s * split_essential(t).m();
    std::optional<BoundCertificate> first;
    std::int64_t tried = 0;
    bool certified = for_each_hs_sets(
        t, s, hs->h,
        [&](const HsResult& family) {
            auto cert = certify_family("tercero", tercero_witnesses(t, n, family), engine, claimed,
                                       BracketReading::WithLeading, budget);
            ++tried;
            if (cert.verified || !first)
                first = cert;
            return cert.verified || tried >= search.max_families;
        },
        search, sizes);
    if (!certified || !first->verified)
        first->note = "no witness family certified; tried " + std::to_string(tried) + " choices of h_s sets";
    return *first;
}

struct MayorjSets {
    std::vector<Vertex> V;
    std::vector<std::vector<Vertex>> U;
};

/// floor(k/s) and l for n = 2(m - floor(k/s) + l) + eps.
inline int mayorj_l(const PlanarTree& t, int n, int s)
{
    auto e = split_essential(t);
    return n / 2 - (e.m() - e.k() / s);
}

/// Empty when the sets meet the hypotheses; otherwise the reason, naming
/// the violated condition.
inline std::string mayorj_problem(const PlanarTree& t, int n, int s, const MayorjSets& sets)
{
    auto e = split_essential(t);
    const int k = e.k();
    const int l = mayorj_l(t, n, s);
    const int ceil_ks = (k + s - 1) / s;
    if (l < 0 || l >= ceil_ks)
        return "n = " + std::to_string(n) + " is not 2(m - floor(k/s) + l) + eps with 0 <= l < ceil(k/s)";
    if (static_cast<int>(sets.V.size()) != l)
        return "V must have exactly l = " + std::to_string(l) + " vertices";
    std::set<Vertex> three(e.three.begin(), e.three.end());
    std::set<Vertex> vset(sets.V.begin(), sets.V.end());
    if (vset.size() != sets.V.size())
        return "V has repeated vertices";
    for (Vertex v : sets.V)
        if (!three.count(v))
            return "V contains a vertex that does not have degree 3";
    if (static_cast<int>(sets.U.size()) != s)
        return "bullet 1: need exactly s sets U_i";
    const int size = (s - 1) * k / s;
    std::map<Vertex, int> hits;
    for (const auto& u : sets.U) {
        std::set<Vertex> us(u.begin(), u.end());
        if (us.size() != u.size())
            return "bullet 1: a set U_i has repeated vertices";
        if (static_cast<int>(u.size()) != size)
            return "bullet 1: each U_i must have floor((s-1)k/s) = " + std::to_string(size) + " vertices";
        for (Vertex y : u) {
            if (!three.count(y) || vset.count(y))
                return "bullet 1: U_i may only hold degree-3 vertices outside V";
            ++hits[y];
        }
    }
    for (Vertex y : e.three)
        if (!vset.count(y) && !hits.count(y))
            return "bullet 1: the sets U_i must cover the degree-3 vertices outside V";
    for (auto [y, c] : hits)
        if (c == s)
            return "bullet 1: the intersection of all U_i must be empty";
    for (Vertex y : sets.V) {
        bool found = false;
        for (int j = 0; j < t.degree(y) && !found; ++j) {
            std::optional<int> first;
            for (const auto& u : sets.U) {
                int c = 0;
                for (Vertex w : u)
                    c += t.direction_toward(y, w) == j;
                if (first && *first != c)
                    found = true;
                first = c;
            }
        }
        if (!found)
            return "bullet 2: the sets U_i meet every side of " + t.label(y) + " equally";
    }
    return {};
}

inline std::vector<CriticalCell> mayorj_witnesses(const PlanarTree& t, int n, int s, const MayorjSets& sets)
{
    if (auto why = mayorj_problem(t, n, s, sets); !why.empty())
        fail(ErrorKind::Hypothesis, why);
    auto e = split_essential(t);
    std::vector<CriticalCell> cells;
    for (int i = 1; i <= s; ++i) {
        std::vector<int> codes;
        for (Vertex x : e.big)
            detail::add_big_pattern(codes, t, x, i % 2 == 0);
        for (Vertex v : sets.V)
            detail::add_block(codes, t, v);
        for (Vertex u : sets.U[i - 1])
            detail::add_block(codes, t, u);
        cells.push_back(detail::finish_cell(std::move(codes), t, n));
    }
    return cells;
}

inline BoundCertificate theorem_mayorj(const PlanarTree& t, int n, int s, const MayorjSets& sets, CupEngine& engine,
                                       BracketReading reading = BracketReading::WithLeading, TensorBudget budget = {})
{
    auto cells = mayorj_witnesses(t, n, s, sets);
    auto e = split_essential(t);
    int claimed = s * (e.m() - e.k() / s + mayorj_l(t, n, s));
    return certify_family("mayorj", cells, engine, claimed, reading, budget);
}

/// First sets (V lexicographic, then memberships) meeting the hypotheses.
inline std::optional<MayorjSets> search_mayorj_sets(const PlanarTree& t, int n, int s, SearchBudget budget = {})
{
    auto e = split_essential(t);
    const int k = e.k();
    const int l = mayorj_l(t, n, s);
    if (l < 0 || l >= (k + s - 1) / s)
        return std::nullopt;
    const int size = (s - 1) * k / s;
    std::int64_t nodes = 0;
    std::optional<MayorjSets> found;
    std::vector<int> pick;
    auto with_v = [&](const std::vector<Vertex>& V) -> bool {
        std::vector<Vertex> rest;
        for (Vertex y : e.three)
            if (std::find(V.begin(), V.end(), y) == V.end())
                rest.push_back(y);
        MayorjSets cand{V, std::vector<std::vector<Vertex>>(s)};
        auto dfs = [&](auto&& self, std::size_t q) -> bool {
            require(++nodes <= budget.max_nodes, ErrorKind::Budget, "set search exceeds its node budget");
            const int left = static_cast<int>(rest.size() - q);
            for (const auto& u : cand.U)
                if (static_cast<int>(u.size()) > size || static_cast<int>(u.size()) + left < size)
                    return false;
            if (q == rest.size()) {
                if (!mayorj_problem(t, n, s, cand).empty())
                    return false;
                found = cand;
                return true;
            }
            // nonempty and not all sets
            for (std::uint32_t mask = 1; mask + 1 < (1u << s); ++mask) {
                for (int i = 0; i < s; ++i)
                    if (mask >> i & 1)
                        cand.U[i].push_back(rest[q]);
                bool done = self(self, q + 1);
                for (int i = 0; i < s; ++i)
                    if (mask >> i & 1)
                        cand.U[i].pop_back();
                if (done)
                    return true;
            }
            return false;
        };
        return dfs(dfs, 0);
    };
    auto choose = [&](auto&& self, std::size_t from, std::vector<Vertex>& V) -> bool {
        if (static_cast<int>(V.size()) == l)
            return with_v(V);
        for (std::size_t q = from; q < e.three.size(); ++q) {
            V.push_back(e.three[q]);
            if (self(self, q + 1, V))
                return true;
            V.pop_back();
        }
        return false;
    };
    std::vector<Vertex> V;
    choose(choose, 0, V);
    return found;
}

// ---------------------------------------------------------------------------
// The graph G_b

struct GbReport {
    std::vector<std::pair<int, int>> nodes;        // (i, j), 0-based
    std::vector<bool> isolated;
    std::vector<std::pair<int, int>> edges;        // indices into nodes, from larger tau to smaller
    bool acyclic = true;
    std::optional<int> stuck;                      // a non-isolated node with no in- or no out-edge
    bool trivial() const { return std::all_of(isolated.begin(), isolated.end(), [](bool b) { return b; }); }
};

/// Builds G_b for factors a[i][j] (1-cells) where factor (i, j) lands in
/// slot dest[i][j]. If a_i appeared in b_i for every i, every non-isolated
/// node would need an in- and an out-edge, forcing a cycle; the report gives
/// a node where that fails. Edges always decrease tau, so no cycle exists.
inline GbReport gb_acyclic_check(const std::vector<std::vector<CriticalCell>>& a,
                                 const std::vector<std::vector<int>>& dest, const PlanarTree& t)
{
    require(a.size() == dest.size(), ErrorKind::Invalid, "assignment shape differs from the factors");
    GbReport r;
    std::vector<Vertex> iota, tau;
    for (std::size_t i = 0; i < a.size(); ++i) {
        require(a[i].size() == dest[i].size(), ErrorKind::Invalid, "assignment shape differs from the factors");
        for (std::size_t j = 0; j < a[i].size(); ++j) {
            const auto& c = a[i][j];
            require(c.dim() == 1, ErrorKind::Invalid, "G_b needs 1-cells");
            int slot = dest[i][j];
            require(slot >= 0 && slot < static_cast<int>(a.size()), ErrorKind::Invalid, "slot out of range");
            r.nodes.emplace_back(static_cast<int>(i), static_cast<int>(j));
            r.isolated.push_back(slot == static_cast<int>(i));
            Vertex x = c.blocks[0].x;
            iota.push_back(x);
            tau.push_back(t.neighbor(x, static_cast<int>(c.blocks[0].p.size()) + 1));
        }
    }
    const int count = static_cast<int>(r.nodes.size());
    std::vector<int> in(count, 0), out(count, 0);
    for (int u = 0; u < count; ++u)
        for (int v = 0; v < count; ++v)
            if (!r.isolated[u] && !r.isolated[v] && iota[u] == iota[v] && tau[u] > tau[v]) {
                r.edges.emplace_back(u, v);
                ++out[u];
                ++in[v];
            }
    // Kahn's algorithm
    std::vector<int> deg(in);
    std::vector<int> queue;
    for (int u = 0; u < count; ++u)
        if (!deg[u])
            queue.push_back(u);
    std::size_t seen = 0;
    while (seen < queue.size()) {
        int u = queue[seen++];
        for (auto [from, to] : r.edges)
            if (from == u && --deg[to] == 0)
                queue.push_back(to);
    }
    r.acyclic = static_cast<int>(queue.size()) == count;
    for (int u = 0; u < count && !r.stuck; ++u)
        if (!r.isolated[u] && (!in[u] || !out[u]))
            r.stuck = u;
    return r;
}

// ---------------------------------------------------------------------------
// T against O(T)

struct CamReport {
    std::string product_t;
    std::string product_o;
    Verdict verdict_t = Verdict::None;
    Verdict verdict_o = Verdict::None;
    bool ok = false;
};

/// Multiplies 1-cells at degree-3 vertices of T (given as symbols, listed by
/// increasing vertex) and the same symbols on O(T), where x^1 keeps the label
/// of x. Both trees are subdivided for n first; T must have no degree-2
/// vertices.
inline CamReport lemma_cam_check(const PlanarTree& tree, const std::vector<std::string>& symbols, int n)
{
    PlanarTree t = subdivide_for_n(tree, n);
    PlanarTree o = subdivide_for_n(binarize(tree), n);
    std::vector<CriticalCell> a, b;
    for (const auto& sym : symbols) {
        a.push_back(parse_critical(sym, t));
        b.push_back(parse_critical(sym, o));
        require(t.degree(a.back().blocks.at(0).x) == 3, ErrorKind::Invalid, sym + " is not at a degree-3 vertex");
        require_valid(a.back(), t, n);
        require_valid(b.back(), o, n);
    }
    CamReport r;
    r.verdict_t = interaction_parameters(a, t, n).verdict;
    r.verdict_o = interaction_parameters(b, o, n).verdict;
    std::vector<CohomologyClass> ca, cb;
    for (const auto& c : a)
        ca.push_back(basis_class(c));
    for (const auto& c : b)
        cb.push_back(basis_class(c));
    CupEngine et(t, n), eo(o, n);
    auto pa = et.cup(ca);
    auto pb = eo.cup(cb);
    r.product_t = to_string(pa, t);
    r.product_o = to_string(pb, o);
    r.ok = pa.empty() == pb.empty() && (r.verdict_t == Verdict::Strong) == (r.verdict_o == Verdict::Strong) &&
           (r.verdict_t != Verdict::Strong || r.product_t == r.product_o);
    return r;
}

} // namespace treebraid
