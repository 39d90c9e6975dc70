#pragma once

// The cup product on the Morse cohomology of UD^nT in the basis dual to
// critical cells: interaction parameters, strong and weak products, the
// folded product of arbitrary classes, the bracket classes <k|x,p,q> and the
// simplicial complex K_nT of a binary tree.

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "flow.hpp"
#include "morse.hpp"
#include "tree.hpp"

namespace treebraid {

/// Integer combination of duals of critical cells of one degree.
using CohomologyClass = std::map<CriticalCell, long long>;

inline void add_term(CohomologyClass& c, const CriticalCell& cell, long long k)
{
    if (k == 0)
        return;
    auto [it, fresh] = c.emplace(cell, k);
    if (!fresh && (it->second += k) == 0)
        c.erase(it);
}

inline void add_class(CohomologyClass& into, const CohomologyClass& c, long long k = 1)
{
    for (const auto& [cell, m] : c)
        add_term(into, cell, k * m);
}

inline CohomologyClass basis_class(const CriticalCell& c) { return {{c, 1}}; }

/// The unit: dual of the critical 0-cell.
inline CohomologyClass unit_class(int n) { return basis_class(CriticalCell{n, {}}); }

/// Signed sum in canonical order (lexicographic on the symbol text).
inline std::string to_string(const CohomologyClass& c, const PlanarTree& t)
{
    if (c.empty())
        return "0";
    std::vector<std::pair<std::string, long long>> terms;
    for (const auto& [cell, k] : c)
        terms.emplace_back(to_string(cell, t), k);
    std::sort(terms.begin(), terms.end());
    std::ostringstream os;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        long long k = terms[i].second;
        if (i == 0)
            os << (k < 0 ? "-" : "");
        else
            os << (k < 0 ? " - " : " + ");
        if (k != 1 && k != -1)
            os << (k < 0 ? -k : k) << '*';
        os << terms[i].first;
    }
    return os.str();
}

/// Parses a signed sum of symbols, e.g. "-{1|x,(1),(0)} + 2*{0|x,(2),(0)}".
inline CohomologyClass parse_class(const std::string& text, const PlanarTree& t)
{
    CohomologyClass out;
    std::size_t i = 0;
    auto skip = [&] {
        while (i < text.size() && text[i] == ' ')
            ++i;
    };
    skip();
    if (text.substr(i) == "0")
        return out;
    while (i < text.size()) {
        long long sign = 1;
        skip();
        if (i < text.size() && (text[i] == '+' || text[i] == '-'))
            sign = text[i++] == '-' ? -1 : 1;
        skip();
        long long k = 1;
        std::size_t start = i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
            ++i;
        if (i > start) {
            k = std::stoll(text.substr(start, i - start));
            skip();
            if (i >= text.size() || text[i] != '*')
                fail(ErrorKind::Parse, "expected '*' after a coefficient in '" + text + "'");
            ++i;
            skip();
        }
        auto close = text.find('}', i);
        if (i >= text.size() || text[i] != '{' || close == std::string::npos)
            fail(ErrorKind::Parse, "expected a critical-cell symbol in '" + text + "'");
        add_term(out, parse_critical(text.substr(i, close - i + 1), t), sign * k);
        i = close + 1;
        skip();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Interaction parameters

enum class Verdict { Strong, Weak, None };

inline const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::Strong:
        return "strong";
    case Verdict::Weak:
        return "weak";
    default:
        return "none";
    }
}

struct InteractionParameters {
    int R0 = 0;
    std::vector<std::vector<int>> P;
    std::vector<std::vector<int>> Q;
    Verdict verdict = Verdict::None;
};

inline void require_one_cells(const std::vector<CriticalCell>& factors)
{
    for (std::size_t i = 0; i < factors.size(); ++i) {
        require(factors[i].dim() == 1, ErrorKind::Invalid, "interaction parameters need critical 1-cells");
        if (i && factors[i - 1].blocks[0].x == factors[i].blocks[0].x)
            fail(ErrorKind::Unsupported, "factors share an essential vertex");
        require(i == 0 || factors[i - 1].blocks[0].x < factors[i].blocks[0].x, ErrorKind::Invalid,
                "factors must be listed by increasing vertex");
    }
}

inline InteractionParameters interaction_parameters(const std::vector<CriticalCell>& factors, const PlanarTree& t,
                                                    int n)
{
    require(!factors.empty(), ErrorKind::Invalid, "no factors");
    require_one_cells(factors);
    std::vector<Vertex> xs;
    std::map<Vertex, int> k_of;
    for (const auto& f : factors) {
        xs.push_back(f.blocks[0].x);
        k_of[f.blocks[0].x] = f.k;
    }
    ComponentDecomposition cd(t, xs);
    auto correction = [&](const Component& comp) {
        int sum = 0;
        for (Vertex v : comp.pruned)
            sum += k_of.at(v) - n;
        return sum;
    };
    InteractionParameters ip;
    ip.R0 = n + correction(cd.at(0, 1));
    bool weak = ip.R0 >= 0, strong = weak;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        const auto& b = factors[i].blocks[0];
        int r = static_cast<int>(b.p.size());
        std::vector<int> P(b.p), Q(b.q);
        for (int l = 1; l <= r; ++l)
            P[l - 1] += correction(cd.at(static_cast<int>(i) + 1, l));
        for (int l = 1; l <= static_cast<int>(Q.size()); ++l)
            Q[l - 1] += correction(cd.at(static_cast<int>(i) + 1, l + r));
        auto neg = [](int v) { return v < 0; };
        if (std::any_of(P.begin(), P.end(), neg) || std::any_of(Q.begin(), Q.end(), neg))
            weak = strong = false;
        if (std::none_of(P.begin(), P.end(), [](int v) { return v > 0; }))
            strong = false;
        ip.P.push_back(std::move(P));
        ip.Q.push_back(std::move(Q));
    }
    ip.verdict = strong ? Verdict::Strong : weak ? Verdict::Weak : Verdict::None;
    return ip;
}

inline CriticalCell strong_product(const std::vector<CriticalCell>& factors, const PlanarTree& t, int n)
{
    auto ip = interaction_parameters(factors, t, n);
    require(ip.verdict == Verdict::Strong, ErrorKind::Hypothesis,
            std::string("factors interact ") + (ip.verdict == Verdict::Weak ? "weakly" : "not at all") +
                ", not strongly");
    CriticalCell out;
    out.k = ip.R0;
    for (std::size_t i = 0; i < factors.size(); ++i)
        out.blocks.push_back({factors[i].blocks[0].x, ip.P[i], ip.Q[i]});
    return out;
}

namespace detail {

/// Every r-tuple of non-negative integers with sum in [lo, hi], in
/// lexicographic order of (sum, tuple).
template <class F>
void tuples_with_sum(int r, int lo, int hi, F&& f)
{
    for (int total = std::max(lo, 0); total <= hi; ++total)
        compositions(total, r, f);
}

} // namespace detail

/// {k_x|x,p_x,q_x} cup Pi1 when the factors of the whole product interact,
/// but not strongly. The result is three signed sums: one keeping the edge
/// of the extra factor, and two moving it to x-direction r+l+1.
inline CohomologyClass weak_product(const CriticalCell& extra, const std::vector<CriticalCell>& pi1,
                                    const PlanarTree& t, int n)
{
    std::vector<CriticalCell> all{extra};
    all.insert(all.end(), pi1.begin(), pi1.end());
    auto ip = interaction_parameters(all, t, n);
    require(ip.verdict == Verdict::Weak, ErrorKind::Hypothesis,
            std::string("weak_product needs a weak, non-strong interaction; verdict is ") + to_string(ip.verdict));
    if (!pi1.empty())
        require(interaction_parameters(pi1, t, n).verdict == Verdict::Strong, ErrorKind::Hypothesis,
                "the remaining factors must interact strongly");

    const Vertex x = extra.blocks[0].x;
    const int r = static_cast<int>(extra.blocks[0].p.size());
    const int s = static_cast<int>(extra.blocks[0].q.size());
    const int R0 = ip.R0;
    const std::vector<int>& Qx = ip.Q[0];
    std::vector<Block> rest;
    for (std::size_t i = 1; i < all.size(); ++i)
        rest.push_back({all[i].blocks[0].x, ip.P[i], ip.Q[i]});

    CohomologyClass out;
    auto emit = [&](int k, std::vector<int> p, std::vector<int> q, long long sign) {
        CriticalCell c;
        c.k = k;
        c.blocks.push_back({x, std::move(p), std::move(q)});
        c.blocks.insert(c.blocks.end(), rest.begin(), rest.end());
        add_term(out, c, sign);
    };
    // Q_x^(l,a,b) = (a_1..a_r, Q_x1 + b + 1, Q_x2..Q_xl)
    auto moved = [&](const std::vector<int>& a, int b, int l) {
        std::vector<int> p(a);
        p.push_back(Qx[0] + b + 1);
        for (int j = 2; j <= l; ++j)
            p.push_back(Qx[j - 1]);
        return p;
    };
    // edge kept; |a| particles leave the root side for directions 1..r
    detail::tuples_with_sum(r, 1, R0, [&](const std::vector<int>& a) {
        int sa = std::accumulate(a.begin(), a.end(), 0);
        emit(R0 - sa, a, Qx, -1);
    });
    for (int l = 1; l <= s - 1; ++l) {
        std::vector<int> plus(Qx.begin() + l, Qx.end());
        // edge moved, Q_x tail unchanged: |a| + b < R0
        detail::tuples_with_sum(r, 0, R0 - 1, [&](const std::vector<int>& a) {
            int sa = std::accumulate(a.begin(), a.end(), 0);
            for (int b = 0; sa + b < R0; ++b)
                emit(R0 - sa - b - 1, moved(a, b, l), plus, +1);
        });
        // edge moved, one particle fewer beyond it: empty when Q_{x,l+1} = 0, else |a| + b <= R0
        if (Qx[l] == 0)
            continue;
        std::vector<int> minus(plus);
        minus[0] -= 1;
        detail::tuples_with_sum(r, 0, R0, [&](const std::vector<int>& a) {
            int sa = std::accumulate(a.begin(), a.end(), 0);
            for (int b = 0; sa + b <= R0; ++b)
                emit(R0 - sa - b, moved(a, b, l), minus, -1);
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Products of classes

/// Policy for monomials whose factors share an essential vertex. Such
/// products lie outside the interaction formulas.
enum class SameVertex {
    Reject, // raise an Unsupported error
    Zero,   // treat as zero (checked against the cubical oracle on small trees)
};

struct CupOptions {
    SameVertex same_vertex = SameVertex::Reject;
    /// Receives a line for every product found to vanish by non-interaction.
    std::function<void(const std::string&)> log;
};

class CupEngine {
public:
    CupEngine(const PlanarTree& t, int n, CupOptions options = {}) : t_(t), n_(n), options_(std::move(options)) {}

    const PlanarTree& tree() const { return t_; }
    int particles() const { return n_; }

    /// f cup c for a 1-cell f whose vertex is below every block of c.
    const CohomologyClass& lower_times(const CriticalCell& f, const CriticalCell& c)
    {
        auto key = std::make_pair(f, c);
        if (auto it = memo_.find(key); it != memo_.end())
            return it->second;
        CohomologyClass out;
        if (c.dim() == 0) {
            out[f] = 1;
        } else {
            std::vector<CriticalCell> factors{f};
            auto rest = factorize(c, t_, n_);
            factors.insert(factors.end(), rest.begin(), rest.end());
            auto ip = interaction_parameters(factors, t_, n_);
            if (ip.verdict == Verdict::Strong) {
                out[strong_product(factors, t_, n_)] = 1;
            } else if (ip.verdict == Verdict::Weak) {
                out = weak_product(f, rest, t_, n_);
            } else if (options_.log) {
                options_.log("no interaction: " + to_string(f, t_) + " cup " + to_string(c, t_) + " = 0");
            }
        }
        return memo_.emplace(key, std::move(out)).first->second;
    }

    /// Product of 1-cells in the given order.
    CohomologyClass product_of_one_cells(std::vector<CriticalCell> fs)
    {
        if (fs.empty())
            return unit_class(n_);
        // sort by vertex; each transposition of odd factors flips the sign
        long long sign = 1;
        for (std::size_t i = 0; i < fs.size(); ++i)
            for (std::size_t j = 0; j + 1 < fs.size() - i; ++j)
                if (fs[j + 1].blocks[0].x < fs[j].blocks[0].x) {
                    std::swap(fs[j], fs[j + 1]);
                    sign = -sign;
                }
        for (std::size_t i = 1; i < fs.size(); ++i)
            if (fs[i].blocks[0].x == fs[i - 1].blocks[0].x) {
                if (options_.same_vertex == SameVertex::Zero)
                    return {};
                fail(ErrorKind::Unsupported, "product of " + to_string(fs[i - 1], t_) + " and " +
                                                 to_string(fs[i], t_) +
                                                 " shares an essential vertex; outside the product formulas");
            }
        CohomologyClass acc = basis_class(fs.back());
        for (std::size_t i = fs.size() - 1; i-- > 0;) {
            CohomologyClass next;
            for (const auto& [c, k] : acc)
                add_class(next, lower_times(fs[i], c), k);
            acc = std::move(next);
            if (acc.empty())
                break;
        }
        for (auto& [c, k] : acc)
            k *= sign;
        return acc;
    }

    CohomologyClass cup(const CriticalCell& a, const CriticalCell& b)
    {
        std::vector<CriticalCell> fs;
        if (a.dim() > 0)
            fs = factorize(a, t_, n_);
        if (b.dim() > 0) {
            auto fb = factorize(b, t_, n_);
            fs.insert(fs.end(), fb.begin(), fb.end());
        }
        if (a.dim() == 0 && b.dim() == 0)
            return unit_class(n_);
        return product_of_one_cells(std::move(fs));
    }

    CohomologyClass cup(const CohomologyClass& a, const CohomologyClass& b)
    {
        CohomologyClass out;
        for (const auto& [ca, ka] : a)
            for (const auto& [cb, kb] : b)
                add_class(out, cup(ca, cb), ka * kb);
        return out;
    }

    CohomologyClass cup(const std::vector<CohomologyClass>& classes)
    {
        CohomologyClass acc = unit_class(n_);
        for (const auto& c : classes)
            acc = cup(acc, c);
        return acc;
    }

private:
    const PlanarTree& t_;
    int n_;
    CupOptions options_;
    std::map<std::pair<CriticalCell, CriticalCell>, CohomologyClass> memo_;
};

inline CohomologyClass cup(const std::vector<CohomologyClass>& classes, const PlanarTree& t, int n,
                           CupOptions options = {})
{
    CupEngine engine(t, n, std::move(options));
    return engine.cup(classes);
}

// ---------------------------------------------------------------------------
// Bracket classes and K_nT (binary trees)

/// Which index range the bracket sum uses.
enum class BracketReading {
    Verbatim,    // i = 1..k, as printed
    WithLeading, // i = 0..k, including {k|x,p,q} itself
};

inline CohomologyClass bracket_class(int k, Vertex x, int p, int q, const PlanarTree& t, int n,
                                     BracketReading reading = BracketReading::WithLeading)
{
    require(t.degree(x) == 3, ErrorKind::Invalid, "bracket classes live at degree-3 vertices");
    require(k >= 0 && p >= 0 && q >= 0, ErrorKind::Invalid, "bracket entries must be non-negative");
    CohomologyClass out;
    for (int i = reading == BracketReading::Verbatim ? 1 : 0; i <= k; ++i) {
        CriticalCell c{k - i, {{x, {p + i}, {q}}}};
        require_valid(c, t, n);
        add_term(out, c, 1);
    }
    return out;
}

struct BracketSymbol {
    int k = 0;
    Vertex x = 0;
    int p = 0;
    int q = 0;

    CriticalCell cell() const { return {k, {{x, {p}, {q}}}}; }
    friend bool operator==(const BracketSymbol&, const BracketSymbol&) = default;
    friend auto operator<=>(const BracketSymbol&, const BracketSymbol&) = default;
};

inline std::string to_string(const BracketSymbol& b, const PlanarTree& t)
{
    return "<" + std::to_string(b.k) + "|" + t.label(b.x) + ",(" + std::to_string(b.p) + "," +
           std::to_string(b.q) + ")>";
}

struct FaceComplex {
    std::vector<BracketSymbol> vertices;
    std::vector<std::vector<int>> faces; // nonempty faces, each a sorted vertex index list

    std::vector<int> isolated() const
    {
        std::vector<int> deg(vertices.size(), 0);
        for (const auto& f : faces)
            if (f.size() > 1)
                for (int v : f)
                    ++deg[v];
        std::vector<int> out;
        for (std::size_t v = 0; v < vertices.size(); ++v)
            if (!deg[v])
                out.push_back(static_cast<int>(v));
        return out;
    }

    std::vector<std::vector<int>> faces_of_size(std::size_t k) const
    {
        std::vector<std::vector<int>> out;
        for (const auto& f : faces)
            if (f.size() == k)
                out.push_back(f);
        return out;
    }

    bool is_face(std::vector<int> s) const
    {
        std::sort(s.begin(), s.end());
        return s.empty() || std::binary_search(faces.begin(), faces.end(), s);
    }
};

inline bool is_binary(const PlanarTree& t)
{
    for (Vertex v = 0; v < t.size(); ++v)
        if (t.degree(v) > 3)
            return false;
    return true;
}

/// Vertices: every <k|x,p,q> whose summands are valid critical 1-cells and
/// whose sum is nonzero. Faces: sets at distinct vertices whose cells
/// {k|x,p,q} interact strongly.
inline FaceComplex build_KnT(const PlanarTree& t, int n, BracketReading reading = BracketReading::WithLeading)
{
    require(is_binary(t), ErrorKind::Invalid, "K_nT needs a binary tree");
    require(n >= 4, ErrorKind::Invalid, "K_nT needs n >= 4");
    require_subdivided(t, n);
    FaceComplex K;
    for (Vertex x : t.essential_vertices())
        for (int k = 0; k <= n - 1; ++k)
            for (int p = 0; k + p <= n - 1; ++p) {
                int q = n - 1 - k - p;
                bool ok = reading == BracketReading::Verbatim ? k >= 1 : p >= 1;
                if (ok)
                    K.vertices.push_back({k, x, p, q});
            }
    std::sort(K.vertices.begin(), K.vertices.end());
    // every choice of at most one vertex per essential vertex is tested, so
    // downward closure is a checkable property rather than an assumption
    std::vector<int> current;
    auto rec = [&](auto&& self, std::size_t from) -> void {
        for (std::size_t v = from; v < K.vertices.size(); ++v) {
            if (!current.empty() && K.vertices[v].x <= K.vertices[current.back()].x)
                continue;
            current.push_back(static_cast<int>(v));
            bool face = current.size() == 1;
            if (!face) {
                std::vector<CriticalCell> cells;
                for (int i : current)
                    cells.push_back(K.vertices[i].cell());
                face = interaction_parameters(cells, t, n).verdict == Verdict::Strong;
            }
            if (face)
                K.faces.push_back(current);
            self(self, v + 1);
            current.pop_back();
        }
    };
    rec(rec, 0);
    std::sort(K.faces.begin(), K.faces.end());
    return K;
}

/// The class of vertex v of K_nT under the chosen reading.
inline CohomologyClass vertex_class(const FaceComplex& K, int v, const PlanarTree& t, int n,
                                    BracketReading reading = BracketReading::WithLeading)
{
    const auto& b = K.vertices[v];
    return bracket_class(b.k, b.x, b.p, b.q, t, n, reading);
}

struct FaceRingCheck {
    int pairs = 0;
    std::vector<std::pair<int, int>> mismatches; // vertex pairs whose product disagrees with the face relation

    bool ok() const { return mismatches.empty(); }
};

/// Degree-1 multiplication table against the exterior face ring of K: the
/// product of two vertex classes is nonzero exactly when they span an edge.
inline FaceRingCheck face_ring_check(const FaceComplex& K, const PlanarTree& t, int n,
                                     BracketReading reading = BracketReading::WithLeading)
{
    CupEngine engine(t, n, {SameVertex::Zero, {}});
    std::vector<CohomologyClass> classes;
    for (std::size_t v = 0; v < K.vertices.size(); ++v)
        classes.push_back(vertex_class(K, static_cast<int>(v), t, n, reading));
    FaceRingCheck r;
    for (int i = 0; i < static_cast<int>(classes.size()); ++i)
        for (int j = i + 1; j < static_cast<int>(classes.size()); ++j) {
            ++r.pairs;
            bool nonzero = !engine.cup(classes[i], classes[j]).empty();
            if (nonzero != K.is_face({i, j}))
                r.mismatches.emplace_back(i, j);
        }
    return r;
}

} // namespace treebraid
