// Acceptance checks: one PASS/FAIL line per criterion, with the numbers
// behind it. Criteria that fail because the stated values disagree with what
// the definitions give are listed in known_failures; the binary exits
// non-zero only when some other criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "corpus.hpp"
#include <treebraid/arcs.hpp>
#include <treebraid/flow.hpp>
#include <treebraid/oracle.hpp>
#include <treebraid/snf.hpp>
#include <treebraid/tc.hpp>

using namespace treebraid;

namespace {

// Exhaustive field audits and SNF runs stay below these sizes.
constexpr std::int64_t audit_cells = 2'000'000;
constexpr std::int64_t betti_cells = 500'000;
constexpr std::int64_t oracle_cells = 500'000;
constexpr int sampled_cells = 20'000;
constexpr int full_coboundary_n = 5;
constexpr int coboundary_sample = 8;

const std::map<int, std::string> known_failures{
    {3, "the weak product of the degree-5 example has seven terms and two signs flipped; the cube complex gives the same class"},
    {5, "with p >= 1 and k+p+q = 3 each degree-3 vertex gives six bracket vertices: 24 in all, 18 isolated"},
    {6, "the witness cells have dimension 6, so the family certifies 18; no family of 7-cells survives"},
    {7, "h_2 = 0 on the one-vertex tree, and |V_i| <= h gives h_2 = 1 < p = 2 on two 6-vertex trees"},
};

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

// Number of cells, or cap + 1 once the count passes cap.
std::int64_t count_capped(const PlanarTree& t, int n, std::int64_t cap)
{
    struct Stop {};
    std::int64_t k = 0;
    try {
        for_each_cell(t, n, -1, [&](const Cell&) {
            if (++k > cap)
                throw Stop{};
        });
    } catch (Stop) {
    }
    return k;
}

// Random cells by greedy placement of shuffled ingredients.
Cell random_cell(const PlanarTree& t, int n, std::mt19937& rng)
{
    std::vector<int> codes(2 * t.size());
    std::iota(codes.begin(), codes.end(), 0);
    for (;;) {
        std::shuffle(codes.begin(), codes.end(), rng);
        std::vector<char> used(t.size(), 0);
        std::vector<int> items;
        for (int code : codes) {
            Vertex v = code_position(code);
            bool edge = is_edge_code(code);
            if ((edge && v == 0) || used[v] || (edge && used[t.parent(v)]))
                continue;
            used[v] = 1;
            if (edge)
                used[t.parent(v)] = 1;
            items.push_back(code);
            if (static_cast<int>(items.size()) == n)
                return Cell(items);
        }
    }
}

// Pairing is mutual and agrees with the ingredient rule on one cell.
bool local_pairing_ok(const Cell& c, const PlanarTree& t)
{
    auto st = fs_status(c, t);
    if ((st.kind == FsKind::Critical) != all_ingredients_critical(c, t))
        return false;
    if (st.kind == FsKind::Critical)
        return true;
    if (!is_valid_cell(st.partner, t))
        return false;
    auto back = fs_status(st.partner, t);
    if (st.kind == FsKind::Redundant)
        return back.kind == FsKind::Collapsible && back.partner == c && st.partner.dim() == c.dim() + 1;
    return back.kind == FsKind::Redundant && back.partner == c && st.partner.dim() == c.dim() - 1;
}

Outcome criterion1()
{
    Outcome out;
    int audited = 0, sampled = 0, critical = 0;
    std::mt19937 rng(1);
    for (const auto& t0 : corpus::morse_corpus())
        for (int n = 2; n <= 6; ++n) {
            auto t = subdivide_for_n(t0, n);
            std::string where = t0.name() + " n=" + std::to_string(n);
            if (count_capped(t, n, audit_cells) <= audit_cells) {
                auto rep = audit_field(t, n, {audit_cells});
                ++audited;
                if (!rep.ok()) {
                    out.pass = false;
                    out.detail += " audit " + where + ": " + rep.first_problem + ";";
                }
            } else {
                ++sampled;
                for (int i = 0; i < sampled_cells; ++i)
                    if (!local_pairing_ok(random_cell(t, n, rng), t)) {
                        out.pass = false;
                        out.detail += " pairing " + where + ";";
                        break;
                    }
            }
            // coboundaries follow every upper gradient path and raise on a closed one;
            // at n = 6 a path search takes up to a second, so only a sample is followed
            MorseFlow flow(t, n, FlowBudget{200'000'000});
            const int top = homological_dimension(t, n);
            auto cells = critical_cells(t, n);
            std::erase_if(cells, [&](const CriticalCell& c) { return c.dim() >= top; });
            if (n > full_coboundary_n && static_cast<int>(cells.size()) > coboundary_sample) {
                std::shuffle(cells.begin(), cells.end(), rng);
                cells.resize(coboundary_sample);
            }
            for (const auto& c : cells) {
                ++critical;
                if (!flow.coboundary(decode(c, t, n)).empty()) {
                    out.pass = false;
                    out.detail += " coboundary " + where + " " + to_string(c, t) + ";";
                    break;
                }
            }
        }
    out.detail = std::to_string(corpus::morse_corpus().size()) + " trees, n=2..6: " + std::to_string(audited) +
                 " complexes audited cell by cell, " + std::to_string(sampled) + " above " +
                 std::to_string(audit_cells) + " cells checked on " + std::to_string(sampled_cells) +
                 " random cells; morse coboundary of " + std::to_string(critical) +
                 " critical cells (all below the top dimension for n <= " + std::to_string(full_coboundary_n) + ", " +
                 std::to_string(coboundary_sample) + " per tree above)" +
                 (out.pass ? " all zero" : "") + out.detail;
    return out;
}

Outcome criterion2()
{
    Outcome out;
    int runs = 0, skipped = 0;
    for (const auto& t0 : corpus::morse_corpus())
        for (int n = 2; n <= 6; ++n) {
            auto t = subdivide_for_n(t0, n);
            if (count_capped(t, n, betti_cells) > betti_cells) {
                ++skipped;
                continue;
            }
            ++runs;
            auto h = homology(t, n, {betti_cells});
            if (!h.torsion_free()) {
                out.pass = false;
                out.detail += " torsion in " + t0.name() + " n=" + std::to_string(n) + ";";
            }
            for (std::size_t d = 0; d < h.betti.size(); ++d)
                if (static_cast<std::int64_t>(critical_cells(t, n, static_cast<int>(d)).size()) != h.betti[d]) {
                    out.pass = false;
                    out.detail += " " + t0.name() + " n=" + std::to_string(n) + " dim " + std::to_string(d) + ";";
                }
        }
    out.detail = std::to_string(runs) + " complexes up to " + std::to_string(betti_cells) + " cells (" +
                 std::to_string(skipped) + " larger ones skipped)" +
                 (out.pass ? ": critical counts equal Betti numbers, no torsion" : ":" + out.detail);
    return out;
}

Outcome criterion3()
{
    Outcome out;
    std::ostringstream d;
    {
        auto t = subdivide_for_n(corpus::load("mixed7"), 10);
        std::vector<CriticalCell> f{parse_critical("{1|x1,(1,7),(0)}", t), parse_critical("{7|x2,(2,0),(0)}", t),
                                    parse_critical("{6|x3,(1),(1,1)}", t)};
        auto ip = interaction_parameters(f, t, 10);
        bool params = ip.R0 == 1 && ip.P == std::vector<std::vector<int>>{{1, 0}, {2, 0}, {1}} &&
                      ip.Q == std::vector<std::vector<int>>{{0}, {0}, {1, 1}};
        auto prod = to_string(cup({basis_class(f[0]), basis_class(f[1]), basis_class(f[2])}, t, 10), t);
        bool product = prod == "{1|x1,(1,0),(0)|x2,(2,0),(0)|x3,(1),(1,1)}";
        d << "parameters " << (params ? "match" : "DIFFER") << "; product " << prod << (product ? " matches" : " DIFFERS");
        out.pass = params && product;
    }
    {
        auto t = subdivide_for_n(corpus::load("deg5_deg3"), 9);
        auto got = cup({basis_class(parse_critical("{1|x,(2,0),(2,3)}", t)),
                        basis_class(parse_critical("{7|y,(1),(0)}", t))},
                       t, 9);
        auto stated = parse_class("{0|x,(0,1),(2,3)|y,(1),(0)} + {0|x,(1,0),(2,3)|y,(1),(0)}"
                                  " + {0|x,(0,0,3),(3)|y,(1),(0)} - {1|x,(0,0,3),(2)|y,(1),(0)}"
                                  " - {0|x,(0,1,3),(2)|y,(1),(0)} - {0|x,(1,0,3),(2)|y,(1),(0)}",
                                  t);
        bool same = got == stated;
        d << "; weak product has " << got.size() << " terms"
          << (same ? ", matching the six stated" : " (stated: 6): " + to_string(got, t));
        out.pass = out.pass && same;
    }
    out.detail = d.str();
    return out;
}

Outcome criterion4()
{
    Outcome out;
    int pairs = 0, disagree = 0, complexes = 0, skipped = 0;
    for (const auto& t0 : corpus::morse_corpus()) {
        if (t0.essential_vertices().size() > 2)
            continue;
        for (int n = 2; n <= 5; ++n) {
            auto t = subdivide_for_n(t0, n);
            if (count_capped(t, n, oracle_cells) > oracle_cells) {
                ++skipped;
                continue;
            }
            ++complexes;
            auto ones = critical_cells(t, n, 1), twos = critical_cells(t, n, 2);
            CupEngine engine(t, n);
            CubicalCupOracle oracle(t, n);
            for (const auto& a : ones)
                for (const auto& b : ones) {
                    if (a.blocks[0].x == b.blocks[0].x)
                        continue;
                    ++pairs;
                    auto want = oracle.product(a, b, twos);
                    if (engine.cup(a, b) != CohomologyClass(want.begin(), want.end())) {
                        if (!disagree)
                            out.detail += " first: " + t0.name() + " " + to_string(a, t) + " * " + to_string(b, t);
                        ++disagree;
                    }
                }
        }
    }
    out.pass = disagree == 0;
    out.detail = std::to_string(pairs) + " products on " + std::to_string(complexes) + " complexes (" +
                 std::to_string(skipped) + " above " + std::to_string(oracle_cells) + " cells skipped), " +
                 std::to_string(disagree) + " disagree with the cube-complex oracle" + out.detail;
    return out;
}

Outcome criterion5()
{
    Outcome out;
    auto t = subdivide_for_n(corpus::load("binary4"), 4);
    auto K = build_KnT(t, 4);
    auto ring = face_ring_check(K, t, 4);
    bool counts = K.vertices.size() == 18 && K.isolated().size() == 12;
    out.pass = counts && ring.ok();
    out.detail = "K_4T has " + std::to_string(K.vertices.size()) + " vertices, " +
                 std::to_string(K.isolated().size()) + " isolated (stated 18, 12); degree-1 products: " +
                 std::to_string(ring.pairs) + " pairs, " + std::to_string(ring.mismatches.size()) +
                 " differ from the face ring";
    return out;
}

Outcome criterion6(std::vector<BoundCertificate>& certs)
{
    Outcome out;
    auto t = subdivide_for_n(corpus::load("deg5_hub"), 14);
    auto sets = search_mayorj_sets(t, 14, 3);
    if (!sets) {
        out.pass = false;
        out.detail = "no sets meet the hypotheses";
        return out;
    }
    CupEngine engine(t, 14, {SameVertex::Zero, {}});
    std::ostringstream d;
    out.pass = false;
    for (auto reading : {BracketReading::Verbatim, BracketReading::WithLeading}) {
        auto cert = theorem_mayorj(t, 14, 3, *sets, engine, reading, {10'000'000});
        certs.push_back(cert);
        d << (reading == BracketReading::Verbatim ? "sum from i=1: " : "; sum from i=0: ")
          << (cert.verified ? "certified " + std::to_string(cert.bound) : std::string("not certified")) << " (claimed "
          << cert.claimed << ", upper " << cert.upper << ")";
        out.pass = out.pass || (cert.verified && cert.bound == 21 && cert.upper == 21);
    }
    out.detail = d.str();
    return out;
}

Outcome criterion7()
{
    Outcome out;
    int compared = 0, undefined = 0, mismatches = 0, equal_mismatches = 0;
    std::string first;
    for (const auto& t0 : corpus::skeleton_corpus(6)) {
        if (split_essential(t0).k() > 10)
            continue;
        auto h = compute_hs(t0, 2);
        if (!h) {
            ++undefined;
            continue;
        }
        ++compared;
        int p = min_allowable_p(arc_search_tree(t0)).p;
        if (p != h->h) {
            ++mismatches;
            first += " " + t0.name() + " (h_2=" + std::to_string(h->h) + ", p=" + std::to_string(p) + ")";
        }
        auto he = compute_hs(t0, 2, {}, HsSizes::Equal);
        if (!he || he->h != p)
            ++equal_mismatches;
    }
    out.pass = mismatches == 0;
    out.detail = std::to_string(compared) + " trees with h_2 defined (" + std::to_string(undefined) +
                 " undefined), " + std::to_string(mismatches) + " with p != h_2" + first +
                 "; with |V_1| = |V_2| = h: " + std::to_string(equal_mismatches) + " mismatches";
    return out;
}

Outcome criterion8(const std::vector<BoundCertificate>& earlier)
{
    Outcome out;
    int certs = 0, certified = 0, over = 0;
    auto record = [&](const BoundCertificate& c, const std::string& where) {
        ++certs;
        certified += c.verified;
        if (c.bound > c.upper) {
            ++over;
            out.detail += " " + where + " " + c.theorem + " " + std::to_string(c.bound) + " > " + std::to_string(c.upper);
        }
    };
    for (const auto& c : earlier)
        record(c, "deg5_hub");
    std::vector<PlanarTree> trees = corpus::morse_corpus();
    for (const char* name : {"mixed7", "binary4", "deg6_centre", "deg5_deg3"})
        trees.push_back(corpus::load(name));
    for (const auto& t0 : trees) {
        const int m = static_cast<int>(t0.essential_vertices().size());
        for (int s : {2, 3})
            for (int n = 2; n <= 2 * m + 2; ++n) {
                auto t = subdivide_for_n(t0, n);
                CupEngine engine(t, n, {SameVertex::Zero, {}});
                std::string where = t0.name() + " n=" + std::to_string(n) + " s=" + std::to_string(s);
                try {
                    record(theorem_pars(t, n, s, engine), where);
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::Hypothesis)
                        throw;
                }
                if (auto sets = search_mayorj_sets(t, n, s))
                    record(theorem_mayorj(t, n, s, *sets, engine), where);
                auto h = compute_hs(t, s);
                if (h && n >= 2 * m + h->h)
                    record(theorem_tercero(t, n, s, engine), where);
            }
    }
    // sharpness with no degree-3 vertices
    int sharp = 0, sharp_runs = 0;
    for (const auto& t0 : corpus::skeleton_corpus(3)) {
        if (split_essential(t0).k() != 0)
            continue;
        const int m = static_cast<int>(t0.essential_vertices().size());
        for (int s : {2, 3, 4}) {
            auto t = subdivide_for_n(t0, 2 * m);
            CupEngine engine(t, 2 * m, {SameVertex::Zero, {}});
            auto c = theorem_pars(t, 2 * m, s, engine);
            record(c, t0.name());
            ++sharp_runs;
            sharp += c.verified && c.bound == s * m && c.upper == s * m;
        }
    }
    out.pass = over == 0 && sharp == sharp_runs;
    out.detail = std::to_string(certs) + " certificates (" + std::to_string(certified) + " verified), " +
                 std::to_string(over) + " above the upper bound; pars with k=0, n=2m certified s*m in " +
                 std::to_string(sharp) + "/" + std::to_string(sharp_runs) + " runs" + out.detail;
    return out;
}

Outcome criterion9()
{
    Outcome out;
    std::mt19937 rng(9);
    // diagonal restriction
    int restrictions = 0, nonzero_restrictions = 0;
    {
        auto t = subdivide_for_n(corpus::load("mixed7"), 6);
        CupEngine engine(t, 6, {SameVertex::Zero, {}});
        auto ones = critical_cells(t, 6, 1);
        std::uniform_int_distribution<std::size_t> any(0, ones.size() - 1);
        for (int trial = 0; trial < 300; ++trial) {
            CohomologyClass c;
            for (int j = 0; j < 3; ++j)
                add_term(c, ones[any(rng)], 1 + trial % 3);
            int s = 2 + trial % 3;
            for (int i = 1; i <= s; ++i) {
                ++restrictions;
                nonzero_restrictions += !diagonal_restriction(zero_divisor(c, i, s, 6), engine).empty();
            }
        }
    }
    // ring axioms on random triples; half are the factors of a 3-cell in random order
    int triples = 0, comm_fail = 0, assoc_fail = 0, nonzero = 0;
    {
        struct Setting {
            PlanarTree t;
            int n;
            std::vector<CriticalCell> ones, threes;
        };
        std::vector<Setting> settings;
        for (auto [name, n] : std::vector<std::pair<const char*, int>>{{"mixed7", 8}, {"binary4", 7}, {"deg5_deg3", 7}}) {
            auto t = subdivide_for_n(corpus::load(name), n);
            settings.push_back({t, n, critical_cells(t, n, 1), critical_cells(t, n, 3)});
        }
        for (int trial = 0; trial < 1000; ++trial) {
            auto& s = settings[trial % settings.size()];
            CupEngine engine(s.t, s.n, {SameVertex::Zero, {}});
            std::uniform_int_distribution<std::size_t> any(0, s.ones.size() - 1);
            std::vector<CriticalCell> f{s.ones[any(rng)], s.ones[any(rng)], s.ones[any(rng)]};
            if (trial % 2 && !s.threes.empty()) {
                f = factorize(s.threes[std::uniform_int_distribution<std::size_t>(0, s.threes.size() - 1)(rng)], s.t,
                              s.n);
                std::shuffle(f.begin(), f.end(), rng);
            }
            ++triples;
            auto a = basis_class(f[0]), b = basis_class(f[1]), c = basis_class(f[2]);
            auto ab = engine.cup(a, b);
            auto ba = engine.cup(b, a);
            for (auto& [cell, k] : ba)
                k = -k;
            comm_fail += ab != ba;
            auto left = engine.cup(ab, c);
            assoc_fail += left != engine.cup(a, engine.cup(b, c));
            nonzero += !left.empty();
        }
    }
    // new edges of weak products
    int weak = 0, summands = 0, edge_fail = 0;
    for (auto [name, n] : std::vector<std::pair<const char*, int>>{{"deg5_deg3", 7}, {"mixed7", 6}, {"deg6_centre", 6}}) {
        auto t = subdivide_for_n(corpus::load(name), n);
        auto ones = critical_cells(t, n, 1);
        for (const auto& extra : ones)
            for (const auto& other : ones) {
                if (other.blocks[0].x <= extra.blocks[0].x ||
                    interaction_parameters({extra, other}, t, n).verdict != Verdict::Weak)
                    continue;
                ++weak;
                Cell ge = decode(extra, t, n), go = decode(other, t, n);
                Vertex d = ge.edges().front();
                std::vector<Vertex> old{d, go.edges().front()};
                for (const auto& [c, k] : weak_product(extra, {other}, t, n)) {
                    ++summands;
                    for (Vertex e : decode(c, t, n).edges())
                        if (std::find(old.begin(), old.end(), e) == old.end() && (t.parent(e) != t.parent(d) || e <= d))
                            ++edge_fail;
                }
            }
    }
    out.pass = nonzero_restrictions == 0 && comm_fail == 0 && assoc_fail == 0 && edge_fail == 0;
    out.detail = std::to_string(restrictions) + " diagonal restrictions (" + std::to_string(nonzero_restrictions) +
                 " nonzero); " + std::to_string(triples) + " triples (" + std::to_string(nonzero) +
                 " with nonzero product), " + std::to_string(comm_fail) + " commutativity and " +
                 std::to_string(assoc_fail) + " associativity failures; " + std::to_string(summands) +
                 " summands of " + std::to_string(weak) + " weak products, " + std::to_string(edge_fail) +
                 " new edges off the extra factor's vertex or below its edge";
    return out;
}

} // namespace

// Arguments, if any, pick the criteria to run.
int main(int argc, char** argv)
{
    std::set<int> only;
    for (int i = 1; i < argc; ++i)
        only.insert(std::atoi(argv[i]));
    int unexpected = 0;
    std::vector<BoundCertificate> tc_certs;
    auto run = [&](int id, auto&& check) {
        if (!only.empty() && !only.count(id))
            return;
        auto start = Clock::now();
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("error: ") + e.what();
        }
        double secs = std::chrono::duration<double>(Clock::now() - start).count();
        auto known = known_failures.find(id);
        std::string verdict = o.pass ? "PASS" : "FAIL";
        if (!o.pass && known == known_failures.end())
            ++unexpected;
        std::printf("criterion %d: %s (%.1f s) %s\n", id, verdict.c_str(), secs, o.detail.c_str());
        if (!o.pass && known != known_failures.end())
            std::printf("  known: %s\n", known->second.c_str());
        if (o.pass && known != known_failures.end())
            std::printf("  note: listed as a known failure but passed\n");
        std::fflush(stdout);
    };
    run(1, criterion1);
    run(2, criterion2);
    run(3, criterion3);
    run(4, criterion4);
    run(5, criterion5);
    run(6, [&] { return criterion6(tc_certs); });
    run(7, criterion7);
    run(8, [&] { return criterion8(tc_certs); });
    run(9, criterion9);
    std::printf("%d unexpected failure%s\n", unexpected, unexpected == 1 ? "" : "s");
    return unexpected ? 1 : 0;
}
