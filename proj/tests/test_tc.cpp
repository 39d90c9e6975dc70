#include <catch_amalgamated.hpp>

#include "corpus.hpp"
#include <treebraid/tc.hpp>

using namespace treebraid;

namespace {

// every degree-3 vertex is a leaf of F(T): h_s = ceil(leaves / s)
bool only_leaf_threes(const PlanarTree& t)
{
    for (Vertex v : split_essential(t).three)
        if (pruned_degree(t, v) != 1)
            return false;
    return !split_essential(t).three.empty();
}

} // namespace

TEST_CASE("zero-divisors restrict to zero on the diagonal")
{
    auto t = subdivide_for_n(corpus::load("binary4"), 4);
    CupEngine engine(t, 4, {SameVertex::Zero, {}});
    for (int s : {2, 3, 4}) {
        for (const auto& c : critical_cells(t, 4, 1)) {
            for (int i = 1; i <= s; ++i)
                CHECK(diagonal_restriction(zero_divisor(basis_class(c), i, s, 4), engine).empty());
        }
    }
    auto u = zero_divisor(basis_class(critical_cells(t, 4, 1).front()), 1, 2, 4);
    CHECK(u.terms.size() == 2);
    CHECK_THROWS_AS(zero_divisor(basis_class(critical_cells(t, 4, 1).front()), 3, 2, 4), Error);
}

TEST_CASE("upper bound")
{
    auto t = corpus::load("mixed7");
    CHECK(upper_bound(t, 4, 2) == 4);
    CHECK(upper_bound(t, 9, 2) == 8);
    CHECK(upper_bound(t, 20, 3) == 21);
}

TEST_CASE("pars with no degree-3 vertices and n = 2m certifies s*m")
{
    for (auto t0 : {corpus::from_skeleton({{1}, {0}}, {4, 4}), corpus::from_skeleton({{1}, {0, 2}, {1}}, {4, 5, 4}),
                    corpus::from_skeleton({{}}, {5})}) {
        int m = static_cast<int>(t0.essential_vertices().size());
        for (int s : {2, 3}) {
            int n = 2 * m;
            auto t = subdivide_for_n(t0, n);
            CupEngine engine(t, n, {SameVertex::Zero, {}});
            auto cert = theorem_pars(t, n, s, engine);
            INFO(t0.name() << " s=" << s);
            CHECK(cert.verified);
            CHECK(cert.bound == s * m);
            CHECK(cert.bound == cert.upper);
        }
    }
}

TEST_CASE("pars on the mixed7 tree is sharp")
{
    auto t = subdivide_for_n(corpus::load("mixed7"), 9);
    CupEngine engine(t, 9, {SameVertex::Zero, {}});
    auto cert = theorem_pars(t, 9, 2, engine);
    CHECK(cert.verified);
    CHECK(cert.bound == 8);
    CHECK(cert.upper == 8);
    CHECK_THROWS_AS(theorem_pars(subdivide_for_n(corpus::load("mixed7"), 4), 4, 2, engine), Error);
}

TEST_CASE("h_s on trees whose degree-3 vertices are all leaves of F(T)")
{
    auto t = corpus::load("mixed7");
    auto h2 = compute_hs(t, 2);
    REQUIRE(h2);
    CHECK(h2->h == 2);
    auto h3 = compute_hs(t, 3);
    REQUIRE(h3);
    CHECK(h3->h == 1);

    int checked = 0;
    for (const auto& s : corpus::skeleton_corpus(5)) {
        if (!only_leaf_threes(s))
            continue;
        int leaves = static_cast<int>(split_essential(s).three.size());
        for (int sv : {2, 3}) {
            auto h = compute_hs(s, sv);
            REQUIRE(h);
            INFO(s.name() << " s=" << sv);
            CHECK(h->h == (leaves + sv - 1) / sv);
            ++checked;
        }
    }
    CHECK(checked > 20);
}

TEST_CASE("h_s witness sets cover the leaves of F(T)")
{
    for (const auto& t : corpus::skeleton_corpus(5)) {
        for (auto sizes : {HsSizes::AtMost, HsSizes::Equal}) {
            auto h = compute_hs(t, 2, {}, sizes);
            if (!h)
                continue;
            INFO(t.name());
            REQUIRE(h->sets.size() == 2);
            std::set<Vertex> all;
            for (const auto& v : h->sets) {
                CHECK(static_cast<int>(v.size()) <= h->h);
                if (sizes == HsSizes::Equal)
                    CHECK(static_cast<int>(v.size()) == h->h);
                all.insert(v.begin(), v.end());
            }
            for (Vertex v : split_essential(t).three)
                if (pruned_degree(t, v) == 1)
                    CHECK(all.count(v) == 1);
        }
    }
}

TEST_CASE("h_s is undefined at a degree-3 vertex with no degree-3 neighbours to balance")
{
    // degree-3 vertex between two degree-4 vertices
    auto t = corpus::from_skeleton({{1}, {0, 2}, {1}}, {4, 3, 4});
    CHECK_FALSE(compute_hs(t, 2).has_value());
    CupEngine engine(subdivide_for_n(t, 7), 7);
    CHECK_THROWS_AS(theorem_tercero(subdivide_for_n(t, 7), 7, 2, engine), Error);
}

TEST_CASE("tercero needs the right choice of h_s sets")
{
    // degree-3 leaf of F(T) next to a degree-4 vertex; the first sets found
    // put the leaf in both V_i, which gives equal factors
    auto t0 = corpus::from_skeleton({{1}, {0}}, {3, 4});
    auto hs = compute_hs(t0, 2);
    REQUIRE(hs);
    CHECK(hs->h == 1);
    const int n = 5;
    auto t = subdivide_for_n(t0, n);
    CupEngine engine(t, n, {SameVertex::Zero, {}});
    auto first = certify_family("tercero", tercero_witnesses(t, n, *compute_hs(t, 2)), engine, 4);
    CHECK_FALSE(first.verified);
    auto cert = theorem_tercero(t, n, 2, engine);
    CHECK(cert.claimed == 4);
    CHECK(cert.verified);
    CHECK(cert.bound == 4);
    CHECK(cert.bound <= cert.upper);
    int families = 0;
    for_each_hs_sets(t, 2, 1, [&](const HsResult&) { return ++families, false; });
    CHECK(families == 3);
}

TEST_CASE("tercero witnesses fail on two adjacent degree-3 vertices")
{
    auto t0 = corpus::from_skeleton({{1}, {0}}, {3, 3});
    REQUIRE(compute_hs(t0, 2)->h == 1);
    const int n = 5;
    auto t = subdivide_for_n(t0, n);
    CupEngine engine(t, n, {SameVertex::Zero, {}});
    auto cert = theorem_tercero(t, n, 2, engine);
    CHECK_FALSE(cert.verified);
    CHECK(cert.bound == 0);
    CHECK_FALSE(cert.note.empty());
}

TEST_CASE("mayorj on the deg5_hub tree certifies 18 of the claimed 21")
{
    auto t = subdivide_for_n(corpus::load("deg5_hub"), 14);
    auto sets = search_mayorj_sets(t, 14, 3);
    REQUIRE(sets);
    CHECK(mayorj_problem(t, 14, 3, *sets).empty());
    CupEngine engine(t, 14, {SameVertex::Zero, {}});
    auto cert = theorem_mayorj(t, 14, 3, *sets, engine);
    CHECK(cert.claimed == 21);
    CHECK(cert.upper == 21);
    CHECK(cert.verified);
    CHECK(cert.bound == 18);
    CHECK_FALSE(cert.note.empty());
    auto j = cert.to_json();
    CHECK(j["bound"] == 18);
    CHECK(j["claimed_bound"] == 21);
}

TEST_CASE("degree-3 products agree on T and O(T)")
{
    auto t = corpus::load("deg6_centre");
    auto r = lemma_cam_check(t, {"{3|5,(1),(1)}", "{3|6,(1),(1)}"}, 6);
    CHECK(r.ok);
    auto r2 = lemma_cam_check(t, {"{4|5,(1),(0)}", "{4|6,(1),(0)}", "{4|2,(1),(0)}"}, 6);
    CHECK(r2.ok);
    CHECK_THROWS_AS(lemma_cam_check(t, {"{4|0,(1,0,0,0),(0)}"}, 6), Error);
}

TEST_CASE("G_b of a non-identity assignment has a node without in- or out-edges")
{
    auto t = subdivide_for_n(corpus::load("deg6_centre"), 6);
    auto a = parse_critical("{4|0,(1,0),(0,0,0)}", t);
    auto b = parse_critical("{4|0,(1),(0,0,0,0)}", t);
    auto c = parse_critical("{4|5,(1),(0)}", t);
    // identity: every node isolated
    auto id = gb_acyclic_check({{a, c}, {b}}, {{0, 0}, {1}}, t);
    CHECK(id.trivial());
    CHECK(id.acyclic);
    // a and b swap slots
    auto sw = gb_acyclic_check({{a, c}, {b}}, {{1, 0}, {0}}, t);
    CHECK_FALSE(sw.trivial());
    CHECK(sw.acyclic);
    CHECK(sw.edges.size() == 1);
    REQUIRE(sw.stuck);
    CHECK_THROWS_AS(gb_acyclic_check({{a}}, {{0, 1}}, t), Error);
}
