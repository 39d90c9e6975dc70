#include <catch_amalgamated.hpp>

#include "corpus.hpp"
#include <treebraid/arcs.hpp>

using namespace treebraid;

namespace {

// every oriented arc between two distinct vertices of t
ArcCollection all_arcs(const PlanarTree& t)
{
    ArcCollection out;
    for (Vertex a = 0; a < t.size(); ++a)
        for (Vertex b = 0; b < t.size(); ++b)
            if (a != b)
                out.push_back(arc_between(a, b, t));
    return out;
}

// smallest p <= cap with an allowable collection, by exhaustion
std::optional<int> brute_p(const PlanarTree& t, int cap)
{
    auto U = degree_three_vertices(t);
    if (U.empty())
        return 0;
    auto arcs = all_arcs(t);
    for (const auto& a : arcs)
        if (!is_allowable({a}, U, t))
            return 1;
    if (cap < 2)
        return std::nullopt;
    for (std::size_t i = 0; i < arcs.size(); ++i)
        for (std::size_t j = i; j < arcs.size(); ++j)
            if (!is_allowable({arcs[i], arcs[j]}, U, t))
                return 2;
    return std::nullopt;
}

} // namespace

TEST_CASE("eta counts arcs by direction and orientation")
{
    auto y = arc_search_tree(corpus::load("y"));
    Vertex x = y.ordinal_of("x");
    Vertex a = y.ordinal_of("a"), b = y.ordinal_of("b");
    auto ab = arc_between(a, b, y);
    CHECK(eta(x, 1, {ab}, y) == 1);
    CHECK(eta(x, 2, {ab}, y) == -1);
    CHECK(eta(x, 0, {ab}, y) == 0);
    // the same arc both ways balances every direction
    auto ba = arc_between(b, a, y);
    for (int j = 0; j < 3; ++j)
        CHECK(eta(x, j, {ab, ba}, y) == 0);
    CHECK(is_allowable({ab}, {x}, y) == std::nullopt);
    CHECK(is_allowable({ab, ba}, {x}, y) == x);
    // an arc ending at x is never allowable for x
    CHECK(is_allowable({arc_between(a, x, y)}, {x}, y) == x);
    CHECK_THROWS_AS(eta(x, 3, {ab}, y), Error);
}

TEST_CASE("arc parsing")
{
    auto y = arc_search_tree(corpus::load("y"));
    auto arc = arc_between(y.ordinal_of("a"), y.ordinal_of("r"), y);
    CHECK(parse_arc(to_string(arc, y), y) == arc);
    CHECK_THROWS_AS(parse_arc("a -> r", y), Error); // not adjacent
    CHECK_THROWS_AS(parse_arc("a -> nowhere", y), Error);
    CHECK_THROWS_AS(parse_arc("a", y), Error);
    CHECK(arcs_to_json({arc}, y).size() == 1);
}

TEST_CASE("minimal allowable collections on small trees")
{
    SECTION("one degree-3 vertex needs one arc")
    {
        auto t = arc_search_tree(corpus::load("y"));
        auto r = min_allowable_p(t);
        CHECK(r.p == 1);
        CHECK_FALSE(is_allowable(r.arcs, degree_three_vertices(t), t).has_value());
    }
    SECTION("no degree-3 vertices needs none")
    {
        auto t = arc_search_tree(corpus::from_skeleton({{1}, {0}}, {4, 5}));
        CHECK(min_allowable_p(t).p == 0);
    }
    SECTION("a subdivided-enough tree is required")
    {
        CHECK_THROWS_AS(min_allowable_p(corpus::from_skeleton({{1}, {0}}, {3, 3})), Error);
    }
}

TEST_CASE("min_allowable_p agrees with exhaustive search")
{
    int compared = 0;
    for (const auto& t0 : corpus::skeleton_corpus(3)) {
        auto t = arc_search_tree(t0);
        auto r = min_allowable_p(t);
        INFO(t0.name());
        CHECK_FALSE(is_allowable(r.arcs, degree_three_vertices(t), t).has_value());
        CHECK(static_cast<int>(r.arcs.size()) == r.p);
        if (r.p <= 2) {
            CHECK(brute_p(t, 2) == r.p);
            ++compared;
        }
    }
    CHECK(compared > 10);
}

TEST_CASE("p equals h_2 on the mixed7 and deg5_hub trees")
{
    for (const char* name : {"mixed7", "deg5_hub"}) {
        auto t0 = corpus::load(name);
        auto t = arc_search_tree(t0);
        auto h = compute_hs(t0, 2);
        REQUIRE(h);
        INFO(name);
        CHECK(min_allowable_p(t).p == h->h);
    }
}

TEST_CASE("arcs built from an h_2 witness are allowable")
{
    for (const char* name : {"mixed7", "deg5_hub"}) {
        auto t0 = corpus::load(name);
        auto t = arc_search_tree(t0);
        auto h = compute_hs(t0, 2, {}, HsSizes::Equal);
        REQUIRE(h);
        std::vector<Vertex> v1, v2;
        for (Vertex v : h->sets[0])
            v1.push_back(t.ordinal_of(t0.label(v)));
        for (Vertex v : h->sets[1])
            v2.push_back(t.ordinal_of(t0.label(v)));
        auto arcs = arcs_from_hs_witness(v1, v2, t);
        INFO(name);
        CHECK(static_cast<int>(arcs.size()) == h->h);
        CHECK_FALSE(is_allowable(arcs, degree_three_vertices(t), t).has_value());
    }
}
