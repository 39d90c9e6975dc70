#include <catch_amalgamated.hpp>

#include "corpus.hpp"
#include <treebraid/oracle.hpp>
#include <treebraid/ring.hpp>

using namespace treebraid;

TEST_CASE("interaction parameters of three factors on the mixed7 tree")
{
    auto t = subdivide_for_n(corpus::load("mixed7"), 10);
    std::vector<CriticalCell> f{parse_critical("{1|x1,(1,7),(0)}", t), parse_critical("{7|x2,(2,0),(0)}", t),
                                parse_critical("{6|x3,(1),(1,1)}", t)};
    auto ip = interaction_parameters(f, t, 10);
    CHECK(ip.R0 == 1);
    CHECK(ip.P == std::vector<std::vector<int>>{{1, 0}, {2, 0}, {1}});
    CHECK(ip.Q == std::vector<std::vector<int>>{{0}, {0}, {1, 1}});
    CHECK(ip.verdict == Verdict::Strong);
    auto prod = strong_product(f, t, 10);
    CHECK(to_string(prod, t) == "{1|x1,(1,0),(0)|x2,(2,0),(0)|x3,(1),(1,1)}");
    CHECK(cup({basis_class(f[0]), basis_class(f[1]), basis_class(f[2])}, t, 10) == basis_class(prod));
}

TEST_CASE("non-interacting factors multiply to zero")
{
    auto t = subdivide_for_n(corpus::load("mixed7"), 4);
    // x2 sits in x1-direction 2; k(x2) = 0 drains every direction
    auto a = parse_critical("{0|x1,(1,2),(0)}", t);
    auto b = parse_critical("{0|x2,(3,0),(0)}", t);
    auto ip = interaction_parameters({a, b}, t, 4);
    CHECK(ip.verdict == Verdict::None);
    CHECK(cup({basis_class(a), basis_class(b)}, t, 4).empty());
    CHECK_THROWS_AS(strong_product({a, b}, t, 4), Error);
}

TEST_CASE("weak product at a degree-5 vertex")
{
    auto t = subdivide_for_n(corpus::load("deg5_deg3"), 9);
    auto a = parse_critical("{1|x,(2,0),(2,3)}", t);
    auto b = parse_critical("{7|y,(1),(0)}", t);
    REQUIRE(interaction_parameters({a, b}, t, 9).verdict == Verdict::Weak);
    auto got = cup({basis_class(a), basis_class(b)}, t, 9);
    auto expected = parse_class("-{0|x,(0,1),(2,3)|y,(1),(0)} - {0|x,(1,0),(2,3)|y,(1),(0)}"
                                " + {0|x,(0,0,3),(3)|y,(1),(0)} - {1|x,(0,0,3),(2)|y,(1),(0)}"
                                " - {0|x,(0,1,3),(2)|y,(1),(0)} - {0|x,(1,0,3),(2)|y,(1),(0)}"
                                " - {0|x,(0,0,4),(2)|y,(1),(0)}",
                                t);
    CHECK(to_string(got, t) == to_string(expected, t));
    CHECK(got == weak_product(a, {b}, t, 9));

    // independent check on the cube complex
    CubicalCupOracle oracle(t, 9);
    std::vector<CriticalCell> candidates;
    for (const auto& [c, k] : expected)
        candidates.push_back(c);
    for (const auto& c : critical_cells(t, 9, 2))
        if (c.blocks[0].x == a.blocks[0].x && c.blocks[1] == b.blocks[0] && c.k <= 2)
            candidates.push_back(c);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    auto want = oracle.product(a, b, candidates);
    CHECK(CohomologyClass(want.begin(), want.end()) == expected);
}

TEST_CASE("class parsing round trip")
{
    auto t = subdivide_for_n(corpus::load("deg5_deg3"), 9);
    auto c = parse_class("2*{1|x,(2,0),(2,3)} - {0|x,(3,0),(2,3)}", t);
    CHECK(c.size() == 2);
    CHECK(parse_class(to_string(c, t), t) == c);
    CHECK_THROWS_AS(parse_class("{1|x,(2,0),(2,3)", t), Error);
}

TEST_CASE("bracket classes")
{
    auto t = subdivide_for_n(corpus::load("binary4"), 4);
    Vertex v = t.essential_vertices().front();
    auto lead = bracket_class(2, v, 1, 0, t, 4);
    auto verb = bracket_class(2, v, 1, 0, t, 4, BracketReading::Verbatim);
    CHECK(lead.size() == 3);
    CHECK(verb.size() == 2);
    CHECK(bracket_class(0, v, 1, 2, t, 4, BracketReading::Verbatim).empty());
    CHECK_THROWS_AS(bracket_class(0, v, 0, 3, t, 4), Error);
}

TEST_CASE("K_4T of the binary4 tree")
{
    auto t = subdivide_for_n(corpus::load("binary4"), 4);
    auto K = build_KnT(t, 4);
    CHECK(K.vertices.size() == 24);
    CHECK(K.isolated().size() == 18);
    CHECK(K.faces_of_size(2).size() == 6);
    CHECK(K.faces_of_size(3).empty()); // n = 4 leaves room for two blocks only
    // downward closed
    for (const auto& f : K.faces)
        for (std::size_t i = 0; i < f.size() && f.size() > 1; ++i) {
            auto g = f;
            g.erase(g.begin() + static_cast<std::ptrdiff_t>(i));
            CHECK(K.is_face(g));
        }
    auto check = face_ring_check(K, t, 4);
    CHECK(check.pairs == 24 * 23 / 2);
    CHECK(check.ok());
    auto verbatim = build_KnT(t, 4, BracketReading::Verbatim);
    CHECK_FALSE(face_ring_check(verbatim, t, 4, BracketReading::Verbatim).ok());
    CHECK_THROWS_AS(build_KnT(subdivide_for_n(corpus::load("deg5_deg3"), 4), 4), Error);
}
