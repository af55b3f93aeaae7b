#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "ncorb/orbifold.hpp"

using namespace ncorb;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Floyd-Warshall all-pairs oracle, independent of the library's Dijkstra.
std::vector<std::vector<double>> all_pairs(const MetricGraph& g) {
    const int n = g.vertex_count();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> d(static_cast<size_t>(n),
                                       std::vector<double>(static_cast<size_t>(n), inf));
    for (int v = 0; v < n; ++v) d[static_cast<size_t>(v)][static_cast<size_t>(v)] = 0.0;
    for (const Edge& e : g.edges()) {
        auto& duv = d[static_cast<size_t>(e.u)][static_cast<size_t>(e.v)];
        auto& dvu = d[static_cast<size_t>(e.v)][static_cast<size_t>(e.u)];
        duv = std::min(duv, e.length);
        dvu = std::min(dvu, e.length);
    }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                d[static_cast<size_t>(i)][static_cast<size_t>(j)] = std::min(
                    d[static_cast<size_t>(i)][static_cast<size_t>(j)],
                    d[static_cast<size_t>(i)][static_cast<size_t>(k)] +
                        d[static_cast<size_t>(k)][static_cast<size_t>(j)]);
    return d;
}

MetricGraph random_connected_graph(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> len(0.2, 2.0);
    std::vector<Edge> edges;
    for (int v = 1; v < n; ++v) {
        std::uniform_int_distribution<int> parent(0, v - 1);
        edges.push_back({parent(rng), v, len(rng)});
    }
    std::uniform_int_distribution<int> pick(0, n - 1);
    int extra = n / 2;
    while (extra > 0) {
        int u = pick(rng), v = pick(rng);
        if (u == v) continue;
        bool dup = false;
        for (const Edge& e : edges)
            if ((e.u == u && e.v == v) || (e.u == v && e.v == u)) dup = true;
        if (dup) continue;
        edges.push_back({u, v, len(rng)});
        --extra;
    }
    return MetricGraph(n, std::move(edges));
}

}  // namespace

TEST_CASE("shortest paths match the Floyd-Warshall oracle") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        MetricGraph g = random_connected_graph(rng, 9);
        auto oracle = all_pairs(g);
        for (int s = 0; s < g.vertex_count(); ++s) {
            std::vector<double> dist = g.shortest_paths(s);
            for (int v = 0; v < g.vertex_count(); ++v)
                CHECK(std::abs(dist[static_cast<size_t>(v)] -
                               oracle[static_cast<size_t>(s)][static_cast<size_t>(v)]) <=
                      1e-12);
        }
    }
}

TEST_CASE("graph constructor rejects malformed input") {
    CHECK_THROWS_AS(MetricGraph(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 1, 0.5}}),
                    StructuralError);
    CHECK_THROWS_AS(MetricGraph(3, {{0, 0, 1.0}}), StructuralError);
    CHECK_THROWS_AS(MetricGraph(3, {{0, 1, -1.0}}), StructuralError);
    CHECK_THROWS_AS(MetricGraph(4, {{0, 1, 1.0}, {2, 3, 1.0}}), StructuralError);
    CHECK(is_uniform_cycle(refine_circle(6, 2.0 * kPi)));
    CHECK_FALSE(is_uniform_cycle(MetricGraph(3, {{0, 1, 1.0}, {1, 2, 2.0}, {2, 0, 1.0}})));
}

TEST_CASE("orbifold distance equals the independent minimum over translates") {
    std::vector<DiscreteOrbifold> orbs;
    orbs.emplace_back(refine_circle(6, 2.0 * kPi), GroupAction::reflection_cycle(6));
    orbs.emplace_back(refine_circle(6, 2.0 * kPi), GroupAction::rotation_cycle(6, 2));
    orbs.emplace_back(refine_circle(6, 2.0 * kPi), GroupAction::s3_on_c6());
    orbs.emplace_back(refine_circle(12, 2.0 * kPi), GroupAction::rotation_cycle(12, 3));
    for (const DiscreteOrbifold& orb : orbs) {
        auto pairs = all_pairs(orb.graph());
        const GroupAction& act = orb.action();
        for (int x = 0; x < act.points(); ++x)
            for (int y = 0; y < act.points(); ++y) {
                double expected = std::numeric_limits<double>::infinity();
                for (int g = 0; g < act.group().order(); ++g)
                    for (int h = 0; h < act.group().order(); ++h)
                        expected = std::min(
                            expected, pairs[static_cast<size_t>(act.apply(g, x))]
                                           [static_cast<size_t>(act.apply(h, y))]);
                CHECK(std::abs(orbifold_distance(orb, x, y) - expected) <= 1e-12);
            }
    }
}

TEST_CASE("orbifold distance satisfies the metric axioms on orbits") {
    DiscreteOrbifold orb(refine_circle(6, 2.0 * kPi), GroupAction::reflection_cycle(6));
    const int n = 6;
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            double dxy = orbifold_distance(orb, x, y);
            CHECK(dxy >= 0.0);
            CHECK(std::abs(dxy - orbifold_distance(orb, y, x)) <= 1e-12);
            const auto& oi = orb.orbit_index();
            if (oi[static_cast<size_t>(x)] == oi[static_cast<size_t>(y)])
                CHECK(dxy == 0.0);
            else
                CHECK(dxy > 0.0);
            for (int z = 0; z < n; ++z)
                CHECK(dxy <= orbifold_distance(orb, x, z) +
                                 orbifold_distance(orb, z, y) + 1e-12);
        }
}

TEST_CASE("quotient graphs collapse orbits to shortest representatives") {
    DiscreteOrbifold rot(refine_circle(6, 2.0 * kPi), GroupAction::rotation_cycle(6, 2));
    const MetricGraph& q_rot = rot.quotient_graph();
    CHECK(q_rot.vertex_count() == 3);
    CHECK(q_rot.edges().size() == 3);
    for (const Edge& e : q_rot.edges()) CHECK(std::abs(e.length - kPi / 3.0) <= 1e-12);
    CHECK(is_uniform_cycle(q_rot));

    DiscreteOrbifold ref(refine_circle(6, 2.0 * kPi), GroupAction::reflection_cycle(6));
    const MetricGraph& q_ref = ref.quotient_graph();
    // Orbits {0}, {1,5}, {2,4}, {3}: a path with three edges of one mesh each.
    CHECK(q_ref.vertex_count() == 4);
    CHECK(q_ref.edges().size() == 3);
    for (const Edge& e : q_ref.edges()) CHECK(std::abs(e.length - kPi / 3.0) <= 1e-12);
    CHECK_FALSE(is_uniform_cycle(q_ref));
}

TEST_CASE("gpath lengths add segment lengths and junctions cost nothing") {
    DiscreteOrbifold orb(refine_circle(6, 2.0 * kPi), GroupAction::reflection_cycle(6));
    const double h = kPi / 3.0;
    GPath direct;
    direct.segments = {{0, 1, 2}};
    CHECK(std::abs(gpath_length(orb, direct) - 2.0 * h) <= 1e-12);

    // Walk to vertex 5, jump along the reflection arrow at 1 (which maps 1 to
    // 5), and continue from 1; the jump is free, so the total is two edges.
    GPath jumped;
    jumped.segments = {{0, 5}, {1, 2}};
    jumped.junctions = {{1, 1}};
    CHECK(std::abs(gpath_length(orb, jumped) - 2.0 * h) <= 1e-12);

    // The junction must actually connect the segment endpoints.
    GPath broken;
    broken.segments = {{0, 5}, {2, 3}};
    broken.junctions = {{1, 5}};
    CHECK_THROWS_AS(gpath_length(orb, broken), StructuralError);

    // Segments must walk along edges.
    GPath teleport;
    teleport.segments = {{0, 2}};
    CHECK_THROWS_AS(gpath_length(orb, teleport), StructuralError);

    // Any valid gpath length bounds the orbifold distance from above.
    CHECK(orbifold_distance(orb, 0, 2) <= gpath_length(orb, jumped) + 1e-12);
}

TEST_CASE("singular loci and pointlike classification") {
    DiscreteOrbifold rot(refine_circle(6, 2.0 * kPi), GroupAction::rotation_cycle(6, 2));
    SingularLocus rot_locus = singular_locus(rot);
    CHECK(rot_locus.empty());
    CHECK(rot_locus.pointlike);

    DiscreteOrbifold ref(refine_circle(6, 2.0 * kPi), GroupAction::reflection_cycle(6));
    SingularLocus ref_locus = singular_locus(ref);
    REQUIRE(ref_locus.vertices.size() == 2);
    CHECK(ref_locus.vertices[0].first == 0);
    CHECK(ref_locus.vertices[1].first == 3);
    CHECK(ref_locus.pointlike);

    DiscreteOrbifold s3(refine_circle(6, 2.0 * kPi), GroupAction::s3_on_c6());
    SingularLocus s3_locus = singular_locus(s3);
    CHECK_FALSE(s3_locus.empty());
    CHECK_FALSE(s3_locus.pointlike);
}

TEST_CASE("actions must act by graph isometries") {
    // The 6-cycle with one stretched edge admits no half-turn isometry.
    std::vector<Edge> edges;
    for (int j = 0; j < 6; ++j) edges.push_back({j, (j + 1) % 6, j == 0 ? 2.0 : 1.0});
    CHECK_THROWS_AS(DiscreteOrbifold(MetricGraph(6, std::move(edges)),
                                     GroupAction::rotation_cycle(6, 2)),
                    StructuralError);
}
