#include "ncorb/orbifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace ncorb {

DiscreteOrbifold::DiscreteOrbifold(MetricGraph graph, GroupAction action)
    : graph_(std::move(graph)), action_(std::move(action)) {
    if (action_.points() != graph_.vertex_count())
        throw StructuralError("action must be defined on the graph's vertices");
    // Isometry: each group element maps edges to edges with equal lengths.
    for (int g = 0; g < action_.group().order(); ++g) {
        for (const auto& e : graph_.edges()) {
            int u = action_.apply(g, e.u);
            int v = action_.apply(g, e.v);
            if (!graph_.adjacent(u, v))
                throw StructuralError("group element does not preserve the edge set");
            if (std::abs(graph_.edge_length(u, v) - e.length) > 1e-12)
                throw StructuralError("group element does not preserve edge lengths");
        }
    }
    orbit_index_ = action_.orbit_index();

    // Quotient graph, built once.
    auto reps = action_.orbit_representatives();
    const int m = static_cast<int>(reps.size());
    std::map<std::pair<int, int>, double> best;
    for (const auto& e : graph_.edges()) {
        int a = orbit_index_[static_cast<size_t>(e.u)];
        int b = orbit_index_[static_cast<size_t>(e.v)];
        if (a == b) continue;
        auto key = std::minmax(a, b);
        auto it = best.find(key);
        if (it == best.end() || e.length < it->second) best[key] = e.length;
    }
    std::vector<Edge> qedges;
    for (const auto& [key, len] : best) qedges.push_back({key.first, key.second, len});
    quotient_.emplace(m, std::move(qedges));
}

const MetricGraph& DiscreteOrbifold::quotient_graph() const { return *quotient_; }

double gpath_length(const DiscreteOrbifold& orb, const GPath& path) {
    if (path.segments.empty()) throw StructuralError("a G-path needs at least one segment");
    if (path.junctions.size() + 1 != path.segments.size())
        throw StructuralError("a G-path with k segments needs k-1 junction arrows");
    const auto& g = orb.graph();
    double total = 0.0;
    for (size_t i = 0; i < path.segments.size(); ++i) {
        const auto& seg = path.segments[i];
        if (seg.empty()) throw StructuralError("empty segment in G-path");
        for (size_t j = 0; j + 1 < seg.size(); ++j) {
            if (!g.adjacent(seg[j], seg[j + 1])) {
                std::ostringstream msg;
                msg << "segment " << i << " uses a non-edge " << seg[j] << "-" << seg[j + 1];
                throw StructuralError(msg.str());
            }
            total += g.edge_length(seg[j], seg[j + 1]);
        }
    }
    for (size_t i = 0; i < path.junctions.size(); ++i) {
        auto [gelt, pt] = path.junctions[i];
        int next_start = path.segments[i + 1].front();
        if (pt != next_start) {
            std::ostringstream msg;
            msg << "junction " << i << " has source " << pt
                << " but the next segment starts at " << next_start;
            throw StructuralError(msg.str());
        }
        int prev_end = path.segments[i].back();
        if (orb.action().apply(gelt, pt) != prev_end) {
            std::ostringstream msg;
            msg << "junction " << i << " maps " << pt << " to "
                << orb.action().apply(gelt, pt) << ", expected segment end " << prev_end;
            throw StructuralError(msg.str());
        }
    }
    return total;
}

double orbifold_distance(const DiscreteOrbifold& orb, int x, int x_prime) {
    const auto& g = orb.graph();
    if (x < 0 || x >= g.vertex_count() || x_prime < 0 || x_prime >= g.vertex_count())
        throw ContractError("vertex out of range");
    auto dist = g.shortest_paths(x);
    double by_min_over_g = std::numeric_limits<double>::infinity();
    for (int h = 0; h < orb.action().group().order(); ++h)
        by_min_over_g = std::min(by_min_over_g,
                                 dist[static_cast<size_t>(orb.action().apply(h, x_prime))]);

    auto qdist = orb.quotient_graph().shortest_paths(
        orb.orbit_index()[static_cast<size_t>(x)]);
    double by_quotient = qdist[static_cast<size_t>(orb.orbit_index()[static_cast<size_t>(x_prime)])];

    if (std::abs(by_min_over_g - by_quotient) > 1e-12)
        throw ContractError("min-over-g and quotient-graph distances disagree");
    return by_min_over_g;
}

SingularLocus singular_locus(const DiscreteOrbifold& orb) {
    SingularLocus out;
    const auto& act = orb.action();
    std::vector<bool> singular(static_cast<size_t>(act.points()), false);
    for (int x = 0; x < act.points(); ++x) {
        auto stab = act.stabilizer(x);
        if (stab.size() > 1) {
            singular[static_cast<size_t>(x)] = true;
            out.vertices.emplace_back(x, std::move(stab));
        }
    }
    for (const auto& e : orb.graph().edges()) {
        if (singular[static_cast<size_t>(e.u)] && singular[static_cast<size_t>(e.v)])
            out.pointlike = false;
        for (int g = 0; g < act.group().order(); ++g) {
            if (g == act.group().identity()) continue;
            if (act.apply(g, e.u) == e.u && act.apply(g, e.v) == e.v) out.pointlike = false;
        }
    }
    return out;
}

}  // namespace ncorb
