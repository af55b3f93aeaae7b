#pragma once

#include <optional>
#include <vector>

#include "ncorb/graph.hpp"
#include "ncorb/group.hpp"
#include "ncorb/groupoid.hpp"

namespace ncorb {

/// A weighted graph together with an isometric group action on its vertices.
class DiscreteOrbifold {
public:
    DiscreteOrbifold(MetricGraph graph, GroupAction action);

    const MetricGraph& graph() const { return graph_; }
    const GroupAction& action() const { return action_; }

    /// Quotient graph: one vertex per orbit (ordered by smallest
    /// representative), edge length = min over representative pairs.
    /// Edges inside a single orbit are dropped (they project to loops).
    const MetricGraph& quotient_graph() const;
    /// Orbit index of each vertex, matching quotient_graph vertex ids.
    const std::vector<int>& orbit_index() const { return orbit_index_; }

private:
    MetricGraph graph_;
    GroupAction action_;
    std::vector<int> orbit_index_;
    std::optional<MetricGraph> quotient_;
};

/// A path through the orbifold: graph segments joined by groupoid arrows.
/// The end vertex of segment i must equal the junction arrow applied to the
/// start vertex of segment i+1.
struct GPath {
    std::vector<std::vector<int>> segments;  // each a vertex walk in the graph
    std::vector<std::pair<int, int>> junctions;  // (group element, point) arrows
};

/// Total length of the path's segments; junction arrows contribute nothing.
/// Throws on malformed segments or junction mismatches, naming the index.
double gpath_length(const DiscreteOrbifold& orb, const GPath& path);

/// Geodesic distance on the orbit space: the infimum of G-path lengths,
/// computed as min over g of d(x, g.x') and cross-checked against Dijkstra
/// on the quotient graph.  The two must agree exactly.
double orbifold_distance(const DiscreteOrbifold& orb, int x, int x_prime);

struct SingularLocus {
    /// (vertex, nontrivial stabilizer including identity) pairs.
    std::vector<std::pair<int, std::vector<int>>> vertices;
    /// No two singular vertices adjacent and no edge fixed pointwise.
    bool pointlike = true;

    bool empty() const { return vertices.empty(); }
};

SingularLocus singular_locus(const DiscreteOrbifold& orb);

}  // namespace ncorb
