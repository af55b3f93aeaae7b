#pragma once

#include <vector>

#include "ncorb/linalg.hpp"

namespace ncorb {

struct Edge {
    int u;
    int v;
    double length;
};

/// A finite connected weighted graph: the discretized manifold.  Simple, no
/// self loops, all lengths positive; validated at construction.
class MetricGraph {
public:
    MetricGraph(int vertex_count, std::vector<Edge> edges);

    int vertex_count() const { return vertex_count_; }
    const std::vector<Edge>& edges() const { return edges_; }
    /// Neighbors of v as (neighbor, edge length), sorted by neighbor id.
    const std::vector<std::pair<int, double>>& neighbors(int v) const;
    bool adjacent(int u, int v) const;
    /// Length of the edge {u, v}; throws if not adjacent.
    double edge_length(int u, int v) const;
    double total_length() const;

    /// Single-source shortest paths (Dijkstra, ties toward smaller ids).
    std::vector<double> shortest_paths(int source) const;

private:
    int vertex_count_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::pair<int, double>>> adjacency_;
};

/// A weighted simple graph that, unlike MetricGraph, may be disconnected.
/// Used for graphs living over a base (covering sheets need not touch).
class CoveringGraph {
public:
    CoveringGraph(int vertex_count, std::vector<Edge> edges);

    int vertex_count() const { return vertex_count_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<std::pair<int, double>>& neighbors(int v) const;
    bool adjacent(int u, int v) const;
    double edge_length(int u, int v) const;

private:
    int vertex_count_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::pair<int, double>>> adjacency_;
};

/// Cycle graph on n >= 3 vertices with uniform edge length circumference/n.
MetricGraph refine_circle(int n, double circumference);

/// True when the graph is a single cycle with uniform edge lengths.
bool is_uniform_cycle(const MetricGraph& g, double tol = 1e-12);

}  // namespace ncorb
