#include "ncorb/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

namespace ncorb {

MetricGraph::MetricGraph(int vertex_count, std::vector<Edge> edges)
    : vertex_count_(vertex_count), edges_(std::move(edges)) {
    if (vertex_count_ <= 0) throw StructuralError("graph needs at least one vertex");
    std::set<std::pair<int, int>> seen;
    for (const auto& e : edges_) {
        if (e.u < 0 || e.u >= vertex_count_ || e.v < 0 || e.v >= vertex_count_)
            throw StructuralError("edge endpoint out of range");
        if (e.u == e.v) throw StructuralError("self loops are not allowed");
        if (!(e.length > 0.0)) throw StructuralError("edge lengths must be positive");
        auto key = std::minmax(e.u, e.v);
        if (!seen.insert(key).second)
            throw StructuralError("duplicate edge between a vertex pair");
    }
    adjacency_.assign(static_cast<size_t>(vertex_count_), {});
    for (const auto& e : edges_) {
        adjacency_[static_cast<size_t>(e.u)].emplace_back(e.v, e.length);
        adjacency_[static_cast<size_t>(e.v)].emplace_back(e.u, e.length);
    }
    for (auto& list : adjacency_) std::sort(list.begin(), list.end());
    // Connectivity.
    std::vector<bool> visited(static_cast<size_t>(vertex_count_), false);
    std::vector<int> stack = {0};
    visited[0] = true;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (const auto& [w, len] : adjacency_[static_cast<size_t>(v)]) {
            (void)len;
            if (!visited[static_cast<size_t>(w)]) {
                visited[static_cast<size_t>(w)] = true;
                stack.push_back(w);
            }
        }
    }
    if (std::find(visited.begin(), visited.end(), false) != visited.end())
        throw StructuralError("graph must be connected");
}

const std::vector<std::pair<int, double>>& MetricGraph::neighbors(int v) const {
    if (v < 0 || v >= vertex_count_) throw ContractError("vertex out of range");
    return adjacency_[static_cast<size_t>(v)];
}

bool MetricGraph::adjacent(int u, int v) const {
    for (const auto& [w, len] : neighbors(u)) {
        (void)len;
        if (w == v) return true;
    }
    return false;
}

double MetricGraph::edge_length(int u, int v) const {
    for (const auto& [w, len] : neighbors(u))
        if (w == v) return len;
    throw ContractError("vertices are not adjacent");
}

double MetricGraph::total_length() const {
    double sum = 0.0;
    for (const auto& e : edges_) sum += e.length;
    return sum;
}

std::vector<double> MetricGraph::shortest_paths(int source) const {
    if (source < 0 || source >= vertex_count_) throw ContractError("vertex out of range");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(static_cast<size_t>(vertex_count_), inf);
    // Ties broken toward the smaller vertex id for deterministic reports.
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    dist[static_cast<size_t>(source)] = 0.0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[static_cast<size_t>(v)]) continue;
        for (const auto& [w, len] : adjacency_[static_cast<size_t>(v)]) {
            double cand = d + len;
            if (cand < dist[static_cast<size_t>(w)]) {
                dist[static_cast<size_t>(w)] = cand;
                heap.emplace(cand, w);
            }
        }
    }
    return dist;
}

CoveringGraph::CoveringGraph(int vertex_count, std::vector<Edge> edges)
    : vertex_count_(vertex_count), edges_(std::move(edges)) {
    if (vertex_count_ <= 0) throw StructuralError("graph needs at least one vertex");
    std::set<std::pair<int, int>> seen;
    for (const auto& e : edges_) {
        if (e.u < 0 || e.u >= vertex_count_ || e.v < 0 || e.v >= vertex_count_)
            throw StructuralError("edge endpoint out of range");
        if (e.u == e.v) throw StructuralError("self loops are not allowed");
        if (!(e.length > 0.0)) throw StructuralError("edge lengths must be positive");
        auto key = std::minmax(e.u, e.v);
        if (!seen.insert(key).second)
            throw StructuralError("duplicate edge between a vertex pair");
    }
    adjacency_.assign(static_cast<size_t>(vertex_count_), {});
    for (const auto& e : edges_) {
        adjacency_[static_cast<size_t>(e.u)].emplace_back(e.v, e.length);
        adjacency_[static_cast<size_t>(e.v)].emplace_back(e.u, e.length);
    }
    for (auto& list : adjacency_) std::sort(list.begin(), list.end());
}

const std::vector<std::pair<int, double>>& CoveringGraph::neighbors(int v) const {
    if (v < 0 || v >= vertex_count_) throw ContractError("vertex out of range");
    return adjacency_[static_cast<size_t>(v)];
}

bool CoveringGraph::adjacent(int u, int v) const {
    for (const auto& [w, len] : neighbors(u)) {
        (void)len;
        if (w == v) return true;
    }
    return false;
}

double CoveringGraph::edge_length(int u, int v) const {
    for (const auto& [w, len] : neighbors(u))
        if (w == v) return len;
    throw ContractError("vertices are not adjacent");
}

MetricGraph refine_circle(int n, double circumference) {
    if (n < 3) throw StructuralError("a discretized circle needs at least 3 vertices");
    if (!(circumference > 0.0)) throw StructuralError("circumference must be positive");
    std::vector<Edge> edges;
    edges.reserve(static_cast<size_t>(n));
    const double h = circumference / n;
    for (int j = 0; j < n; ++j) edges.push_back({j, (j + 1) % n, h});
    return MetricGraph(n, std::move(edges));
}

bool is_uniform_cycle(const MetricGraph& g, double tol) {
    const int n = g.vertex_count();
    if (static_cast<int>(g.edges().size()) != n) return false;
    double h = g.edges().front().length;
    for (const auto& e : g.edges())
        if (std::abs(e.length - h) > tol) return false;
    for (int v = 0; v < n; ++v)
        if (g.neighbors(v).size() != 2) return false;
    return true;
}

}  // namespace ncorb
