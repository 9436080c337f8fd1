#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "cte/graph.hpp"
#include "cte/rng.hpp"

namespace cte::testing {

inline LabeledGraph from_edges(std::size_t n, std::vector<Edge> edges) {
    LabeledGraph g;
    g.node_count = n;
    g.edges = std::move(edges);
    for (std::size_t i = 0; i < n; ++i) {
        g.ids.push_back(std::to_string(i));
        g.id_to_index.emplace(g.ids.back(), i);
    }
    return g;
}

inline LabeledGraph triangle() { return from_edges(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}}); }

inline LabeledGraph path3() { return from_edges(3, {{0, 1, 1}, {1, 2, 1}}); }

inline LabeledGraph k2() { return from_edges(2, {{0, 1, 1}}); }

inline LabeledGraph cycle(std::size_t n) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 1.0});
    return from_edges(n, std::move(edges));
}

/// Two 5-cliques joined by a single bridge edge; labels 0/1 per block.
inline LabeledGraph two_block_toy() {
    std::vector<Edge> edges;
    for (std::size_t b = 0; b < 2; ++b) {
        const std::size_t base = 5 * b;
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = i + 1; j < 5; ++j) edges.push_back({base + i, base + j, 1.0});
    }
    edges.push_back({4, 5, 1.0});
    LabeledGraph g = from_edges(10, std::move(edges));
    for (std::size_t v = 0; v < 10; ++v) g.labels[v] = v < 5 ? 0 : 1;
    return g;
}

inline bool is_connected(const LabeledGraph& g) {
    if (g.node_count == 0) return false;
    std::vector<std::vector<std::size_t>> adj(g.node_count);
    for (const Edge& e : g.edges) {
        adj[e.i].push_back(e.j);
        adj[e.j].push_back(e.i);
    }
    std::vector<bool> seen(g.node_count, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t count = 0;
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        ++count;
        for (std::size_t v : adj[u])
            if (!seen[v]) {
                seen[v] = true;
                stack.push_back(v);
            }
    }
    return count == g.node_count;
}

inline bool is_bipartite(const LabeledGraph& g) {
    std::vector<std::vector<std::size_t>> adj(g.node_count);
    for (const Edge& e : g.edges) {
        if (e.i == e.j) return false;  // self loop breaks bipartiteness
        adj[e.i].push_back(e.j);
        adj[e.j].push_back(e.i);
    }
    std::vector<int> color(g.node_count, -1);
    for (std::size_t s = 0; s < g.node_count; ++s) {
        if (color[s] >= 0) continue;
        color[s] = 0;
        std::vector<std::size_t> stack{s};
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t v : adj[u]) {
                if (color[v] < 0) {
                    color[v] = 1 - color[u];
                    stack.push_back(v);
                } else if (color[v] == color[u]) {
                    return false;
                }
            }
        }
    }
    return true;
}

/// Erdos-Renyi draw, retried until connected and non-bipartite.
inline LabeledGraph random_connected_graph(std::size_t n, double p, Rng& rng) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        std::vector<Edge> edges;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (rng.real() < p) edges.push_back({i, j, 1.0});
        LabeledGraph g = from_edges(n, std::move(edges));
        if (is_connected(g) && !is_bipartite(g)) return g;
    }
    throw std::runtime_error("random_connected_graph: no draw succeeded");
}

/// Planted-partition graph; labels carry the block assignment.
inline LabeledGraph stochastic_block_model(std::size_t n, std::size_t blocks, double p_in,
                                           double p_out, Rng& rng) {
    std::vector<Edge> edges;
    std::vector<int> block_of(n);
    for (std::size_t v = 0; v < n; ++v) block_of[v] = static_cast<int>(v % blocks);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double p = block_of[i] == block_of[j] ? p_in : p_out;
            if (rng.real() < p) edges.push_back({i, j, 1.0});
        }
    LabeledGraph g = from_edges(n, std::move(edges));
    for (std::size_t v = 0; v < n; ++v) g.labels[v] = block_of[v];
    return g;
}

inline std::istringstream lines(std::initializer_list<std::string> rows) {
    std::string text;
    for (const auto& row : rows) {
        text += row;
        text += '\n';
    }
    return std::istringstream(text);
}

}  // namespace cte::testing
