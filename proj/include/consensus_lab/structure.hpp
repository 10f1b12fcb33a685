#pragma once

#include "consensus_lab/sparse_matrix.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

namespace consensus_lab {

/// Strongly connected components of the nonzero pattern (iterative Tarjan).
/// Components come out in reverse topological order; members are sorted.
inline std::vector<std::vector<std::size_t>> strongly_connected_components(const SparseStochasticMatrix& m) {
    constexpr std::size_t unvisited = std::numeric_limits<std::size_t>::max();
    const std::size_t n = m.dimension();
    std::vector<std::size_t> index(n, unvisited), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> components;
    std::size_t counter = 0;

    struct Frame {
        std::size_t node;
        std::size_t next_edge;
    };
    std::vector<Frame> call;

    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unvisited) continue;
        call.push_back({root, 0});
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            auto& frame = call.back();
            auto row = m.row(frame.node);
            if (frame.next_edge < row.size()) {
                std::size_t w = row[frame.next_edge++].col;
                if (index[w] == unvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[frame.node] = std::min(low[frame.node], index[w]);
                }
                continue;
            }
            std::size_t v = frame.node;
            call.pop_back();
            if (!call.empty()) low[call.back().node] = std::min(low[call.back().node], low[v]);
            if (low[v] == index[v]) {
                std::vector<std::size_t> comp;
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp.push_back(w);
                } while (w != v);
                std::sort(comp.begin(), comp.end());
                components.push_back(std::move(comp));
            }
        }
    }
    return components;
}

inline bool is_irreducible(const SparseStochasticMatrix& m) {
    return strongly_connected_components(m).size() == 1;
}

inline void require_irreducible(const SparseStochasticMatrix& m, const char* who) {
    auto comps = strongly_connected_components(m);
    if (comps.size() == 1) return;
    const auto what = std::string(who) + ": chain is reducible (" + std::to_string(comps.size()) +
                      " strongly connected components)";
    throw reducible_chain(what, std::move(comps));
}

/// Period of the component containing `members` (sorted). Returns 0 for a
/// single state without a self-loop, which carries no cycle at all.
inline std::size_t component_period(const SparseStochasticMatrix& m, const std::vector<std::size_t>& members) {
    constexpr std::size_t unset = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> level(m.dimension(), unset);
    auto inside = [&](std::size_t v) { return std::binary_search(members.begin(), members.end(), v); };

    std::queue<std::size_t> frontier;
    level[members.front()] = 0;
    frontier.push(members.front());
    std::size_t g = 0;
    while (!frontier.empty()) {
        std::size_t u = frontier.front();
        frontier.pop();
        for (const auto& e : m.row(u)) {
            if (!inside(e.col)) continue;
            if (level[e.col] == unset) {
                level[e.col] = level[u] + 1;
                frontier.push(e.col);
            } else {
                // Each closing edge contributes a cycle-length difference.
                std::size_t a = level[u] + 1, b = level[e.col];
                g = std::gcd(g, a > b ? a - b : b - a);
            }
        }
    }
    return g;
}

/// True when every component that carries a cycle has period 1.
inline bool is_aperiodic(const SparseStochasticMatrix& m) {
    for (const auto& comp : strongly_connected_components(m)) {
        std::size_t g = component_period(m, comp);
        if (g > 1) return false;
    }
    return true;
}

// Neighborhood of a state under the symmetrized edge relation.
struct BallExtract {
    SparseRows submatrix;                 // ball-local indices, rows not renormalized
    std::vector<std::size_t> vertex_map;  // local -> original
    std::vector<std::size_t> distance;    // local -> hop distance from center
    std::vector<bool> boundary_rows;      // row lost mass to states outside the ball
    std::size_t center = 0;
    std::size_t radius = 0;
    const char* distance_rule = "symmetrized";
};

inline BallExtract extract_ball(const SparseStochasticMatrix& m, std::size_t center, std::size_t radius) {
    const std::size_t n = m.dimension();
    if (center >= n) throw invalid_parameter("extract_ball: center " + std::to_string(center) + " out of range");

    // Undirected adjacency: an edge in either direction counts.
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& e : m.row(i))
            if (e.col != i) {
                adj[i].push_back(e.col);
                adj[e.col].push_back(i);
            }

    constexpr std::size_t unset = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> dist(n, unset), local(n, unset);
    BallExtract ball;
    ball.center = center;
    ball.radius = radius;
    std::queue<std::size_t> frontier;
    dist[center] = 0;
    frontier.push(center);
    while (!frontier.empty()) {
        std::size_t u = frontier.front();
        frontier.pop();
        local[u] = ball.vertex_map.size();
        ball.vertex_map.push_back(u);
        ball.distance.push_back(dist[u]);
        if (dist[u] == radius) continue;
        for (std::size_t v : adj[u])
            if (dist[v] == unset) {
                dist[v] = dist[u] + 1;
                frontier.push(v);
            }
    }

    ball.submatrix = SparseRows(ball.vertex_map.size());
    ball.boundary_rows.assign(ball.vertex_map.size(), false);
    for (std::size_t k = 0; k < ball.vertex_map.size(); ++k) {
        for (const auto& e : m.row(ball.vertex_map[k])) {
            if (local[e.col] != unset)
                ball.submatrix.add(k, local[e.col], e.prob);
            else
                ball.boundary_rows[k] = true;
        }
        std::sort(ball.submatrix.rows[k].begin(), ball.submatrix.rows[k].end(),
                  [](const Entry& a, const Entry& b) { return a.col < b.col; });
    }
    return ball;
}

} // namespace consensus_lab
