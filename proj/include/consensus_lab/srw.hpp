#pragma once

#include "consensus_lab/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace consensus_lab {

// Shape of a lazy simple random walk: self-loop tau on every state and
// (1 - tau) / d_i to each of the d_i neighbors, over a symmetric pattern.
struct SrwShape {
    double tau = 0.0;
    std::vector<std::size_t> degrees;  // off-diagonal neighbor counts

    std::size_t max_degree() const {
        std::size_t d = 0;
        for (auto x : degrees) d = std::max(d, x);
        return d;
    }
    // Ordered neighbor pairs, i.e. the directed edge count.
    std::size_t edge_count() const {
        std::size_t s = 0;
        for (auto x : degrees) s += x;
        return s;
    }
};

inline std::optional<SrwShape> detect_srw(const SparseStochasticMatrix& m, double tolerance = 1e-12) {
    SrwShape shape;
    shape.tau = m.at(0, 0);
    shape.degrees.resize(m.dimension());
    for (std::size_t i = 0; i < m.dimension(); ++i) {
        if (std::abs(m.at(i, i) - shape.tau) > tolerance) return std::nullopt;
        std::size_t d = 0;
        for (const auto& e : m.row(i))
            if (e.col != i) ++d;
        if (d == 0) return std::nullopt;
        const double expected = (1.0 - shape.tau) / static_cast<double>(d);
        for (const auto& e : m.row(i)) {
            if (e.col == i) continue;
            if (std::abs(e.prob - expected) > tolerance) return std::nullopt;
            if (m.at(e.col, i) == 0.0) return std::nullopt;
        }
        shape.degrees[i] = d;
    }
    return shape;
}

// Self-loop weight and off-diagonal out-neighbors of a single row.
struct RowShape {
    double self = 0.0;
    std::vector<std::size_t> neighbors;
};

inline RowShape row_shape(const SparseStochasticMatrix& m, std::size_t i) {
    RowShape r;
    for (const auto& e : m.row(i)) {
        if (e.col == i)
            r.self = e.prob;
        else
            r.neighbors.push_back(e.col);
    }
    return r;
}

} // namespace consensus_lab
