#pragma once

#include "consensus_lab/families.hpp"
#include "consensus_lab/sparse_matrix.hpp"
#include "consensus_lab/srw.hpp"
#include "consensus_lab/structure.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace consensus_lab {

struct ProbabilityVector {
    std::vector<double> weights;

    std::size_t size() const noexcept { return weights.size(); }
    double operator[](std::size_t i) const { return weights[i]; }

    double max() const { return *std::max_element(weights.begin(), weights.end()); }
    // First index attaining the maximum.
    std::size_t argmax() const {
        return static_cast<std::size_t>(std::max_element(weights.begin(), weights.end()) - weights.begin());
    }
    double sum() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
};

enum class SolverMethod { direct, lu, power };

inline const char* to_string(SolverMethod m) {
    switch (m) {
    case SolverMethod::direct: return "direct";
    case SolverMethod::lu: return "lu";
    case SolverMethod::power: return "power";
    }
    return "?";
}

inline SolverMethod parse_solver(const std::string& s) {
    if (s == "direct") return SolverMethod::direct;
    if (s == "lu") return SolverMethod::lu;
    if (s == "power") return SolverMethod::power;
    throw invalid_parameter("unknown solver method '" + s + "'");
}

inline constexpr double default_power_tolerance = 1e-12;
inline constexpr std::size_t default_power_max_iter = 1'000'000;
inline constexpr double default_direct_residual = 1e-10;

/// ||pi^T P - pi^T||_1
inline double stationary_residual(const SparseStochasticMatrix& p, const std::vector<double>& pi) {
    std::vector<double> next(p.dimension(), 0.0);
    for (std::size_t i = 0; i < p.dimension(); ++i)
        for (const auto& e : p.row(i)) next[e.col] += pi[i] * e.prob;
    double r = 0.0;
    for (std::size_t j = 0; j < p.dimension(); ++j) r += std::abs(next[j] - pi[j]);
    return r;
}

namespace detail {

inline void normalize(std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    for (double& x : v) x /= s;
}

} // namespace detail

/// Stationary vector by sparse state reduction (Grassmann-Taksar-Heyman).
///
/// States are censored out one at a time in a greedy minimum-fill order; the
/// reduced chain's transition weights are only ever added and multiplied, and
/// the pivot S_k is the sum of the remaining outgoing weights instead of
/// 1 - p_kk. No subtraction occurs, so every component of pi, including
/// weights many orders of magnitude below the maximum, comes out with full
/// relative accuracy and strictly positive.
inline ProbabilityVector stationary_direct(const SparseStochasticMatrix& p) {
    require_irreducible(p, "stationary_direct");
    const std::size_t n = p.dimension();
    if (n == 1) return {{1.0}};

    std::vector<std::unordered_map<std::size_t, double>> out(n), in(n);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& e : p.row(i))
            if (e.col != i) {
                out[i][e.col] = e.prob;
                in[e.col][i] = e.prob;
            }

    auto cost = [&](std::size_t v) { return in[v].size() * out[v].size(); };
    std::set<std::pair<std::size_t, std::size_t>> queue;
    std::vector<std::size_t> current_cost(n);
    for (std::size_t v = 0; v < n; ++v) {
        current_cost[v] = cost(v);
        queue.emplace(current_cost[v], v);
    }

    struct Eliminated {
        std::size_t state;
        double pivot;
        std::vector<std::pair<std::size_t, double>> inflow;
    };
    std::vector<Eliminated> order;
    order.reserve(n - 1);
    std::vector<std::pair<std::size_t, double>> outflow;
    std::vector<std::size_t> touched;

    for (std::size_t step = 0; step + 1 < n; ++step) {
        const std::size_t k = queue.begin()->second;
        queue.erase(queue.begin());

        Eliminated rec{k, 0.0, {in[k].begin(), in[k].end()}};
        outflow.assign(out[k].begin(), out[k].end());
        // Deterministic summation and update order.
        std::sort(rec.inflow.begin(), rec.inflow.end());
        std::sort(outflow.begin(), outflow.end());
        for (const auto& [j, w] : outflow) rec.pivot += w;
        if (!(rec.pivot > 0.0))
            throw reducible_chain("stationary_direct: state " + std::to_string(k) + " became absorbing",
                                  strongly_connected_components(p));

        for (const auto& [i, a] : rec.inflow) out[i].erase(k);
        for (const auto& [j, b] : outflow) in[j].erase(k);
        for (const auto& [i, a] : rec.inflow) {
            const double scale = a / rec.pivot;
            for (const auto& [j, b] : outflow) {
                if (i == j) continue;
                const double add = scale * b;
                out[i][j] += add;
                in[j][i] += add;
            }
        }
        in[k].clear();
        out[k].clear();

        touched.clear();
        for (const auto& [i, a] : rec.inflow) touched.push_back(i);
        for (const auto& [j, b] : outflow) touched.push_back(j);
        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
        for (auto v : touched) {
            queue.erase({current_cost[v], v});
            current_cost[v] = cost(v);
            queue.emplace(current_cost[v], v);
        }
        order.push_back(std::move(rec));
    }

    std::vector<double> pi(n, 0.0);
    pi[queue.begin()->second] = 1.0;
    double largest = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        double s = 0.0;
        for (const auto& [i, a] : it->inflow) s += pi[i] * a;
        pi[it->state] = s / it->pivot;
        largest = std::max(largest, pi[it->state]);
        if (largest > 1e250) {
            for (double& x : pi) x *= 1e-250;
            largest *= 1e-250;
        }
    }
    detail::normalize(pi);
    return {std::move(pi)};
}

/// Stationary vector from the sparse LU solve of (P^T - I) pi = 0 with the
/// last equation replaced by sum(pi) = 1.
inline ProbabilityVector stationary_lu(const SparseStochasticMatrix& p) {
    require_irreducible(p, "stationary_lu");
    const auto n = static_cast<Eigen::Index>(p.dimension());
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(p.nonzeros() + 2 * p.dimension());
    for (std::size_t i = 0; i < p.dimension(); ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        for (const auto& e : p.row(i)) {
            const auto row = static_cast<Eigen::Index>(e.col);
            if (row != n - 1) triplets.emplace_back(row, col, e.prob);
        }
        if (col != n - 1) triplets.emplace_back(col, col, -1.0);
        triplets.emplace_back(n - 1, col, 1.0);
    }
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw consensus_error("stationary_lu: factorization failed");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs[n - 1] = 1.0;
    Eigen::VectorXd x = lu.solve(rhs);
    return {std::vector<double>(x.data(), x.data() + n)};
}

/// Power iteration on the lazy chain (P + I) / 2 from the uniform vector;
/// stops when the L1 change of one step is at most `tol`. The lazy chain has
/// the same stationary vector as P and is aperiodic.
inline ProbabilityVector stationary_power(const SparseStochasticMatrix& p, double tol = default_power_tolerance,
                                          std::size_t max_iter = default_power_max_iter) {
    require_irreducible(p, "stationary_power");
    const std::size_t n = p.dimension();
    std::vector<double> x(n, 1.0 / static_cast<double>(n)), next(n);
    double change = INFINITY;
    for (std::size_t it = 0; it < max_iter; ++it) {
        for (std::size_t j = 0; j < n; ++j) next[j] = 0.5 * x[j];
        for (std::size_t i = 0; i < n; ++i) {
            const double half = 0.5 * x[i];
            for (const auto& e : p.row(i)) next[e.col] += half * e.prob;
        }
        detail::normalize(next);
        change = 0.0;
        for (std::size_t j = 0; j < n; ++j) change += std::abs(next[j] - x[j]);
        x.swap(next);
        if (change <= tol) return {std::move(x)};
    }
    throw convergence_failure("stationary_power: no convergence after " + std::to_string(max_iter) + " iterations",
                              x, stationary_residual(p, x));
}

/// pi_i = C_i / sum_j C_j
inline ProbabilityVector reversible_stationary(const ConductanceMatrix& c) {
    if (!c.connected()) throw invalid_parameter("reversible_stationary: conductance graph is disconnected");
    std::vector<double> pi(c.dimension());
    for (std::size_t i = 0; i < c.dimension(); ++i) pi[i] = c.row_total(i);
    detail::normalize(pi);
    return {std::move(pi)};
}

struct SolveOptions {
    SolverMethod method = SolverMethod::direct;
    double power_tolerance = default_power_tolerance;
    std::size_t max_iter = default_power_max_iter;
};

inline ProbabilityVector solve_stationary(const SparseStochasticMatrix& p, const SolveOptions& opt = {}) {
    switch (opt.method) {
    case SolverMethod::direct: return stationary_direct(p);
    case SolverMethod::lu: return stationary_lu(p);
    case SolverMethod::power: return stationary_power(p, opt.power_tolerance, opt.max_iter);
    }
    throw invalid_parameter("unknown solver");
}

/// d / |E| with d the maximum degree and |E| the number of ordered neighbor
/// pairs. Bounds ||pi||_inf for any lazy simple random walk, with equality on
/// regular graphs.
inline double degree_bound(const SparseStochasticMatrix& p) {
    auto shape = detect_srw(p);
    if (!shape) throw invalid_parameter("degree_bound: matrix is not a lazy simple random walk");
    return static_cast<double>(shape->max_degree()) / static_cast<double>(shape->edge_count());
}

} // namespace consensus_lab
