#pragma once

#include "consensus_lab/sparse_matrix.hpp"
#include "consensus_lab/stationary.hpp"
#include "consensus_lab/structure.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <queue>
#include <set>
#include <unordered_map>
#include <string>
#include <vector>

namespace consensus_lab {

struct HittingQuery {
    std::vector<std::size_t> target_set;
    std::optional<std::size_t> start;  // nullopt: every state
};

struct HittingSolution {
    std::vector<double> times;  // E_i(tau_S); NaN where not solved for
    double residual = 0.0;      // max-norm residual of the linear system
    std::string method;         // "state_reduction" or "sparse_lu"
};

namespace detail {

inline std::vector<bool> target_mask(std::size_t n, const std::vector<std::size_t>& targets) {
    if (targets.empty()) throw invalid_parameter("hitting: target set is empty");
    std::vector<bool> mask(n, false);
    for (auto s : targets) {
        if (s >= n) throw invalid_parameter("hitting: target " + std::to_string(s) + " out of range");
        mask[s] = true;
    }
    return mask;
}

// States from which the target set is reachable (reverse BFS).
inline std::vector<bool> can_reach(const SparseStochasticMatrix& p, const std::vector<bool>& target) {
    const std::size_t n = p.dimension();
    std::vector<std::vector<std::size_t>> rev(n);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& e : p.row(i)) rev[e.col].push_back(i);
    std::vector<bool> seen(target);
    std::queue<std::size_t> q;
    for (std::size_t i = 0; i < n; ++i)
        if (target[i]) q.push(i);
    while (!q.empty()) {
        auto v = q.front();
        q.pop();
        for (auto u : rev[v])
            if (!seen[u]) {
                seen[u] = true;
                q.push(u);
            }
    }
    return seen;
}

} // namespace detail

namespace detail {

// Subtraction-free state reduction for h = b + Q h on the unknowns, with
// exit[u] the probability of jumping straight into S. Each pivot is a sum of
// outflows, never 1 - Q_uu, so h keeps full relative accuracy even when it
// spans many orders of magnitude.
inline std::vector<double> hitting_by_reduction(std::vector<std::unordered_map<std::size_t, double>> out,
                                                std::vector<double> exit) {
    const std::size_t m = out.size();
    std::vector<std::unordered_map<std::size_t, double>> in(m);
    for (std::size_t u = 0; u < m; ++u)
        for (const auto& [v, w] : out[u]) in[v][u] = w;
    std::vector<double> b(m, 1.0);

    auto cost = [&](std::size_t v) { return in[v].size() * out[v].size(); };
    std::set<std::pair<std::size_t, std::size_t>> queue;
    std::vector<std::size_t> current_cost(m);
    for (std::size_t v = 0; v < m; ++v) {
        current_cost[v] = cost(v);
        queue.emplace(current_cost[v], v);
    }

    struct Eliminated {
        std::size_t state;
        double pivot;
        std::vector<std::pair<std::size_t, double>> outflow;
    };
    std::vector<Eliminated> order;
    order.reserve(m);
    std::vector<std::pair<std::size_t, double>> inflow;
    std::vector<std::size_t> touched;

    while (!queue.empty()) {
        const std::size_t k = queue.begin()->second;
        queue.erase(queue.begin());

        Eliminated rec{k, exit[k], {out[k].begin(), out[k].end()}};
        inflow.assign(in[k].begin(), in[k].end());
        std::sort(rec.outflow.begin(), rec.outflow.end());
        std::sort(inflow.begin(), inflow.end());
        for (const auto& [j, w] : rec.outflow) rec.pivot += w;
        if (!(rec.pivot > 0.0)) throw unreachable_target("hitting: target set unreachable after reduction");

        for (const auto& [i, a] : inflow) out[i].erase(k);
        for (const auto& [j, w] : rec.outflow) in[j].erase(k);
        for (const auto& [i, a] : inflow) {
            const double scale = a / rec.pivot;
            exit[i] += scale * exit[k];
            b[i] += scale * b[k];
            for (const auto& [j, w] : rec.outflow) {
                if (i == j) continue;
                const double add = scale * w;
                out[i][j] += add;
                in[j][i] += add;
            }
        }
        in[k].clear();
        out[k].clear();

        touched.clear();
        for (const auto& [i, a] : inflow) touched.push_back(i);
        for (const auto& [j, w] : rec.outflow) touched.push_back(j);
        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
        for (auto v : touched) {
            queue.erase({current_cost[v], v});
            current_cost[v] = cost(v);
            queue.emplace(current_cost[v], v);
        }
        order.push_back(std::move(rec));
    }

    std::vector<double> h(m, 0.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        double s = b[it->state];
        for (const auto& [j, w] : it->outflow) s += w * h[j];
        h[it->state] = s / it->pivot;
    }
    return h;
}

} // namespace detail

/// Systems up to this many unknowns go through state reduction; larger ones
/// through sparse LU.
inline constexpr std::size_t reduction_limit = 4096;

/// Expected hitting times of S on the complement of S:
/// h_i = 0 on S, h_i = 1 + sum_j P_ij h_j elsewhere. Only states reachable
/// from `query.start` (all states when unset) enter the system, and each of
/// them must be able to reach S, otherwise the expectation is infinite.
inline HittingSolution hitting_times(const SparseStochasticMatrix& p, const HittingQuery& query) {
    const std::size_t n = p.dimension();
    auto in_target = detail::target_mask(n, query.target_set);
    if (query.start && *query.start >= n) throw invalid_parameter("hitting: start out of range");

    // Unknowns: non-target states visited before absorption.
    std::vector<bool> active(n, false);
    if (query.start) {
        std::queue<std::size_t> q;
        if (!in_target[*query.start]) {
            active[*query.start] = true;
            q.push(*query.start);
        }
        while (!q.empty()) {
            auto u = q.front();
            q.pop();
            for (const auto& e : p.row(u))
                if (!in_target[e.col] && !active[e.col]) {
                    active[e.col] = true;
                    q.push(e.col);
                }
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) active[i] = !in_target[i];
    }

    auto reach = detail::can_reach(p, in_target);
    for (std::size_t i = 0; i < n; ++i)
        if (active[i] && !reach[i])
            throw unreachable_target("hitting: target set unreachable from state " + std::to_string(i) +
                                     (query.start ? " (reachable from start " + std::to_string(*query.start) + ")" : ""));

    constexpr auto unset = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> local(n, unset);
    std::vector<std::size_t> states;
    for (std::size_t i = 0; i < n; ++i)
        if (active[i]) {
            local[i] = states.size();
            states.push_back(i);
        }

    HittingSolution sol;
    sol.times.assign(n, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < n; ++i)
        if (in_target[i]) sol.times[i] = 0.0;
    if (states.empty()) return sol;

    sol.method = states.size() <= reduction_limit ? "state_reduction" : "sparse_lu";
    if (states.size() <= reduction_limit) {
        std::vector<std::unordered_map<std::size_t, double>> out(states.size());
        std::vector<double> exit(states.size(), 0.0);
        for (std::size_t r = 0; r < states.size(); ++r)
            for (const auto& e : p.row(states[r])) {
                if (in_target[e.col])
                    exit[r] += e.prob;
                else if (e.col != states[r])
                    out[r][local[e.col]] = e.prob;
            }
        auto h = detail::hitting_by_reduction(std::move(out), std::move(exit));
        for (std::size_t r = 0; r < states.size(); ++r) sol.times[states[r]] = h[r];
        for (auto i : states) {
            double rhs = 1.0;
            for (const auto& e : p.row(i)) rhs += e.prob * sol.times[e.col];
            sol.residual = std::max(sol.residual, std::abs(sol.times[i] - rhs));
        }
        return sol;
    }

    const auto m = static_cast<Eigen::Index>(states.size());
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t r = 0; r < states.size(); ++r) {
        double diag = 1.0;
        for (const auto& e : p.row(states[r])) {
            if (e.col == states[r])
                diag -= e.prob;
            else if (local[e.col] != unset)
                triplets.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(local[e.col]), -e.prob);
        }
        triplets.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r), diag);
    }
    Eigen::SparseMatrix<double> a(m, m);
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw consensus_error("hitting: factorization failed");
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
    Eigen::VectorXd h = lu.solve(ones);
    sol.residual = (a * h - ones).cwiseAbs().maxCoeff();
    for (std::size_t r = 0; r < states.size(); ++r) sol.times[states[r]] = h[static_cast<Eigen::Index>(r)];
    return sol;
}

/// E_start(tau_S), tau_S = min{t >= 0 : X_t in S}.
inline double expected_hitting(const SparseStochasticMatrix& p, const std::vector<std::size_t>& targets,
                               std::size_t start) {
    return hitting_times(p, {targets, start}).times[start];
}

/// E_i(tau_i^+) = 1 + sum_j P_ij E_j(tau_i).
inline double expected_return(const SparseStochasticMatrix& p, std::size_t i) {
    require_irreducible(p, "expected_return");
    if (i >= p.dimension()) throw invalid_parameter("expected_return: state out of range");
    auto h = hitting_times(p, {{i}, std::nullopt}).times;
    double total = 1.0;
    for (const auto& e : p.row(i)) total += e.prob * h[e.col];
    return total;
}

/// E_i(tau_i^+) for every i from a single sparse factorization.
///
/// B is I - P with row 0 replaced by e_0^T, i.e. the hitting system of
/// target {0}. The hitting system of target {i} differs from B in rows 0
/// and i only, so each further node costs one solve with the factors of B
/// plus a 2x2 Woodbury correction.
inline std::vector<double> expected_returns(const SparseStochasticMatrix& p) {
    require_irreducible(p, "expected_returns");
    const std::size_t n = p.dimension();
    if (n == 1) return {1.0};
    const auto dim = static_cast<Eigen::Index>(n);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(p.nonzeros() + n);
    triplets.emplace_back(0, 0, 1.0);
    for (std::size_t i = 1; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        double diag = 1.0;
        for (const auto& e : p.row(i)) {
            if (e.col == i)
                diag -= e.prob;
            else
                triplets.emplace_back(r, static_cast<Eigen::Index>(e.col), -e.prob);
        }
        triplets.emplace_back(r, r, diag);
    }
    Eigen::SparseMatrix<double> b(dim, dim);
    b.setFromTriplets(triplets.begin(), triplets.end());
    b.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(b);
    if (lu.info() != Eigen::Success) throw consensus_error("expected_returns: factorization failed");

    // (I - P) row k applied to x.
    auto generator_row = [&](std::size_t k, const Eigen::VectorXd& x) {
        double s = x[static_cast<Eigen::Index>(k)];
        for (const auto& e : p.row(k)) s -= e.prob * x[static_cast<Eigen::Index>(e.col)];
        return s;
    };
    auto return_time = [&](std::size_t i, auto&& h) {
        double total = 1.0;
        for (const auto& e : p.row(i)) total += e.prob * h(e.col);
        return total;
    };

    const Eigen::VectorXd g = lu.solve(Eigen::VectorXd::Ones(dim));
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(dim);
    unit[0] = 1.0;
    const Eigen::VectorXd z0 = lu.solve(unit);
    unit[0] = 0.0;

    std::vector<double> out(n);
    out[0] = return_time(0, [&](std::size_t j) { return g[static_cast<Eigen::Index>(j)] - z0[static_cast<Eigen::Index>(j)]; });

    for (std::size_t i = 1; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        unit[ii] = 1.0;
        const Eigen::VectorXd zi = lu.solve(unit);
        unit[ii] = 0.0;
        const Eigen::VectorXd x0 = g - zi;  // B^{-1} (1 - e_i)

        // Target {i} system = B + e_0 (a_0 - e_0)^T + e_i (e_i - a_i)^T.
        auto v0 = [&](const Eigen::VectorXd& x) { return generator_row(0, x) - x[0]; };
        auto vi = [&](const Eigen::VectorXd& x) { return x[ii] - generator_row(i, x); };
        const double c00 = 1.0 + v0(z0), c01 = v0(zi), c10 = vi(z0), c11 = 1.0 + vi(zi);
        const double r0 = v0(x0), r1 = vi(x0);
        const double det = c00 * c11 - c01 * c10;
        const double w0 = (c11 * r0 - c01 * r1) / det;
        const double w1 = (c00 * r1 - c10 * r0) / det;
        out[i] = return_time(i, [&](std::size_t j) {
            const auto jj = static_cast<Eigen::Index>(j);
            return x0[jj] - z0[jj] * w0 - zi[jj] * w1;
        });
    }
    return out;
}

struct KacEntry {
    std::size_t node;
    double weight;       // pi_i
    double return_time;  // E_i(tau_i^+)
    double deviation;    // |pi_i * E_i(tau_i^+) - 1|
};

struct KacReport {
    std::vector<KacEntry> entries;
    double tolerance = 0.0;
    double worst = 0.0;
    bool pass = true;
};

/// Checks pi_i * E_i(tau_i^+) = 1 with pi from the state-reduction solver and
/// the return times from separate hitting-time solves. Large chains with many
/// nodes go through expected_returns instead.
inline KacReport kac_check(const SparseStochasticMatrix& p, const std::vector<std::size_t>& nodes, double tol) {
    auto pi = stationary_direct(p);
    for (auto i : nodes)
        if (i >= p.dimension()) throw invalid_parameter("kac_check: node " + std::to_string(i) + " out of range");
    std::vector<double> batch;
    if (nodes.size() > 8 && p.dimension() > reduction_limit) batch = expected_returns(p);
    KacReport report;
    report.tolerance = tol;
    for (auto i : nodes) {
        double ret = batch.empty() ? expected_return(p, i) : batch[i];
        double dev = std::abs(pi[i] * ret - 1.0);
        report.entries.push_back({i, pi[i], ret, dev});
        report.worst = std::max(report.worst, dev);
    }
    report.pass = report.worst <= tol;
    return report;
}

/// Expected absorption time of the walk on {0..N} started at k, stepping
/// right with p and left with 1 - p, absorbed at 0 and N.
inline double gamblers_ruin_expected(std::size_t barrier, double p, std::size_t k) {
    if (!(p > 0.0 && p < 1.0)) throw invalid_parameter("gamblers_ruin_expected: p must lie in (0, 1)");
    if (k == 0 || k >= barrier) throw invalid_parameter("gamblers_ruin_expected: need 0 < k < N");
    const double kk = static_cast<double>(k), nn = static_cast<double>(barrier);
    const double q = 1.0 - p;
    const double u = (q - p) / p;
    const double x = std::log1p(u);  // log(q / p)
    if (std::abs(nn * x) >= 1.0)
        return (kk - nn * std::expm1(kk * x) / std::expm1(nn * x)) / (q - p);

    // Near p = 1/2 the difference above cancels. Expanding expm1 gives
    // k expm1(Nx) - N expm1(kx) = kN sum_{j>=1} x^(j+1) (N^j - k^j) / (j+1)!,
    // with (N^j - k^j) / (N - k) = h_j, h_1 = 1, h_j = N h_{j-1} + k^(j-1).
    double series = 0.0, h = 1.0, kpow = 1.0, xpow = 1.0, fact = 2.0;
    for (int j = 1; j <= 80; ++j) {
        const double term = xpow * h / fact;
        series += term;
        if (std::abs(term) <= 1e-18 * std::abs(series)) break;
        kpow *= kk;
        h = nn * h + kpow;
        xpow *= x;
        fact *= j + 2;
    }
    const double x_over_gap = u == 0.0 ? 1.0 / p : x / (u * p);  // x / (q - p)
    const double nx = nn * x;
    const double x_over_expm1 = nx == 0.0 ? 1.0 / nn : x / std::expm1(nx);
    return kk * nn * (nn - kk) * series * x_over_gap * x_over_expm1;
}

/// The explicit chain behind gamblers_ruin_expected: states 0..N, barriers
/// absorbing.
inline SparseStochasticMatrix gamblers_ruin_chain(std::size_t barrier, double p) {
    if (barrier < 2) throw invalid_parameter("gamblers_ruin_chain: N must be >= 2");
    SparseRows raw(barrier + 1);
    raw.add(0, 0, 1.0);
    raw.add(barrier, barrier, 1.0);
    for (std::size_t i = 1; i < barrier; ++i) {
        raw.add(i, i - 1, 1.0 - p);
        raw.add(i, i + 1, p);
    }
    return SparseStochasticMatrix(std::move(raw));
}

} // namespace consensus_lab
