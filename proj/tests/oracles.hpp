#pragma once

// Dense, deliberately naive reference computations used only by the tests.

#include "consensus_lab/consensus_lab.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using Dense = std::vector<std::vector<long double>>;

inline Dense dense(const consensus_lab::SparseStochasticMatrix& p) {
    Dense a(p.dimension(), std::vector<long double>(p.dimension(), 0.0L));
    for (std::size_t i = 0; i < p.dimension(); ++i)
        for (const auto& e : p.row(i)) a[i][e.col] = e.prob;
    return a;
}

// Gaussian elimination with partial pivoting in long double.
inline std::vector<long double> solve(Dense a, std::vector<long double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const long double f = a[r][c] / a[c][c];
            if (f == 0.0L) continue;
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<long double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        long double s = b[r];
        for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * x[k];
        x[r] = s / a[r][r];
    }
    return x;
}

// pi (P - I) = 0 with the last equation replaced by sum(pi) = 1.
inline std::vector<double> stationary(const consensus_lab::SparseStochasticMatrix& p) {
    const std::size_t n = p.dimension();
    auto d = dense(p);
    Dense a(n, std::vector<long double>(n, 0.0L));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[j][i] = d[i][j] - (i == j ? 1.0L : 0.0L);
    std::vector<long double> b(n, 0.0L);
    for (std::size_t j = 0; j < n; ++j) a[n - 1][j] = 1.0L;
    b[n - 1] = 1.0L;
    auto x = solve(a, b);
    return {x.begin(), x.end()};
}

// Hitting times of S from every state, all states assumed to reach S.
inline std::vector<double> hitting(const consensus_lab::SparseStochasticMatrix& p, const std::vector<bool>& in_s) {
    const std::size_t n = p.dimension();
    auto d = dense(p);
    Dense a(n, std::vector<long double>(n, 0.0L));
    std::vector<long double> b(n, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
        a[i][i] = 1.0L;
        if (in_s[i]) continue;
        for (std::size_t j = 0; j < n; ++j) a[i][j] -= d[i][j];
        b[i] = 1.0L;
    }
    auto x = solve(a, b);
    return {x.begin(), x.end()};
}

// Reflexive-transitive closure by Floyd-Warshall on booleans.
inline std::vector<std::vector<bool>> closure(const consensus_lab::SparseStochasticMatrix& p) {
    const std::size_t n = p.dimension();
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
        r[i][i] = true;
        for (const auto& e : p.row(i)) r[i][e.col] = true;
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (r[i][k])
                for (std::size_t j = 0; j < n; ++j)
                    if (r[k][j]) r[i][j] = true;
    return r;
}

inline bool irreducible(const consensus_lab::SparseStochasticMatrix& p) {
    auto r = closure(p);
    for (const auto& row : r)
        for (bool b : row)
            if (!b) return false;
    return true;
}

// Every state lying on some cycle has gcd of its return lengths (up to n^2) equal to 1.
inline bool aperiodic(const consensus_lab::SparseStochasticMatrix& p) {
    const std::size_t n = p.dimension();
    using B = std::vector<std::vector<bool>>;
    B a(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& e : p.row(i)) a[i][e.col] = true;
    B power = a;
    std::vector<std::size_t> g(n, 0);
    for (std::size_t k = 1; k <= n * n; ++k) {
        for (std::size_t i = 0; i < n; ++i)
            if (power[i][i]) g[i] = std::gcd(g[i], k);
        B next(n, std::vector<bool>(n, false));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t m = 0; m < n; ++m)
                if (power[i][m])
                    for (std::size_t j = 0; j < n; ++j)
                        if (a[m][j]) next[i][j] = true;
        power = std::move(next);
    }
    for (auto v : g)
        if (v > 1) return false;
    return true;
}

// Random sparse stochastic matrix; each row gets 1..k entries with dyadic-free weights.
inline consensus_lab::SparseStochasticMatrix random_matrix(std::mt19937_64& rng, std::size_t n, double density) {
    consensus_lab::SparseRows raw(n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> cols;
        for (std::size_t j = 0; j < n; ++j)
            if (u(rng) < density) cols.push_back(j);
        if (cols.empty()) cols.push_back(pick(rng));
        std::vector<double> w;
        double total = 0.0;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            w.push_back(0.05 + u(rng));
            total += w.back();
        }
        double used = 0.0;
        for (std::size_t k = 0; k + 1 < cols.size(); ++k) {
            raw.add(i, cols[k], w[k] / total);
            used += w[k] / total;
        }
        raw.add(i, cols.back(), 1.0 - used);
    }
    return consensus_lab::SparseStochasticMatrix(std::move(raw));
}

} // namespace oracle
