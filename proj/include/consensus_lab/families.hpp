#pragma once

#include "consensus_lab/labels.hpp"
#include "consensus_lab/sparse_matrix.hpp"
#include "consensus_lab/srw.hpp"
#include "consensus_lab/structure.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace consensus_lab {

// ---------------------------------------------------------------------------
// Labeled family members
// ---------------------------------------------------------------------------

/// One member P^(n) of a family: the matrix plus the stable labels of its
/// states. `labels[i]` names state i; `index` is the inverse map.
struct FamilyMember {
    std::size_t size_index = 0;
    SparseStochasticMatrix matrix;
    std::vector<NodeLabel> labels;
    std::map<NodeLabel, std::size_t> index;

    FamilyMember() = default;
    FamilyMember(std::size_t n, SparseStochasticMatrix m, std::vector<NodeLabel> l)
        : size_index(n), matrix(std::move(m)), labels(std::move(l)) {
        if (labels.size() != matrix.dimension()) throw invalid_parameter("label count does not match dimension");
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (!index.emplace(labels[i], i).second)
                throw invalid_parameter("duplicate node label " + to_string(labels[i]));
    }

    std::optional<std::size_t> find(const NodeLabel& label) const {
        auto it = index.find(label);
        if (it == index.end()) return std::nullopt;
        return it->second;
    }

    std::size_t index_of(const NodeLabel& label) const {
        auto it = index.find(label);
        if (it == index.end())
            throw invalid_parameter("node " + to_string(label) + " is not present at size " + std::to_string(size_index));
        return it->second;
    }
};

// Plain matrices (e.g. read from SMAT) are labeled by their state indices.
inline FamilyMember indexed_member(SparseStochasticMatrix m) {
    std::vector<NodeLabel> labels;
    labels.reserve(m.dimension());
    for (std::size_t i = 0; i < m.dimension(); ++i) labels.push_back(NodeLabel::scalar(static_cast<std::int64_t>(i)));
    return FamilyMember(0, std::move(m), std::move(labels));
}

// ---------------------------------------------------------------------------
// Lattices
// ---------------------------------------------------------------------------

namespace detail {

inline void check_lattice(std::size_t d, std::size_t n, const char* who) {
    if (d < 1) throw invalid_parameter(std::string(who) + ": dimension must be >= 1");
    if (n < 1) throw invalid_parameter(std::string(who) + ": half-width must be >= 1");
    double states = std::pow(2.0 * static_cast<double>(n) + 1.0, static_cast<double>(d));
    if (states > 5e7) throw invalid_parameter(std::string(who) + ": lattice too large");
}

inline void check_tau(double tau, const char* who) {
    if (!(tau >= 0.0 && tau < 1.0)) throw invalid_parameter(std::string(who) + ": tau must lie in [0, 1)");
}

// Points of [-n, n]^d in lexicographic order, which is also index order.
struct Lattice {
    std::size_t d;
    std::int64_t n;
    std::size_t side;
    std::size_t count;

    Lattice(std::size_t dim, std::size_t half) : d(dim), n(static_cast<std::int64_t>(half)), side(2 * half + 1) {
        count = 1;
        for (std::size_t k = 0; k < d; ++k) count *= side;
    }

    std::vector<std::int64_t> coords(std::size_t idx) const {
        std::vector<std::int64_t> c(d);
        for (std::size_t k = d; k-- > 0;) {
            c[k] = static_cast<std::int64_t>(idx % side) - n;
            idx /= side;
        }
        return c;
    }

    std::size_t index(const std::vector<std::int64_t>& c) const {
        std::size_t idx = 0;
        for (std::size_t k = 0; k < d; ++k) idx = idx * side + static_cast<std::size_t>(c[k] + n);
        return idx;
    }

    std::int64_t wrap(std::int64_t x) const {
        const auto s = static_cast<std::int64_t>(side);
        return ((x + n) % s + s) % s - n;
    }

    std::vector<NodeLabel> labels() const {
        std::vector<NodeLabel> out;
        out.reserve(count);
        for (std::size_t i = 0; i < count; ++i) out.emplace_back(coords(i));
        return out;
    }
};

// Uniform (1 - tau) / k over `targets`, tau on the diagonal.
inline void lazy_row(SparseRows& raw, std::size_t i, const std::vector<std::size_t>& targets, double tau) {
    const double w = (1.0 - tau) / static_cast<double>(targets.size());
    if (tau > 0.0) raw.add(i, i, tau);
    for (auto j : targets) raw.add(i, j, w);
}

} // namespace detail

inline std::vector<NodeLabel> lattice_labels(std::size_t d, std::size_t n) { return detail::Lattice(d, n).labels(); }

/// Lazy simple random walk on the box [-n, n]^d with nearest-neighbor edges.
inline SparseStochasticMatrix lazy_srw_grid(std::size_t d, std::size_t n, double tau) {
    detail::check_lattice(d, n, "lazy_srw_grid");
    detail::check_tau(tau, "lazy_srw_grid");
    detail::Lattice lat(d, n);
    SparseRows raw(lat.count);
    std::vector<std::size_t> nbrs;
    for (std::size_t i = 0; i < lat.count; ++i) {
        auto c = lat.coords(i);
        nbrs.clear();
        for (std::size_t k = 0; k < d; ++k)
            for (std::int64_t step : {-1, 1}) {
                auto x = c;
                x[k] += step;
                if (x[k] >= -lat.n && x[k] <= lat.n) nbrs.push_back(lat.index(x));
            }
        detail::lazy_row(raw, i, nbrs, tau);
    }
    return SparseStochasticMatrix(std::move(raw));
}

/// Directed Cayley torus on Z_{2n+1}^d: one edge per +e_k, probability 1/d each.
inline SparseStochasticMatrix directed_torus(std::size_t d, std::size_t n) {
    detail::check_lattice(d, n, "directed_torus");
    detail::Lattice lat(d, n);
    SparseRows raw(lat.count);
    std::vector<std::size_t> nbrs;
    for (std::size_t i = 0; i < lat.count; ++i) {
        auto c = lat.coords(i);
        nbrs.clear();
        for (std::size_t k = 0; k < d; ++k) {
            auto x = c;
            x[k] = lat.wrap(x[k] + 1);
            nbrs.push_back(lat.index(x));
        }
        detail::lazy_row(raw, i, nbrs, 0.0);
    }
    return SparseStochasticMatrix(std::move(raw));
}

/// Lazy simple random walk on the undirected torus Z_{2n+1}^d (2d neighbors).
inline SparseStochasticMatrix lazy_torus(std::size_t d, std::size_t n, double tau) {
    detail::check_lattice(d, n, "lazy_torus");
    detail::check_tau(tau, "lazy_torus");
    detail::Lattice lat(d, n);
    SparseRows raw(lat.count);
    std::vector<std::size_t> nbrs;
    for (std::size_t i = 0; i < lat.count; ++i) {
        auto c = lat.coords(i);
        nbrs.clear();
        for (std::size_t k = 0; k < d; ++k)
            for (std::int64_t step : {-1, 1}) {
                auto x = c;
                x[k] = lat.wrap(x[k] + step);
                nbrs.push_back(lat.index(x));
            }
        detail::lazy_row(raw, i, nbrs, tau);
    }
    return SparseStochasticMatrix(std::move(raw));
}

// ---------------------------------------------------------------------------
// Birth-death chains
// ---------------------------------------------------------------------------

/// States 1..n (indices 0..n-1): step right with delta, left with 1 - delta,
/// blocked moves become self-loops.
inline SparseStochasticMatrix drift_line(std::size_t n, double delta) {
    if (n < 2) throw invalid_parameter("drift_line: n must be >= 2");
    if (!(delta > 0.0 && delta < 1.0)) throw invalid_parameter("drift_line: delta must lie in (0, 1)");
    SparseRows raw(n);
    for (std::size_t i = 0; i < n; ++i) {
        raw.add(i, i == 0 ? i : i - 1, 1.0 - delta);
        if (i == n - 1)
            raw.add(i, i, delta);
        else
            raw.add(i, i + 1, delta);
    }
    return SparseStochasticMatrix(std::move(raw));
}

inline std::vector<NodeLabel> drift_line_labels(std::size_t n) {
    std::vector<NodeLabel> labels;
    for (std::size_t i = 1; i <= n; ++i) labels.push_back(NodeLabel::scalar(static_cast<std::int64_t>(i)));
    return labels;
}

// Cycle labels run from -ceil(n/2)+1 to floor(n/2); label 0 always exists.
inline std::int64_t drift_cycle_lowest_label(std::size_t n) { return -static_cast<std::int64_t>((n + 1) / 2) + 1; }

inline std::vector<NodeLabel> drift_cycle_labels(std::size_t n) {
    std::vector<NodeLabel> labels;
    const auto lo = drift_cycle_lowest_label(n);
    for (std::size_t i = 0; i < n; ++i) labels.push_back(NodeLabel::scalar(lo + static_cast<std::int64_t>(i)));
    return labels;
}

/// Biased walk on the n-cycle: toward decreasing labels with probability
/// delta, increasing with 1 - delta. With `perturb_zero`, state 0 sends
/// delta to label +1 and 1 - delta to label +2, so nothing leaves it toward
/// the negative side.
inline SparseStochasticMatrix drift_cycle(std::size_t n, double delta, bool perturb_zero) {
    if (n < 3) throw invalid_parameter("drift_cycle: n must be >= 3");
    if (!(delta > 0.0 && delta < 1.0)) throw invalid_parameter("drift_cycle: delta must lie in (0, 1)");
    SparseRows raw(n);
    const auto zero = static_cast<std::size_t>(-drift_cycle_lowest_label(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (perturb_zero && i == zero) {
            raw.add(i, (i + 1) % n, delta);
            raw.add(i, (i + 2) % n, 1.0 - delta);
            continue;
        }
        raw.add(i, (i + n - 1) % n, delta);
        raw.add(i, (i + 1) % n, 1.0 - delta);
    }
    return SparseStochasticMatrix(std::move(raw));
}

// ---------------------------------------------------------------------------
// Conductances
// ---------------------------------------------------------------------------

/// Symmetric nonnegative weights C over n vertices (diagonal allowed).
class ConductanceMatrix {
public:
    ConductanceMatrix(SparseRows weights, std::optional<std::vector<double>> declared_values = std::nullopt)
        : weights_(std::move(weights)) {
        const std::size_t n = weights_.dimension;
        if (n == 0 || weights_.rows.size() != n) throw invalid_parameter("conductance: bad dimension");
        for (auto& row : weights_.rows) {
            std::sort(row.begin(), row.end(), [](const Entry& a, const Entry& b) { return a.col < b.col; });
            row.erase(std::remove_if(row.begin(), row.end(), [](const Entry& e) { return e.prob == 0.0; }), row.end());
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < weights_.rows[i].size(); ++k) {
                const auto& e = weights_.rows[i][k];
                if (e.col >= n) throw invalid_parameter("conductance: column out of range");
                if (k > 0 && weights_.rows[i][k - 1].col == e.col) throw invalid_parameter("conductance: duplicate entry");
                if (!(e.prob > 0.0) || !std::isfinite(e.prob))
                    throw invalid_parameter("conductance: entries must be finite and nonnegative");
                if (value(e.col, i) != e.prob)
                    throw invalid_parameter("conductance: not symmetric at (" + std::to_string(i) + ", " +
                                            std::to_string(e.col) + ")");
                if (declared_values &&
                    std::find(declared_values->begin(), declared_values->end(), e.prob) == declared_values->end())
                    throw invalid_parameter("conductance: value outside the declared value set");
            }
            if (row_total(i) <= 0.0) throw invalid_parameter("conductance: zero row sum at " + std::to_string(i));
        }
    }

    std::size_t dimension() const noexcept { return weights_.dimension; }
    const std::vector<Entry>& row(std::size_t i) const { return weights_.rows[i]; }

    double value(std::size_t i, std::size_t j) const {
        const auto& r = weights_.rows[i];
        auto it = std::lower_bound(r.begin(), r.end(), j, [](const Entry& e, std::size_t c) { return e.col < c; });
        return (it != r.end() && it->col == j) ? it->prob : 0.0;
    }

    // C_i
    double row_total(std::size_t i) const { return row_sum(weights_.rows[i]); }

    bool connected() const {
        std::vector<bool> seen(dimension(), false);
        std::queue<std::size_t> q;
        q.push(0);
        seen[0] = true;
        std::size_t count = 1;
        while (!q.empty()) {
            auto u = q.front();
            q.pop();
            for (const auto& e : weights_.rows[u])
                if (!seen[e.col]) {
                    seen[e.col] = true;
                    ++count;
                    q.push(e.col);
                }
        }
        return count == dimension();
    }

private:
    SparseRows weights_;
};

/// Reversible chain P_ij = C_ij / C_i.
inline SparseStochasticMatrix from_conductance(const ConductanceMatrix& c) {
    if (!c.connected()) throw invalid_parameter("from_conductance: conductance graph is disconnected");
    SparseRows raw(c.dimension());
    for (std::size_t i = 0; i < c.dimension(); ++i) {
        const double total = c.row_total(i);
        for (const auto& e : c.row(i)) raw.add(i, e.col, e.prob / total);
    }
    return SparseStochasticMatrix(std::move(raw));
}

/// Path 1..n whose k-th edge carries values[(k-1) mod |values|]; optional
/// uniform self-conductance.
inline ConductanceMatrix periodic_path_conductance(std::size_t n, const std::vector<double>& values,
                                                   double self_conductance = 0.0) {
    if (n < 2) throw invalid_parameter("conductance path: n must be >= 2");
    if (values.empty()) throw invalid_parameter("conductance path: empty value table");
    SparseRows w(n);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        double v = values[k % values.size()];
        w.add(k, k + 1, v);
        w.add(k + 1, k, v);
    }
    if (self_conductance > 0.0)
        for (std::size_t k = 0; k < n; ++k) w.add(k, k, self_conductance);
    std::vector<double> declared = values;
    if (self_conductance > 0.0) declared.push_back(self_conductance);
    return ConductanceMatrix(std::move(w), declared);
}

// ---------------------------------------------------------------------------
// Appended directed cycle
// ---------------------------------------------------------------------------

/// Adds M fresh states n, n+1, ..., n+M-1 forming the directed path
/// exit_node -> n -> ... -> n+M-1 -> entry_node. The exit row becomes a lazy
/// simple random walk over its old out-neighbors plus the new tail head.
inline SparseStochasticMatrix append_cycle_tail(const SparseStochasticMatrix& p, std::size_t exit_node,
                                                std::size_t entry_node, std::size_t tail_length) {
    const std::size_t n = p.dimension();
    if (tail_length < 1) throw invalid_parameter("append_cycle_tail: tail length must be >= 1");
    if (exit_node >= n || entry_node >= n) throw invalid_parameter("append_cycle_tail: node out of range");

    SparseRows raw(n + tail_length);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == exit_node) continue;
        auto r = p.row(i);
        raw.rows[i].assign(r.begin(), r.end());
    }
    auto shape = row_shape(p, exit_node);
    shape.neighbors.push_back(n);
    detail::lazy_row(raw, exit_node, shape.neighbors, shape.self);
    for (std::size_t k = 0; k < tail_length; ++k) {
        std::size_t state = n + k;
        raw.add(state, k + 1 < tail_length ? state + 1 : entry_node, 1.0);
    }
    return SparseStochasticMatrix(std::move(raw), p.tolerance());
}

/// Product of transition probabilities along a BFS shortest path from
/// `from` to `to` (ties broken toward smaller state indices). 1 if from == to.
inline double path_probability(const SparseStochasticMatrix& p, std::size_t from, std::size_t to) {
    constexpr std::size_t unset = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> parent(p.dimension(), unset);
    std::vector<double> via(p.dimension(), 0.0);
    std::queue<std::size_t> q;
    parent[from] = from;
    q.push(from);
    while (!q.empty() && parent[to] == unset) {
        auto u = q.front();
        q.pop();
        for (const auto& e : p.row(u))
            if (parent[e.col] == unset) {
                parent[e.col] = u;
                via[e.col] = e.prob;
                q.push(e.col);
            }
    }
    if (parent[to] == unset) return 0.0;
    double prob = 1.0;
    for (std::size_t v = to; v != from; v = parent[v]) prob *= via[v];
    return prob;
}

/// Tail length (d_exit + 1) * n / min_i q_i, with q_i the path probability
/// from i to exit_node; rounded up.
inline std::size_t suggested_tail_length(const SparseStochasticMatrix& p, std::size_t exit_node) {
    double q_min = 1.0;
    for (std::size_t i = 0; i < p.dimension(); ++i) q_min = std::min(q_min, path_probability(p, i, exit_node));
    if (q_min <= 0.0) throw invalid_parameter("suggested_tail_length: exit node unreachable from some state");
    const double degree = static_cast<double>(row_shape(p, exit_node).neighbors.size());
    const double m = std::ceil((degree + 1.0) * static_cast<double>(p.dimension()) / q_min);
    if (m > 9.0e15) throw invalid_parameter("suggested_tail_length: tail length overflows");
    return static_cast<std::size_t>(m);
}

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

enum class FamilyKind { grid, directed_torus, lazy_torus, drift_line, drift_cycle, conductance, custom };

inline const char* to_string(FamilyKind k) {
    switch (k) {
    case FamilyKind::grid: return "grid";
    case FamilyKind::directed_torus: return "directed_torus";
    case FamilyKind::lazy_torus: return "lazy_torus";
    case FamilyKind::drift_line: return "drift_line";
    case FamilyKind::drift_cycle: return "drift_cycle";
    case FamilyKind::conductance: return "conductance";
    case FamilyKind::custom: return "custom";
    }
    return "?";
}

inline FamilyKind parse_family_kind(const std::string& s) {
    for (auto k : {FamilyKind::grid, FamilyKind::directed_torus, FamilyKind::lazy_torus, FamilyKind::drift_line,
                   FamilyKind::drift_cycle, FamilyKind::conductance, FamilyKind::custom})
        if (s == to_string(k)) return k;
    throw invalid_parameter("unknown family kind '" + s + "'");
}

struct FamilyParameters {
    std::size_t dimension = 1;
    double tau = 0.0;
    double delta = 0.5;
    bool perturb_zero = false;
    std::vector<double> conductances{1.0};
    double self_conductance = 0.0;
};

/// Nested sequence P^(n) indexed by a size parameter n >= min_size().
class GraphFamily {
public:
    using Generator = std::function<FamilyMember(std::size_t)>;

    GraphFamily(FamilyKind kind, FamilyParameters params) : kind_(kind), params_(std::move(params)) {
        if (kind_ == FamilyKind::custom) throw invalid_parameter("custom families need a generator");
    }
    GraphFamily(Generator gen, std::size_t min_size) : kind_(FamilyKind::custom), custom_(std::move(gen)), custom_min_(min_size) {}

    static GraphFamily grid(std::size_t d, double tau) { return {FamilyKind::grid, {.dimension = d, .tau = tau}}; }
    static GraphFamily torus(std::size_t d, double tau) { return {FamilyKind::lazy_torus, {.dimension = d, .tau = tau}}; }
    static GraphFamily cayley_torus(std::size_t d) { return {FamilyKind::directed_torus, {.dimension = d}}; }
    static GraphFamily line(double delta) { return {FamilyKind::drift_line, {.delta = delta}}; }
    static GraphFamily cycle(double delta, bool perturb_zero) {
        return {FamilyKind::drift_cycle, {.delta = delta, .perturb_zero = perturb_zero}};
    }
    static GraphFamily conductance_path(std::vector<double> values, double self = 0.0) {
        return {FamilyKind::conductance, {.conductances = std::move(values), .self_conductance = self}};
    }

    FamilyKind kind() const noexcept { return kind_; }
    const FamilyParameters& parameters() const noexcept { return params_; }

    std::size_t min_size() const noexcept {
        switch (kind_) {
        case FamilyKind::drift_line:
        case FamilyKind::conductance: return 2;
        case FamilyKind::drift_cycle: return 3;
        case FamilyKind::custom: return custom_min_;
        default: return 1;
        }
    }

    FamilyMember generate(std::size_t n) const {
        if (n < min_size())
            throw invalid_parameter(std::string(to_string(kind_)) + " family needs n >= " + std::to_string(min_size()));
        const auto& p = params_;
        switch (kind_) {
        case FamilyKind::grid: return {n, lazy_srw_grid(p.dimension, n, p.tau), lattice_labels(p.dimension, n)};
        case FamilyKind::directed_torus: return {n, directed_torus(p.dimension, n), lattice_labels(p.dimension, n)};
        case FamilyKind::lazy_torus: return {n, lazy_torus(p.dimension, n, p.tau), lattice_labels(p.dimension, n)};
        case FamilyKind::drift_line: return {n, drift_line(n, p.delta), drift_line_labels(n)};
        case FamilyKind::drift_cycle: return {n, drift_cycle(n, p.delta, p.perturb_zero), drift_cycle_labels(n)};
        case FamilyKind::conductance:
            return {n, from_conductance(periodic_path_conductance(n, p.conductances, p.self_conductance)),
                    drift_line_labels(n)};
        case FamilyKind::custom: return custom_(n);
        }
        throw invalid_parameter("unreachable family kind");
    }

private:
    FamilyKind kind_;
    FamilyParameters params_;
    Generator custom_;
    std::size_t custom_min_ = 1;
};

// ---------------------------------------------------------------------------
// Row stabilization
// ---------------------------------------------------------------------------

struct StabilizationReport {
    NodeLabel node;
    std::optional<std::size_t> stabilization_index;  // nullopt: not stabilized within range
    std::size_t n_min = 0;
    std::size_t n_max = 0;
};

/// Smallest tested n_i < n_max such that, for every tested n > n_i, the
/// node's row restricted to V_{n_i} is bit-identical to its row at n_i.
/// The last size never counts as stabilized on its own, since nothing
/// after it confirms it.
inline StabilizationReport check_stabilization(const GraphFamily& family, const NodeLabel& node, std::size_t n_min,
                                               std::size_t n_max) {
    if (n_min > n_max) throw invalid_parameter("check_stabilization: empty range");
    using LabeledRow = std::map<NodeLabel, double>;
    std::vector<LabeledRow> rows;
    std::vector<std::set<NodeLabel>> vertex_sets;
    for (std::size_t n = n_min; n <= n_max; ++n) {
        auto member = family.generate(n);
        auto idx = member.find(node);
        if (!idx) {
            if (n == n_min)
                throw invalid_parameter("check_stabilization: node " + to_string(node) + " absent at n = " +
                                        std::to_string(n_min));
            throw invalid_parameter("check_stabilization: family is not nested at n = " + std::to_string(n));
        }
        LabeledRow row;
        for (const auto& e : member.matrix.row(*idx)) row.emplace(member.labels[e.col], e.prob);
        rows.push_back(std::move(row));
        vertex_sets.emplace_back(member.labels.begin(), member.labels.end());
    }

    StabilizationReport report{node, std::nullopt, n_min, n_max};
    for (std::size_t c = 0; c + 1 < rows.size(); ++c) {
        bool stable = true;
        for (std::size_t later = c + 1; later < rows.size() && stable; ++later) {
            LabeledRow restricted;
            for (const auto& [label, prob] : rows[later])
                if (vertex_sets[c].count(label)) restricted.emplace(label, prob);
            stable = restricted == rows[c];
        }
        if (stable) {
            report.stabilization_index = n_min + c;
            break;
        }
    }
    return report;
}

} // namespace consensus_lab
