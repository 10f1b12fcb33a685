#pragma once

#include "consensus_lab/families.hpp"
#include "consensus_lab/labels.hpp"
#include "consensus_lab/sparse_matrix.hpp"
#include "consensus_lab/srw.hpp"
#include "consensus_lab/structure.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace consensus_lab {

enum class PerturbationKind { replace_rows, homophily, cut_edges };

inline const char* to_string(PerturbationKind k) {
    switch (k) {
    case PerturbationKind::replace_rows: return "replace_rows";
    case PerturbationKind::homophily: return "homophily";
    case PerturbationKind::cut_edges: return "cut_edges";
    }
    return "?";
}

inline PerturbationKind parse_perturbation_kind(const std::string& s) {
    for (auto k : {PerturbationKind::replace_rows, PerturbationKind::homophily, PerturbationKind::cut_edges})
        if (s == to_string(k)) return k;
    throw invalid_parameter("unknown perturbation kind '" + s + "'");
}

struct ReplacementRow {
    NodeLabel node;
    std::vector<std::pair<NodeLabel, double>> entries;
};

/// A rewrite of the rows of a finite community W, in family-native labels.
struct PerturbationSpec {
    PerturbationKind kind = PerturbationKind::homophily;
    std::vector<NodeLabel> community;
    std::vector<ReplacementRow> rows;                   // replace_rows
    double lambda = 1.0;                                // homophily
    std::optional<double> tau;                          // homophily, checked against the matrix
    std::vector<std::pair<NodeLabel, NodeLabel>> edges; // cut_edges

    // Community actually acted on; for cut_edges it is the set of edge sources.
    std::vector<NodeLabel> effective_community() const {
        std::set<NodeLabel> w(community.begin(), community.end());
        if (kind == PerturbationKind::cut_edges)
            for (const auto& [from, to] : edges) w.insert(from);
        if (kind == PerturbationKind::replace_rows)
            for (const auto& r : rows) w.insert(r.node);
        return {w.begin(), w.end()};
    }
};

struct PerturbationResult {
    SparseStochasticMatrix matrix;
    bool irreducible = true;
};

/// Rows listed in `rows` are replaced; all other rows are copied verbatim.
/// Irreducibility of the result is reported, not enforced.
inline PerturbationResult replace_rows(const SparseStochasticMatrix& p,
                                       const std::map<std::size_t, std::vector<Entry>>& rows) {
    const std::size_t n = p.dimension();
    SparseRows raw = p.to_rows();
    for (const auto& [i, entries] : rows) {
        if (i >= n) throw invalid_parameter("replace_rows: row " + std::to_string(i) + " out of range");
        for (const auto& e : entries)
            if (e.col >= n) throw invalid_parameter("replace_rows: target " + std::to_string(e.col) + " out of range");
        SparseRows single(1);
        single.rows[0] = entries;
        if (!check_stochastic(single, p.tolerance()).ok)
            throw invalid_parameter("replace_rows: replacement row " + std::to_string(i) + " is not stochastic");
        raw.rows[i] = entries;
    }
    SparseStochasticMatrix out(std::move(raw), p.tolerance());
    const bool irreducible = is_irreducible(out);
    return {std::move(out), irreducible};
}

/// Homophily reweighting of a lazy simple random walk. For i in W with
/// degree d_i and d_iW neighbors inside W (i itself excluded):
///   lambda (1 - tau) / (d_i + (lambda - 1) d_iW)  to each neighbor in W,
///          (1 - tau) / (d_i + (lambda - 1) d_iW)  to each neighbor outside,
///   tau to itself. Rows outside W are untouched; lambda = 1 is the identity.
/// A member of W with no neighbor inside W keeps its original row values.
inline SparseStochasticMatrix homophily(const SparseStochasticMatrix& p, const std::vector<std::size_t>& community,
                                        double lambda) {
    if (!(lambda >= 1.0) || !std::isfinite(lambda)) throw invalid_parameter("homophily: lambda must be >= 1");
    if (community.empty()) throw invalid_parameter("homophily: community is empty");
    auto shape = detect_srw(p);
    if (!shape) throw invalid_parameter("homophily: matrix is not a lazy simple random walk");
    if (lambda == 1.0) return p;

    const std::size_t n = p.dimension();
    std::vector<bool> in_w(n, false);
    for (auto i : community) {
        if (i >= n) throw invalid_parameter("homophily: community member out of range");
        in_w[i] = true;
    }
    const double tau = shape->tau;
    SparseRows raw = p.to_rows();
    for (std::size_t i = 0; i < n; ++i) {
        if (!in_w[i]) continue;
        auto r = row_shape(p, i);
        std::size_t inside = 0;
        for (auto j : r.neighbors)
            if (in_w[j]) ++inside;
        const double denom = static_cast<double>(r.neighbors.size()) + (lambda - 1.0) * static_cast<double>(inside);
        auto& row = raw.rows[i];
        row.clear();
        if (tau > 0.0) row.push_back({i, tau});
        for (auto j : r.neighbors) row.push_back({j, (in_w[j] ? lambda : 1.0) * (1.0 - tau) / denom});
    }
    return SparseStochasticMatrix(std::move(raw), p.tolerance());
}

/// Removes directed edges (from, to) of a lazy simple random walk and
/// rebuilds each affected row as tau plus (1 - tau) / d~ over the remaining
/// out-neighbors. Strong connectivity of the result is reported.
inline PerturbationResult cut_directed_edges(const SparseStochasticMatrix& p,
                                             const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    const std::size_t n = p.dimension();
    if (edges.empty()) return {p, is_irreducible(p)};
    if (!detect_srw(p)) throw invalid_parameter("cut_directed_edges: matrix is not a lazy simple random walk");

    std::map<std::size_t, std::set<std::size_t>> removed;
    for (const auto& [from, to] : edges) {
        if (from >= n || to >= n) throw invalid_parameter("cut_directed_edges: edge endpoint out of range");
        if (from == to || p.at(from, to) == 0.0)
            throw invalid_parameter("cut_directed_edges: (" + std::to_string(from) + ", " + std::to_string(to) +
                                    ") is not an edge");
        removed[from].insert(to);
    }
    SparseRows raw = p.to_rows();
    for (const auto& [from, targets] : removed) {
        auto r = row_shape(p, from);
        std::vector<std::size_t> kept;
        for (auto j : r.neighbors)
            if (!targets.count(j)) kept.push_back(j);
        if (kept.empty())
            throw invalid_parameter("cut_directed_edges: state " + std::to_string(from) + " would lose its last out-edge");
        auto& row = raw.rows[from];
        row.clear();
        const double w = (1.0 - r.self) / static_cast<double>(kept.size());
        if (r.self > 0.0) row.push_back({from, r.self});
        for (auto j : kept) row.push_back({j, w});
    }
    SparseStochasticMatrix out(std::move(raw), p.tolerance());
    const bool strongly_connected = is_irreducible(out);
    return {std::move(out), strongly_connected};
}

/// Resolves the labels of `spec` against `member` and applies it.
inline PerturbationResult apply_perturbation(const PerturbationSpec& spec, const FamilyMember& member) {
    std::set<NodeLabel> w(spec.community.begin(), spec.community.end());
    for (const auto& label : spec.effective_community()) member.index_of(label);

    switch (spec.kind) {
    case PerturbationKind::replace_rows: {
        std::map<std::size_t, std::vector<Entry>> rows;
        for (const auto& r : spec.rows) {
            if (!w.empty() && !w.count(r.node))
                throw invalid_parameter("replace_rows: row " + to_string(r.node) + " is outside the community");
            std::vector<Entry> entries;
            for (const auto& [target, prob] : r.entries) entries.push_back({member.index_of(target), prob});
            std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.col < b.col; });
            rows[member.index_of(r.node)] = std::move(entries);
        }
        return replace_rows(member.matrix, rows);
    }
    case PerturbationKind::homophily: {
        std::vector<std::size_t> community;
        for (const auto& label : spec.community) community.push_back(member.index_of(label));
        if (spec.tau) {
            auto shape = detect_srw(member.matrix);
            if (shape && std::abs(shape->tau - *spec.tau) > 1e-12)
                throw invalid_parameter("homophily: spec tau does not match the matrix self-loop weight");
        }
        auto out = homophily(member.matrix, community, spec.lambda);
        const bool irreducible = is_irreducible(out);
        return {std::move(out), irreducible};
    }
    case PerturbationKind::cut_edges: {
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        for (const auto& [from, to] : spec.edges) edges.emplace_back(member.index_of(from), member.index_of(to));
        return cut_directed_edges(member.matrix, edges);
    }
    }
    throw invalid_parameter("unknown perturbation kind");
}

} // namespace consensus_lab
