#pragma once

// Built-in reference matrices covering every generator and perturbation.

#include "consensus_lab/families.hpp"
#include "consensus_lab/perturbation.hpp"

#include <optional>
#include <string>
#include <vector>

namespace consensus_lab {

struct CorpusEntry {
    std::string name;
    SparseStochasticMatrix matrix;
    std::optional<ConductanceMatrix> conductance;  // set for reversible members
    bool large = false;
};

// Undirected k-cycle with unit conductances.
inline ConductanceMatrix ring_conductance(std::size_t k) {
    SparseRows w(k);
    for (std::size_t i = 0; i < k; ++i) {
        w.add(i, (i + 1) % k, 1.0);
        w.add((i + 1) % k, i, 1.0);
    }
    return ConductanceMatrix(std::move(w));
}

inline std::vector<std::size_t> lattice_box_indices(const FamilyMember& member, std::int64_t lo, std::int64_t hi) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < member.labels.size(); ++i) {
        bool inside = true;
        for (auto c : member.labels[i].coords) inside = inside && c >= lo && c <= hi;
        if (inside) out.push_back(i);
    }
    return out;
}

inline std::vector<CorpusEntry> reference_corpus(bool include_large = true) {
    std::vector<CorpusEntry> c;
    auto add = [&](std::string name, SparseStochasticMatrix m) { c.push_back({std::move(name), std::move(m), std::nullopt, false}); };

    add("grid d=1 n=5 tau=0", lazy_srw_grid(1, 5, 0.0));
    add("grid d=2 n=3 tau=0.1", lazy_srw_grid(2, 3, 0.1));
    add("grid d=3 n=2 tau=0.2", lazy_srw_grid(3, 2, 0.2));
    add("directed_torus d=1 n=3", directed_torus(1, 3));
    add("directed_torus d=2 n=3", directed_torus(2, 3));
    add("lazy_torus d=2 n=4 tau=0.1", lazy_torus(2, 4, 0.1));
    add("lazy_torus d=1 n=6 tau=0.5", lazy_torus(1, 6, 0.5));
    add("drift_line n=20 delta=0.75", drift_line(20, 0.75));
    add("drift_line n=15 delta=0.3", drift_line(15, 0.3));
    add("drift_cycle n=12 delta=0.75", drift_cycle(12, 0.75, false));
    add("drift_cycle n=16 delta=0.75 perturbed", drift_cycle(16, 0.75, true));
    add("blend drift_cycle n=16", blend(drift_cycle(16, 0.75, false), drift_cycle(16, 0.75, true), 0.5));
    add("append_cycle_tail grid d=1 n=3 M=4", append_cycle_tail(lazy_srw_grid(1, 3, 0.0), 6, 0, 4));

    {
        auto member = GraphFamily::torus(2, 0.1).generate(3);
        add("homophily lazy_torus n=3 lambda=100", homophily(member.matrix, lattice_box_indices(member, -1, 1), 100.0));
    }
    {
        auto member = GraphFamily::grid(2, 0.2).generate(3);
        add("homophily grid n=3 lambda=10", homophily(member.matrix, lattice_box_indices(member, -1, 1), 10.0));
    }
    {
        auto ring = from_conductance(ring_conductance(4));
        add("cut_edges 4-cycle (1->2)", cut_directed_edges(ring, {{1, 2}}).matrix);
    }
    {
        auto member = GraphFamily::torus(2, 0.1).generate(2);
        auto origin = member.index_of({0, 0});
        add("cut_edges lazy_torus n=2", cut_directed_edges(member.matrix, {{origin, member.index_of({1, 0})},
                                                                             {origin, member.index_of({0, 1})}})
                                            .matrix);
    }
    {
        auto base = drift_cycle(10, 0.6, false);
        const auto zero = static_cast<std::size_t>(-drift_cycle_lowest_label(10));
        add("replace_rows drift_cycle n=10", replace_rows(base, {{zero, {{zero, 0.5}, {zero + 1, 0.5}}}}).matrix);
    }

    auto cond = periodic_path_conductance(12, {1.0, 2.0, 5.0}, 1.0);
    c.push_back({"conductance path n=12 values {1,2,5}", from_conductance(cond), cond, false});
    auto ring = ring_conductance(7);
    c.push_back({"conductance ring k=7", from_conductance(ring), ring, false});

    if (include_large) {
        c.push_back({"grid d=2 n=49 tau=0.1", lazy_srw_grid(2, 49, 0.1), std::nullopt, true});
        c.push_back({"drift_cycle n=10000 delta=0.55", drift_cycle(10000, 0.55, false), std::nullopt, true});
    }
    return c;
}

} // namespace consensus_lab
