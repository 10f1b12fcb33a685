#pragma once

#include "consensus_lab/corpus.hpp"
#include "consensus_lab/formats.hpp"
#include "consensus_lab/hitting.hpp"
#include "consensus_lab/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace consensus_lab {

enum class CheckStatus { pass, fail, skip };

inline const char* to_string(CheckStatus s) {
    switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skip: return "skip";
    }
    return "?";
}

struct CheckResult {
    std::string check;
    std::string target;
    CheckStatus status = CheckStatus::pass;
    double deviation = 0.0;
    double threshold = 0.0;
    std::string reason;
};

inline CheckResult graded(std::string check, std::string target, double deviation, double threshold) {
    return {std::move(check), std::move(target), deviation <= threshold ? CheckStatus::pass : CheckStatus::fail,
            deviation, threshold, {}};
}

inline const std::vector<std::string>& verify_check_names() {
    static const std::vector<std::string> names{"kac", "reversible", "degree-bound", "drift-line", "gamblers-ruin"};
    return names;
}

// Closed form for drift_line: pi_i = r^{i-1} (1 - r) / (1 - r^n), r = delta / (1 - delta).
inline std::vector<double> drift_line_closed_form(std::size_t n, double delta) {
    const double r = delta / (1.0 - delta);
    std::vector<double> pi(n);
    for (std::size_t i = 0; i < n; ++i)
        pi[i] = std::pow(r, static_cast<double>(i)) * (1.0 - r) / (1.0 - std::pow(r, static_cast<double>(n)));
    return pi;
}

inline CheckResult check_kac(const std::string& target, const SparseStochasticMatrix& p,
                             std::optional<std::vector<std::size_t>> nodes, double tol) {
    if (!is_irreducible(p)) return {"kac", target, CheckStatus::skip, 0.0, tol, "matrix is reducible"};
    std::vector<std::size_t> all;
    if (!nodes) {
        all.resize(p.dimension());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        nodes = all;
    }
    auto report = kac_check(p, *nodes, tol);
    return graded("kac", target, report.worst, tol);
}

inline CheckResult check_degree_bound(const std::string& target, const SparseStochasticMatrix& p, double tol = 1e-12) {
    if (!detect_srw(p))
        return {"degree-bound", target, CheckStatus::skip, 0.0, tol, "not a lazy simple random walk"};
    auto pi = stationary_direct(p);
    return graded("degree-bound", target, std::max(0.0, pi.max() - degree_bound(p)), tol);
}

inline CheckResult check_reversible(const std::string& target, const ConductanceMatrix& c, double tol = 1e-12) {
    auto p = from_conductance(c);
    auto closed = reversible_stationary(c);
    auto solved = stationary_direct(p);
    double dev = 0.0;
    for (std::size_t i = 0; i < closed.size(); ++i) dev = std::max(dev, std::abs(closed[i] - solved[i]));
    // Detailed balance of the closed form.
    for (std::size_t i = 0; i < p.dimension(); ++i)
        for (const auto& e : p.row(i)) dev = std::max(dev, std::abs(closed[i] * e.prob - closed[e.col] * p.at(e.col, i)));
    return graded("reversible", target, dev, tol);
}

inline CheckResult check_drift_line(double tol = 1e-12) {
    double dev = 0.0;
    for (double delta : {0.25, 1.0 / 3.0, 0.6, 0.75})
        for (std::size_t n = 2; n <= 200; ++n) {
            auto pi = stationary_direct(drift_line(n, delta));
            auto closed = drift_line_closed_form(n, delta);
            for (std::size_t i = 0; i < n; ++i) dev = std::max(dev, std::abs(pi[i] - closed[i]));
        }
    return graded("drift-line", "delta in {1/4,1/3,0.6,0.75}, n = 2..200", dev, tol);
}

inline CheckResult check_gamblers_ruin(double tol = 1e-10) {
    double dev = 0.0;
    for (int step = 1; step <= 9; ++step) {
        const double p = step / 10.0;
        for (std::size_t barrier = 2; barrier <= 50; ++barrier) {
            auto chain = gamblers_ruin_chain(barrier, p);
            auto h = hitting_times(chain, {{0, barrier}, std::nullopt}).times;
            for (std::size_t k = 1; k < barrier; ++k) dev = std::max(dev, std::abs(h[k] - gamblers_ruin_expected(barrier, p, k)));
        }
    }
    return graded("gamblers-ruin", "p = 0.1..0.9, N = 2..50, all k", dev, tol);
}

struct VerifyOptions {
    std::optional<SparseStochasticMatrix> input;      // replaces the corpus when set
    std::optional<std::vector<std::size_t>> nodes;    // Kac nodes; all when unset
    double kac_tolerance = 1e-8;
    bool include_large = true;
};

/// Runs the named checks; `all` expands to every check.
inline std::vector<CheckResult> verify_suite(std::vector<std::string> checks, const VerifyOptions& opt = {}) {
    if (std::find(checks.begin(), checks.end(), "all") != checks.end()) checks = verify_check_names();
    std::vector<CorpusEntry> corpus;
    if (opt.input)
        corpus.push_back({"input", *opt.input, std::nullopt, false});
    else
        corpus = reference_corpus(opt.include_large);

    std::vector<CheckResult> results;
    for (const auto& name : checks) {
        if (name == "kac") {
            for (const auto& entry : corpus) results.push_back(check_kac(entry.name, entry.matrix, opt.nodes, opt.kac_tolerance));
        } else if (name == "degree-bound") {
            for (const auto& entry : corpus) results.push_back(check_degree_bound(entry.name, entry.matrix));
        } else if (name == "reversible") {
            bool any = false;
            for (const auto& entry : corpus)
                if (entry.conductance) {
                    results.push_back(check_reversible(entry.name, *entry.conductance));
                    any = true;
                }
            if (!any) results.push_back({"reversible", opt.input ? "input" : "corpus", CheckStatus::skip, 0.0, 1e-12,
                                         "needs a conductance matrix"});
        } else if (name == "drift-line") {
            results.push_back(check_drift_line());
        } else if (name == "gamblers-ruin") {
            results.push_back(check_gamblers_ruin());
        } else {
            throw invalid_parameter("unknown check '" + name + "'");
        }
    }
    return results;
}

inline json verify_report_json(const std::vector<CheckResult>& results) {
    json out = json::array();
    for (const auto& r : results) {
        json j{{"check", r.check},
               {"target", r.target},
               {"status", to_string(r.status)},
               {"deviation", r.deviation},
               {"threshold", r.threshold}};
        if (!r.reason.empty()) j["reason"] = r.reason;
        out.push_back(j);
    }
    return out;
}

} // namespace consensus_lab
