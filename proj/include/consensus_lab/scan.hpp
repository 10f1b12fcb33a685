#pragma once

#include "consensus_lab/families.hpp"
#include "consensus_lab/perturbation.hpp"
#include "consensus_lab/smat_io.hpp"
#include "consensus_lab/srw.hpp"
#include "consensus_lab/stationary.hpp"

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace consensus_lab {

// Democracy diagnostics of one family member.
struct ScanRecord {
    std::size_t n = 0;
    std::size_t state_count = 0;
    double max_weight = 0.0;
    NodeLabel argmax_label;
    std::vector<std::pair<NodeLabel, double>> tracked_weights;
    std::optional<double> degree_bound;
    std::string solver;
    double residual = 0.0;

    bool operator==(const ScanRecord&) const = default;
};

class scan_error : public consensus_error {
public:
    scan_error(const std::string& what, std::vector<ScanRecord> partial)
        : consensus_error(what), partial_(std::move(partial)) {}
    const std::vector<ScanRecord>& partial() const noexcept { return partial_; }
    const char* kind() const noexcept override { return "scan_error"; }

private:
    std::vector<ScanRecord> partial_;
};

struct ScanOptions {
    SolveOptions solve;
    unsigned threads = 1;
};

inline double residual_limit(const SolveOptions& opt) {
    return opt.method == SolverMethod::power ? std::max(default_direct_residual, 4.0 * opt.power_tolerance)
                                             : default_direct_residual;
}

/// Solves one member (after the optional perturbation) and summarizes it.
/// Ties for the maximum go to the smallest label.
inline ScanRecord scan_member(const FamilyMember& member, const std::optional<PerturbationSpec>& perturbation,
                              const std::vector<NodeLabel>& tracked, const SolveOptions& opt) {
    const SparseStochasticMatrix* matrix = &member.matrix;
    std::optional<PerturbationResult> perturbed;
    if (perturbation) {
        perturbed = apply_perturbation(*perturbation, member);
        matrix = &perturbed->matrix;
    }
    auto pi = solve_stationary(*matrix, opt);

    ScanRecord rec;
    rec.n = member.size_index;
    rec.state_count = matrix->dimension();
    rec.solver = to_string(opt.method);
    rec.residual = stationary_residual(*matrix, pi.weights);
    if (!(rec.residual <= residual_limit(opt)))
        throw consensus_error("scan: residual " + format_real(rec.residual) + " exceeds solver tolerance at n = " +
                              std::to_string(member.size_index));
    rec.max_weight = pi.max();
    bool first = true;
    for (std::size_t i = 0; i < pi.size(); ++i)
        if (pi[i] == rec.max_weight && (first || member.labels[i] < rec.argmax_label)) {
            rec.argmax_label = member.labels[i];
            first = false;
        }
    for (const auto& label : tracked) rec.tracked_weights.emplace_back(label, pi[member.index_of(label)]);
    if (detect_srw(*matrix)) rec.degree_bound = degree_bound(*matrix);
    return rec;
}

/// One record per size, in ascending order. Sizes are independent and are
/// spread over `options.threads` workers; a failure at some size raises
/// scan_error carrying the records of all smaller sizes.
inline std::vector<ScanRecord> democracy_scan(const GraphFamily& family,
                                              const std::optional<PerturbationSpec>& perturbation,
                                              const std::vector<std::size_t>& sizes,
                                              const std::vector<NodeLabel>& tracked, const ScanOptions& options = {}) {
    if (sizes.empty()) return {};
    for (std::size_t k = 1; k < sizes.size(); ++k)
        if (sizes[k] <= sizes[k - 1]) throw invalid_parameter("democracy_scan: sizes must be strictly ascending");
    {
        auto smallest = family.generate(sizes.front());
        for (const auto& label : tracked) smallest.index_of(label);
        if (perturbation)
            for (const auto& label : perturbation->effective_community()) smallest.index_of(label);
    }

    std::vector<std::optional<ScanRecord>> records(sizes.size());
    std::vector<std::exception_ptr> errors(sizes.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < sizes.size();) {
            try {
                records[k] = scan_member(family.generate(sizes[k]), perturbation, tracked, options.solve);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(sizes.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::vector<ScanRecord> out;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        if (errors[k]) {
            std::string why;
            try {
                std::rethrow_exception(errors[k]);
            } catch (const std::exception& e) {
                why = e.what();
            }
            throw scan_error("scan failed at n = " + std::to_string(sizes[k]) + ": " + why, std::move(out));
        }
        out.push_back(std::move(*records[k]));
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back().push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back().push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back().push_back(c);
        }
    }
    if (quoted) throw format_error("CSV: unterminated quote");
    return fields;
}

inline double csv_real(const std::string& s) {
    double v = 0.0;
    if (!parse_number(s, v)) throw format_error("CSV: bad number '" + s + "'");
    return v;
}

} // namespace detail

inline const char* scan_csv_fixed_header = "n,state_count,max_weight,argmax_label,degree_bound,residual";

inline void write_scan_csv(std::ostream& out, const std::vector<ScanRecord>& records,
                           const std::vector<NodeLabel>& tracked) {
    out << scan_csv_fixed_header;
    for (const auto& label : tracked) out << ',' << detail::csv_field(to_string(label));
    out << '\n';
    for (const auto& r : records) {
        out << r.n << ',' << r.state_count << ',' << format_real(r.max_weight) << ','
            << detail::csv_field(to_string(r.argmax_label)) << ','
            << (r.degree_bound ? format_real(*r.degree_bound) : std::string()) << ',' << format_real(r.residual);
        for (const auto& label : tracked) {
            auto it = std::find_if(r.tracked_weights.begin(), r.tracked_weights.end(),
                                   [&](const auto& tw) { return tw.first == label; });
            out << ',' << (it == r.tracked_weights.end() ? std::string() : format_real(it->second));
        }
        out << '\n';
    }
}

struct ScanTable {
    std::vector<NodeLabel> tracked;
    std::vector<ScanRecord> records;
};

inline ScanTable read_scan_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw format_error("CSV: empty input");
    auto header = detail::csv_split(line);
    auto fixed = detail::csv_split(scan_csv_fixed_header);
    if (header.size() < fixed.size() || !std::equal(fixed.begin(), fixed.end(), header.begin()))
        throw format_error("CSV: unexpected header");
    ScanTable table;
    for (std::size_t k = fixed.size(); k < header.size(); ++k) table.tracked.push_back(parse_label(header[k]));

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = detail::csv_split(line);
        if (f.size() != header.size()) throw format_error("CSV: row has " + std::to_string(f.size()) + " fields");
        ScanRecord r;
        if (!detail::parse_number(f[0], r.n) || !detail::parse_number(f[1], r.state_count))
            throw format_error("CSV: bad size fields");
        r.max_weight = detail::csv_real(f[2]);
        r.argmax_label = parse_label(f[3]);
        if (!f[4].empty()) r.degree_bound = detail::csv_real(f[4]);
        r.residual = detail::csv_real(f[5]);
        for (std::size_t k = 0; k < table.tracked.size(); ++k)
            if (!f[fixed.size() + k].empty())
                r.tracked_weights.emplace_back(table.tracked[k], detail::csv_real(f[fixed.size() + k]));
        table.records.push_back(std::move(r));
    }
    return table;
}

} // namespace consensus_lab
