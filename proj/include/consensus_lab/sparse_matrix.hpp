#pragma once

#include "consensus_lab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace consensus_lab {

inline constexpr double default_stochastic_tolerance = 1e-12;

struct Entry {
    std::size_t col;
    double prob;

    bool operator==(const Entry&) const = default;
};

// Unvalidated row-major sparse matrix. Rows may be unsorted, non-stochastic
// or contain negative values; this is what check_stochastic inspects.
struct SparseRows {
    std::size_t dimension = 0;
    std::vector<std::vector<Entry>> rows;

    SparseRows() = default;
    explicit SparseRows(std::size_t n) : dimension(n), rows(n) {}

    void add(std::size_t row, std::size_t col, double value) { rows.at(row).push_back({col, value}); }
};

struct ValidationReport {
    bool ok = true;
    double worst_row_sum_error = 0.0;
    std::size_t worst_row = 0;
    std::vector<std::pair<std::size_t, std::size_t>> negative_entries;
};

inline double row_sum(std::span<const Entry> row) {
    double s = 0.0;
    for (const auto& e : row) s += e.prob;
    return s;
}

inline ValidationReport check_stochastic(const SparseRows& matrix, double tolerance = default_stochastic_tolerance) {
    ValidationReport report;
    for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
        for (const auto& e : matrix.rows[i])
            if (e.prob < 0.0 || std::isnan(e.prob)) report.negative_entries.emplace_back(i, e.col);
        double err = std::abs(row_sum(matrix.rows[i]) - 1.0);
        if (std::isnan(err)) err = INFINITY;
        if (err > report.worst_row_sum_error) {
            report.worst_row_sum_error = err;
            report.worst_row = i;
        }
    }
    report.ok = report.worst_row_sum_error <= tolerance && report.negative_entries.empty();
    return report;
}

/// Immutable row-stochastic matrix in CSR layout.
///
/// Rows are sorted by column, exact zeros are dropped and every row sum is
/// checked against `tolerance` at construction. Nothing is renormalized.
class SparseStochasticMatrix {
public:
    SparseStochasticMatrix() = default;

    explicit SparseStochasticMatrix(SparseRows raw, double tolerance = default_stochastic_tolerance)
        : dimension_(raw.dimension), tolerance_(tolerance) {
        if (dimension_ == 0) throw invalid_matrix("matrix dimension must be at least 1");
        if (raw.rows.size() != dimension_)
            throw invalid_matrix("row count " + std::to_string(raw.rows.size()) + " does not match dimension " +
                                 std::to_string(dimension_));
        offsets_.reserve(dimension_ + 1);
        offsets_.push_back(0);
        for (std::size_t i = 0; i < dimension_; ++i) {
            auto& row = raw.rows[i];
            std::sort(row.begin(), row.end(), [](const Entry& a, const Entry& b) { return a.col < b.col; });
            for (std::size_t k = 0; k < row.size(); ++k) {
                if (row[k].col >= dimension_)
                    throw invalid_matrix("row " + std::to_string(i) + " targets out-of-range state " +
                                         std::to_string(row[k].col));
                if (k > 0 && row[k].col == row[k - 1].col)
                    throw invalid_matrix("row " + std::to_string(i) + " has duplicate target " +
                                         std::to_string(row[k].col));
            }
        }
        auto report = check_stochastic(raw, tolerance);
        if (!report.ok) {
            if (!report.negative_entries.empty()) {
                auto [r, c] = report.negative_entries.front();
                throw invalid_matrix("negative entry at (" + std::to_string(r) + ", " + std::to_string(c) + ")");
            }
            throw invalid_matrix("row " + std::to_string(report.worst_row) + " sums to 1 with error " +
                                 std::to_string(report.worst_row_sum_error) + " > tolerance");
        }
        for (auto& row : raw.rows) {
            for (const auto& e : row)
                if (e.prob != 0.0) entries_.push_back(e);
            offsets_.push_back(entries_.size());
        }
    }

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t nonzeros() const noexcept { return entries_.size(); }
    double tolerance() const noexcept { return tolerance_; }

    std::span<const Entry> row(std::size_t i) const {
        return {entries_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }

    double at(std::size_t i, std::size_t j) const {
        auto r = row(i);
        auto it = std::lower_bound(r.begin(), r.end(), j, [](const Entry& e, std::size_t c) { return e.col < c; });
        return (it != r.end() && it->col == j) ? it->prob : 0.0;
    }

    SparseRows to_rows() const {
        SparseRows raw(dimension_);
        for (std::size_t i = 0; i < dimension_; ++i) {
            auto r = row(i);
            raw.rows[i].assign(r.begin(), r.end());
        }
        return raw;
    }

    std::vector<double> column_sums() const {
        std::vector<double> sums(dimension_, 0.0);
        for (const auto& e : entries_) sums[e.col] += e.prob;
        return sums;
    }

    // Exact (bitwise) equality of structure and values.
    bool operator==(const SparseStochasticMatrix& other) const {
        return dimension_ == other.dimension_ && offsets_ == other.offsets_ && entries_ == other.entries_;
    }

private:
    std::size_t dimension_ = 0;
    double tolerance_ = default_stochastic_tolerance;
    std::vector<std::size_t> offsets_;
    std::vector<Entry> entries_;
};

inline bool rows_identical(const SparseStochasticMatrix& a, std::size_t i, const SparseStochasticMatrix& b, std::size_t j) {
    auto ra = a.row(i);
    auto rb = b.row(j);
    return std::equal(ra.begin(), ra.end(), rb.begin(), rb.end());
}

/// Entrywise weight·P + (1−weight)·Q. The result keeps the stricter tolerance.
inline SparseStochasticMatrix blend(const SparseStochasticMatrix& p, const SparseStochasticMatrix& q, double weight) {
    if (p.dimension() != q.dimension())
        throw dimension_mismatch("blend: dimensions " + std::to_string(p.dimension()) + " and " +
                                 std::to_string(q.dimension()) + " differ");
    if (!(weight >= 0.0 && weight <= 1.0)) throw invalid_parameter("blend weight must lie in [0, 1]");
    const double other = 1.0 - weight;
    SparseRows out(p.dimension());
    for (std::size_t i = 0; i < p.dimension(); ++i) {
        auto a = p.row(i);
        auto b = q.row(i);
        std::size_t x = 0, y = 0;
        auto& row = out.rows[i];
        while (x < a.size() || y < b.size()) {
            if (y == b.size() || (x < a.size() && a[x].col < b[y].col)) {
                row.push_back({a[x].col, weight * a[x].prob});
                ++x;
            } else if (x == a.size() || b[y].col < a[x].col) {
                row.push_back({b[y].col, other * b[y].prob});
                ++y;
            } else {
                row.push_back({a[x].col, weight * a[x].prob + other * b[y].prob});
                ++x;
                ++y;
            }
        }
    }
    return SparseStochasticMatrix(std::move(out), std::min(p.tolerance(), q.tolerance()));
}

} // namespace consensus_lab
