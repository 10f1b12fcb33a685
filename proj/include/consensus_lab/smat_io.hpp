#pragma once

// SMAT v1 text format:
//
//   SMAT 1 <n>
//   <row> <col> <prob>      (0-based, ascending (row, col) order)
//   ...
//   END

#include "consensus_lab/sparse_matrix.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>

namespace consensus_lab {

inline constexpr double smat_read_tolerance = 1e-9;

// 17 significant digits, so every double round-trips through text.
inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_smat(std::ostream& out, const SparseStochasticMatrix& m) {
    out << "SMAT 1 " << m.dimension() << '\n';
    for (std::size_t i = 0; i < m.dimension(); ++i)
        for (const auto& e : m.row(i)) out << i << ' ' << e.col << ' ' << format_real(e.prob) << '\n';
    out << "END\n";
}

inline std::string to_smat_string(const SparseStochasticMatrix& m) {
    std::ostringstream s;
    write_smat(s, m);
    return s.str();
}

namespace detail {

template <typename T>
bool parse_number(const std::string& token, T& value) {
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    return ec == std::errc{} && ptr == token.data() + token.size();
}

} // namespace detail

inline SparseStochasticMatrix read_smat(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& why) -> format_error {
        return format_error("SMAT line " + std::to_string(line_no) + ": " + why);
    };

    if (!std::getline(in, line)) throw format_error("SMAT: empty input");
    ++line_no;
    std::istringstream header(line);
    std::string magic, version, count, extra;
    header >> magic >> version >> count;
    std::size_t n = 0;
    if (magic != "SMAT" || version != "1" || !detail::parse_number(count, n) || (header >> extra))
        throw fail("expected header 'SMAT 1 <n>'");
    if (n == 0) throw fail("dimension must be at least 1");

    SparseRows raw(n);
    bool ended = false;
    bool any = false;
    std::size_t last_row = 0, last_col = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (ended) {
            if (line.find_first_not_of(" \t") == std::string::npos) continue;
            throw fail("content after END");
        }
        if (line == "END") {
            ended = true;
            continue;
        }
        std::istringstream fields(line);
        std::string r, c, p;
        fields >> r >> c >> p;
        std::size_t row = 0, col = 0;
        double prob = 0.0;
        if (!detail::parse_number(r, row) || !detail::parse_number(c, col) || !detail::parse_number(p, prob) ||
            (fields >> extra))
            throw fail("expected '<row> <col> <prob>'");
        if (row >= n || col >= n) throw fail("index out of range");
        if (any && (row < last_row || (row == last_row && col <= last_col)))
            throw fail("entries not in ascending (row, col) order");
        any = true;
        last_row = row;
        last_col = col;
        raw.add(row, col, prob);
    }
    if (!ended) throw format_error("SMAT: missing END line");

    auto report = check_stochastic(raw, smat_read_tolerance);
    if (!report.ok)
        throw format_error("SMAT: not row-stochastic (worst row " + std::to_string(report.worst_row) + " error " +
                           format_real(report.worst_row_sum_error) + ", " +
                           std::to_string(report.negative_entries.size()) + " negative entries)");
    return SparseStochasticMatrix(std::move(raw), smat_read_tolerance);
}

inline SparseStochasticMatrix read_smat_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw format_error("cannot open '" + path + "'");
    return read_smat(in);
}

inline void write_smat_file(const std::string& path, const SparseStochasticMatrix& m) {
    std::ofstream out(path);
    if (!out) throw format_error("cannot write '" + path + "'");
    write_smat(out, m);
}

} // namespace consensus_lab
