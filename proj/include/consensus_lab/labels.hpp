#pragma once

#include "consensus_lab/errors.hpp"

#include <charconv>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace consensus_lab {

// Stable, family-native node name: a lattice coordinate, or a single integer.
struct NodeLabel {
    std::vector<std::int64_t> coords;

    NodeLabel() = default;
    NodeLabel(std::initializer_list<std::int64_t> c) : coords(c) {}
    explicit NodeLabel(std::vector<std::int64_t> c) : coords(std::move(c)) {}

    static NodeLabel scalar(std::int64_t v) { return NodeLabel{std::vector<std::int64_t>{v}}; }

    std::size_t rank() const noexcept { return coords.size(); }

    auto operator<=>(const NodeLabel&) const = default;
    bool operator==(const NodeLabel&) const = default;
};

// "x,y,z" form, e.g. "0,0" for the grid origin.
inline std::string to_string(const NodeLabel& label) {
    std::string out;
    for (std::size_t k = 0; k < label.coords.size(); ++k) {
        if (k) out.push_back(',');
        out += std::to_string(label.coords[k]);
    }
    return out;
}

inline NodeLabel parse_label(std::string_view text) {
    NodeLabel label;
    std::size_t pos = 0;
    while (true) {
        auto comma = text.find(',', pos);
        auto part = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
        while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size())
            throw format_error("malformed node label '" + std::string(text) + "'");
        label.coords.push_back(v);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return label;
}

} // namespace consensus_lab
