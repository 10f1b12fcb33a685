#pragma once

// JSON-based files and summaries:
//   FAM v1   family description   {"format":"FAM","version":1,"kind":...,"parameters":{...}}
//   PERT v1  perturbation spec    {"format":"PERT","version":1,"kind":...,"community":[...],"payload":{...}}
// plus the scan summary that mirrors the scan CSV.

#include "consensus_lab/families.hpp"
#include "consensus_lab/perturbation.hpp"
#include "consensus_lab/scan.hpp"

#include <json.hpp>

#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace consensus_lab {

using json = nlohmann::ordered_json;

// Scalar labels are plain integers, lattice labels are arrays.
inline json label_to_json(const NodeLabel& label) {
    if (label.rank() == 1) return label.coords.front();
    return label.coords;
}

inline NodeLabel label_from_json(const json& j) {
    if (j.is_number_integer()) return NodeLabel::scalar(j.get<std::int64_t>());
    if (j.is_array() && !j.empty()) {
        NodeLabel label;
        for (const auto& c : j) {
            if (!c.is_number_integer()) throw format_error("label coordinates must be integers");
            label.coords.push_back(c.get<std::int64_t>());
        }
        return label;
    }
    if (j.is_string()) return parse_label(j.get<std::string>());
    throw format_error("malformed label " + j.dump());
}

namespace detail {

inline void check_header(const json& j, const char* format) {
    if (!j.is_object() || j.value("format", std::string()) != format || j.value("version", 0) != 1)
        throw format_error(std::string("expected a ") + format + " v1 document");
}

template <typename T>
T field(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw format_error(std::string("field '") + key + "': " + e.what());
    }
}

inline json parse_json_text(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw format_error(std::string(what) + ": " + e.what());
    }
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw format_error("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace detail

// ---------------------------------------------------------------------------
// FAM v1
// ---------------------------------------------------------------------------

inline json family_to_json(const GraphFamily& family) {
    if (family.kind() == FamilyKind::custom) throw invalid_parameter("custom families cannot be serialized");
    const auto& p = family.parameters();
    json params = json::object();
    switch (family.kind()) {
    case FamilyKind::grid:
    case FamilyKind::lazy_torus:
        params["dimension"] = p.dimension;
        params["tau"] = p.tau;
        break;
    case FamilyKind::directed_torus: params["dimension"] = p.dimension; break;
    case FamilyKind::drift_line: params["delta"] = p.delta; break;
    case FamilyKind::drift_cycle:
        params["delta"] = p.delta;
        params["perturb_zero"] = p.perturb_zero;
        break;
    case FamilyKind::conductance:
        params["conductances"] = p.conductances;
        params["self_conductance"] = p.self_conductance;
        break;
    case FamilyKind::custom: break;
    }
    const bool lattice = family.kind() == FamilyKind::grid || family.kind() == FamilyKind::lazy_torus ||
                         family.kind() == FamilyKind::directed_torus;
    return json{{"format", "FAM"},
                {"version", 1},
                {"kind", to_string(family.kind())},
                {"parameters", params},
                {"labels", lattice ? "lattice" : "integer"}};
}

inline GraphFamily family_from_json(const json& j) {
    detail::check_header(j, "FAM");
    auto kind = parse_family_kind(detail::field<std::string>(j, "kind", ""));
    const json params = j.contains("parameters") ? j.at("parameters") : json::object();
    FamilyParameters p;
    p.dimension = detail::field<std::size_t>(params, "dimension", p.dimension);
    p.tau = detail::field<double>(params, "tau", p.tau);
    p.delta = detail::field<double>(params, "delta", p.delta);
    p.perturb_zero = detail::field<bool>(params, "perturb_zero", p.perturb_zero);
    p.conductances = detail::field<std::vector<double>>(params, "conductances", p.conductances);
    p.self_conductance = detail::field<double>(params, "self_conductance", p.self_conductance);
    return GraphFamily(kind, p);
}

inline GraphFamily read_family_file(const std::string& path) {
    return family_from_json(detail::parse_json_text(detail::slurp(path), "FAM"));
}

// ---------------------------------------------------------------------------
// PERT v1
// ---------------------------------------------------------------------------

inline json perturbation_to_json(const PerturbationSpec& spec) {
    json community = json::array();
    for (const auto& l : spec.community) community.push_back(label_to_json(l));
    json payload = json::object();
    switch (spec.kind) {
    case PerturbationKind::replace_rows: {
        json rows = json::array();
        for (const auto& r : spec.rows) {
            json entries = json::array();
            for (const auto& [target, prob] : r.entries) entries.push_back(json::array({label_to_json(target), prob}));
            rows.push_back(json{{"node", label_to_json(r.node)}, {"entries", entries}});
        }
        payload["rows"] = rows;
        break;
    }
    case PerturbationKind::homophily:
        payload["lambda"] = spec.lambda;
        if (spec.tau) payload["tau"] = *spec.tau;
        break;
    case PerturbationKind::cut_edges: {
        json edges = json::array();
        for (const auto& [from, to] : spec.edges) edges.push_back(json::array({label_to_json(from), label_to_json(to)}));
        payload["edges"] = edges;
        break;
    }
    }
    return json{{"format", "PERT"},
                {"version", 1},
                {"kind", to_string(spec.kind)},
                {"community", community},
                {"payload", payload}};
}

/// Besides an explicit "community" list, a lattice box may be given as
/// "community_box": {"dimension": d, "lo": a, "hi": b}, i.e. [a, b]^d.
inline PerturbationSpec perturbation_from_json(const json& j) {
    detail::check_header(j, "PERT");
    PerturbationSpec spec;
    spec.kind = parse_perturbation_kind(detail::field<std::string>(j, "kind", ""));
    if (j.contains("community")) {
        if (!j.at("community").is_array()) throw format_error("PERT: community must be an array");
        for (const auto& l : j.at("community")) spec.community.push_back(label_from_json(l));
    }
    if (j.contains("community_box")) {
        const auto& box = j.at("community_box");
        auto d = detail::field<std::size_t>(box, "dimension", 1);
        auto lo = detail::field<std::int64_t>(box, "lo", 0);
        auto hi = detail::field<std::int64_t>(box, "hi", 0);
        if (d < 1 || lo > hi) throw format_error("PERT: empty community_box");
        std::vector<std::int64_t> c(d, lo);
        while (true) {
            spec.community.emplace_back(c);
            std::size_t k = d;
            while (k > 0 && c[k - 1] == hi) c[--k] = lo;
            if (k == 0) break;
            ++c[k - 1];
        }
    }
    const json payload = j.contains("payload") ? j.at("payload") : json::object();
    switch (spec.kind) {
    case PerturbationKind::replace_rows:
        for (const auto& r : payload.value("rows", json::array())) {
            ReplacementRow row;
            row.node = label_from_json(r.at("node"));
            for (const auto& e : r.at("entries")) {
                if (!e.is_array() || e.size() != 2) throw format_error("PERT: row entries are [label, prob] pairs");
                row.entries.emplace_back(label_from_json(e[0]), e[1].get<double>());
            }
            spec.rows.push_back(std::move(row));
        }
        break;
    case PerturbationKind::homophily:
        spec.lambda = detail::field<double>(payload, "lambda", 1.0);
        if (payload.contains("tau")) spec.tau = payload.at("tau").get<double>();
        if (spec.community.empty()) throw format_error("PERT: homophily needs a community");
        break;
    case PerturbationKind::cut_edges:
        for (const auto& e : payload.value("edges", json::array())) {
            if (!e.is_array() || e.size() != 2) throw format_error("PERT: edges are [from, to] pairs");
            spec.edges.emplace_back(label_from_json(e[0]), label_from_json(e[1]));
        }
        break;
    }
    if (spec.lambda < 1.0) throw format_error("PERT: lambda must be >= 1");
    return spec;
}

inline PerturbationSpec read_perturbation_file(const std::string& path) {
    return perturbation_from_json(detail::parse_json_text(detail::slurp(path), "PERT"));
}

// ---------------------------------------------------------------------------
// Scan summary
// ---------------------------------------------------------------------------

inline json scan_record_to_json(const ScanRecord& r) {
    json tracked = json::array();
    for (const auto& [label, w] : r.tracked_weights)
        tracked.push_back(json{{"label", label_to_json(label)}, {"weight", w}});
    return json{{"n", r.n},
                {"state_count", r.state_count},
                {"max_weight", r.max_weight},
                {"argmax_label", label_to_json(r.argmax_label)},
                {"degree_bound", r.degree_bound ? json(*r.degree_bound) : json(nullptr)},
                {"residual", r.residual},
                {"solver", r.solver},
                {"tracked", tracked}};
}

inline ScanRecord scan_record_from_json(const json& j) {
    ScanRecord r;
    r.n = j.at("n").get<std::size_t>();
    r.state_count = j.at("state_count").get<std::size_t>();
    r.max_weight = j.at("max_weight").get<double>();
    r.argmax_label = label_from_json(j.at("argmax_label"));
    if (!j.at("degree_bound").is_null()) r.degree_bound = j.at("degree_bound").get<double>();
    r.residual = j.at("residual").get<double>();
    r.solver = j.at("solver").get<std::string>();
    for (const auto& t : j.at("tracked")) r.tracked_weights.emplace_back(label_from_json(t.at("label")), t.at("weight").get<double>());
    return r;
}

inline json scan_summary(const GraphFamily& family, const std::optional<PerturbationSpec>& perturbation,
                         const std::vector<ScanRecord>& records) {
    json recs = json::array();
    for (const auto& r : records) recs.push_back(scan_record_to_json(r));
    json meta = json::object();
    if (family.kind() == FamilyKind::drift_cycle && family.parameters().perturb_zero)
        meta["drift_cycle_perturbed_row"] = "state 0 -> +1 with delta, +2 with 1 - delta";
    if (family.kind() == FamilyKind::drift_cycle) meta["drift_cycle_direction"] = "delta toward decreasing labels";
    meta["edge_count_convention"] = "ordered neighbor pairs";
    return json{{"family", family.kind() == FamilyKind::custom ? json(nullptr) : family_to_json(family)},
                {"perturbation", perturbation ? perturbation_to_json(*perturbation) : json(nullptr)},
                {"metadata", meta},
                {"records", recs}};
}

} // namespace consensus_lab
