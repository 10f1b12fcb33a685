// conlab: command-line front end for the consensus_lab library.

#include "consensus_lab/consensus_lab.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace cl = consensus_lab;

namespace {

// Raised for bad flags or values; exit status 2.
struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FamilyOptions {
    std::string family;
    std::string fam_file;
    std::size_t dim = 1;
    double tau = 0.0;
    double delta = 0.5;
    bool perturb_zero = false;
    std::string conductances = "1";
    double self_conductance = 0.0;

    void attach(CLI::App* app) {
        app->add_option("--family", family, "grid | directed_torus | lazy_torus | drift_line | drift_cycle | conductance");
        app->add_option("--fam", fam_file, "FAM v1 family file");
        app->add_option("--dim", dim, "lattice dimension d");
        app->add_option("--tau", tau, "self-confidence tau");
        app->add_option("--delta", delta, "drift delta");
        app->add_flag("--perturb-zero", perturb_zero, "drift_cycle: redirect state 0");
        app->add_option("--conductances", conductances, "conductance: comma-separated periodic edge values");
        app->add_option("--self-conductance", self_conductance, "conductance: self-loop conductance");
    }

    bool given() const { return !family.empty() || !fam_file.empty(); }

    cl::GraphFamily build() const {
        if (!fam_file.empty()) return cl::read_family_file(fam_file);
        if (family.empty()) throw usage_error("a family is required (--family or --fam)");
        cl::FamilyParameters p;
        p.dimension = dim;
        p.tau = tau;
        p.delta = delta;
        p.perturb_zero = perturb_zero;
        p.self_conductance = self_conductance;
        p.conductances.clear();
        std::stringstream ss(conductances);
        for (std::string item; std::getline(ss, item, ',');) {
            double v = 0.0;
            if (!cl::detail::parse_number(item, v)) throw usage_error("bad --conductances value '" + item + "'");
            p.conductances.push_back(v);
        }
        auto kind = cl::parse_family_kind(family);
        if (kind == cl::FamilyKind::custom) throw usage_error("custom families are not available from the command line");
        return {kind, p};
    }
};

std::vector<std::size_t> parse_range(const std::string& text) {
    auto colon = text.find(':');
    std::size_t a = 0, b = 0;
    bool ok = colon == std::string::npos
                  ? cl::detail::parse_number(text, a)
                  : cl::detail::parse_number(text.substr(0, colon), a) && cl::detail::parse_number(text.substr(colon + 1), b);
    if (colon == std::string::npos) b = a;
    if (!ok || a > b) throw usage_error("bad size range '" + text + "' (expected a:b)");
    std::vector<std::size_t> sizes;
    for (std::size_t n = a; n <= b; ++n) sizes.push_back(n);
    return sizes;
}

std::vector<std::size_t> parse_indices(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        std::size_t v = 0;
        if (!cl::detail::parse_number(item, v)) throw usage_error("bad state index '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw usage_error("empty state list");
    return out;
}

unsigned thread_count() {
    if (const char* env = std::getenv("CONLAB_THREADS")) {
        unsigned v = 0;
        if (cl::detail::parse_number(std::string(env), v) && v > 0) return v;
        throw usage_error("CONLAB_THREADS must be a positive integer");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw usage_error("cannot write '" + path + "'");
    out << text;
}

std::string dump(const cl::json& j) { return j.dump(2) + "\n"; }

cl::json weights_json(const std::vector<double>& w) {
    cl::json arr = cl::json::array();
    for (double x : w) arr.push_back(x);
    return arr;
}

// Input matrix either from -i or generated from family flags at size --n.
cl::FamilyMember load_member(const std::string& input, const FamilyOptions& fam, const std::string& size) {
    if (!input.empty()) return cl::indexed_member(cl::read_smat_file(input));
    if (!fam.given()) throw usage_error("an input matrix (-i) or a family is required");
    if (size.empty()) throw usage_error("--n is required with a family");
    auto sizes = parse_range(size);
    if (sizes.size() != 1) throw usage_error("--n must be a single size here");
    return fam.build().generate(sizes.front());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Consensus weight laboratory: stochastic matrices, democracy scans and return times"};
    app.require_subcommand(1, 1);

    FamilyOptions fam;
    std::string input, output, size, method = "direct", pert_file, json_out;
    std::optional<double> lambda;
    std::vector<std::string> track;
    double tol = cl::default_power_tolerance;
    std::size_t max_iter = cl::default_power_max_iter;
    std::optional<unsigned> threads;

    auto* generate = app.add_subcommand("generate", "write a family member as SMAT");
    fam.attach(generate);
    generate->add_option("--n", size, "size index n")->required();
    generate->add_option("-o,--output", output, "output SMAT path (default stdout)");

    auto* perturb = app.add_subcommand("perturb", "apply a PERT v1 perturbation");
    fam.attach(perturb);
    perturb->add_option("-i,--input", input, "input SMAT");
    perturb->add_option("--n", size, "size index when generating from a family");
    perturb->add_option("--spec,--perturb", pert_file, "PERT v1 file")->required();
    perturb->add_option("--lambda", lambda, "override the homophily factor");
    perturb->add_option("-o,--output", output, "output SMAT path")->required();

    auto* stationary = app.add_subcommand("stationary", "consensus weight vector");
    fam.attach(stationary);
    stationary->add_option("-i,--input", input, "input SMAT");
    stationary->add_option("--n", size, "size index when generating from a family");
    stationary->add_option("--method", method, "direct | lu | power");
    stationary->add_option("--tol", tol, "power iteration tolerance");
    stationary->add_option("--max-iter", max_iter, "power iteration limit");
    stationary->add_option("-o,--output", output, "output JSON path (default stdout)");

    auto* scan = app.add_subcommand("scan", "democracy diagnostics across family sizes");
    fam.attach(scan);
    scan->add_option("--n", size, "inclusive size range a:b")->required();
    scan->add_option("--perturb", pert_file, "PERT v1 file");
    scan->add_option("--lambda", lambda, "override the homophily factor");
    scan->add_option("--track", track, "node label to track, e.g. 0,0 (repeatable)");
    scan->add_option("--method", method, "direct | lu | power");
    scan->add_option("--tol", tol, "power iteration tolerance");
    scan->add_option("--threads", threads, "worker threads (default CONLAB_THREADS or all cores)");
    scan->add_option("-o,--output", output, "output CSV path (default stdout)");
    scan->add_option("--json", json_out, "JSON summary path");

    std::string targets, start_text, return_text;
    auto* hitting = app.add_subcommand("hitting", "expected hitting or return time");
    fam.attach(hitting);
    hitting->add_option("-i,--input", input, "input SMAT");
    hitting->add_option("--n", size, "size index when generating from a family");
    auto* target_opt = hitting->add_option("--target", targets, "comma-separated target states");
    auto* start_opt = hitting->add_option("--start", start_text, "start state");
    auto* return_opt = hitting->add_option("--return", return_text, "state whose return time is wanted");
    target_opt->needs(start_opt);
    start_opt->needs(target_opt);
    return_opt->excludes(target_opt);

    std::size_t node = 0, samples = 10000, steps = 0, burn_in = 0;
    std::optional<std::uint64_t> seed;
    bool occupation = false;
    std::uint64_t step_cap = 1'000'000'000ULL;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo return times or occupation");
    fam.attach(simulate);
    simulate->add_option("-i,--input", input, "input SMAT");
    simulate->add_option("--n", size, "size index when generating from a family");
    simulate->add_option("--node", node, "start/return state");
    simulate->add_option("--samples", samples, "number of return-time samples");
    simulate->add_option("--seed", seed, "64-bit seed (generated and reported when absent)");
    simulate->add_option("--step-cap", step_cap, "per-sample step cap");
    simulate->add_option("--threads", threads, "worker threads");
    simulate->add_flag("--occupation", occupation, "estimate occupation frequencies instead");
    simulate->add_option("--steps", steps, "trajectory length for --occupation");
    simulate->add_option("--burn-in", burn_in, "discarded prefix for --occupation");

    std::vector<std::string> checks;
    std::string nodes_text = "all";
    double verify_tol = 1e-8;
    bool skip_large = false;
    auto* verify = app.add_subcommand("verify", "run identity checks (kac, reversible, degree-bound, drift-line, gamblers-ruin, all)");
    verify->add_option("checks", checks, "checks to run")->required();
    verify->add_option("-i,--input", input, "input SMAT (default: built-in corpus)");
    verify->add_option("--nodes", nodes_text, "Kac nodes: all or comma-separated states");
    verify->add_option("--tol", verify_tol, "Kac tolerance");
    verify->add_flag("--skip-large", skip_large, "leave out the 10^4-state corpus members");
    verify->add_option("-o,--output", output, "output JSON path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (generate->parsed()) {
            auto sizes = parse_range(size);
            if (sizes.size() != 1) throw usage_error("--n must be a single size");
            auto member = fam.build().generate(sizes.front());
            emit(output, cl::to_smat_string(member.matrix));
        } else if (perturb->parsed()) {
            auto member = load_member(input, fam, size);
            auto spec = cl::read_perturbation_file(pert_file);
            if (lambda) spec.lambda = *lambda;
            auto result = cl::apply_perturbation(spec, member);
            emit(output, cl::to_smat_string(result.matrix));
            std::cout << dump({{"states", result.matrix.dimension()}, {"irreducible", result.irreducible}});
        } else if (stationary->parsed()) {
            auto member = load_member(input, fam, size);
            cl::SolveOptions opt{cl::parse_solver(method), tol, max_iter};
            auto pi = cl::solve_stationary(member.matrix, opt);
            const auto arg = pi.argmax();
            cl::json out{{"method", method},
                         {"states", pi.size()},
                         {"max_weight", pi.max()},
                         {"argmax", cl::label_to_json(member.labels[arg])},
                         {"residual", cl::stationary_residual(member.matrix, pi.weights)},
                         {"weights", weights_json(pi.weights)}};
            emit(output, dump(out));
        } else if (scan->parsed()) {
            auto family = fam.build();
            std::optional<cl::PerturbationSpec> spec;
            if (!pert_file.empty()) {
                spec = cl::read_perturbation_file(pert_file);
                if (lambda) spec->lambda = *lambda;
            } else if (lambda) {
                throw usage_error("--lambda needs --perturb");
            }
            std::vector<cl::NodeLabel> tracked;
            for (const auto& t : track) tracked.push_back(cl::parse_label(t));
            cl::ScanOptions opt{{cl::parse_solver(method), tol, max_iter}, threads ? *threads : thread_count()};
            auto records = cl::democracy_scan(family, spec, parse_range(size), tracked, opt);
            std::ostringstream csv;
            cl::write_scan_csv(csv, records, tracked);
            emit(output, csv.str());
            if (!json_out.empty()) emit(json_out, dump(cl::scan_summary(family, spec, records)));
        } else if (hitting->parsed()) {
            auto member = load_member(input, fam, size);
            cl::json out;
            if (!return_text.empty()) {
                auto i = parse_indices(return_text);
                if (i.size() != 1) throw usage_error("--return takes one state");
                auto sol = cl::hitting_times(member.matrix, {{i[0]}, std::nullopt});
                cl::require_irreducible(member.matrix, "hitting --return");
                double value = 1.0;
                for (const auto& e : member.matrix.row(i[0])) value += e.prob * sol.times[e.col];
                out = {{"query", {{"return", i[0]}}}, {"value", value}, {"residual", sol.residual}, {"method", sol.method}};
            } else if (!targets.empty()) {
                auto s = parse_indices(targets);
                auto start = parse_indices(start_text);
                if (start.size() != 1) throw usage_error("--start takes one state");
                auto sol = cl::hitting_times(member.matrix, {s, start[0]});
                out = {{"query", {{"target", s}, {"start", start[0]}}},
                       {"value", sol.times[start[0]]},
                       {"residual", sol.residual},
                       {"method", sol.method}};
            } else {
                throw usage_error("hitting needs --target/--start or --return");
            }
            std::cout << dump(out);
        } else if (simulate->parsed()) {
            auto member = load_member(input, fam, size);
            if (!seed) seed = (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
            if (occupation) {
                auto freq = cl::estimate_stationary_occupation(member.matrix, steps, burn_in, *seed);
                std::cout << dump({{"steps", steps}, {"burn_in", burn_in}, {"seed", *seed}, {"weights", weights_json(freq.weights)}});
            } else {
                cl::SimOptions opt{step_cap, threads ? *threads : 1u};
                try {
                    auto r = cl::simulate_return_time(member.matrix, node, samples, *seed, opt);
                    std::cout << dump({{"estimate", r.estimate},
                                       {"standard_error", r.standard_error},
                                       {"samples", r.samples},
                                       {"seed", r.seed},
                                       {"step_cap_hits", r.step_cap_hits}});
                } catch (const cl::step_cap_exceeded& e) {
                    std::cerr << cl::json{{"error", e.kind()}, {"message", e.what()}, {"seed", *seed},
                                          {"step_cap_hits", e.hits()}}.dump()
                              << "\n";
                    return 1;
                }
            }
        } else if (verify->parsed()) {
            cl::VerifyOptions opt;
            opt.kac_tolerance = verify_tol;
            opt.include_large = !skip_large;
            if (!input.empty()) opt.input = cl::read_smat_file(input);
            if (nodes_text != "all") opt.nodes = parse_indices(nodes_text);
            for (const auto& c : checks)
                if (c != "all" && std::find(cl::verify_check_names().begin(), cl::verify_check_names().end(), c) ==
                                      cl::verify_check_names().end())
                    throw usage_error("unknown check '" + c + "'");
            auto results = cl::verify_suite(checks, opt);
            emit(output, dump(cl::verify_report_json(results)));
            for (const auto& r : results)
                if (r.status == cl::CheckStatus::fail) return 1;
        }
    } catch (const usage_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const cl::format_error& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return 2;
    } catch (const cl::invalid_parameter& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const cl::reducible_chain& e) {
        std::cerr << cl::json{{"error", e.kind()}, {"message", e.what()}, {"components", e.components()}}.dump() << "\n";
        return 1;
    } catch (const cl::consensus_error& e) {
        std::cerr << cl::json{{"error", e.kind()}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << cl::json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
    return 0;
}
