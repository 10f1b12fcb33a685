#include "oracles.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace consensus_lab;

namespace {

std::vector<std::size_t> range(std::size_t a, std::size_t b) {
    std::vector<std::size_t> v;
    for (std::size_t n = a; n <= b; ++n) v.push_back(n);
    return v;
}

PerturbationSpec torus_homophily(double lambda) {
    PerturbationSpec spec;
    spec.kind = PerturbationKind::homophily;
    spec.lambda = lambda;
    spec.tau = 0.1;
    for (std::int64_t x = -1; x <= 1; ++x)
        for (std::int64_t y = -1; y <= 1; ++y) spec.community.push_back({x, y});
    return spec;
}

} // namespace

TEST(Scan, DriftLineIsWeaklyButNotFullyDemocratic) {
    auto records = democracy_scan(GraphFamily::line(0.75), std::nullopt, range(2, 100), {NodeLabel::scalar(1)});
    ASSERT_EQ(records.size(), 99u);
    EXPECT_NEAR(records.back().max_weight, 2.0 / 3.0, 1e-6);
    EXPECT_LT(records.back().tracked_weights[0].second, 1e-40);
    EXPECT_FALSE(records.back().degree_bound);
    EXPECT_EQ(records.back().argmax_label, NodeLabel::scalar(100));
}

TEST(Scan, DoublyStochasticFamilyIsUniform) {
    for (const auto& r : democracy_scan(GraphFamily::cayley_torus(2), std::nullopt, range(1, 6), {}))
        EXPECT_NEAR(r.max_weight, 1.0 / static_cast<double>(r.state_count), 1e-15);
    auto recs = democracy_scan(GraphFamily::torus(2, 0.1), std::nullopt, range(1, 5), {{0, 0}});
    for (const auto& r : recs) {
        EXPECT_NEAR(r.max_weight, 1.0 / static_cast<double>(r.state_count), 1e-15);
        ASSERT_TRUE(r.degree_bound);
        EXPECT_NEAR(*r.degree_bound, r.max_weight, 1e-15);
    }
}

TEST(Scan, TiesGoToSmallestLabel) {
    // The 3-cycle solves to three bit-equal weights.
    auto recs = democracy_scan(GraphFamily::cayley_torus(1), std::nullopt, {1}, {});
    auto pi = stationary_direct(directed_torus(1, 1));
    ASSERT_EQ(pi[0], pi[1]);
    ASSERT_EQ(pi[1], pi[2]);
    EXPECT_EQ(recs[0].argmax_label, NodeLabel::scalar(-1));
}

TEST(Scan, TorusHomophilyDecreases) {
    auto recs = democracy_scan(GraphFamily::torus(2, 0.1), torus_homophily(100.0), range(2, 12), {{0, 0}});
    for (std::size_t k = 3; k < recs.size(); ++k) EXPECT_LT(recs[k].max_weight, recs[k - 1].max_weight) << recs[k].n;
}

TEST(Scan, ThreadCountDoesNotChangeRecords) {
    auto a = democracy_scan(GraphFamily::torus(2, 0.1), torus_homophily(10.0), range(2, 9), {{0, 0}, {1, -1}}, {{}, 1});
    auto b = democracy_scan(GraphFamily::torus(2, 0.1), torus_homophily(10.0), range(2, 9), {{0, 0}, {1, -1}}, {{}, 4});
    EXPECT_EQ(a, b);
}

TEST(Scan, MaxWeightNonIncreasingForGrid) {
    auto recs = democracy_scan(GraphFamily::grid(2, 0.1), std::nullopt, range(1, 10), {});
    for (std::size_t k = 1; k < recs.size(); ++k) EXPECT_LE(recs[k].max_weight, recs[k - 1].max_weight);
}

TEST(Scan, Errors) {
    EXPECT_THROW(democracy_scan(GraphFamily::grid(2, 0.1), std::nullopt, {3, 2}, {}), invalid_parameter);
    EXPECT_THROW(democracy_scan(GraphFamily::grid(2, 0.1), std::nullopt, {1, 2}, {{5, 5}}), invalid_parameter);
    // Power iteration with a tiny budget fails at the first size.
    try {
        democracy_scan(GraphFamily::line(0.75), std::nullopt, {5, 60}, {}, {{SolverMethod::power, 1e-14, 3}, 1});
        FAIL();
    } catch (const scan_error& e) {
        EXPECT_TRUE(e.partial().empty());
    }
}

TEST(ScanCsv, RoundTripIsByteIdentical) {
    std::vector<NodeLabel> tracked{{0, 0}, {1, -1}};
    auto recs = democracy_scan(GraphFamily::torus(2, 0.1), torus_homophily(100.0), range(2, 7), tracked);
    std::ostringstream first;
    write_scan_csv(first, recs, tracked);
    std::istringstream in(first.str());
    auto table = read_scan_csv(in);
    EXPECT_EQ(table.tracked, tracked);
    ASSERT_EQ(table.records.size(), recs.size());
    for (std::size_t k = 0; k < recs.size(); ++k) EXPECT_EQ(table.records[k].max_weight, recs[k].max_weight);
    std::ostringstream second;
    write_scan_csv(second, table.records, table.tracked);
    EXPECT_EQ(first.str(), second.str());
    EXPECT_EQ(first.str().substr(0, first.str().find('\n')),
              "n,state_count,max_weight,argmax_label,degree_bound,residual,\"0,0\",\"1,-1\"");
}

TEST(ScanJson, RoundTripIsByteIdentical) {
    auto family = GraphFamily::torus(2, 0.1);
    auto spec = torus_homophily(100.0);
    auto recs = democracy_scan(family, spec, range(2, 5), {{0, 0}});
    auto text = scan_summary(family, spec, recs).dump(2);
    auto parsed = json::parse(text);
    std::vector<ScanRecord> back;
    for (const auto& r : parsed.at("records")) back.push_back(scan_record_from_json(r));
    EXPECT_EQ(back, recs);
    auto again = scan_summary(family_from_json(parsed.at("family")), perturbation_from_json(parsed.at("perturbation")), back);
    EXPECT_EQ(again.dump(2), text);
}

TEST(Formats, FamilyRoundTrip) {
    std::vector<GraphFamily> families{GraphFamily::grid(3, 0.25), GraphFamily::torus(2, 0.1), GraphFamily::cayley_torus(2),
                                      GraphFamily::line(0.3), GraphFamily::cycle(0.75, true),
                                      GraphFamily::conductance_path({1, 2, 5}, 0.5)};
    for (const auto& f : families) {
        auto text = family_to_json(f).dump();
        auto back = family_from_json(json::parse(text));
        EXPECT_EQ(family_to_json(back).dump(), text);
        EXPECT_EQ(back.generate(3).matrix, f.generate(3).matrix);
    }
    EXPECT_THROW(family_from_json(json::parse(R"({"format":"FAM","version":2,"kind":"grid"})")), format_error);
    EXPECT_THROW(family_from_json(json::parse(R"({"format":"FAM","version":1,"kind":"grid","parameters":{"tau":"x"}})")),
                 format_error);
}

TEST(Formats, PerturbationRoundTrip) {
    PerturbationSpec cut;
    cut.kind = PerturbationKind::cut_edges;
    cut.edges = {{{0, 0}, {1, 0}}, {{0, 0}, {0, 1}}};
    PerturbationSpec rep;
    rep.kind = PerturbationKind::replace_rows;
    rep.rows = {{NodeLabel::scalar(0), {{NodeLabel::scalar(1), 0.75}, {NodeLabel::scalar(2), 0.25}}}};
    for (const auto& spec : {torus_homophily(100.0), cut, rep}) {
        auto text = perturbation_to_json(spec).dump();
        EXPECT_EQ(perturbation_to_json(perturbation_from_json(json::parse(text))).dump(), text);
    }
    auto box = perturbation_from_json(json::parse(
        R"({"format":"PERT","version":1,"kind":"homophily","community_box":{"dimension":2,"lo":-1,"hi":1},"payload":{"lambda":100,"tau":0.1}})"));
    EXPECT_EQ(box.community, torus_homophily(100.0).community);
    EXPECT_THROW(perturbation_from_json(json::parse(R"({"format":"PERT","version":1,"kind":"homophily"})")), format_error);
    EXPECT_THROW(perturbation_from_json(json::parse(
                     R"({"format":"PERT","version":1,"kind":"homophily","community":[0],"payload":{"lambda":0.5}})")),
                 format_error);
}

TEST(Formats, Labels) {
    EXPECT_EQ(label_from_json(json(3)), NodeLabel::scalar(3));
    EXPECT_EQ(label_from_json(json::parse("[1,-2]")), (NodeLabel{1, -2}));
    EXPECT_EQ(label_from_json(json("1,-2")), (NodeLabel{1, -2}));
    EXPECT_THROW(label_from_json(json::parse("{}")), format_error);
}
