#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace consensus_lab;

namespace {

SparseStochasticMatrix cycle3() {
    SparseRows raw(3);
    raw.add(0, 1, 1.0);
    raw.add(1, 2, 1.0);
    raw.add(2, 0, 1.0);
    return SparseStochasticMatrix(raw);
}

bool same(const SimResult& a, const SimResult& b) {
    return a.estimate == b.estimate && a.standard_error == b.standard_error && a.samples == b.samples &&
           a.seed == b.seed && a.step_cap_hits == b.step_cap_hits;
}

} // namespace

TEST(Rng, StreamsAreDeterministicAndDistinct) {
    CounterRng a(1, 0), b(1, 0), c(1, 1), d(2, 0);
    for (int k = 0; k < 100; ++k) {
        auto x = a.next();
        EXPECT_EQ(x, b.next());
        EXPECT_NE(x, c.next());
        EXPECT_NE(x, d.next());
    }
    CounterRng u(5, 5);
    double mean = 0.0;
    for (int k = 0; k < 100000; ++k) {
        double v = u.uniform();
        ASSERT_GE(v, 0.0);
        ASSERT_LT(v, 1.0);
        mean += v;
    }
    EXPECT_NEAR(mean / 100000, 0.5, 0.005);
}

TEST(Simulate, DeterministicCycle) {
    auto r = simulate_return_time(cycle3(), 1, 1000, 42);
    EXPECT_EQ(r.estimate, 3.0);
    EXPECT_EQ(r.standard_error, 0.0);
    EXPECT_EQ(r.samples, 1000u);
    EXPECT_EQ(r.step_cap_hits, 0u);
}

TEST(Simulate, KacOracle) {
    auto r = simulate_return_time(drift_line(3, 1.0 / 3.0), 0, 100000, 20240601);
    EXPECT_LT(std::abs(r.estimate - 7.0 / 4.0), 3 * r.standard_error);
}

TEST(Simulate, ReproducibleAcrossRunsAndThreads) {
    auto p = lazy_srw_grid(2, 2, 0.1);
    auto a = simulate_return_time(p, 7, 5000, 99);
    auto b = simulate_return_time(p, 7, 5000, 99);
    auto c = simulate_return_time(p, 7, 5000, 99, {1'000'000'000ULL, 4});
    EXPECT_TRUE(same(a, b));
    EXPECT_TRUE(same(a, c));
    EXPECT_FALSE(same(a, simulate_return_time(p, 7, 5000, 100)));
}

TEST(Simulate, StandardErrorShrinksWithSamples) {
    auto p = lazy_torus(2, 2, 0.2);
    auto small = simulate_return_time(p, 0, 2000, 5);
    auto large = simulate_return_time(p, 0, 32000, 5);
    const double ratio = small.standard_error / large.standard_error;
    EXPECT_GT(ratio, 3.0);
    EXPECT_LT(ratio, 5.5);
}

TEST(Simulate, StepCap) {
    auto p = drift_line(30, 0.75);
    try {
        simulate_return_time(p, 0, 50, 1, {10, 1});
        FAIL();
    } catch (const step_cap_exceeded& e) {
        EXPECT_GT(e.hits(), 0u);
    }
    EXPECT_THROW(simulate_return_time(p, 0, 0, 1), invalid_parameter);
    EXPECT_THROW(simulate_return_time(p, 30, 10, 1), invalid_parameter);
}

TEST(Occupation, DeterministicCycleIsUniform) {
    auto f = estimate_stationary_occupation(cycle3(), 3000, 0, 1);
    for (double w : f.weights) EXPECT_EQ(w, 1.0 / 3.0);
}

TEST(Occupation, SumsToOneAndApproachesPi) {
    auto m = GraphFamily::torus(2, 0.1).generate(3);
    auto p = homophily(m.matrix, lattice_box_indices(m, -1, 1), 10.0);
    auto f = estimate_stationary_occupation(p, 1'000'000, 1000, 77);
    EXPECT_NEAR(f.sum(), 1.0, 1e-12);
    auto pi = stationary_direct(p);
    double l1 = 0.0;
    for (std::size_t i = 0; i < p.dimension(); ++i) l1 += std::abs(f[i] - pi[i]);
    EXPECT_LE(l1, 0.02);
    EXPECT_THROW(estimate_stationary_occupation(p, 10, 10, 1), invalid_parameter);
}
