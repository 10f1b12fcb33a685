#pragma once

#include "consensus_lab/sparse_matrix.hpp"
#include "consensus_lab/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

namespace consensus_lab {

/// Counter-based generator: output k of stream s under key `seed` is a pure
/// function of (seed, s, k), so substreams can be handed out per sample and
/// consumed in any order or on any thread.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

    std::uint64_t next() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    std::uint64_t counter() const noexcept { return counter_; }

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Inverse-CDF draw over a sorted row.
inline std::size_t sample_next(const SparseStochasticMatrix& p, std::size_t state, CounterRng& rng) {
    auto row = p.row(state);
    const double u = rng.uniform();
    double cumulative = 0.0;
    for (const auto& e : row) {
        cumulative += e.prob;
        if (u < cumulative) return e.col;
    }
    return row.back().col;
}

struct SimResult {
    double estimate = 0.0;
    double standard_error = 0.0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    std::size_t step_cap_hits = 0;
};

struct SimOptions {
    std::uint64_t step_cap = 1'000'000'000ULL;
    unsigned threads = 1;
};

/// Mean of `samples` independent realizations of tau_i^+ started at i.
/// Sample k draws from substream k, so the result does not depend on
/// `options.threads`.
inline SimResult simulate_return_time(const SparseStochasticMatrix& p, std::size_t i, std::size_t samples,
                                      std::uint64_t seed, const SimOptions& options = {}) {
    if (samples < 1) throw invalid_parameter("simulate_return_time: samples must be >= 1");
    if (i >= p.dimension()) throw invalid_parameter("simulate_return_time: state out of range");

    std::vector<std::uint64_t> lengths(samples, 0);
    auto run = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t k = begin; k < samples; k += stride) {
            CounterRng rng(seed, k);
            std::size_t state = i;
            std::uint64_t steps = 0;
            do {
                state = sample_next(p, state, rng);
                ++steps;
            } while (state != i && steps < options.step_cap);
            lengths[k] = state == i ? steps : 0;
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(samples)));
    if (threads == 1) {
        run(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(run, t, threads);
        for (auto& th : pool) th.join();
    }

    SimResult result;
    result.samples = samples;
    result.seed = seed;
    result.step_cap_hits = static_cast<std::size_t>(std::count(lengths.begin(), lengths.end(), 0));
    if (result.step_cap_hits > 0)
        throw step_cap_exceeded("simulate_return_time: " + std::to_string(result.step_cap_hits) +
                                    " samples exceeded the step cap of " + std::to_string(options.step_cap),
                                result.step_cap_hits);

    // Serial reduction in sample order keeps the sums bit-exact.
    double sum = 0.0;
    for (auto v : lengths) sum += static_cast<double>(v);
    const double mean = sum / static_cast<double>(samples);
    double sq = 0.0;
    for (auto v : lengths) {
        const double d = static_cast<double>(v) - mean;
        sq += d * d;
    }
    result.estimate = mean;
    result.standard_error = samples > 1 ? std::sqrt(sq / static_cast<double>(samples - 1) / static_cast<double>(samples)) : 0.0;
    return result;
}

/// Occupation frequencies of one trajectory from state 0 over steps
/// burn_in+1 .. steps.
inline ProbabilityVector estimate_stationary_occupation(const SparseStochasticMatrix& p, std::size_t steps,
                                                        std::size_t burn_in, std::uint64_t seed) {
    if (steps <= burn_in) throw invalid_parameter("estimate_stationary_occupation: steps must exceed burn_in");
    CounterRng rng(seed, 0);
    std::vector<std::uint64_t> counts(p.dimension(), 0);
    std::size_t state = 0;
    for (std::size_t t = 1; t <= steps; ++t) {
        state = sample_next(p, state, rng);
        if (t > burn_in) ++counts[state];
    }
    const double total = static_cast<double>(steps - burn_in);
    std::vector<double> freq(p.dimension());
    for (std::size_t j = 0; j < freq.size(); ++j) freq[j] = static_cast<double>(counts[j]) / total;
    return {std::move(freq)};
}

} // namespace consensus_lab
