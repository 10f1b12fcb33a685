#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace consensus_lab {

// Base for every error raised by the library.
class consensus_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "consensus_error"; }
};

class invalid_matrix : public consensus_error {
public:
    using consensus_error::consensus_error;
    const char* kind() const noexcept override { return "invalid_matrix"; }
};

class dimension_mismatch : public consensus_error {
public:
    using consensus_error::consensus_error;
    const char* kind() const noexcept override { return "dimension_mismatch"; }
};

class invalid_parameter : public consensus_error {
public:
    using consensus_error::consensus_error;
    const char* kind() const noexcept override { return "invalid_parameter"; }
};

class format_error : public consensus_error {
public:
    using consensus_error::consensus_error;
    const char* kind() const noexcept override { return "format_error"; }
};

/// Raised when an operation needs a single closed communicating class.
/// Carries the strongly connected components (state indices) found.
class reducible_chain : public consensus_error {
public:
    reducible_chain(const std::string& what, std::vector<std::vector<std::size_t>> components)
        : consensus_error(what), components_(std::move(components)) {}

    const std::vector<std::vector<std::size_t>>& components() const noexcept { return components_; }
    const char* kind() const noexcept override { return "reducible_chain"; }

private:
    std::vector<std::vector<std::size_t>> components_;
};

/// Iterative solver ran out of iterations. Keeps the last iterate.
class convergence_failure : public consensus_error {
public:
    convergence_failure(const std::string& what, std::vector<double> last_iterate, double residual)
        : consensus_error(what), last_iterate_(std::move(last_iterate)), residual_(residual) {}

    const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
    double residual() const noexcept { return residual_; }
    const char* kind() const noexcept override { return "convergence_failure"; }

private:
    std::vector<double> last_iterate_;
    double residual_;
};

/// A hitting-time query whose expectation is infinite or undefined.
class unreachable_target : public consensus_error {
public:
    using consensus_error::consensus_error;
    const char* kind() const noexcept override { return "unreachable_target"; }
};

class step_cap_exceeded : public consensus_error {
public:
    step_cap_exceeded(const std::string& what, std::size_t hits)
        : consensus_error(what), hits_(hits) {}

    std::size_t hits() const noexcept { return hits_; }
    const char* kind() const noexcept override { return "step_cap_exceeded"; }

private:
    std::size_t hits_;
};

} // namespace consensus_lab
