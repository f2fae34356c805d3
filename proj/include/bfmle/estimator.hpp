#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bfmle/homotopy.hpp"
#include "bfmle/problem.hpp"
#include "bfmle/system.hpp"

namespace bfmle {

enum class Method { FixedPoint, Global };
std::string_view to_string(Method m);

struct RealCriticalPoint {
    Vec mu;
    double objective = 0.0;
};

struct EstimateReport {
    Method method = Method::Global;
    Vec mle_mu;
    std::vector<SymMatrix> mle_sigmas;
    double objective_at_mle = 0.0;
    double log_likelihood_at_mle = 0.0;
    // Ascending by objective; empty for the fixed-point method.
    std::vector<RealCriticalPoint> all_real_critical_points;
    std::size_t complex_count = 0;
    std::size_t iterations_or_paths = 0;
    bool converged = true;
    // Two real critical points with objectives within 1e-12.
    bool near_tie = false;
    CriticalPointSet critical_points;
    std::vector<std::string> warnings;
};

struct FixedPointOptions {
    std::size_t max_iters = 1000;
    double tol = 1e-12;
    // Starting mean; when absent the covariances start at the scatter matrices.
    std::optional<Vec> initial_mu;
};

struct FixedPointResult {
    Vec mu;
    std::vector<SymMatrix> sigmas;
    bool converged = false;
    std::size_t iterations = 0;
};

// Alternates mu <- (sum N_i Sigma_i^{-1})^{-1} sum N_i Sigma_i^{-1} m_i and Sigma_i <- S_i + (m_i - mu)(m_i - mu)'.
FixedPointResult fixed_point_iterate(const Problem& problem, const FixedPointOptions& options = {});

EstimateReport estimate_fixed_point(const Problem& problem, const FixedPointOptions& options = {});
EstimateReport estimate_global(const Problem& problem, const TrackerConfig& cfg, Execution exec = Execution::Parallel);
std::size_t count_real(const Problem& problem, const TrackerConfig& cfg, Execution exec = Execution::Parallel);

} // namespace bfmle
