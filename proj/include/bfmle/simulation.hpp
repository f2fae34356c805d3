#pragma once
//
// Randomized problem generation and real-solution frequency studies.
//
// Random streams: std::mt19937_64 seeded per trial with
//     sub_seed(seed, i) = splitmix64(splitmix64(seed) + i),
// uniforms on [0,1) from the top 53 bits, integers by rejection sampling,
// and normals by the Marsaglia polar method.  Trials never share a stream,
// so results do not depend on how trials are scheduled.
//

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "bfmle/homotopy.hpp"
#include "bfmle/problem.hpp"
#include "bfmle/random.hpp"

namespace bfmle {

struct SimConfig {
    std::size_t p = 2;
    std::size_t groups = 2;
    std::size_t trials = 100;
    long n_min = 3;
    long n_max = 15;
    double mu_box = 20.0;
    double diag_min = 0.1;
    double diag_max = 10.0;
    // Strict lower triangle of T is uniform on [-offdiag, offdiag].
    double offdiag = 10.0;
    std::uint64_t seed = 0;
    int threads = 0;

    void validate() const;
};

struct Scenario {
    Problem problem;
    Vec true_mu;
    std::vector<LowerTriangular> factors;
};

// Draws sizes, a common mean, covariance factors, then samples and summarizes them.
Scenario random_scenario(const SimConfig& cfg, Rng& rng);
Problem random_problem(const SimConfig& cfg, Rng& rng);

struct TrialOutcome {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    std::size_t kept = 0;
    std::size_t real = 0;
    std::size_t ill_conditioned = 0;
    bool error = false;
    std::string message;
};

struct TrialFailure {
    TrialOutcome outcome;
    Problem problem;
};

struct SimReport {
    SimConfig config;
    std::size_t expected_kept = 0;
    std::map<std::size_t, std::size_t> counts;
    std::vector<TrialFailure> failures;
    std::vector<std::string> log;

    std::size_t tallied() const;
    double percentage(std::size_t real_count) const;
    friend bool operator==(const SimReport& a, const SimReport& b);
};

SimReport run_simulation(const SimConfig& cfg, const TrackerConfig& tracker, Execution exec = Execution::Parallel);

// Frequency table: count, frequency, percentage to two decimals.
void write_report(std::ostream& out, const SimReport& report);
void emit_failures(const SimReport& report, const std::filesystem::path& dir);

// Fraction of trials with a single real critical point when every group has n_large observations.
double large_sample_study(std::size_t p, long n_large, std::size_t trials, std::uint64_t seed,
                          const TrackerConfig& tracker, Execution exec = Execution::Parallel);

} // namespace bfmle
