#pragma once
//
// Total-degree homotopy continuation for square polynomial systems.
//
// Each start root of G_i(x) = x_i^{d_i} - 1 is tracked along
//     H(x, t) = (1 - t) * gamma * G(x) + t * F(x),   t: 0 -> 1,
// with an Euler predictor and a Newton corrector.  Endpoints are refined,
// deduplicated and then filtered against the likelihood denominators.
//

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bfmle/polynomial.hpp"
#include "bfmle/system.hpp"

namespace bfmle {

struct TrackerConfig {
    double initial_step = 0.05;
    double min_step = 1e-14;
    double max_step = 0.1;
    double corrector_tol = 1e-10;
    int max_corrector_iters = 3;
    double divergence_norm = 1e8;
    double endgame_start_t = 1.0 - 1e-6;
    double refine_tol = 1e-12;
    double dedup_tol = 1e-6;
    double real_imag_tol = 1e-8;
    double denom_zero_tol = 1e-8;
    // Endpoints whose Jacobian condition estimate exceeds this are flagged singular.
    double singular_condition = 1e10;
    Complex gamma{0.6, 0.8};
    std::uint64_t seed = 0;
    // 0 = OpenMP default.
    int threads = 0;

    // Draws gamma uniformly on the unit circle from the seed.
    static TrackerConfig with_seed(std::uint64_t seed);
    void reseed(std::uint64_t seed);
    // Throws InvalidArgument when an invariant is broken.
    void validate() const;
};

enum class PathStatus { Converged, Diverged, TrackingFailed };
std::string_view to_string(PathStatus status);

struct PathResult {
    PathStatus status = PathStatus::TrackingFailed;
    CVec endpoint;
    int steps_taken = 0;
    double condition = 0.0;
};

struct StartSystem {
    CSystem polys;
    std::vector<CVec> roots;
};

// G_i = x_i^{d_i} - 1 and all prod d_i start roots, in mixed-radix order.
StartSystem total_degree_start(const std::vector<int>& degrees);
std::uint64_t bezout_number(const std::vector<int>& degrees);

PathResult track_path(const CompiledSystem& target, const CompiledSystem& start, const CVec& x0,
                      const TrackerConfig& cfg);
PathResult track_path(const CSystem& target, const CSystem& start, const CVec& x0, const TrackerConfig& cfg);

struct NewtonResult {
    CVec x;
    double condition = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Newton (least-squares on rank-deficient Jacobians) until |dx| <= tol (1 + |x|), at most 50 steps.
NewtonResult newton_refine(const CompiledSystem& f, const CVec& x, double tol);
// f(x, value, jac) fills an n-equation system and its row-major Jacobian.
using SystemEvaluator = std::function<void(std::span<const Complex>, std::span<Complex>, std::span<Complex>)>;
NewtonResult newton_refine(const SystemEvaluator& f, std::size_t n, const CVec& x, double tol);
NewtonResult newton_refine(const CSystem& f, const CVec& x, double tol);

struct Endpoint {
    CVec x;
    int multiplicity = 1;
    double condition = 0.0;
    bool singular = false;
};

struct SolveResult {
    std::vector<Endpoint> points; // sorted by (Re x1, Im x1, Re x2, ...)
    std::vector<PathResult> paths;
    std::size_t diverged = 0;
    std::size_t failed = 0;
    // Paths re-tracked because they landed on an already-claimed regular root.
    std::size_t retracked = 0;
};

enum class Execution { Serial, Parallel };

SolveResult solve_system(const CSystem& f, const TrackerConfig& cfg, Execution exec = Execution::Parallel);

// Tracks every start root; the serial loop is the reference for the OpenMP one.
std::vector<PathResult> track_all(const CompiledSystem& target, const StartSystem& start, const TrackerConfig& cfg,
                                  Execution exec);

struct CriticalPoint {
    CVec mu;
    bool is_real = false;
    int multiplicity_estimate = 1;
    bool singular = false;
    double condition = 0.0;
    std::vector<Complex> denominator_values;
    double residual_norm = 0.0;

    Vec real_part() const;
};

struct CriticalPointSet {
    std::vector<CriticalPoint> points;
    std::size_t discarded_denominator_zero = 0;
    std::size_t diverged_paths = 0;
    std::size_t failed_paths = 0;
    std::size_t total_paths = 0;
    std::size_t unpaired_conjugates = 0;
    std::size_t ill_conditioned = 0;
    // Discarded endpoints where only some denominators vanish.
    std::size_t partial_denominator_zero = 0;
    // Extra solves with fresh gamma after the first came up short of the generic count.
    std::size_t resolves = 0;
    std::vector<std::string> warnings;

    std::size_t real_count() const;
};

CriticalPointSet classify_and_filter(const SolveResult& solved, const LikelihoodSystem& system,
                                     const TrackerConfig& cfg);

// Builds, solves and filters in one call.  When fewer points than the generic
// count d(k,p) survive, the solve is repeated with fresh gamma and the sets merged.
CriticalPointSet critical_points(const LikelihoodSystem& system, const TrackerConfig& cfg,
                                 Execution exec = Execution::Parallel);

// Lexicographic (Re x1, Im x1, Re x2, ...) order.
bool lex_less(const CVec& a, const CVec& b);
double norm(std::span<const Complex> x);

// One line per point: `re im ... | real? | residual | D_1 ... D_{k+1}` with 17 significant digits.
void write_solution_dump(std::ostream& out, const CriticalPointSet& set);

} // namespace bfmle
