#include "bfmle/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bfmle/error.hpp"

namespace bfmle {

std::string_view to_string(Method m) { return m == Method::Global ? "Global" : "FixedPoint"; }

namespace {

constexpr double kTieTol = 1e-12;

std::vector<SymMatrix> profiled_sigmas(const Problem& problem, const Vec& mu) {
    std::vector<SymMatrix> out;
    out.reserve(problem.groups.size());
    for (const GroupStats& g : problem.groups) out.push_back(sigma_hat(g, mu));
    return out;
}

bool lex_less_real(const Vec& a, const Vec& b) {
    return std::lexicographical_compare(a.values().begin(), a.values().end(), b.values().begin(), b.values().end());
}

} // namespace

FixedPointResult fixed_point_iterate(const Problem& problem, const FixedPointOptions& options) {
    validate(problem);
    const std::size_t p = problem.p;

    FixedPointResult out;
    out.sigmas = options.initial_mu ? profiled_sigmas(problem, *options.initial_mu) : std::vector<SymMatrix>{};
    if (!options.initial_mu)
        for (const GroupStats& g : problem.groups) out.sigmas.push_back(g.scatter);

    auto update_mu = [&]() {
        SymMatrix precision(p);
        Vec rhs(p);
        for (std::size_t i = 0; i < problem.groups.size(); ++i) {
            const GroupStats& g = problem.groups[i];
            const SymMatrix w = static_cast<double>(g.n) * inverse_spd(out.sigmas[i]);
            precision = precision + w;
            rhs = rhs + w * g.mean;
        }
        return solve_spd(precision, rhs);
    };

    out.mu = update_mu();
    for (std::size_t it = 1; it <= options.max_iters; ++it) {
        out.sigmas = profiled_sigmas(problem, out.mu);
        const Vec next = update_mu();
        const double change = (next - out.mu).norm();
        const double scale = 1.0 + out.mu.norm();
        out.mu = next;
        out.iterations = it;
        if (change <= options.tol * scale) {
            out.converged = true;
            break;
        }
    }
    out.sigmas = profiled_sigmas(problem, out.mu);
    return out;
}

EstimateReport estimate_fixed_point(const Problem& problem, const FixedPointOptions& options) {
    const FixedPointResult fp = fixed_point_iterate(problem, options);
    const LikelihoodSystem system = build_system(problem);

    EstimateReport r;
    r.method = Method::FixedPoint;
    r.mle_mu = fp.mu;
    r.mle_sigmas = fp.sigmas;
    r.objective_at_mle = objective(system, fp.mu);
    r.log_likelihood_at_mle = log_likelihood(system, problem, fp.mu);
    r.iterations_or_paths = fp.iterations;
    r.converged = fp.converged;
    r.warnings.push_back("fixed-point limit is a stationary point; it need not be the global maximum");
    if (!fp.converged) r.warnings.push_back("NotConverged: iteration limit reached");
    return r;
}

EstimateReport estimate_global(const Problem& problem, const TrackerConfig& cfg, Execution exec) {
    const LikelihoodSystem system = build_system(problem);

    EstimateReport r;
    r.method = Method::Global;
    r.critical_points = critical_points(system, cfg, exec);
    r.iterations_or_paths = r.critical_points.total_paths;
    r.warnings = r.critical_points.warnings;

    for (const CriticalPoint& cp : r.critical_points.points) {
        if (!cp.is_real) {
            ++r.complex_count;
            continue;
        }
        const Vec mu = cp.real_part();
        r.all_real_critical_points.push_back({mu, objective(system, mu)});
    }
    if (r.all_real_critical_points.empty()) {
        std::ostringstream diag;
        diag << "no real critical point among " << r.critical_points.points.size() << " kept ("
             << r.critical_points.diverged_paths << " diverged, " << r.critical_points.failed_paths << " failed, "
             << r.critical_points.discarded_denominator_zero << " on vanishing denominators)";
        throw Error(ErrorCode::NoRealSolution, diag.str());
    }

    auto& pts = r.all_real_critical_points;
    std::sort(pts.begin(), pts.end(), [](const RealCriticalPoint& a, const RealCriticalPoint& b) {
        if (a.objective != b.objective) return a.objective < b.objective;
        return lex_less_real(a.mu, b.mu);
    });
    // Near-tie: prefer the lexicographically smaller mean among the tied minimizers.
    std::size_t best = 0;
    for (std::size_t i = 1; i < pts.size() && pts[i].objective - pts[0].objective <= kTieTol; ++i) {
        r.near_tie = true;
        if (lex_less_real(pts[i].mu, pts[best].mu)) best = i;
    }
    if (best != 0) std::swap(pts[0], pts[best]);

    r.mle_mu = pts.front().mu;
    r.objective_at_mle = pts.front().objective;
    r.mle_sigmas = profiled_sigmas(problem, r.mle_mu);
    r.log_likelihood_at_mle = log_likelihood(system, problem, r.mle_mu);
    if (r.near_tie) r.warnings.push_back("NearTie: two real critical points have objectives within 1e-12");
    return r;
}

std::size_t count_real(const Problem& problem, const TrackerConfig& cfg, Execution exec) {
    return critical_points(build_system(problem), cfg, exec).real_count();
}

} // namespace bfmle
