#include "bfmle/homotopy.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include <Eigen/Dense>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bfmle/error.hpp"
#include "bfmle/mldegree.hpp"
#include "bfmle/random.hpp"

namespace bfmle {

namespace {

using CMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor, kMaxDim, kMaxDim>;
using CVecE = Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

constexpr std::uint64_t kMaxPaths = 1'000'000;
constexpr int kMaxTrackerSteps = 200'000;
constexpr int kMaxNewtonIters = 50;
constexpr double kRankCutoff = 1e-10;
constexpr int kRetrackRounds = 2;
// Largest relative move accepted when re-refining an endpoint in other coordinates.
constexpr double kRefineReach = 1e-2;
// Endgame Newton moves beyond this relative distance trigger further tracking toward t = 1.
constexpr double kEndgameReach = 1e-4;
constexpr double kEndgameShrink = 1e-2;
constexpr int kEndgameExtensions = 3;
constexpr int kResolveAttempts = 4;

bool all_finite(const CVecE& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) return false;
    return true;
}

double norm_e(const CVecE& v) { return v.norm(); }

CVecE to_eigen(const CVec& x) {
    CVecE v(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) v[static_cast<Eigen::Index>(i)] = x[i];
    return v;
}

CVec from_eigen(const CVecE& v) { return CVec(v.data(), v.data() + v.size()); }

// Scratch buffers for one homotopy evaluation.
struct Workspace {
    explicit Workspace(std::size_t n) : f(n), g(n), jf(n * n), jg(n * n) {}
    CVec f, g, jf, jg;
};

struct Homotopy {
    const CompiledSystem& target;
    const CompiledSystem& start;
    Complex gamma;
    std::size_t n;

    // Fills H(x,t) and H_x(x,t); also H_t when requested.
    void eval(const CVecE& x, double t, Workspace& w, CVecE* h, CMat& hx, CVecE* ht) const {
        std::span<const Complex> xs(x.data(), n);
        target.evaluate(xs, w.f, w.jf);
        start.evaluate(xs, w.g, w.jg);
        const Complex a = (1.0 - t) * gamma;
        hx.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                hx(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a * w.jg[i * n + j] + t * w.jf[i * n + j];
        if (h) {
            h->resize(static_cast<Eigen::Index>(n));
            for (std::size_t i = 0; i < n; ++i) (*h)[static_cast<Eigen::Index>(i)] = a * w.g[i] + t * w.f[i];
        }
        if (ht) {
            ht->resize(static_cast<Eigen::Index>(n));
            for (std::size_t i = 0; i < n; ++i) (*ht)[static_cast<Eigen::Index>(i)] = w.f[i] - gamma * w.g[i];
        }
    }
};

bool linear_solve(const CMat& a, const CVecE& b, CVecE& x) {
    Eigen::PartialPivLU<CMat> lu(a);
    x = lu.solve(b);
    return all_finite(x);
}

int worker_count(int requested) {
#ifdef _OPENMP
    return requested > 0 ? requested : omp_get_max_threads();
#else
    (void)requested;
    return 1;
#endif
}

bool same_point(const CVec& a, const CVec& b, double tol) {
    CVec d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return norm(d) <= tol * (1.0 + norm(a));
}

double path_residual(const CompiledSystem& f, const CVec& x) {
    CVec v(f.equations());
    f.evaluate(x, v, {});
    return norm(v);
}

} // namespace

// ---------------------------------------------------------------- config

TrackerConfig TrackerConfig::with_seed(std::uint64_t seed) {
    TrackerConfig cfg;
    cfg.reseed(seed);
    return cfg;
}

void TrackerConfig::reseed(std::uint64_t s) {
    seed = s;
    std::mt19937_64 eng(splitmix64(s));
    const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
    const double angle = 2.0 * std::numbers::pi * u;
    gamma = Complex(std::cos(angle), std::sin(angle));
}

void TrackerConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw Error(ErrorCode::InvalidArgument, std::string("tracker config: ") + what);
    };
    require(min_step > 0.0 && min_step < initial_step && initial_step < 1.0, "need 0 < min_step < initial_step < 1");
    require(max_step >= initial_step && max_step <= 1.0, "need initial_step <= max_step <= 1");
    require(corrector_tol > 0.0 && refine_tol > 0.0 && dedup_tol > 0.0, "tolerances must be positive");
    require(real_imag_tol > 0.0 && denom_zero_tol > 0.0 && singular_condition > 0.0, "tolerances must be positive");
    require(max_corrector_iters >= 1, "max_corrector_iters must be >= 1");
    require(divergence_norm > 1.0, "divergence_norm must exceed 1");
    require(endgame_start_t > 0.0 && endgame_start_t <= 1.0, "endgame_start_t must lie in (0, 1]");
    require(std::abs(std::abs(gamma) - 1.0) < 1e-12, "gamma must lie on the unit circle");
}

std::string_view to_string(PathStatus status) {
    switch (status) {
    case PathStatus::Converged: return "Converged";
    case PathStatus::Diverged: return "Diverged";
    case PathStatus::TrackingFailed: return "TrackingFailed";
    }
    return "Unknown";
}

double norm(std::span<const Complex> x) {
    double s = 0.0;
    for (const Complex& z : x) s += std::norm(z);
    return std::sqrt(s);
}

bool lex_less(const CVec& a, const CVec& b) {
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
        if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
    }
    return a.size() < b.size();
}

// ---------------------------------------------------------------- start system

std::uint64_t bezout_number(const std::vector<int>& degrees) {
    std::uint64_t total = 1;
    for (int d : degrees) {
        if (d < 1) throw Error(ErrorCode::InvalidArgument, "start degrees must be >= 1");
        total *= static_cast<std::uint64_t>(d);
        if (total > kMaxPaths) throw Error(ErrorCode::PathCountOverflow, "more than 10^6 homotopy paths");
    }
    return total;
}

StartSystem total_degree_start(const std::vector<int>& degrees) {
    const std::uint64_t total = bezout_number(degrees);
    const std::size_t n = degrees.size();

    StartSystem s;
    for (std::size_t i = 0; i < n; ++i) {
        CPoly g(n);
        Exponents e(n, 0);
        e[i] = degrees[i];
        g.add_term(e, Complex(1.0));
        g.add_term(Exponents(n, 0), Complex(-1.0));
        s.polys.push_back(std::move(g));
    }

    s.roots.reserve(total);
    std::vector<int> digit(n, 0);
    for (std::uint64_t r = 0; r < total; ++r) {
        CVec x(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double angle = 2.0 * std::numbers::pi * digit[i] / degrees[i];
            x[i] = digit[i] == 0 ? Complex(1.0) : std::polar(1.0, angle);
        }
        s.roots.push_back(std::move(x));
        for (std::size_t i = n; i-- > 0;) {
            if (++digit[i] < degrees[i]) break;
            digit[i] = 0;
        }
    }
    return s;
}

// ---------------------------------------------------------------- Newton

NewtonResult newton_refine(const SystemEvaluator& f, std::size_t n, const CVec& x0, double tol) {
    if (x0.size() != n) throw Error(ErrorCode::DimensionMismatch, "newton_refine needs a square system");
    CVec value(n), jac(n * n);
    CMat j(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    CVecE x = to_eigen(x0);
    CVecE rhs(static_cast<Eigen::Index>(n));

    NewtonResult out;
    for (int it = 0; it < kMaxNewtonIters; ++it) {
        f(std::span<const Complex>(x.data(), n), value, jac);
        for (std::size_t r = 0; r < n; ++r) {
            rhs[static_cast<Eigen::Index>(r)] = -value[r];
            for (std::size_t c = 0; c < n; ++c) j(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = jac[r * n + c];
        }
        Eigen::JacobiSVD<CMat> svd(j, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        const double smax = sv.size() ? sv[0] : 0.0;
        if (!(smax > 0.0) || !std::isfinite(smax)) throw Error(ErrorCode::SingularJacobian, "Jacobian vanishes");
        const double smin = sv[sv.size() - 1];
        out.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
        svd.setThreshold(kRankCutoff);
        const CVecE dx = svd.solve(rhs);
        if (!all_finite(dx)) throw Error(ErrorCode::SingularJacobian, "Newton step is not finite");
        x += dx;
        out.iterations = it + 1;
        if (norm_e(dx) <= tol * (1.0 + norm_e(x))) {
            out.converged = true;
            break;
        }
    }
    out.x = from_eigen(x);
    return out;
}

NewtonResult newton_refine(const CompiledSystem& f, const CVec& x0, double tol) {
    const std::size_t n = f.variables();
    if (f.equations() != n) throw Error(ErrorCode::DimensionMismatch, "newton_refine needs a square system");
    return newton_refine([&f](std::span<const Complex> x, std::span<Complex> v, std::span<Complex> j) { f.evaluate(x, v, j); },
                         n, x0, tol);
}

NewtonResult newton_refine(const CSystem& f, const CVec& x, double tol) { return newton_refine(CompiledSystem(f), x, tol); }

// ---------------------------------------------------------------- tracking

PathResult track_path(const CompiledSystem& target, const CompiledSystem& start, const CVec& x0, const TrackerConfig& cfg) {
    const std::size_t n = target.variables();
    if (start.variables() != n || target.equations() != n || start.equations() != n || x0.size() != n)
        throw Error(ErrorCode::DimensionMismatch, "homotopy systems must be square and of equal size");

    const Homotopy hom{target, start, cfg.gamma, n};
    Workspace w(n);
    CMat hx;
    CVecE h, ht, k1, dx;
    CVecE x = to_eigen(x0);

    PathResult out;
    double t = 0.0;
    double step = cfg.initial_step;
    int successes = 0;
    const auto tangent = [&](const CVecE& at, double s, CVecE& v) {
        hom.eval(at, s, w, nullptr, hx, &ht);
        return linear_solve(hx, -ht, v);
    };

    // Tracks from t to t_stop; the status is set only on failure.
    const auto advance = [&](double t_stop) {
        while (t < t_stop) {
            if (out.steps_taken > kMaxTrackerSteps) {
                out.status = PathStatus::TrackingFailed;
                return false;
            }
            step = std::min({step, cfg.max_step, t_stop - t});

            // Euler predictor along dx/dt = -H_x^{-1} H_t.
            const double t1 = (t + step >= t_stop) ? t_stop : t + step;
            bool ok = tangent(x, t, k1);
            CVecE xp = x;
            if (ok) xp += (t1 - t) * k1;

            // Newton corrector at t1; reject on divergence or loss of contraction.
            double prev = std::numeric_limits<double>::infinity();
            bool converged = false;
            for (int it = 0; ok && it < cfg.max_corrector_iters; ++it) {
                hom.eval(xp, t1, w, &h, hx, nullptr);
                if (!linear_solve(hx, -h, dx)) {
                    ok = false;
                    break;
                }
                xp += dx;
                const double nd = norm_e(dx);
                if (it > 0 && nd > 0.5 * prev) {
                    ok = false;
                    break;
                }
                prev = nd;
                if (nd <= cfg.corrector_tol * (1.0 + norm_e(xp))) {
                    converged = true;
                    break;
                }
            }

            if (ok && converged) {
                x = xp;
                t = t1;
                ++out.steps_taken;
                if (++successes >= 4) {
                    step *= 1.5;
                    successes = 0;
                }
                if (norm_e(x) > cfg.divergence_norm) {
                    out.status = PathStatus::Diverged;
                    return false;
                }
            } else {
                step *= 0.5;
                successes = 0;
                if (step < cfg.min_step) {
                    out.status = PathStatus::TrackingFailed;
                    return false;
                }
            }
        }
        return true;
    };

    const auto endgame_newton = [&](const CVecE& from) {
        NewtonResult nr;
        try {
            nr = newton_refine(target, from_eigen(from), cfg.refine_tol);
        } catch (const Error&) {
            nr.x = from_eigen(from);
            nr.condition = std::numeric_limits<double>::infinity();
        }
        return nr;
    };

    if (!advance(cfg.endgame_start_t)) {
        out.endpoint = from_eigen(x);
        return out;
    }

    // Endgame: Newton directly on the target.  A Newton result far from the
    // path point may belong to a neighbouring root, so the path is followed
    // closer to t = 1 before trusting it.
    NewtonResult best = endgame_newton(x);
    for (int extension = 0; extension < kEndgameExtensions; ++extension) {
        if (same_point(from_eigen(x), best.x, kEndgameReach)) break;
        const double t_next = 1.0 - (1.0 - t) * kEndgameShrink;
        if (t_next <= t || !advance(t_next)) break;
        best = endgame_newton(x);
    }

    out.endpoint = best.x;
    out.condition = best.condition;
    const double xn = norm(best.x);
    const bool finite = std::isfinite(xn);
    if (finite && path_residual(target, best.x) <= 1e-8 * (1.0 + xn) && xn <= cfg.divergence_norm)
        out.status = PathStatus::Converged;
    else if (!finite || xn > std::sqrt(cfg.divergence_norm))
        out.status = PathStatus::Diverged;
    else
        out.status = PathStatus::TrackingFailed;
    return out;
}

PathResult track_path(const CSystem& target, const CSystem& start, const CVec& x0, const TrackerConfig& cfg) {
    return track_path(CompiledSystem(target), CompiledSystem(start), x0, cfg);
}

std::vector<PathResult> track_all(const CompiledSystem& target, const StartSystem& start, const TrackerConfig& cfg,
                                  Execution exec) {
    const CompiledSystem g(start.polys);
    const auto count = static_cast<std::int64_t>(start.roots.size());
    std::vector<PathResult> results(start.roots.size());

    if (exec == Execution::Serial) {
        for (std::int64_t i = 0; i < count; ++i) results[i] = track_path(target, g, start.roots[i], cfg);
        return results;
    }

    const int workers = worker_count(cfg.threads);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (std::int64_t i = 0; i < count; ++i) results[i] = track_path(target, g, start.roots[i], cfg);
    return results;
}

// ---------------------------------------------------------------- solve

namespace {

// Divides every equation by its largest coefficient modulus.
CSystem normalize_rows(const CSystem& f) {
    CSystem out;
    out.reserve(f.size());
    for (const CPoly& poly : f) {
        double scale = 0.0;
        for (const auto& [e, c] : poly.terms()) scale = std::max(scale, std::abs(c));
        out.push_back(scale > 0.0 ? Complex(1.0 / scale) * poly : poly);
    }
    return out;
}

struct Cluster {
    std::size_t representative;
    std::vector<std::size_t> members;
};

std::vector<Cluster> cluster_converged(const std::vector<PathResult>& paths, const TrackerConfig& cfg) {
    std::vector<Cluster> clusters;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        if (paths[i].status != PathStatus::Converged) continue;
        bool placed = false;
        for (Cluster& c : clusters)
            if (same_point(paths[c.representative].endpoint, paths[i].endpoint, cfg.dedup_tol)) {
                c.members.push_back(i);
                placed = true;
                break;
            }
        if (!placed) clusters.push_back({i, {i}});
    }
    return clusters;
}

} // namespace

namespace {

// Newton on the target from every converged endpoint, so clustering sees refined points.
void polish(const CompiledSystem& target, std::vector<PathResult>& paths, const std::vector<std::size_t>& which,
            const TrackerConfig& cfg) {
    for (std::size_t i : which) {
        PathResult& r = paths[i];
        if (r.status != PathStatus::Converged) continue;
        try {
            const NewtonResult nr = newton_refine(target, r.endpoint, cfg.refine_tol);
            if (nr.converged || path_residual(target, nr.x) <= path_residual(target, r.endpoint)) {
                r.endpoint = nr.x;
                r.condition = nr.condition;
            }
        } catch (const Error&) {
            r.condition = std::numeric_limits<double>::infinity();
        }
    }
}

} // namespace

SolveResult solve_system(const CSystem& f, const TrackerConfig& cfg, Execution exec) {
    cfg.validate();
    if (f.empty() || f.size() != f.front().nvars())
        throw Error(ErrorCode::DimensionMismatch, "solve_system needs a square system");
    for (const CPoly& poly : f)
        if (poly.degree() < 1) throw Error(ErrorCode::InvalidArgument, "every equation needs degree >= 1");

    const CompiledSystem target(normalize_rows(f));
    const StartSystem start = total_degree_start(target.degrees());

    SolveResult out;
    out.paths = track_all(target, start, cfg, exec);
    std::vector<std::size_t> all(out.paths.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    polish(target, out.paths, all, cfg);

    // Two paths ending on the same regular root means one of them jumped; re-track those with smaller steps.
    TrackerConfig careful = cfg;
    const CompiledSystem g(start.polys);
    for (int round = 0; round < kRetrackRounds; ++round) {
        std::vector<std::size_t> redo;
        for (const Cluster& c : cluster_converged(out.paths, cfg)) {
            if (c.members.size() < 2) continue;
            const double cond = out.paths[c.representative].condition;
            if (cond > cfg.singular_condition) continue;
            redo.insert(redo.end(), c.members.begin(), c.members.end());
        }
        if (redo.empty()) break;
        careful.initial_step = std::max(careful.initial_step / 8.0, careful.min_step * 2.0);
        careful.max_step = std::max(careful.max_step / 8.0, careful.initial_step);
        for (std::size_t i : redo) out.paths[i] = track_path(target, g, start.roots[i], careful);
        polish(target, out.paths, redo, cfg);
        out.retracked += redo.size();
    }

    for (const PathResult& r : out.paths) {
        if (r.status == PathStatus::Diverged) ++out.diverged;
        if (r.status == PathStatus::TrackingFailed) ++out.failed;
    }

    for (const Cluster& c : cluster_converged(out.paths, cfg)) {
        const PathResult& rep = out.paths[c.representative];
        Endpoint e;
        e.x = rep.endpoint;
        e.condition = rep.condition;
        e.multiplicity = static_cast<int>(c.members.size());
        e.singular = !(e.condition <= cfg.singular_condition);
        out.points.push_back(std::move(e));
    }
    std::sort(out.points.begin(), out.points.end(), [](const Endpoint& a, const Endpoint& b) { return lex_less(a.x, b.x); });
    return out;
}

// ---------------------------------------------------------------- classification

Vec CriticalPoint::real_part() const {
    Vec r(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) r[i] = mu[i].real();
    return r;
}

std::size_t CriticalPointSet::real_count() const {
    return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [](const CriticalPoint& c) { return c.is_real; }));
}

namespace {

// Recomputes conjugate pairing, singular counts and warnings from the counters.
void annotate(CriticalPointSet& set, const TrackerConfig& cfg) {
    set.unpaired_conjugates = 0;
    set.ill_conditioned = 0;
    set.warnings.clear();
    for (const CriticalPoint& cp : set.points) {
        if (cp.singular) ++set.ill_conditioned;
        if (cp.is_real) continue;
        CVec conj(cp.mu.size());
        for (std::size_t i = 0; i < conj.size(); ++i) conj[i] = std::conj(cp.mu[i]);
        const bool paired = std::any_of(set.points.begin(), set.points.end(), [&](const CriticalPoint& o) {
            return !o.is_real && same_point(conj, o.mu, cfg.dedup_tol);
        });
        if (!paired) ++set.unpaired_conjugates;
    }
    if (set.partial_denominator_zero > 0)
        set.warnings.push_back(std::to_string(set.partial_denominator_zero) +
                               " endpoint(s) with only some denominators vanishing; discarded on the min test");
    if (set.unpaired_conjugates > 0)
        set.warnings.push_back(std::to_string(set.unpaired_conjugates) + " non-real point(s) without a conjugate partner");
    if (set.failed_paths > 0) set.warnings.push_back(std::to_string(set.failed_paths) + " path(s) failed to track");
    if (set.ill_conditioned > 0)
        set.warnings.push_back(std::to_string(set.ill_conditioned) + " kept point(s) with ill-conditioned Jacobian");
}

} // namespace

CriticalPointSet classify_and_filter(const SolveResult& solved, const LikelihoodSystem& system, const TrackerConfig& cfg) {
    const CompiledSystem raw(system.complex_polys());
    CriticalPointSet out;
    out.total_paths = solved.paths.size();
    out.diverged_paths = solved.diverged;
    out.failed_paths = solved.failed;

    for (const Endpoint& e : solved.points) {
        const double xn = norm(e.x);
        const double scale = (1.0 + xn) * (1.0 + xn);
        CriticalPoint cp;
        cp.mu = e.x;
        double dmin = std::numeric_limits<double>::infinity();
        double dmax = 0.0;
        for (const DenominatorForm& den : system.denominators) {
            const Complex d = den.eval(e.x);
            cp.denominator_values.push_back(d);
            dmin = std::min(dmin, std::abs(d));
            dmax = std::max(dmax, std::abs(d));
        }
        const bool drop_min = dmin <= cfg.denom_zero_tol * scale;
        const bool drop_max = dmax <= cfg.denom_zero_tol * scale;
        if (drop_min != drop_max) ++out.partial_denominator_zero;
        if (drop_min) {
            ++out.discarded_denominator_zero;
            continue;
        }

        double max_imag = 0.0;
        for (const Complex& z : e.x) max_imag = std::max(max_imag, std::abs(z.imag()));
        cp.is_real = max_imag <= cfg.real_imag_tol * (1.0 + xn);
        cp.multiplicity_estimate = e.multiplicity;
        cp.singular = e.singular;
        cp.condition = e.condition;
        CVec value(raw.equations());
        raw.evaluate(e.x, value, {});
        cp.residual_norm = norm(value);
        out.points.push_back(std::move(cp));
    }
    annotate(out, cfg);
    return out;
}

namespace {

CriticalPointSet critical_points_once(const LikelihoodSystem& system, const StandardizedSystem& std_sys,
                                      const TrackerConfig& cfg, Execution exec) {
    SolveResult solved = solve_system(std_sys.system.complex_polys(), cfg, exec);

    // Back to the original coordinates, refined on the factored form there.
    const SystemEvaluator cleared = [&system](std::span<const Complex> x, std::span<Complex> v, std::span<Complex> j) {
        eval_cleared(system, x, v, j);
    };
    const auto factored_residual = [&system](const CVec& x) {
        CVec v(x.size());
        eval_cleared(system, x, v, {});
        return norm(v);
    };
    for (Endpoint& e : solved.points) {
        e.x = std_sys.to_original(e.x);
        try {
            const NewtonResult nr = newton_refine(cleared, system.p, e.x, cfg.refine_tol);
            if (same_point(e.x, nr.x, kRefineReach) && factored_residual(nr.x) <= factored_residual(e.x)) {
                e.x = nr.x;
                if (!e.singular) e.condition = nr.condition;
            }
        } catch (const Error&) {
        }
    }
    std::vector<Endpoint> merged;
    for (Endpoint& e : solved.points) {
        const auto same = std::find_if(merged.begin(), merged.end(),
                                       [&](const Endpoint& o) { return same_point(o.x, e.x, cfg.dedup_tol); });
        if (same == merged.end())
            merged.push_back(std::move(e));
        else
            same->multiplicity += e.multiplicity;
    }
    solved.points = std::move(merged);
    std::sort(solved.points.begin(), solved.points.end(), [](const Endpoint& a, const Endpoint& b) { return lex_less(a.x, b.x); });
    return classify_and_filter(solved, system, cfg);
}

std::size_t generic_count(const LikelihoodSystem& system) {
    const BigInt d = ml_degree_sum(static_cast<unsigned>(system.k_plus_1 - 1), static_cast<unsigned>(system.p));
    return d > BigInt(kMaxPaths) ? static_cast<std::size_t>(kMaxPaths) : d.convert_to<std::size_t>();
}

} // namespace

CriticalPointSet critical_points(const LikelihoodSystem& system, const TrackerConfig& cfg, Execution exec) {
    const std::array<StandardizedSystem, 2> frames{standardize(system, Whitening::Precision),
                                                   standardize(system, Whitening::Scatter)};
    CriticalPointSet set = critical_points_once(system, frames[0], cfg, exec);
    const std::size_t expected = generic_count(system);

    // Retries alternate the coordinate frame and draw a fresh gamma each time.
    for (int attempt = 1; attempt <= kResolveAttempts && set.points.size() < expected; ++attempt) {
        TrackerConfig fresh = cfg;
        fresh.reseed(sub_seed(cfg.seed ^ std::bit_cast<std::uint64_t>(cfg.gamma.real()), static_cast<std::uint64_t>(attempt)));
        fresh.seed = cfg.seed;
        const CriticalPointSet more = critical_points_once(system, frames[attempt % 2], fresh, exec);
        ++set.resolves;
        for (const CriticalPoint& cp : more.points) {
            const bool known = std::any_of(set.points.begin(), set.points.end(),
                                           [&](const CriticalPoint& o) { return same_point(o.mu, cp.mu, cfg.dedup_tol); });
            if (!known) set.points.push_back(cp);
        }
    }
    if (set.resolves > 0) {
        std::sort(set.points.begin(), set.points.end(),
                  [](const CriticalPoint& a, const CriticalPoint& b) { return lex_less(a.mu, b.mu); });
        annotate(set, cfg);
    }
    return set;
}

void write_solution_dump(std::ostream& out, const CriticalPointSet& set) {
    const auto flags = out.flags();
    const auto prec = out.precision();
    out << std::setprecision(17);
    for (const CriticalPoint& cp : set.points) {
        for (std::size_t i = 0; i < cp.mu.size(); ++i) out << (i ? " " : "") << cp.mu[i].real() << ' ' << cp.mu[i].imag();
        out << " | " << (cp.is_real ? "real" : "complex") << " | " << cp.residual_norm << " |";
        for (const Complex& d : cp.denominator_values) out << ' ' << d.real() << ' ' << d.imag();
        out << '\n';
    }
    out.flags(flags);
    out.precision(prec);
}

} // namespace bfmle
