#include "bfmle/simulation.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bfmle/error.hpp"
#include "bfmle/mldegree.hpp"
#include "bfmle/system.hpp"

namespace bfmle {

// ---------------------------------------------------------------- random streams

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t index) { return splitmix64(splitmix64(seed) + index); }

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

long Rng::uniform_int(long lo, long hi) {
    if (hi < lo) throw Error(ErrorCode::InvalidArgument, "empty integer range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<long>(engine_());
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % span + 1) % span;
    std::uint64_t draw;
    do {
        draw = engine_();
    } while (draw > limit);
    return lo + static_cast<long>(draw % span);
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

// ---------------------------------------------------------------- problems

namespace {

constexpr int kMaxRetries = 10;

int worker_count(int requested) {
#ifdef _OPENMP
    return requested > 0 ? requested : omp_get_max_threads();
#else
    (void)requested;
    return 1;
#endif
}

std::uint64_t gamma_seed(std::uint64_t trial_seed) { return splitmix64(trial_seed ^ 0x6a09e667f3bcc909ULL); }

} // namespace

void SimConfig::validate() const {
    if (p == 0 || p > kMaxDim) throw Error(ErrorCode::InvalidArgument, "p must lie in [1, 16]");
    if (groups < 2) throw Error(ErrorCode::InvalidArgument, "need at least two groups");
    if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
    if (n_min <= static_cast<long>(p)) throw Error(ErrorCode::InvalidArgument, "n_min must exceed p");
    if (n_max < n_min) throw Error(ErrorCode::InvalidArgument, "n_max must be >= n_min");
    if (!(mu_box > 0.0) || !(diag_min > 0.0) || !(diag_max > diag_min) || !(offdiag >= 0.0))
        throw Error(ErrorCode::InvalidArgument, "need mu_box > 0, 0 < diag_min < diag_max, offdiag >= 0");
}

Scenario random_scenario(const SimConfig& cfg, Rng& rng) {
    cfg.validate();
    const std::size_t p = cfg.p;
    for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
        Scenario s;
        std::vector<long> sizes;
        for (std::size_t g = 0; g < cfg.groups; ++g) sizes.push_back(rng.uniform_int(cfg.n_min, cfg.n_max));

        s.true_mu = Vec(p);
        for (std::size_t j = 0; j < p; ++j) s.true_mu[j] = rng.uniform(-cfg.mu_box, cfg.mu_box);

        for (std::size_t g = 0; g < cfg.groups; ++g) {
            LowerTriangular t(p);
            for (std::size_t i = 0; i < p; ++i) {
                t.at(i, i) = cfg.diag_max - (cfg.diag_max - cfg.diag_min) * rng.uniform();
                for (std::size_t j = 0; j < i; ++j) t.at(i, j) = rng.uniform(-cfg.offdiag, cfg.offdiag);
            }
            s.factors.push_back(std::move(t));
        }

        s.problem.p = p;
        try {
            for (std::size_t g = 0; g < cfg.groups; ++g) {
                GroupData data;
                data.label = static_cast<int>(g + 1);
                for (long i = 0; i < sizes[g]; ++i) {
                    Vec z(p);
                    for (std::size_t j = 0; j < p; ++j) z[j] = rng.normal();
                    data.observations.push_back(s.factors[g].apply(z) + s.true_mu);
                }
                s.problem.groups.push_back(summarize(data));
            }
            validate(s.problem);
            return s;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateScatter && e.code() != ErrorCode::NotPositiveDefinite) throw;
        }
    }
    throw Error(ErrorCode::DegenerateScatter, "no non-degenerate sample after 10 retries");
}

Problem random_problem(const SimConfig& cfg, Rng& rng) { return random_scenario(cfg, rng).problem; }

// ---------------------------------------------------------------- studies

std::size_t SimReport::tallied() const {
    std::size_t total = 0;
    for (const auto& [count, freq] : counts) total += freq;
    return total;
}

double SimReport::percentage(std::size_t real_count) const {
    const auto it = counts.find(real_count);
    const std::size_t total = tallied();
    if (it == counts.end() || total == 0) return 0.0;
    return 100.0 * static_cast<double>(it->second) / static_cast<double>(total);
}

bool operator==(const SimReport& a, const SimReport& b) {
    if (a.counts != b.counts || a.expected_kept != b.expected_kept || a.failures.size() != b.failures.size() ||
        a.log != b.log)
        return false;
    for (std::size_t i = 0; i < a.failures.size(); ++i) {
        const TrialOutcome& x = a.failures[i].outcome;
        const TrialOutcome& y = b.failures[i].outcome;
        if (x.index != y.index || x.kept != y.kept || x.real != y.real || !(a.failures[i].problem == b.failures[i].problem))
            return false;
    }
    return true;
}

namespace {

struct TrialRecord {
    TrialOutcome outcome;
    Problem problem;
};

TrialRecord run_trial(const SimConfig& cfg, const TrackerConfig& tracker, std::size_t index) {
    TrialRecord rec;
    rec.outcome.index = index;
    rec.outcome.seed = sub_seed(cfg.seed, index);
    Rng rng(rec.outcome.seed);
    try {
        rec.problem = random_problem(cfg, rng);
        TrackerConfig tc = tracker;
        tc.reseed(gamma_seed(rec.outcome.seed));
        const CriticalPointSet set = critical_points(build_system(rec.problem), tc, Execution::Serial);
        rec.outcome.kept = set.points.size();
        rec.outcome.real = set.real_count();
        rec.outcome.ill_conditioned = set.ill_conditioned + set.failed_paths;
    } catch (const Error& e) {
        rec.outcome.error = true;
        rec.outcome.message = e.what();
    }
    return rec;
}

std::vector<TrialRecord> run_trials(const SimConfig& cfg, const TrackerConfig& tracker, Execution exec) {
    std::vector<TrialRecord> records(cfg.trials);
    const auto count = static_cast<std::int64_t>(cfg.trials);
    if (exec == Execution::Serial) {
        for (std::int64_t i = 0; i < count; ++i) records[i] = run_trial(cfg, tracker, static_cast<std::size_t>(i));
        return records;
    }
    const int workers = worker_count(cfg.threads);
#pragma omp parallel for schedule(dynamic, 4) num_threads(workers)
    for (std::int64_t i = 0; i < count; ++i) records[i] = run_trial(cfg, tracker, static_cast<std::size_t>(i));
    return records;
}

} // namespace

SimReport run_simulation(const SimConfig& cfg, const TrackerConfig& tracker, Execution exec) {
    cfg.validate();
    tracker.validate();
    SimReport report;
    report.config = cfg;
    report.expected_kept = ml_degree_sum(static_cast<unsigned>(cfg.groups - 1), static_cast<unsigned>(cfg.p))
                               .convert_to<std::size_t>();

    for (TrialRecord& rec : run_trials(cfg, tracker, exec)) {
        const TrialOutcome& o = rec.outcome;
        if (o.error || o.kept != report.expected_kept) {
            std::ostringstream msg;
            msg << "trial " << o.index << " (seed " << o.seed << "): ";
            if (o.error)
                msg << o.message;
            else
                msg << "kept " << o.kept << " points, expected " << report.expected_kept << "; " << o.ill_conditioned
                    << " ill-conditioned or failed path(s)";
            report.log.push_back(msg.str());
            report.failures.push_back({o, std::move(rec.problem)});
            continue;
        }
        if (o.real >= 5 && cfg.p == 2 && cfg.groups == 2)
            report.log.push_back("trial " + std::to_string(o.index) + ": " + std::to_string(o.real) + " real solutions");
        ++report.counts[o.real];
    }
    return report;
}

void write_report(std::ostream& out, const SimReport& report) {
    const SimConfig& c = report.config;
    out << "# p=" << c.p << " groups=" << c.groups << " trials=" << c.trials << " n_range=[" << c.n_min << "," << c.n_max << "] mu_box=" << c.mu_box << " diag=(" << c.diag_min << "," << c.diag_max
        << "] offdiag=" << c.offdiag << " seed=" << c.seed << '\n';
    out << std::left << std::setw(20) << "Number of solutions" << " | " << std::right << std::setw(9) << "Frequency"
        << " | " << std::setw(10) << "Percentage" << '\n';
    for (const auto& [count, freq] : report.counts) {
        std::ostringstream pct;
        pct << std::fixed << std::setprecision(2) << report.percentage(count) << '%';
        out << std::left << std::setw(20) << count << " | " << std::right << std::setw(9) << freq << " | "
            << std::setw(10) << pct.str() << '\n';
    }
    out << "# tallied=" << report.tallied() << " failures=" << report.failures.size() << '\n';
    for (const std::string& line : report.log) out << "# " << line << '\n';
}

void emit_failures(const SimReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const TrialFailure& f : report.failures) {
        if (f.problem.groups.empty()) continue;
        write_problem(f.problem, dir / ("trial-" + std::to_string(f.outcome.index) + ".json"));
    }
}

double large_sample_study(std::size_t p, long n_large, std::size_t trials, std::uint64_t seed,
                          const TrackerConfig& tracker, Execution exec) {
    SimConfig cfg;
    cfg.p = p;
    cfg.trials = trials;
    cfg.n_min = n_large;
    cfg.n_max = n_large;
    cfg.seed = seed;
    const SimReport report = run_simulation(cfg, tracker, exec);
    const auto it = report.counts.find(1);
    const std::size_t unique = it == report.counts.end() ? 0 : it->second;
    return static_cast<double>(unique) / static_cast<double>(trials);
}

} // namespace bfmle
