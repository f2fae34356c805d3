// One PASS/FAIL line per acceptance criterion.  Exit status is the number of failures.
// Usage: acceptance [criterion ...]   (default: all of 1..9)

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <regex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bfmle/cli.hpp"
#include "bfmle/estimator.hpp"
#include "bfmle/mldegree.hpp"
#include "bfmle/simulation.hpp"
#include "support.hpp"

#ifndef BFMLE_PROBLEM_DIR
#error "BFMLE_PROBLEM_DIR must be defined"
#endif

using namespace bfmle;
using namespace testing_support;
using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
    bool pass = false;
    std::string detail;
};

struct CliRun {
    int code = 0;
    json doc;
    std::string err;
};

CliRun cli_run(std::vector<std::string> args) {
    args.insert(args.begin(), {"bfmle", "--format", "machine"});
    std::ostringstream out, err;
    CliRun r;
    r.code = cli::run(args, out, err);
    r.err = err.str();
    if (r.code == 0) r.doc = json::parse(out.str());
    return r;
}

std::string fmt(double x, int prec = 4) {
    std::ostringstream s;
    s << std::setprecision(prec) << x;
    return s.str();
}

// ---------------------------------------------------------------- 1, 2

Verdict listed_real_points(const std::string& file, const std::vector<std::vector<double>>& expected) {
    const auto t0 = Clock::now();
    const CliRun r = cli_run({"estimate", std::string(BFMLE_PROBLEM_DIR) + "/" + file});
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (r.code != 0) return {false, "exit " + std::to_string(r.code) + ": " + r.err};

    std::vector<std::vector<double>> found;
    for (const json& pt : r.doc["real_critical_points"]) found.push_back(pt["mu"].get<std::vector<double>>());

    std::size_t matched = 0;
    std::vector<bool> used(found.size(), false);
    double worst = 0.0;
    for (const auto& e : expected) {
        double best = INFINITY;
        std::size_t arg = found.size();
        for (std::size_t i = 0; i < found.size(); ++i) {
            if (used[i]) continue;
            double d = 0.0;
            for (std::size_t j = 0; j < e.size(); ++j) d = std::max(d, std::abs(found[i][j] - e[j]));
            if (d < best) {
                best = d;
                arg = i;
            }
        }
        if (arg < found.size() && best <= 2e-3) {
            used[arg] = true;
            ++matched;
        }
        worst = std::max(worst, best);
    }
    std::ostringstream d;
    d << found.size() << " real critical points (expected " << expected.size() << "), " << matched
      << " matched within 2e-3, worst listed-point distance " << fmt(worst) << ", " << fmt(secs, 3) << " s";
    if (found.size() != expected.size()) {
        d << "; found:";
        for (const auto& f : found) d << " (" << fmt(f[0], 6) << ", " << fmt(f[1], 6) << ")";
    }
    return {found.size() == expected.size() && matched == expected.size() && secs < 1.0, d.str()};
}

Verdict criterion1() {
    return listed_real_points("example1.json", {{-1.3570, -10.2957}, {-1.2478, -9.9902}, {-1.4451, -9.6333}});
}

Verdict criterion2() {
    return listed_real_points("example2.json",
                              {{3.9822, 1.0443}, {-3.7286, 3.2906}, {-2.4192, 4.6925}, {2.0437, 5.8993}, {1.0089, 8.2001}});
}

// ---------------------------------------------------------------- 3, 4

struct CountRun {
    std::size_t trials = 0;
    std::size_t failures = 0;
    std::size_t undiagnosed = 0;
};

// Generic problems from the simulation generator; group sizes start at max(3, p+1).
CountRun count_study(std::size_t p, std::size_t groups, std::size_t trials, std::uint64_t seed) {
    const long n_min = std::max<long>(3, static_cast<long>(p) + 1);
    const CliRun r = cli_run({"--seed", std::to_string(seed), "simulate", "--p", std::to_string(p), "--groups",
                              std::to_string(groups), "--trials", std::to_string(trials), "--n-min",
                              std::to_string(n_min), "--n-max", "15"});
    CountRun out;
    out.trials = trials;
    if (r.code != 0) {
        out.failures = out.undiagnosed = trials;
        return out;
    }
    out.failures = r.doc["failures"].get<std::size_t>();
    const std::regex diag(R"((\d+) ill-conditioned or failed path)");
    for (const json& line : r.doc["log"]) {
        const std::string s = line.get<std::string>();
        if (s.find("expected") == std::string::npos) continue;
        std::smatch m;
        if (!std::regex_search(s, m, diag) || std::stoul(m[1]) == 0) ++out.undiagnosed;
    }
    return out;
}

Verdict count_criterion(std::size_t groups, const std::vector<std::size_t>& dims, std::size_t trials, double budget) {
    const auto t0 = Clock::now();
    bool pass = true;
    std::ostringstream d;
    for (std::size_t p : dims) {
        const CountRun r = count_study(p, groups, trials, 1000 + 10 * groups + p);
        const std::size_t expected =
            ml_degree_sum(static_cast<unsigned>(groups - 1), static_cast<unsigned>(p)).convert_to<std::size_t>();
        const double rate = 1.0 - static_cast<double>(r.failures) / static_cast<double>(r.trials);
        pass = pass && rate >= 0.99 && r.undiagnosed == 0;
        d << "p=" << p << ": " << r.trials - r.failures << "/" << r.trials << " with " << expected << " points";
        if (r.undiagnosed) d << " (" << r.undiagnosed << " failures without diagnostics)";
        d << "; ";
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    d << fmt(secs, 4) << " s";
    return {pass && secs < budget, d.str()};
}

Verdict criterion3() { return count_criterion(2, {1, 2, 3, 4}, 200, 120.0); }
Verdict criterion4() { return count_criterion(3, {1, 2, 3}, 100, 180.0); }

// ---------------------------------------------------------------- 5

Verdict criterion5() {
    const auto t0 = Clock::now();
    std::size_t disagree = 0, even = 0, closed = 0;
    for (unsigned k = 0; k <= 30; ++k)
        for (unsigned p = 0; p <= 30; ++p) {
            const MlDegreeBreakdown b = ml_degree_all(k, p);
            if (!b.agree()) ++disagree;
            if (b.sum % 2 == 0) ++even;
            if (k == 1 && b.sum != 2 * p + 1) ++closed;
            if (k == 2 && b.sum != 2 * p * (p + 1) + 1) ++closed;
            if (p == 1 && b.sum != 2 * k + 1) ++closed;
        }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::ostringstream d;
    d << "961 (k,p) pairs: " << disagree << " disagreements, " << closed << " closed-form mismatches, " << even
      << " even values; " << fmt(secs, 3) << " s";
    return {disagree == 0 && even == 0 && closed == 0 && secs < 1.0, d.str()};
}

// ---------------------------------------------------------------- 6

// Hand expansion of N1 (1 + (m2-x)^2/s2)(m1-x)/s1 + N2 (1 + (m1-x)^2/s1)(m2-x)/s2, highest degree first.
std::vector<double> cubic_oracle(const Problem& p) {
    std::vector<double> c(4, 0.0);
    for (int i = 0; i < 2; ++i) {
        const GroupStats& a = p.groups[i];
        const GroupStats& b = p.groups[1 - i];
        const double w = static_cast<double>(a.n) / a.scatter(0, 0);
        const double m = a.mean[0], mc = b.mean[0], sc = b.scatter(0, 0);
        // w (m - x) (x^2 - 2 mc x + mc^2 + sc) / sc
        const double q2 = 1.0 / sc, q1 = -2.0 * mc / sc, q0 = (mc * mc + sc) / sc;
        c[0] += -w * q2;
        c[1] += w * (m * q2 - q1);
        c[2] += w * (m * q1 - q0);
        c[3] += w * m * q0;
    }
    return c;
}

Verdict criterion6() {
    const auto t0 = Clock::now();
    SimConfig cfg;
    cfg.p = 1;
    std::size_t wrong_count = 0, mismatched = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < 1000; ++i) {
        Rng rng(sub_seed(6006, i));
        const Problem prob = random_problem(cfg, rng);
        const CriticalPointSet set = critical_points(build_system(prob), TrackerConfig::with_seed(i));
        std::vector<std::vector<Complex>> found, oracle;
        for (const CriticalPoint& c : set.points) found.push_back(c.mu);
        for (Complex z : poly_roots(cubic_oracle(prob))) oracle.push_back({z});
        if (found.size() != 3) {
            ++wrong_count;
            continue;
        }
        const double d = set_distance(found, oracle);
        worst = std::max(worst, d);
        if (d > 1e-8) ++mismatched;
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::ostringstream d;
    d << "1000 problems: " << wrong_count << " with a count other than 3, " << mismatched
      << " beyond 1e-8 of the cubic roots (worst " << fmt(worst, 3) << "); " << fmt(secs, 3) << " s";
    return {wrong_count == 0 && mismatched == 0 && secs < 30.0, d.str()};
}

// ---------------------------------------------------------------- 7

struct Band {
    long n_min, n_max;
    std::size_t trials;
    double lo, hi;
};

Verdict criterion7() {
    const auto t0 = Clock::now();
    bool pass = true;
    std::ostringstream d;
    for (const Band& b : {Band{3, 15, 4482, 0.2, 1.6}, Band{15, 60, 4428, 0.15, 1.3}}) {
        const CliRun r = cli_run({"--seed", "7", "simulate", "--p", "2", "--trials", std::to_string(b.trials), "--n-min",
                                  std::to_string(b.n_min), "--n-max", std::to_string(b.n_max)});
        if (r.code != 0) {
            pass = false;
            d << "simulate exit " << r.code << "; ";
            continue;
        }
        double three = 0.0;
        std::size_t five = 0;
        for (const json& row : r.doc["counts"]) {
            if (row["solutions"] == 3) three = row["percentage"].get<double>();
            if (row["solutions"] == 5) five = row["frequency"].get<std::size_t>();
        }
        const bool in_band = three >= b.lo && three <= b.hi;
        pass = pass && in_band;
        d << "[" << b.n_min << "," << b.n_max << "] x" << b.trials << ": three-solution " << std::fixed
          << std::setprecision(2) << three << "% in [" << b.lo << "%, " << b.hi << "%] " << (in_band ? "yes" : "no")
          << ", five-solution trials " << five << ", failures " << r.doc["failures"].get<std::size_t>() << "; "
          << std::defaultfloat;
        for (const json& line : r.doc["log"]) std::cerr << "  log: " << line.get<std::string>() << '\n';
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    d << fmt(secs, 4) << " s";
    return {pass && secs < 1800.0, d.str()};
}

// ---------------------------------------------------------------- 8

Verdict criterion8() {
    const auto t0 = Clock::now();
    const TrackerConfig tracker;
    const double large = large_sample_study(2, 1000, 500, 8008, tracker);
    const double small = large_sample_study(2, 10, 500, 8008, tracker);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::ostringstream d;
    d << "unique fraction N=1000: " << fmt(large) << ", N=10 (paired seeds): " << fmt(small) << "; " << fmt(secs, 3)
      << " s";
    return {large >= 0.99 && large >= small - 0.01 && secs < 600.0, d.str()};
}

// ---------------------------------------------------------------- 9

std::vector<std::vector<Complex>> points_of(const CriticalPointSet& set) {
    std::vector<std::vector<Complex>> out;
    for (const CriticalPoint& c : set.points) out.push_back(c.mu);
    return out;
}

Verdict criterion9() {
    const auto t0 = Clock::now();
    std::mt19937_64 gen(9009);
    std::ostringstream d;
    bool pass = true;
    auto report = [&](const std::string& name, bool ok, const std::string& what) {
        pass = pass && ok;
        d << name << " " << (ok ? "ok" : "FAIL") << " (" << what << "); ";
    };

    {
        double worst = 0.0;
        for (int t = 0; t < 1000; ++t) {
            const std::size_t p = 1 + t % 8;
            const SymMatrix s = random_spd(gen, p);
            const Vec v = random_vec(gen, p, 2.0);
            const Vec lhs = solve_spd(s + SymMatrix::outer(v), v);
            const Vec siv = solve_spd(s, v);
            const Vec rhs = (1.0 / (1.0 + quad_form(siv, v))) * siv;
            worst = std::max(worst, (lhs - rhs).norm() / rhs.norm());
        }
        report("woodbury", worst <= 1e-10, "max rel " + fmt(worst, 3));
    }
    {
        double worst = 0.0;
        const double h = 1e-5;
        for (int t = 0; t < 300; ++t) {
            const std::size_t p = 1 + t % 4;
            const LikelihoodSystem sys = build_system(random_stats_problem(gen, p, 2 + t % 2));
            const Vec mu = random_vec(gen, p, 3.0);
            const Vec r = residual(sys, mu);
            for (std::size_t i = 0; i < p; ++i) {
                Vec up = mu, dn = mu;
                up[i] += h;
                dn[i] -= h;
                const double fd = (objective(sys, up) - objective(sys, dn)) / (2.0 * h);
                worst = std::max(worst, std::abs(fd + r[i]) / (1.0 + r.norm()));
            }
        }
        report("gradient", worst <= 1e-5, "max rel " + fmt(worst, 3));
    }
    {
        double worst = 0.0;
        for (int t = 0; t < 1000; ++t) {
            const std::size_t p = 1 + t % 4;
            const LikelihoodSystem sys = build_system(random_stats_problem(gen, p, 2 + t % 2));
            const Vec mu = random_vec(gen, p, 5.0);
            const Vec r = residual(sys, mu);
            double prod = 1.0;
            for (const DenominatorForm& den : sys.denominators) prod *= den.eval(mu);
            const Vec f = sys.eval_polys(mu);
            for (std::size_t i = 0; i < p; ++i)
                worst = std::max(worst, std::abs(f[i] - r[i] * prod) / (1.0 + std::abs(f[i]) + std::abs(r[i] * prod)));
        }
        report("consistency", worst <= 1e-9, "max rel " + fmt(worst, 3));
    }

    std::size_t solves = 0, unpaired = 0, even = 0, gamma_agree = 0, gamma_total = 0, affine_bad = 0;
    double affine_worst = 0.0;
    for (std::size_t p = 1; p <= 3; ++p) {
        SimConfig cfg;
        cfg.p = p;
        cfg.n_min = std::max<long>(3, static_cast<long>(p) + 1);
        for (std::size_t i = 0; i < 40; ++i) {
            Rng rng(sub_seed(9100 + p, i));
            const Problem prob = random_problem(cfg, rng);
            const LikelihoodSystem sys = build_system(prob);
            const CriticalPointSet a = critical_points(sys, TrackerConfig::with_seed(2 * i));
            const CriticalPointSet b = critical_points(sys, TrackerConfig::with_seed(2 * i + 1));
            const Matrix m = random_matrix(gen, p);
            const Vec shift = random_vec(gen, p, 5.0);
            const CriticalPointSet moved =
                critical_points(build_system(affine_transform(prob, m, shift)), TrackerConfig::with_seed(2 * i));
            for (const CriticalPointSet* s : {&a, &b, &moved}) {
                ++solves;
                unpaired += s->unpaired_conjugates;
                if (s->points.size() % 2 == 0) ++even;
            }
            ++gamma_total;
            if (set_distance(points_of(a), points_of(b)) <= 1e-6) ++gamma_agree;
            std::vector<std::vector<Complex>> mapped;
            for (const CriticalPoint& c : a.points) {
                std::vector<Complex> y(p);
                for (std::size_t r = 0; r < p; ++r) {
                    y[r] = shift[r];
                    for (std::size_t col = 0; col < p; ++col) y[r] += m(r, col) * c.mu[col];
                }
                mapped.push_back(y);
            }
            const double dist = set_distance(mapped, points_of(moved));
            affine_worst = std::max(affine_worst, dist);
            if (dist > 1e-6) ++affine_bad;
        }
    }
    report("conjugates/parity", unpaired == 0 && even == 0,
           std::to_string(solves) + " solves, " + std::to_string(unpaired) + " unpaired, " + std::to_string(even) + " even");
    report("affine", affine_bad == 0, std::to_string(affine_bad) + " of " + std::to_string(gamma_total) +
                                          " beyond 1e-6, worst " + fmt(affine_worst, 3));
    report("gamma", static_cast<double>(gamma_agree) >= 0.99 * static_cast<double>(gamma_total),
           std::to_string(gamma_agree) + "/" + std::to_string(gamma_total) + " identical");
    {
        SimConfig cfg;
        cfg.trials = 200;
        cfg.seed = 9200;
        const TrackerConfig tracker;
        const SimReport ref = run_simulation(cfg, tracker, Execution::Serial);
        bool same = true;
        for (int threads : {1, 2, 3, 8}) {
            cfg.threads = threads;
            same = same && run_simulation(cfg, tracker, Execution::Parallel) == ref;
        }
        report("sim determinism", same, "serial vs 1/2/3/8 workers");
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    d << fmt(secs, 3) << " s";
    return {pass, d.str()};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Verdict()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                         criterion6, criterion7, criterion8, criterion9};
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    if (selected.empty())
        for (int i = 1; i <= 9; ++i) selected.insert(i);

    int failures = 0;
    for (int id : selected) {
        if (id < 1 || id > 9) continue;
        Verdict v;
        try {
            v = criteria[static_cast<std::size_t>(id - 1)]();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        if (!v.pass) ++failures;
        std::cout << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << " - " << v.detail << std::endl;
    }
    return failures;
}
