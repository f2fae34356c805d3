#include "bfmle/cli.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bfmle/error.hpp"
#include "bfmle/estimator.hpp"
#include "bfmle/mldegree.hpp"
#include "bfmle/simulation.hpp"

namespace bfmle::cli {

namespace {

using nlohmann::json;

struct Options {
    std::string format = "human";
    std::uint64_t seed = 0;
    int threads = 0;
    TrackerConfig tracker;
    double gamma_angle = std::numeric_limits<double>::quiet_NaN();

    std::string problem_path;
    bool dump_system = false;
    bool fixed_point = false;
    std::size_t max_iters = 1000;
    double fp_tol = 1e-12;

    SimConfig sim;
    std::string report_path;
    std::string failures_dir;

    unsigned k = 1;
    unsigned p = 1;
    bool verify = false;
};

void add_tracker_flags(CLI::App& app, Options& o) {
    TrackerConfig& t = o.tracker;
    app.add_option("--tracker-initial-step", t.initial_step, "Initial step in t")->capture_default_str();
    app.add_option("--tracker-min-step", t.min_step, "Step below which a path is declared failed")->capture_default_str();
    app.add_option("--tracker-max-step", t.max_step, "Largest step in t")->capture_default_str();
    app.add_option("--tracker-corrector-tol", t.corrector_tol, "Newton corrector tolerance")->capture_default_str();
    app.add_option("--tracker-max-corrector-iters", t.max_corrector_iters, "Newton iterations per step")
        ->capture_default_str();
    app.add_option("--tracker-divergence-norm", t.divergence_norm, "Norm at which a path diverges")->capture_default_str();
    app.add_option("--tracker-endgame-start-t", t.endgame_start_t, "t at which Newton on the target takes over")
        ->capture_default_str();
    app.add_option("--tracker-refine-tol", t.refine_tol, "Endpoint refinement tolerance")->capture_default_str();
    app.add_option("--tracker-dedup-tol", t.dedup_tol, "Relative distance for merging endpoints")->capture_default_str();
    app.add_option("--tracker-real-imag-tol", t.real_imag_tol, "Relative imaginary part counted as real")
        ->capture_default_str();
    app.add_option("--tracker-denom-zero-tol", t.denom_zero_tol, "Vanishing-denominator threshold")->capture_default_str();
    app.add_option("--tracker-singular-condition", t.singular_condition, "Condition number flagged as singular")
        ->capture_default_str();
    app.add_option("--tracker-gamma-angle", o.gamma_angle, "Fix gamma = exp(i*angle) instead of drawing it from --seed");
}

Problem load_problem(const std::string& path) {
    if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") {
        Problem problem;
        for (const GroupData& g : read_groups_csv(std::filesystem::path(path))) {
            problem.p = g.dim();
            problem.groups.push_back(summarize(g));
        }
        validate(problem);
        return problem;
    }
    return read_problem(path);
}

TrackerConfig effective_tracker(const Options& o) {
    TrackerConfig t = o.tracker;
    const TrackerConfig seeded = TrackerConfig::with_seed(o.seed);
    t.seed = o.seed;
    t.gamma = std::isnan(o.gamma_angle) ? seeded.gamma : std::polar(1.0, o.gamma_angle);
    t.threads = o.threads;
    t.validate();
    return t;
}

json complex_list(const CVec& z) {
    json re = json::array(), im = json::array();
    for (const Complex& c : z) {
        re.push_back(c.real());
        im.push_back(c.imag());
    }
    return {{"re", re}, {"im", im}};
}

json points_json(const CriticalPointSet& set) {
    json pts = json::array();
    for (const CriticalPoint& cp : set.points) {
        json dens = json::array();
        for (const Complex& d : cp.denominator_values) dens.push_back({d.real(), d.imag()});
        pts.push_back({{"mu", complex_list(cp.mu)},
                       {"real", cp.is_real},
                       {"residual", cp.residual_norm},
                       {"multiplicity", cp.multiplicity_estimate},
                       {"singular", cp.singular},
                       {"denominators", dens}});
    }
    return pts;
}

json set_summary_json(const CriticalPointSet& set) {
    return {{"paths", set.total_paths},
            {"kept", set.points.size()},
            {"real", set.real_count()},
            {"diverged_paths", set.diverged_paths},
            {"failed_paths", set.failed_paths},
            {"discarded_denominator_zero", set.discarded_denominator_zero},
            {"unpaired_conjugates", set.unpaired_conjugates},
            {"warnings", set.warnings}};
}

json tracker_json(const TrackerConfig& t) {
    return {{"seed", t.seed},
            {"gamma", {t.gamma.real(), t.gamma.imag()}},
            {"initial_step", t.initial_step},
            {"min_step", t.min_step},
            {"max_step", t.max_step},
            {"corrector_tol", t.corrector_tol},
            {"max_corrector_iters", t.max_corrector_iters},
            {"divergence_norm", t.divergence_norm},
            {"endgame_start_t", t.endgame_start_t},
            {"refine_tol", t.refine_tol},
            {"dedup_tol", t.dedup_tol},
            {"real_imag_tol", t.real_imag_tol},
            {"denom_zero_tol", t.denom_zero_tol},
            {"singular_condition", t.singular_condition}};
}

void print_vec(std::ostream& out, const Vec& v) {
    out << '(';
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ", " : "") << v[i];
    out << ')';
}

void print_set_human(std::ostream& out, const CriticalPointSet& set) {
    out << "paths: " << set.total_paths << " (diverged " << set.diverged_paths << ", failed " << set.failed_paths
        << ", vanishing denominators " << set.discarded_denominator_zero << ")\n";
    out << "critical points: " << set.points.size() << " (" << set.real_count() << " real, "
        << set.points.size() - set.real_count() << " complex)\n";
    out << "solutions (re im ... | real? | residual | D_i re im):\n";
    write_solution_dump(out, set);
    for (const std::string& w : set.warnings) out << "warning: " << w << '\n';
}

int cmd_solve(const Options& o, std::ostream& out) {
    const Problem problem = load_problem(o.problem_path);
    const TrackerConfig tracker = effective_tracker(o);
    const LikelihoodSystem system = build_system(problem);
    const CriticalPointSet set = critical_points(system, tracker);
    if (o.format == "machine") {
        json doc = {{"command", "solve"}, {"problem", to_json(problem)}, {"tracker", tracker_json(tracker)},
                    {"summary", set_summary_json(set)}, {"critical_points", points_json(set)}};
        if (o.dump_system) {
            std::ostringstream ss;
            dump_system(ss, system);
            doc["system"] = ss.str();
        }
        out << doc.dump(2) << '\n';
        return 0;
    }
    if (o.dump_system) dump_system(out, system);
    print_set_human(out, set);
    return 0;
}

int cmd_estimate(const Options& o, std::ostream& out) {
    const Problem problem = load_problem(o.problem_path);
    const LikelihoodSystem system = build_system(problem);
    EstimateReport r;
    TrackerConfig tracker;
    if (o.fixed_point) {
        FixedPointOptions fp;
        fp.max_iters = o.max_iters;
        fp.tol = o.fp_tol;
        r = estimate_fixed_point(problem, fp);
    } else {
        tracker = effective_tracker(o);
        r = estimate_global(problem, tracker);
    }

    if (o.format == "machine") {
        json sigmas = json::array();
        for (const SymMatrix& s : r.mle_sigmas) sigmas.push_back(s.to_full());
        json real_pts = json::array();
        for (const RealCriticalPoint& rp : r.all_real_critical_points)
            real_pts.push_back({{"mu", rp.mu.std_vector()}, {"objective", rp.objective}});
        json doc = {{"command", "estimate"},
                    {"method", std::string(to_string(r.method))},
                    {"problem", to_json(problem)},
                    {"mle_mu", r.mle_mu.std_vector()},
                    {"mle_sigmas", sigmas},
                    {"objective_at_mle", r.objective_at_mle},
                    {"log_likelihood_at_mle", r.log_likelihood_at_mle},
                    {"real_critical_points", real_pts},
                    {"complex_count", r.complex_count},
                    {"iterations_or_paths", r.iterations_or_paths},
                    {"converged", r.converged},
                    {"near_tie", r.near_tie},
                    {"warnings", r.warnings}};
        if (!o.fixed_point) {
            doc["tracker"] = tracker_json(tracker);
            doc["summary"] = set_summary_json(r.critical_points);
            doc["critical_points"] = points_json(r.critical_points);
        }
        if (o.dump_system) {
            std::ostringstream ss;
            dump_system(ss, system);
            doc["system"] = ss.str();
        }
        out << doc.dump(2) << '\n';
        return 0;
    }

    if (o.dump_system) dump_system(out, system);
    out << std::setprecision(10);
    out << "method: " << to_string(r.method) << (r.method == Method::FixedPoint ? " (local; not certified global)" : "")
        << '\n';
    out << "MLE mu: ";
    print_vec(out, r.mle_mu);
    out << "\nobjective: " << r.objective_at_mle << "\nlog-likelihood: " << r.log_likelihood_at_mle << '\n';
    for (std::size_t i = 0; i < r.mle_sigmas.size(); ++i) {
        out << "Sigma_" << i + 1 << ":";
        for (const auto& row : r.mle_sigmas[i].to_full()) {
            out << " [";
            for (std::size_t j = 0; j < row.size(); ++j) out << (j ? ", " : "") << row[j];
            out << ']';
        }
        out << '\n';
    }
    if (r.method == Method::FixedPoint) {
        out << "iterations: " << r.iterations_or_paths << (r.converged ? " (converged)" : " (NotConverged)") << '\n';
    } else {
        out << "real critical points (ascending objective): " << r.all_real_critical_points.size() << '\n';
        for (const RealCriticalPoint& rp : r.all_real_critical_points) {
            out << "  mu = ";
            print_vec(out, rp.mu);
            out << "  objective = " << rp.objective << '\n';
        }
        out << "complex critical points: " << r.complex_count << '\n';
        print_set_human(out, r.critical_points);
    }
    for (const std::string& w : r.warnings)
        if (r.method == Method::FixedPoint || w.rfind("NearTie", 0) == 0) out << "warning: " << w << '\n';
    return 0;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
    SimConfig cfg = o.sim;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    const TrackerConfig tracker = effective_tracker(o);
    const SimReport report = run_simulation(cfg, tracker);

    std::ostringstream table;
    write_report(table, report);
    if (!o.report_path.empty()) {
        std::ofstream f(o.report_path);
        if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + o.report_path);
        f << table.str();
    }
    if (!o.failures_dir.empty()) emit_failures(report, o.failures_dir);
    for (const std::string& line : report.log) err << "simulate: " << line << '\n';

    if (o.format == "machine") {
        json counts = json::array();
        for (const auto& [c, f] : report.counts) counts.push_back({{"solutions", c}, {"frequency", f}, {"percentage", report.percentage(c)}});
        json doc = {{"command", "simulate"},
                    {"config",
                     {{"p", cfg.p}, {"groups", cfg.groups}, {"trials", cfg.trials}, {"n_min", cfg.n_min},
                      {"n_max", cfg.n_max}, {"mu_box", cfg.mu_box}, {"diag_min", cfg.diag_min},
                      {"diag_max", cfg.diag_max}, {"offdiag", cfg.offdiag}, {"seed", cfg.seed}}},
                    {"expected_kept", report.expected_kept},
                    {"counts", counts},
                    {"failures", report.failures.size()},
                    {"log", report.log}};
        out << doc.dump(2) << '\n';
    } else {
        out << table.str();
    }
    return 0;
}

int cmd_mldegree(const Options& o, std::ostream& out) {
    if (o.format == "machine") {
        const MlDegreeBreakdown b = ml_degree_all(o.k, o.p);
        json doc = {{"command", "mldegree"}, {"k", o.k}, {"p", o.p}, {"value", b.sum.str()}};
        if (o.verify) doc["verify"] = {{"series", b.series.str()}, {"sum", b.sum.str()}, {"rodrigues", b.rodrigues.str()}, {"agree", b.agree()}};
        out << doc.dump(2) << '\n';
        return b.agree() ? 0 : 2;
    }
    if (!o.verify) {
        out << ml_degree_sum(o.k, o.p) << '\n';
        return 0;
    }
    const MlDegreeBreakdown b = ml_degree_all(o.k, o.p);
    out << b.sum << '\n';
    out << "series:    " << b.series << '\n';
    out << "sum:       " << b.sum << '\n';
    out << "rodrigues: " << b.rodrigues << '\n';
    out << (b.agree() ? "agree" : "DISAGREE") << '\n';
    return b.agree() ? 0 : 2;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Common-mean maximum likelihood for k+1 normal populations: all critical points by homotopy "
                 "continuation"};
    app.name(args.empty() ? "bfmle" : args.front());
    app.fallthrough();
    app.require_subcommand(1, 1);
    app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"human", "machine"}))->capture_default_str();
    app.add_option("--seed", o.seed, "Seed for gamma and all randomness")->envname("BF_SEED")->capture_default_str();
    app.add_option("--threads", o.threads, "Worker threads (0 = OpenMP default)")->capture_default_str();
    add_tracker_flags(app, o);

    auto* solve = app.add_subcommand("solve", "All critical points of the likelihood equations");
    solve->add_option("problem", o.problem_path, "Problem file (.json) or raw data (.csv)")->required();
    solve->add_flag("--dump-system", o.dump_system, "Print the expanded polynomial system");

    auto* estimate = app.add_subcommand("estimate", "Maximum likelihood estimate");
    estimate->add_option("problem", o.problem_path, "Problem file (.json) or raw data (.csv)")->required();
    estimate->add_flag("--fixed-point", o.fixed_point, "Use the local fixed-point iteration instead of the global solve");
    estimate->add_option("--max-iters", o.max_iters, "Fixed-point iteration limit")->capture_default_str();
    estimate->add_option("--tol", o.fp_tol, "Fixed-point relative tolerance on mu")->capture_default_str();
    estimate->add_flag("--dump-system", o.dump_system, "Print the expanded polynomial system");

    auto* simulate = app.add_subcommand("simulate", "Frequency of real-solution counts over random problems");
    simulate->add_option("--p", o.sim.p, "Dimension")->capture_default_str();
    simulate->add_option("--groups", o.sim.groups, "Number of populations (k+1)")->capture_default_str();
    simulate->add_option("--trials", o.sim.trials, "Number of trials")->capture_default_str();
    simulate->add_option("--n-min", o.sim.n_min, "Smallest group size")->capture_default_str();
    simulate->add_option("--n-max", o.sim.n_max, "Largest group size")->capture_default_str();
    simulate->add_option("--mu-box", o.sim.mu_box, "Half-width of the box the mean is drawn from")->capture_default_str();
    simulate->add_option("--diag-min", o.sim.diag_min, "Lower bound of the factor diagonal")->capture_default_str();
    simulate->add_option("--diag-max", o.sim.diag_max, "Upper bound of the factor diagonal")->capture_default_str();
    simulate->add_option("--offdiag", o.sim.offdiag, "Half-width of the factor off-diagonal range")->capture_default_str();
    simulate->add_option("--report", o.report_path, "Also write the table to this file");
    simulate->add_option("--emit-failures", o.failures_dir, "Write anomalous trials as problem files here");

    auto* mldegree = app.add_subcommand("mldegree", "Maximum likelihood degree d(k, p)");
    mldegree->add_option("k", o.k, "k (populations minus one)")->required();
    mldegree->add_option("p", o.p, "Dimension")->required();
    mldegree->add_flag("--verify", o.verify, "Show all three exact computations");

    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (solve->parsed()) return cmd_solve(o, out);
        if (estimate->parsed()) return cmd_estimate(o, out);
        if (simulate->parsed()) return cmd_simulate(o, out, err);
        return cmd_mldegree(o, out);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::FileNotFound) {
            err << "error: file not found: " << o.problem_path << '\n';
            return 1;
        }
        err << "error: " << e.what() << '\n';
        return is_internal(e.code()) ? 2 : 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 2;
    }
}

int run(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr); }

} // namespace bfmle::cli
