#include "bfmle/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "bfmle/error.hpp"

namespace bfmle {

GroupStats summarize(const GroupData& data) {
    const std::size_t n = data.observations.size();
    const std::size_t p = data.dim();
    if (p == 0) throw Error(ErrorCode::DimensionMismatch, "group " + std::to_string(data.label) + " has no observations");
    if (n <= p)
        throw Error(ErrorCode::SampleSizeTooSmall,
                    "group " + std::to_string(data.label) + " has N=" + std::to_string(n) + " <= p=" + std::to_string(p));

    Vec mean(p);
    for (const Vec& x : data.observations) {
        if (x.size() != p) throw Error(ErrorCode::DimensionMismatch, "ragged observations");
        mean = mean + x;
    }
    mean = (1.0 / static_cast<double>(n)) * mean;

    SymMatrix scatter(p);
    for (const Vec& x : data.observations) scatter = scatter + SymMatrix::outer(x - mean);
    scatter = (1.0 / static_cast<double>(n)) * scatter;

    if (!is_positive_definite(scatter))
        throw Error(ErrorCode::DegenerateScatter, "group " + std::to_string(data.label) + " scatter is singular");
    return {static_cast<long>(n), mean, scatter};
}

namespace {

void check_problem(const Problem& problem, bool sample_sizes) {
    if (problem.p == 0 || problem.p > kMaxDim)
        throw Error(ErrorCode::DimensionMismatch, "p=" + std::to_string(problem.p) + " outside [1, 16]");
    if (problem.groups.size() < 2) throw Error(ErrorCode::DimensionMismatch, "need at least two groups");
    for (std::size_t i = 0; i < problem.groups.size(); ++i) {
        const GroupStats& g = problem.groups[i];
        const std::string tag = "group " + std::to_string(i + 1);
        if (g.mean.size() != problem.p || g.scatter.dim() != problem.p)
            throw Error(ErrorCode::DimensionMismatch, tag + " does not have dimension " + std::to_string(problem.p));
        if (g.n < 1 || (sample_sizes && g.n <= static_cast<long>(problem.p)))
            throw Error(ErrorCode::SampleSizeTooSmall,
                        tag + " has N=" + std::to_string(g.n) + " <= p=" + std::to_string(problem.p));
        for (double x : g.mean.values())
            if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, tag + " mean");
        if (!is_positive_definite(g.scatter))
            throw Error(ErrorCode::NotPositiveDefinite, tag + " scatter is not positive definite");
    }
}

} // namespace

void validate(const Problem& problem) { check_problem(problem, true); }

void validate_structure(const Problem& problem) { check_problem(problem, false); }

GroupData construct_data_with_scatter(const SymMatrix& s, long n) {
    const std::size_t p = s.dim();
    if (n < static_cast<long>(p))
        throw Error(ErrorCode::SampleSizeTooSmall, "need n >= p to realize a scatter matrix");
    const LowerTriangular l = cholesky(s);

    // Explicit zero-mean solution for the identity scatter; rows beyond p stay zero.
    const auto count = static_cast<std::size_t>(n);
    std::vector<Vec> base(count + 1, Vec(p));
    base[0][0] = std::sqrt(0.5);
    for (std::size_t k = 2; k <= p; ++k) {
        const double a = std::sqrt(1.0 / static_cast<double>(k * (k + 1)));
        for (std::size_t i = 0; i + 1 < k; ++i) base[i][k - 1] = a;
        base[k - 1][k - 1] = -static_cast<double>(k) * a;
    }
    Vec last(p);
    for (std::size_t i = 0; i < count; ++i) last = last - base[i];
    base[count] = last;

    GroupData out;
    out.observations.reserve(count + 1);
    for (const Vec& x : base) out.observations.push_back(l.apply(x));
    return out;
}

Problem affine_transform(const Problem& problem, const Matrix& a, const Vec& b) {
    const std::size_t p = problem.p;
    if (a.rows() != p || a.cols() != p || b.size() != p)
        throw Error(ErrorCode::DimensionMismatch, "transform does not match problem dimension");
    const double scale = a.max_abs();
    if (std::abs(determinant(a)) < 1e-12 * std::pow(scale, static_cast<double>(p)) || scale == 0.0)
        throw Error(ErrorCode::SingularTransform, "transform matrix is numerically singular");

    Problem out{p, {}};
    out.groups.reserve(problem.groups.size());
    for (const GroupStats& g : problem.groups) out.groups.push_back({g.n, a * g.mean + b, congruence(a, g.scatter)});
    return out;
}

// ---------------------------------------------------------------- CSV

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        const auto first = field.find_first_not_of(" \t\r");
        const auto last = field.find_last_not_of(" \t\r");
        fields.push_back(first == std::string::npos ? std::string{} : field.substr(first, last - first + 1));
    }
    return fields;
}

double parse_double(const std::string& s, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::FileNotFound, "file not found: " + path.string());
    return in;
}

} // namespace

std::vector<GroupData> read_groups_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty CSV");
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "group") throw Error(ErrorCode::ParseError, "header must be group,x1,...,xp");
    const std::size_t p = header.size() - 1;
    for (std::size_t j = 0; j < p; ++j)
        if (header[j + 1] != "x" + std::to_string(j + 1))
            throw Error(ErrorCode::ParseError, "unexpected header column '" + header[j + 1] + "'");

    std::map<int, GroupData> groups;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != p + 1)
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                                   std::to_string(p + 1) + " fields");
        const double label = parse_double(fields[0], line_no);
        if (label < 1 || label != std::floor(label))
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": group must be a positive integer");
        std::vector<double> x(p);
        for (std::size_t j = 0; j < p; ++j) x[j] = parse_double(fields[j + 1], line_no);
        auto& g = groups[static_cast<int>(label)];
        g.label = static_cast<int>(label);
        g.observations.emplace_back(std::move(x));
    }

    std::vector<GroupData> out;
    int expected = 1;
    for (auto& [label, g] : groups) {
        if (label != expected++) throw Error(ErrorCode::ParseError, "group labels must be 1..k+1 without gaps");
        out.push_back(std::move(g));
    }
    return out;
}

std::vector<GroupData> read_groups_csv(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return read_groups_csv(in);
}

// ---------------------------------------------------------------- JSON

nlohmann::json to_json(const Problem& problem) {
    nlohmann::json groups = nlohmann::json::array();
    for (const GroupStats& g : problem.groups)
        groups.push_back({{"n", g.n}, {"mean", g.mean.std_vector()}, {"scatter", g.scatter.to_full()}});
    return {{"p", problem.p}, {"groups", groups}};
}

Problem problem_from_json(const nlohmann::json& doc) {
    try {
        Problem problem;
        problem.p = doc.at("p").get<std::size_t>();
        for (const auto& g : doc.at("groups")) {
            GroupStats stats;
            stats.n = g.at("n").get<long>();
            stats.mean = Vec(g.at("mean").get<std::vector<double>>());
            stats.scatter = SymMatrix::from_full(g.at("scatter").get<std::vector<std::vector<double>>>());
            problem.groups.push_back(std::move(stats));
        }
        return problem;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
}

Problem read_problem(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
    Problem problem = problem_from_json(doc);
    validate(problem);
    return problem;
}

void write_problem(const Problem& problem, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
    out << to_json(problem).dump(2) << '\n';
}

} // namespace bfmle
