#pragma once
//
// One (k+1)-population common-mean estimation instance and its inputs.
//

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bfmle/linalg.hpp"

namespace bfmle {

struct GroupData {
    int label = 1;
    std::vector<Vec> observations;

    std::size_t dim() const { return observations.empty() ? 0 : observations.front().size(); }
};

// Summary statistics of one group.  The scatter is divided by n, not n - 1.
struct GroupStats {
    long n = 0;
    Vec mean;
    SymMatrix scatter;

    friend bool operator==(const GroupStats&, const GroupStats&) = default;
};

struct Problem {
    std::size_t p = 0;
    std::vector<GroupStats> groups;

    std::size_t group_count() const { return groups.size(); }
    // k in the (k+1)-population model.
    std::size_t k() const { return groups.size() - 1; }

    friend bool operator==(const Problem&, const Problem&) = default;
};

GroupStats summarize(const GroupData& data);

// Throws Error on any broken invariant.
void validate(const Problem& problem);
// Dimensions, finiteness and positive definite scatters only; sample sizes need only be positive.
void validate_structure(const Problem& problem);

// Returns n + 1 zero-mean observations whose unnormalized centered scatter equals s.
GroupData construct_data_with_scatter(const SymMatrix& s, long n);

// Means map to a * mean + b, scatters to a * scatter * a'.
Problem affine_transform(const Problem& problem, const Matrix& a, const Vec& b);

// I/O -------------------------------------------------------------------

// CSV with header `group,x1,...,xp`; one observation per row, groups 1-based.
std::vector<GroupData> read_groups_csv(std::istream& in);
std::vector<GroupData> read_groups_csv(const std::filesystem::path& path);

nlohmann::json to_json(const Problem& problem);
Problem problem_from_json(const nlohmann::json& doc);
Problem read_problem(const std::filesystem::path& path);
void write_problem(const Problem& problem, const std::filesystem::path& path);

} // namespace bfmle
