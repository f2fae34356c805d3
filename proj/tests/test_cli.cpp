#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "bfmle/cli.hpp"
#include "bfmle/problem.hpp"

#ifndef BFMLE_PROBLEM_DIR
#error "BFMLE_PROBLEM_DIR must be defined"
#endif

using namespace bfmle;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "bfmle");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string problem(const std::string& name) { return std::string(BFMLE_PROBLEM_DIR) + "/" + name; }

} // namespace

TEST(Cli, MlDegree) {
    const Outcome r = run({"mldegree", "1", "3"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "7\n");
}

TEST(Cli, MlDegreeVerify) {
    const Outcome r = run({"--format", "machine", "mldegree", "2", "3", "--verify"});
    ASSERT_EQ(r.code, 0);
    const auto doc = nlohmann::json::parse(r.out);
    EXPECT_EQ(doc["verify"]["agree"], true);
    EXPECT_EQ(doc["verify"]["rodrigues"], "25");
}

TEST(Cli, EstimateExampleOne) {
    const Outcome r = run({"--format", "machine", "estimate", problem("example1.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = nlohmann::json::parse(r.out);
    EXPECT_EQ(doc["real_critical_points"].size(), 3u);
}

TEST(Cli, MissingFile) {
    const Outcome r = run({"solve", "missing.problem"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("file not found"), std::string::npos);
}

TEST(Cli, UnknownFlagRejected) {
    EXPECT_EQ(run({"solve", "--bogus", problem("example1.json")}).code, 1);
    EXPECT_EQ(run({}).code, 1);
}

TEST(Cli, InvalidProblemNamesInvariant) {
    const Outcome r = run({"--tracker-min-step", "1", "solve", problem("example1.json")});
    EXPECT_EQ(r.code, 1);
    EXPECT_FALSE(r.err.empty());
}

TEST(Cli, MachineOutputRoundTripsProblem) {
    const Outcome r = run({"--format", "machine", "solve", problem("example1.json")});
    ASSERT_EQ(r.code, 0);
    const auto doc = nlohmann::json::parse(r.out);
    EXPECT_EQ(problem_from_json(doc["problem"]), read_problem(problem("example1.json")));
}

TEST(Cli, ByteIdenticalAcrossRuns) {
    const std::vector<std::string> args{"--format", "machine", "--seed", "17", "estimate", problem("example2.json")};
    EXPECT_EQ(run(args).out, run(args).out);
    const std::vector<std::string> sim{"--format", "machine", "--seed", "5", "simulate", "--trials", "30"};
    const Outcome a = run(sim);
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, run(sim).out);
    std::vector<std::string> single = sim;
    single.insert(single.begin(), {"--threads", "1"});
    EXPECT_EQ(a.out, run(single).out);
}

TEST(Cli, DumpSystem) {
    const Outcome r = run({"solve", "--dump-system", problem("symmetric-p1.json")});
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("3 : -4"), std::string::npos);
}

TEST(Cli, FixedPoint) {
    const Outcome r = run({"--format", "machine", "estimate", "--fixed-point", problem("example1.json")});
    ASSERT_EQ(r.code, 0);
    const auto doc = nlohmann::json::parse(r.out);
    EXPECT_EQ(doc["method"], "FixedPoint");
}

TEST(Cli, Simulate) {
    const Outcome r = run({"simulate", "--p", "1", "--trials", "20", "--n-min", "3", "--n-max", "6", "--seed", "2"});
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("Percentage"), std::string::npos);
}
