#include <sstream>

#include <gtest/gtest.h>

#include "bfmle/error.hpp"
#include "bfmle/problem.hpp"
#include "support.hpp"

using namespace bfmle;
using namespace testing_support;

namespace {

GroupData data_1d(std::initializer_list<double> xs) {
    GroupData d;
    for (double x : xs) d.observations.push_back(Vec{x});
    return d;
}

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::InvalidArgument;
}

Problem well_formed() {
    Problem p;
    p.p = 2;
    p.groups.push_back({5, Vec{0.0, 1.0}, SymMatrix::identity(2)});
    p.groups.push_back({7, Vec{1.0, 0.0}, SymMatrix::from_full({{2, 0.5}, {0.5, 1}})});
    return p;
}

// Unnormalized centered scatter of raw observations.
SymMatrix raw_scatter(const GroupData& d) {
    const std::size_t p = d.dim();
    Vec mean(p);
    for (const Vec& x : d.observations) mean = mean + x;
    mean = (1.0 / static_cast<double>(d.observations.size())) * mean;
    SymMatrix s(p);
    for (const Vec& x : d.observations) s = s + SymMatrix::outer(x - mean);
    return s;
}

} // namespace

TEST(Summarize, Examples) {
    GroupStats a = summarize(data_1d({-1.0, 1.0}));
    EXPECT_DOUBLE_EQ(a.mean[0], 0.0);
    EXPECT_DOUBLE_EQ(a.scatter(0, 0), 1.0);
    EXPECT_EQ(a.n, 2);

    GroupStats b = summarize(data_1d({0.0, 0.0, 3.0}));
    EXPECT_DOUBLE_EQ(b.mean[0], 1.0);
    EXPECT_DOUBLE_EQ(b.scatter(0, 0), 2.0);
}

TEST(Summarize, DegenerateScatter) {
    GroupData d;
    for (int i = 0; i < 3; ++i) d.observations.push_back(Vec{1.0, 2.0});
    EXPECT_EQ(code_of([&] { summarize(d); }), ErrorCode::DegenerateScatter);
}

TEST(Validate, Examples) {
    EXPECT_NO_THROW(validate(well_formed()));

    Problem small = well_formed();
    small.groups[0].n = 2;
    EXPECT_EQ(code_of([&] { validate(small); }), ErrorCode::SampleSizeTooSmall);

    Problem indefinite = well_formed();
    indefinite.groups[1].scatter = SymMatrix::from_full({{1, 2}, {2, 1}});
    EXPECT_EQ(code_of([&] { validate(indefinite); }), ErrorCode::NotPositiveDefinite);

    Problem ragged = well_formed();
    ragged.groups[1].mean = Vec{1.0};
    EXPECT_EQ(code_of([&] { validate(ragged); }), ErrorCode::DimensionMismatch);
}

TEST(Validate, AcceptsSummarizedRandomData) {
    std::mt19937_64 gen(21);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t p = 1 + trial % 4;
        Problem prob;
        prob.p = p;
        for (int g = 0; g < 2; ++g) {
            GroupData d;
            for (std::size_t i = 0; i < p + 3; ++i) {
                Vec x(p);
                for (std::size_t j = 0; j < p; ++j) x[j] = z(gen);
                d.observations.push_back(x);
            }
            prob.groups.push_back(summarize(d));
        }
        EXPECT_NO_THROW(validate(prob));
    }
}

TEST(ConstructData, ScalarExamples) {
    const GroupData d = construct_data_with_scatter(SymMatrix::from_full({{2.0}}), 1);
    ASSERT_EQ(d.observations.size(), 2u);
    EXPECT_NEAR(d.observations[0][0], 1.0, 1e-15);
    EXPECT_NEAR(d.observations[1][0], -1.0, 1e-15);

    const GroupData e = construct_data_with_scatter(SymMatrix::from_full({{0.5}}), 3);
    ASSERT_EQ(e.observations.size(), 4u);
    EXPECT_NEAR(raw_scatter(e)(0, 0), 0.5, 1e-12);
}

TEST(ConstructData, RoundTrip) {
    std::mt19937_64 gen(22);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t p = 1 + trial % 5;
        const long n = static_cast<long>(p) + trial % 3;
        const SymMatrix s = random_spd(gen, p);
        const GroupData d = construct_data_with_scatter(s, n);
        ASSERT_EQ(d.observations.size(), static_cast<std::size_t>(n + 1));
        const GroupStats st = summarize(d);
        const double scale = s.max_abs();
        for (std::size_t i = 0; i < p; ++i) {
            EXPECT_LE(std::abs(st.mean[i]), 1e-12 * (1.0 + scale));
            for (std::size_t j = 0; j <= i; ++j)
                EXPECT_LE(std::abs(st.scatter(i, j) * static_cast<double>(n + 1) - s(i, j)), 1e-9 * scale);
        }
    }
}

TEST(AffineTransform, Examples) {
    const Problem p = well_formed();
    EXPECT_EQ(affine_transform(p, Matrix::from_rows({{1, 0}, {0, 1}}), Vec{0.0, 0.0}), p);

    const Problem q = affine_transform(p, Matrix::from_rows({{2, 0}, {0, 2}}), Vec{0.0, 0.0});
    for (std::size_t g = 0; g < 2; ++g)
        for (std::size_t i = 0; i < 2; ++i) {
            EXPECT_DOUBLE_EQ(q.groups[g].mean[i], 2.0 * p.groups[g].mean[i]);
            for (std::size_t j = 0; j <= i; ++j)
                EXPECT_DOUBLE_EQ(q.groups[g].scatter(i, j), 4.0 * p.groups[g].scatter(i, j));
        }

    EXPECT_EQ(code_of([&] { affine_transform(p, Matrix::from_rows({{1, 2}, {2, 4}}), Vec{0.0, 0.0}); }),
              ErrorCode::SingularTransform);
}

TEST(ProblemIo, JsonRoundTrip) {
    const Problem p = well_formed();
    EXPECT_EQ(problem_from_json(to_json(p)), p);
}

TEST(ProblemIo, AsymmetricScatterRejected) {
    nlohmann::json doc = to_json(well_formed());
    doc["groups"][0]["scatter"] = {{1.0, 0.1}, {0.2, 1.0}};
    EXPECT_THROW(problem_from_json(doc), Error);
}

TEST(ProblemIo, Csv) {
    std::istringstream in("group,x1,x2\n1,0,0\n1,1,0\n1,0,1\n2,2,2\n2,3,2\n2,2,4\n");
    const std::vector<GroupData> groups = read_groups_csv(in);
    ASSERT_EQ(groups.size(), 2u);
    EXPECT_EQ(groups[1].observations.size(), 3u);
    EXPECT_EQ(groups[1].observations[2], (Vec{2.0, 4.0}));
}
