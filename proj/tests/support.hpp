#pragma once

#include <algorithm>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "bfmle/linalg.hpp"
#include "bfmle/problem.hpp"

namespace testing_support {

using bfmle::Matrix;
using bfmle::SymMatrix;
using bfmle::Vec;

inline Eigen::MatrixXd dense(const SymMatrix& s) {
    const auto p = static_cast<Eigen::Index>(s.dim());
    Eigen::MatrixXd m(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j) m(i, j) = s(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    return m;
}

inline Eigen::VectorXd dense(const Vec& v) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i)) = v[i];
    return x;
}

inline Vec random_vec(std::mt19937_64& gen, std::size_t p, double half_width = 1.0) {
    std::uniform_real_distribution<double> u(-half_width, half_width);
    Vec v(p);
    for (std::size_t i = 0; i < p; ++i) v[i] = u(gen);
    return v;
}

// A A' + p I with A uniform entries; comfortably conditioned.
inline SymMatrix random_spd(std::mt19937_64& gen, std::size_t p, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd a(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = u(gen);
    const Eigen::MatrixXd s = scale * (a * a.transpose() + 0.5 * static_cast<double>(p) * Eigen::MatrixXd::Identity(a.rows(), a.cols()));
    SymMatrix out(p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j <= i; ++j) out.set(i, j, s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    return out;
}

inline Matrix random_matrix(std::mt19937_64& gen, std::size_t p) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix a(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) a(i, j) = u(gen) + (i == j ? 2.0 : 0.0);
    return a;
}

// Random summary-statistics problem with n_i in [p+1, 15].
inline bfmle::Problem random_stats_problem(std::mt19937_64& gen, std::size_t p, std::size_t groups = 2) {
    std::uniform_int_distribution<long> n(static_cast<long>(p) + 1, 15);
    bfmle::Problem prob;
    prob.p = p;
    for (std::size_t g = 0; g < groups; ++g)
        prob.groups.push_back({n(gen), random_vec(gen, p, 3.0), random_spd(gen, p)});
    return prob;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / (1.0 + std::max(std::abs(a), std::abs(b))); }

// Sorts complex points lexicographically by (re, im) of each coordinate.
inline void sort_points(std::vector<std::vector<std::complex<double>>>& pts) {
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
            if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
        }
        return false;
    });
}

// Greedy matching of two point sets; returns the largest matched distance or +inf if sizes differ.
inline double set_distance(std::vector<std::vector<std::complex<double>>> a,
                           std::vector<std::vector<std::complex<double>>> b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    std::vector<bool> used(b.size(), false);
    for (const auto& x : a) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (used[j]) continue;
            double d = 0.0;
            double nx = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                d += std::norm(x[i] - b[j][i]);
                nx += std::norm(x[i]);
            }
            d = std::sqrt(d) / (1.0 + std::sqrt(nx));
            if (d < best) {
                best = d;
                arg = j;
            }
        }
        used[arg] = true;
        worst = std::max(worst, best);
    }
    return worst;
}

// Roots of c[0] x^n + ... + c[n] from the companion matrix, polished by Newton.
inline std::vector<std::complex<double>> poly_roots(const std::vector<double>& c) {
    const auto n = static_cast<Eigen::Index>(c.size() - 1);
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) comp(0, j) = -c[static_cast<std::size_t>(j + 1)] / c[0];
    for (Eigen::Index i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    const Eigen::VectorXcd ev = comp.eigenvalues();
    std::vector<std::complex<double>> roots;
    for (Eigen::Index i = 0; i < n; ++i) {
        std::complex<double> z = ev(i);
        for (int it = 0; it < 8; ++it) {
            std::complex<double> f = c[0];
            std::complex<double> df = 0.0;
            for (std::size_t k = 1; k < c.size(); ++k) {
                df = df * z + f;
                f = f * z + c[k];
            }
            if (std::abs(df) == 0.0) break;
            z -= f / df;
        }
        roots.push_back(z);
    }
    return roots;
}

} // namespace testing_support
