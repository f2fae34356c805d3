#include "bfmle/system.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "bfmle/error.hpp"

namespace bfmle {

DenominatorForm::DenominatorForm(Vec center, SymMatrix inv_scatter)
    : center_(std::move(center)), inv_scatter_(std::move(inv_scatter)) {}

double DenominatorForm::eval(const Vec& mu) const {
    const Vec d = center_ - mu;
    return 1.0 + quad_form(inv_scatter_ * d, d);
}

Complex DenominatorForm::eval(std::span<const Complex> mu) const {
    const std::size_t p = center_.size();
    CVec d(p);
    for (std::size_t i = 0; i < p; ++i) d[i] = center_[i] - mu[i];
    Complex acc = 1.0;
    for (std::size_t i = 0; i < p; ++i) {
        Complex row = 0.0;
        for (std::size_t j = 0; j < p; ++j) row += inv_scatter_(i, j) * d[j];
        acc += d[i] * row;
    }
    return acc;
}

Vec DenominatorForm::pull(const Vec& mu) const { return inv_scatter_ * (center_ - mu); }

namespace {

// m_j - mu_j as an exact polynomial.
RPoly offset(std::size_t p, std::size_t j, double center) {
    return RPoly::constant(p, Rational(center)) - RPoly::variable(p, j);
}

} // namespace

RPoly DenominatorForm::polynomial() const {
    const std::size_t p = center_.size();
    RPoly acc = RPoly::constant(p, Rational(1));
    for (std::size_t i = 0; i < p; ++i) {
        const RPoly di = offset(p, i, center_[i]);
        for (std::size_t j = 0; j < p; ++j) {
            const double a = inv_scatter_(i, j);
            if (a == 0.0) continue;
            acc += Rational(a) * (di * offset(p, j, center_[j]));
        }
    }
    return acc;
}

DenominatorForm build_denominator(const GroupStats& stats) {
    return DenominatorForm(stats.mean, inverse_spd(stats.scatter));
}

int LikelihoodSystem::degree() const {
    int d = -1;
    for (const DPoly& f : polys) d = std::max(d, f.degree());
    return d;
}

CSystem LikelihoodSystem::complex_polys() const {
    CSystem out;
    out.reserve(polys.size());
    for (const DPoly& f : polys) out.push_back(f.map_coefficients<Complex>([](double c) { return Complex(c, 0.0); }));
    return out;
}

Vec LikelihoodSystem::eval_polys(const Vec& mu) const {
    Vec out(polys.size());
    for (std::size_t i = 0; i < polys.size(); ++i) out[i] = polys[i].evaluate<double>(mu.values());
    return out;
}

double LikelihoodSystem::coefficient_scale() const {
    double s = 0.0;
    for (const DPoly& f : polys)
        for (const auto& [e, c] : f.terms()) s = std::max(s, std::abs(c));
    return s;
}

LikelihoodSystem build_system(const Problem& problem) {
    validate_structure(problem);
    const std::size_t p = problem.p;
    const std::size_t groups = problem.group_count();

    LikelihoodSystem system;
    system.p = p;
    system.k_plus_1 = groups;
    std::vector<RPoly> dens;
    for (const GroupStats& g : problem.groups) {
        system.weights.push_back(static_cast<double>(g.n));
        system.denominators.push_back(build_denominator(g));
        dens.push_back(system.denominators.back().polynomial());
    }

    // prod_{j != i} D_j, for each i.
    std::vector<RPoly> others(groups, RPoly::constant(p, Rational(1)));
    for (std::size_t i = 0; i < groups; ++i)
        for (std::size_t j = 0; j < groups; ++j)
            if (j != i) others[i] = others[i] * dens[j];

    for (std::size_t row = 0; row < p; ++row) {
        RPoly f(p);
        for (std::size_t i = 0; i < groups; ++i) {
            const DenominatorForm& den = system.denominators[i];
            // row of S_i^{-1} (m_i - mu)
            RPoly lin(p);
            for (std::size_t j = 0; j < p; ++j) {
                const double a = den.inv_scatter()(row, j);
                if (a != 0.0) lin += Rational(a) * offset(p, j, den.center()[j]);
            }
            f += Rational(problem.groups[i].n) * (others[i] * lin);
        }
        system.polys.push_back(f.map_coefficients<double>([](const Rational& c) { return c.convert_to<double>(); }));
    }
    return system;
}

CVec StandardizedSystem::to_original(std::span<const Complex> y) const {
    const std::size_t p = center.size();
    CVec mu(p);
    for (std::size_t i = 0; i < p; ++i) {
        Complex acc = center[i];
        for (std::size_t j = 0; j < p; ++j) acc += factor(i, j) * y[j];
        mu[i] = acc;
    }
    return mu;
}

StandardizedSystem standardize(const LikelihoodSystem& system, Whitening whitening) {
    const std::size_t p = system.p;
    Problem original{p, {}};
    Vec center(p);
    SymMatrix pooled(p);
    for (std::size_t i = 0; i < system.k_plus_1; ++i) {
        const DenominatorForm& den = system.denominators[i];
        original.groups.push_back({std::lround(system.weights[i]), den.center(), inverse_spd(den.inv_scatter())});
        center = center + den.center();
        pooled = pooled + (whitening == Whitening::Scatter ? original.groups.back().scatter : den.inv_scatter());
    }
    const double inv_k = 1.0 / static_cast<double>(system.k_plus_1);
    center = inv_k * center;
    const LowerTriangular l = cholesky(inv_k * pooled);

    // Scatter: y = L^{-1} (mu - center).  Precision: y = L' (mu - center).
    std::vector<std::vector<double>> back(p, std::vector<double>(p));
    Matrix a;
    if (whitening == Whitening::Scatter) {
        std::vector<std::vector<double>> rows(p, std::vector<double>(p));
        for (std::size_t j = 0; j < p; ++j) {
            Vec e(p);
            e[j] = 1.0;
            const Vec col = l.solve_lower(e);
            for (std::size_t i = 0; i < p; ++i) rows[i][j] = col[i];
        }
        a = Matrix::from_rows(rows);
        const Matrix lm = l.to_matrix();
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j) back[i][j] = lm(i, j);
    } else {
        a = transpose(l.to_matrix());
        for (std::size_t j = 0; j < p; ++j) {
            Vec e(p);
            e[j] = 1.0;
            const Vec col = l.solve_upper(e);
            for (std::size_t i = 0; i < p; ++i) back[i][j] = col[i];
        }
    }
    return {build_system(affine_transform(original, a, Vec(p) - a * center)), center, Matrix::from_rows(back)};
}

void eval_cleared(const LikelihoodSystem& system, std::span<const Complex> mu, std::span<Complex> value,
                  std::span<Complex> jac) {
    const std::size_t p = system.p;
    const std::size_t groups = system.k_plus_1;
    std::vector<CVec> v(groups, CVec(p));
    CVec d(groups);
    for (std::size_t i = 0; i < groups; ++i) {
        const DenominatorForm& den = system.denominators[i];
        CVec a(p);
        for (std::size_t j = 0; j < p; ++j) a[j] = den.center()[j] - mu[j];
        Complex q = 1.0;
        for (std::size_t r = 0; r < p; ++r) {
            Complex acc = 0.0;
            for (std::size_t c = 0; c < p; ++c) acc += den.inv_scatter()(r, c) * a[c];
            v[i][r] = acc;
            q += a[r] * acc;
        }
        d[i] = q;
    }

    std::fill(value.begin(), value.end(), Complex(0.0));
    std::fill(jac.begin(), jac.end(), Complex(0.0));
    for (std::size_t i = 0; i < groups; ++i) {
        const double n = system.weights[i];
        Complex prod = 1.0;
        CVec grad(p, Complex(0.0)); // gradient of prod_{j != i} D_j
        for (std::size_t j = 0; j < groups; ++j) {
            if (j == i) continue;
            Complex rest = 1.0;
            for (std::size_t l = 0; l < groups; ++l)
                if (l != i && l != j) rest *= d[l];
            for (std::size_t c = 0; c < p; ++c) grad[c] += -2.0 * rest * v[j][c];
            prod *= d[j];
        }
        if (!value.empty())
            for (std::size_t r = 0; r < p; ++r) value[r] += n * prod * v[i][r];
        if (!jac.empty())
            for (std::size_t r = 0; r < p; ++r)
                for (std::size_t c = 0; c < p; ++c)
                    jac[r * p + c] += n * (v[i][r] * grad[c] - prod * system.denominators[i].inv_scatter()(r, c));
    }
}

Vec residual(const LikelihoodSystem& system, const Vec& mu) {
    Vec out(system.p);
    for (std::size_t i = 0; i < system.k_plus_1; ++i) {
        const DenominatorForm& den = system.denominators[i];
        out = out + (system.weights[i] / den.eval(mu)) * den.pull(mu);
    }
    return out;
}

double objective(const LikelihoodSystem& system, const Vec& mu) {
    double acc = 0.0;
    for (std::size_t i = 0; i < system.k_plus_1; ++i) acc += 0.5 * system.weights[i] * std::log(system.denominators[i].eval(mu));
    return acc;
}

double log_likelihood(const LikelihoodSystem& system, const Problem& problem, const Vec& mu) {
    double total_n = 0.0;
    double acc = -objective(system, mu);
    for (const GroupStats& g : problem.groups) {
        total_n += static_cast<double>(g.n);
        acc -= 0.5 * static_cast<double>(g.n) * std::log(det_spd(g.scatter));
    }
    return acc - 0.5 * total_n * static_cast<double>(problem.p) * std::log(2.0 * std::numbers::pi * std::numbers::e);
}

SymMatrix sigma_hat(const GroupStats& stats, const Vec& mu) { return stats.scatter + SymMatrix::outer(stats.mean - mu); }

void dump_system(std::ostream& out, const LikelihoodSystem& system) {
    for (std::size_t i = 0; i < system.polys.size(); ++i) {
        out << "# f" << i + 1 << " degree " << system.polys[i].degree() << '\n';
        write_terms(out, system.polys[i]);
    }
}

std::array<double, 4> univariate_cubic(const Problem& problem) {
    if (problem.p != 1 || problem.group_count() != 2)
        throw Error(ErrorCode::DimensionMismatch, "univariate cubic needs p = 1 and two groups");
    const GroupStats& g1 = problem.groups[0];
    const GroupStats& g2 = problem.groups[1];
    const double n1 = static_cast<double>(g1.n);
    const double n2 = static_cast<double>(g2.n);
    const double a = g1.mean[0];
    const double b = g2.mean[0];
    const double u = 1.0 / g1.scatter(0, 0);
    const double w = 1.0 / g2.scatter(0, 0);

    // N1 u (a - mu)(1 + w (b - mu)^2) + N2 w (b - mu)(1 + u (a - mu)^2)
    const double c3 = -n1 * u * w - n2 * w * u;
    const double c2 = n1 * u * w * (a + 2.0 * b) + n2 * w * u * (b + 2.0 * a);
    const double c1 = -n1 * u - n1 * u * w * (2.0 * a * b + b * b) - n2 * w - n2 * w * u * (2.0 * a * b + a * a);
    const double c0 = n1 * u * a + n1 * u * w * a * b * b + n2 * w * b + n2 * w * u * a * a * b;
    return {c3, c2, c1, c0};
}

std::array<Complex, 3> cubic_roots(const std::array<double, 4>& coeffs) {
    const double c3 = coeffs[0];
    if (c3 == 0.0) throw Error(ErrorCode::InvalidArgument, "leading coefficient is zero");
    const double a = coeffs[1] / c3;
    const double b = coeffs[2] / c3;
    const double c = coeffs[3] / c3;

    // Depressed cubic t^3 + q t + r with x = t - a/3.
    const double q = b - a * a / 3.0;
    const double r = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    const Complex disc = Complex(r * r / 4.0 + q * q * q / 27.0, 0.0);
    const Complex sq = std::sqrt(disc);
    Complex big = -r / 2.0 + sq;
    if (std::abs(-r / 2.0 - sq) > std::abs(big)) big = -r / 2.0 - sq;
    const Complex cube_root_unity(-0.5, std::sqrt(3.0) / 2.0);
    Complex u0 = std::pow(big, 1.0 / 3.0);

    std::array<Complex, 3> roots;
    Complex u = u0;
    for (int i = 0; i < 3; ++i) {
        const Complex t = std::abs(u) == 0.0 ? Complex(0.0) : u - q / (3.0 * u);
        roots[i] = t - a / 3.0;
        u *= cube_root_unity;
    }

    const auto f = [&](Complex x) { return ((x + a) * x + b) * x + c; };
    const auto df = [&](Complex x) { return (3.0 * x + 2.0 * a) * x + b; };
    for (Complex& x : roots)
        for (int it = 0; it < 4; ++it) {
            const Complex d = df(x);
            if (std::abs(d) == 0.0) break;
            x -= f(x) / d;
        }
    return roots;
}

} // namespace bfmle
