#pragma once
//
// Likelihood equations for the common mean of k+1 normal populations.
//
// With D_i(mu) = 1 + (m_i - mu)' S_i^{-1} (m_i - mu), the profiled equations are
//     sum_i N_i S_i^{-1} (m_i - mu) / D_i(mu) = 0,
// and clearing denominators gives p polynomials of degree 2k+1:
//     sum_i N_i (prod_{j != i} D_j(mu)) S_i^{-1} (m_i - mu) = 0.
// The expanded coefficients are computed exactly from the double-precision
// inputs and rounded once.
//

#include <array>
#include <iosfwd>
#include <vector>

#include "bfmle/linalg.hpp"
#include "bfmle/polynomial.hpp"
#include "bfmle/problem.hpp"

namespace bfmle {

class DenominatorForm {
public:
    DenominatorForm() = default;
    DenominatorForm(Vec center, SymMatrix inv_scatter);

    const Vec& center() const noexcept { return center_; }
    const SymMatrix& inv_scatter() const noexcept { return inv_scatter_; }

    double eval(const Vec& mu) const;
    Complex eval(std::span<const Complex> mu) const;
    // S^{-1} (center - mu)
    Vec pull(const Vec& mu) const;
    RPoly polynomial() const;

private:
    Vec center_;
    SymMatrix inv_scatter_;
};

DenominatorForm build_denominator(const GroupStats& stats);

struct LikelihoodSystem {
    std::size_t p = 0;
    std::size_t k_plus_1 = 0;
    std::vector<double> weights; // N_i
    std::vector<DPoly> polys;
    std::vector<DenominatorForm> denominators;

    int degree() const;
    CSystem complex_polys() const;
    // Componentwise polynomial values at a real point.
    Vec eval_polys(const Vec& mu) const;
    // Largest coefficient modulus over all polynomials.
    double coefficient_scale() const;
};

LikelihoodSystem build_system(const Problem& problem);

// The same system in coordinates y with mu = center + factor * y, where the
// means are centered and the geometry is whitened.
struct StandardizedSystem {
    LikelihoodSystem system;
    Vec center;
    Matrix factor;

    CVec to_original(std::span<const Complex> y) const;
};

// Scatter whitens the averaged scatter; Precision makes the averaged inverse scatter the identity.
enum class Whitening { Scatter, Precision };
StandardizedSystem standardize(const LikelihoodSystem& system, Whitening whitening = Whitening::Scatter);

// The cleared polynomials and their Jacobian evaluated in factored form, without
// the cancellation the expanded coefficients suffer near common zeros of the D_i.
// value has p entries, jac is row-major p x p; either may be empty.
void eval_cleared(const LikelihoodSystem& system, std::span<const Complex> mu, std::span<Complex> value,
                  std::span<Complex> jac);

// Rational form sum_i N_i S_i^{-1}(m_i - mu) / D_i(mu).
Vec residual(const LikelihoodSystem& system, const Vec& mu);
// sum_i (N_i / 2) log D_i(mu); the MLE minimizes this over real critical points.
double objective(const LikelihoodSystem& system, const Vec& mu);
// Log-likelihood at mu with the covariances profiled out.
double log_likelihood(const LikelihoodSystem& system, const Problem& problem, const Vec& mu);

// S + (m - mu)(m - mu)'
SymMatrix sigma_hat(const GroupStats& stats, const Vec& mu);

// Writes every polynomial as `e1 ... ep : coefficient` lines in graded order.
void dump_system(std::ostream& out, const LikelihoodSystem& system);

// Coefficients (c3, c2, c1, c0) of N1 D_2 (m1 - mu)/s1 + N2 D_1 (m2 - mu)/s2 for p = 1.
std::array<double, 4> univariate_cubic(const Problem& problem);
// Closed-form roots of c3 x^3 + c2 x^2 + c1 x + c0 with c3 != 0, polished by Newton on the cubic.
std::array<Complex, 3> cubic_roots(const std::array<double, 4>& coeffs);

} // namespace bfmle
