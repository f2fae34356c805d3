#pragma once
//
// Sparse multivariate polynomials keyed by exponent tuples, plus a compiled
// evaluator for complex values and Jacobians.
//

#include <algorithm>
#include <complex>
#include <cstdint>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace bfmle {

using Rational = boost::multiprecision::cpp_rational;
using Complex = std::complex<double>;
using CVec = std::vector<Complex>;

using Exponents = std::vector<int>;

inline int total_degree(const Exponents& e) { return std::accumulate(e.begin(), e.end(), 0); }

// Graded order: lower total degree first, then x1 before x2 before ... within a degree.
struct GradedLex {
    bool operator()(const Exponents& a, const Exponents& b) const {
        const int da = total_degree(a);
        const int db = total_degree(b);
        if (da != db) return da < db;
        return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
    }
};

template <class T>
class Polynomial {
public:
    using Terms = std::map<Exponents, T, GradedLex>;

    Polynomial() = default;
    explicit Polynomial(std::size_t nvars) : nvars_(nvars) {}

    static Polynomial constant(std::size_t nvars, const T& c) {
        Polynomial r(nvars);
        r.add_term(Exponents(nvars, 0), c);
        return r;
    }

    static Polynomial variable(std::size_t nvars, std::size_t i) {
        Polynomial r(nvars);
        Exponents e(nvars, 0);
        e[i] = 1;
        r.add_term(e, T(1));
        return r;
    }

    std::size_t nvars() const noexcept { return nvars_; }
    const Terms& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }

    int degree() const {
        int d = 0;
        for (const auto& [e, c] : terms_) d = std::max(d, total_degree(e));
        return terms_.empty() ? -1 : d;
    }

    void add_term(const Exponents& e, const T& c) {
        if (c == T(0)) return;
        auto [it, inserted] = terms_.try_emplace(e, c);
        if (!inserted) {
            it->second += c;
            if (it->second == T(0)) terms_.erase(it);
        }
    }

    T coefficient(const Exponents& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? T(0) : it->second;
    }

    Polynomial& operator+=(const Polynomial& o) {
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }

    Polynomial& operator-=(const Polynomial& o) {
        for (const auto& [e, c] : o.terms_) add_term(e, T(-c));
        return *this;
    }

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        Polynomial r(a.nvars_);
        Exponents e(a.nvars_);
        for (const auto& [ea, ca] : a.terms_)
            for (const auto& [eb, cb] : b.terms_) {
                for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
                r.add_term(e, T(ca * cb));
            }
        return r;
    }

    friend Polynomial operator*(const T& s, const Polynomial& a) {
        Polynomial r(a.nvars_);
        for (const auto& [e, c] : a.terms_) r.add_term(e, T(s * c));
        return r;
    }

    template <class U, class F>
    Polynomial<U> map_coefficients(F&& f) const {
        Polynomial<U> r(nvars_);
        for (const auto& [e, c] : terms_) r.add_term(e, f(c));
        return r;
    }

    template <class V>
    V evaluate(std::span<const V> x) const {
        V acc(0);
        for (const auto& [e, c] : terms_) {
            V term(c);
            for (std::size_t i = 0; i < nvars_; ++i)
                for (int k = 0; k < e[i]; ++k) term *= x[i];
            acc += term;
        }
        return acc;
    }

private:
    std::size_t nvars_ = 0;
    Terms terms_;
};

using RPoly = Polynomial<Rational>;
using DPoly = Polynomial<double>;
using CPoly = Polynomial<Complex>;

// Square (or not) list of polynomials over a common variable set.
using CSystem = std::vector<CPoly>;

// Writes `e1 e2 ... ep : coefficient` lines in graded order, 17 significant digits.
void write_terms(std::ostream& out, const DPoly& poly);

// Flattened representation for repeated evaluation of F and its Jacobian.
class CompiledSystem {
public:
    CompiledSystem() = default;
    explicit CompiledSystem(const CSystem& system);

    std::size_t equations() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t variables() const noexcept { return nvars_; }
    std::vector<int> degrees() const;
    // Largest coefficient modulus per equation.
    std::vector<double> coefficient_scales() const;

    // value has equations() entries; jac is row-major equations() x variables(); either may be empty.
    void evaluate(std::span<const Complex> x, std::span<Complex> value, std::span<Complex> jac) const;

private:
    struct Term {
        Complex coeff;
        std::size_t first_exp;
    };

    std::size_t nvars_ = 0;
    int max_exp_ = 0;
    std::vector<std::size_t> offsets_;
    std::vector<Term> terms_;
    std::vector<std::uint8_t> exps_;
    std::vector<int> degrees_;
};

} // namespace bfmle
