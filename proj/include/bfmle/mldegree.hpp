#pragma once
//
// Maximum likelihood degree d(k, p) of the (k+1)-population common-mean model,
// computed three independent ways in exact integer arithmetic.
//

#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace bfmle {

using BigInt = boost::multiprecision::cpp_int;

// Dense integer polynomial, index = degree, no trailing zeros.
class IntPoly {
public:
    IntPoly() = default;
    explicit IntPoly(std::vector<BigInt> coeffs);

    const std::vector<BigInt>& coefficients() const noexcept { return coeffs_; }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

    IntPoly derivative() const;
    BigInt evaluate(const BigInt& t) const;

    friend IntPoly operator*(const IntPoly& a, const IntPoly& b);
    friend bool operator==(const IntPoly&, const IntPoly&) = default;

private:
    void trim();
    std::vector<BigInt> coeffs_;
};

BigInt binomial(unsigned n, unsigned k);

// Coefficient of z^p in (1 - z)^p / (1 - 2z)^{k+1}, by truncated series products.
BigInt ml_degree_series(unsigned k, unsigned p);
// sum_{i+j=p} (-1)^i 2^j C(p,i) C(j+k,k)
BigInt ml_degree_sum(unsigned k, unsigned p);
// (1/k!) (d/dt)^k [t^k (t-1)^p] at t = 2
BigInt ml_degree_rodrigues(unsigned k, unsigned p);

struct MlDegreeBreakdown {
    BigInt series;
    BigInt sum;
    BigInt rodrigues;
    bool agree() const { return series == sum && sum == rodrigues; }
};

MlDegreeBreakdown ml_degree_all(unsigned k, unsigned p);

} // namespace bfmle
