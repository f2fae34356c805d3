#include "bfmle/mldegree.hpp"

#include <string>

#include "bfmle/error.hpp"

namespace bfmle {

namespace {

constexpr unsigned kMaxArg = 64;

void check_range(unsigned k, unsigned p) {
    if (k > kMaxArg || p > kMaxArg)
        throw Error(ErrorCode::InvalidArgument, "k and p must be at most 64");
}

// Truncated product of two power series up to degree `order`.
std::vector<BigInt> series_mul(const std::vector<BigInt>& a, const std::vector<BigInt>& b, unsigned order) {
    std::vector<BigInt> r(order + 1, 0);
    for (unsigned i = 0; i <= order && i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (unsigned j = 0; i + j <= order && j < b.size(); ++j) r[i + j] += a[i] * b[j];
    }
    return r;
}

} // namespace

IntPoly::IntPoly(std::vector<BigInt> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

void IntPoly::trim() {
    while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

IntPoly IntPoly::derivative() const {
    if (coeffs_.size() <= 1) return IntPoly{};
    std::vector<BigInt> d(coeffs_.size() - 1);
    for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = coeffs_[i] * static_cast<unsigned>(i);
    return IntPoly(std::move(d));
}

BigInt IntPoly::evaluate(const BigInt& t) const {
    BigInt acc = 0;
    for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * t + coeffs_[i];
    return acc;
}

IntPoly operator*(const IntPoly& a, const IntPoly& b) {
    if (a.coeffs_.empty() || b.coeffs_.empty()) return IntPoly{};
    std::vector<BigInt> r(a.coeffs_.size() + b.coeffs_.size() - 1, 0);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
        for (std::size_t j = 0; j < b.coeffs_.size(); ++j) r[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return IntPoly(std::move(r));
}

BigInt binomial(unsigned n, unsigned k) {
    if (k > n) return 0;
    BigInt r = 1;
    for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

BigInt ml_degree_series(unsigned k, unsigned p) {
    check_range(k, p);
    // 1/(1 - 2z) = sum 2^j z^j
    std::vector<BigInt> geometric(p + 1);
    geometric[0] = 1;
    for (unsigned j = 1; j <= p; ++j) geometric[j] = geometric[j - 1] * 2;

    std::vector<BigInt> acc(p + 1, 0);
    acc[0] = 1;
    for (unsigned i = 0; i <= k; ++i) acc = series_mul(acc, geometric, p);
    const std::vector<BigInt> one_minus_z{1, -1};
    for (unsigned i = 0; i < p; ++i) acc = series_mul(acc, one_minus_z, p);
    return acc[p];
}

BigInt ml_degree_sum(unsigned k, unsigned p) {
    check_range(k, p);
    BigInt total = 0;
    for (unsigned i = 0; i <= p; ++i) {
        const unsigned j = p - i;
        BigInt term = (BigInt(1) << j) * binomial(p, i) * binomial(j + k, k);
        total += (i % 2 == 0) ? term : BigInt(-term);
    }
    return total;
}

BigInt ml_degree_rodrigues(unsigned k, unsigned p) {
    check_range(k, p);
    // t^k (t - 1)^p = sum_j C(p,j) (-1)^{p-j} t^{j+k}
    std::vector<BigInt> coeffs(p + k + 1, 0);
    for (unsigned j = 0; j <= p; ++j) {
        const BigInt c = binomial(p, j);
        coeffs[j + k] = ((p - j) % 2 == 0) ? c : BigInt(-c);
    }
    IntPoly poly(std::move(coeffs));
    BigInt factorial = 1;
    for (unsigned i = 1; i <= k; ++i) {
        poly = poly.derivative();
        factorial *= i;
    }
    const BigInt value = poly.evaluate(2);
    if (value % factorial != 0)
        throw Error(ErrorCode::InexactDivision,
                    "k! does not divide the derivative at t=2 for k=" + std::to_string(k) + ", p=" + std::to_string(p));
    return value / factorial;
}

MlDegreeBreakdown ml_degree_all(unsigned k, unsigned p) {
    return {ml_degree_series(k, p), ml_degree_sum(k, p), ml_degree_rodrigues(k, p)};
}

} // namespace bfmle
