#include "bfmle/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bfmle/error.hpp"

namespace bfmle {

namespace {

void check_dim(std::size_t p) {
    if (p == 0 || p > kMaxDim)
        throw Error(ErrorCode::DimensionMismatch, "dimension " + std::to_string(p) + " outside [1, 16]");
}

void check_finite(std::span<const double> xs) {
    for (double x : xs)
        if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, "non-finite entry");
}

void check_same(std::size_t a, std::size_t b) {
    if (a != b)
        throw Error(ErrorCode::DimensionMismatch, std::to_string(a) + " vs " + std::to_string(b));
}

constexpr double kPivotFloor = 1e-300;

} // namespace

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SampleSizeTooSmall: return "SampleSizeTooSmall";
    case ErrorCode::DegenerateScatter: return "DegenerateScatter";
    case ErrorCode::SingularTransform: return "SingularTransform";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::PathCountOverflow: return "PathCountOverflow";
    case ErrorCode::NoRealSolution: return "NoRealSolution";
    case ErrorCode::InexactDivision: return "InexactDivision";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

// ---------------------------------------------------------------- Vec

Vec::Vec(std::size_t n, double fill) : data_(n, fill) {}

Vec::Vec(std::initializer_list<double> xs) : data_(xs) { check_finite(data_); }

Vec::Vec(std::vector<double> xs) : data_(std::move(xs)) { check_finite(data_); }

double Vec::norm() const { return std::sqrt(dot(*this, *this)); }

Vec operator+(const Vec& a, const Vec& b) {
    check_same(a.size(), b.size());
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

Vec operator-(const Vec& a, const Vec& b) {
    check_same(a.size(), b.size());
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

Vec operator*(double s, const Vec& a) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
    return r;
}

double dot(const Vec& a, const Vec& b) {
    check_same(a.size(), b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// ---------------------------------------------------------------- SymMatrix

SymMatrix::SymMatrix(std::size_t p) : p_(p), lower_(p * (p + 1) / 2, 0.0) { check_dim(p); }

SymMatrix SymMatrix::from_full(const std::vector<std::vector<double>>& rows, double rel_tol) {
    const std::size_t p = rows.size();
    SymMatrix s(p);
    double scale = 0.0;
    for (const auto& row : rows) {
        check_same(row.size(), p);
        check_finite(row);
        for (double x : row) scale = std::max(scale, std::abs(x));
    }
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (std::abs(rows[i][j] - rows[j][i]) > rel_tol * scale)
                throw Error(ErrorCode::InvalidArgument,
                            "matrix not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
        }
        for (std::size_t j = 0; j <= i; ++j) s.lower_[index(i, j)] = rows[i][j];
    }
    return s;
}

SymMatrix SymMatrix::from_lower(std::size_t p, std::span<const double> packed) {
    SymMatrix s(p);
    check_same(packed.size(), s.lower_.size());
    check_finite(packed);
    std::copy(packed.begin(), packed.end(), s.lower_.begin());
    return s;
}

SymMatrix SymMatrix::identity(std::size_t p) {
    SymMatrix s(p);
    for (std::size_t i = 0; i < p; ++i) s.lower_[index(i, i)] = 1.0;
    return s;
}

SymMatrix SymMatrix::diagonal(const Vec& d) {
    SymMatrix s(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) s.lower_[index(i, i)] = d[i];
    return s;
}

SymMatrix SymMatrix::outer(const Vec& v) {
    SymMatrix s(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j <= i; ++j) s.lower_[index(i, j)] = v[i] * v[j];
    return s;
}

double SymMatrix::operator()(std::size_t i, std::size_t j) const {
    return i >= j ? lower_[index(i, j)] : lower_[index(j, i)];
}

void SymMatrix::set(std::size_t i, std::size_t j, double value) {
    if (i >= j)
        lower_[index(i, j)] = value;
    else
        lower_[index(j, i)] = value;
}

std::vector<std::vector<double>> SymMatrix::to_full() const {
    std::vector<std::vector<double>> rows(p_, std::vector<double>(p_));
    for (std::size_t i = 0; i < p_; ++i)
        for (std::size_t j = 0; j < p_; ++j) rows[i][j] = (*this)(i, j);
    return rows;
}

double SymMatrix::max_abs() const {
    double m = 0.0;
    for (double x : lower_) m = std::max(m, std::abs(x));
    return m;
}

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
    check_same(a.p_, b.p_);
    SymMatrix r(a.p_);
    for (std::size_t i = 0; i < r.lower_.size(); ++i) r.lower_[i] = a.lower_[i] + b.lower_[i];
    return r;
}

SymMatrix operator*(double s, const SymMatrix& a) {
    SymMatrix r(a.p_);
    for (std::size_t i = 0; i < r.lower_.size(); ++i) r.lower_[i] = s * a.lower_[i];
    return r;
}

Vec operator*(const SymMatrix& s, const Vec& v) {
    check_same(s.dim(), v.size());
    Vec r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) acc += s(i, j) * v[j];
        r[i] = acc;
    }
    return r;
}

// ---------------------------------------------------------------- Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    const std::size_t m = n == 0 ? 0 : rows.front().size();
    Matrix a(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        check_same(rows[i].size(), m);
        check_finite(rows[i]);
        for (std::size_t j = 0; j < m; ++j) a(i, j) = rows[i][j];
    }
    return a;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
}

Vec operator*(const Matrix& a, const Vec& v) {
    check_same(a.cols(), v.size());
    Vec r(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * v[j];
        r[i] = acc;
    }
    return r;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    check_same(a.cols(), b.rows());
    Matrix r(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k)
            for (std::size_t j = 0; j < b.cols(); ++j) r(i, j) += a(i, k) * b(k, j);
    return r;
}

Matrix transpose(const Matrix& a) {
    Matrix r(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) r(j, i) = a(i, j);
    return r;
}

Matrix to_matrix(const SymMatrix& s) {
    Matrix r(s.dim(), s.dim());
    for (std::size_t i = 0; i < s.dim(); ++i)
        for (std::size_t j = 0; j < s.dim(); ++j) r(i, j) = s(i, j);
    return r;
}

SymMatrix congruence(const Matrix& a, const SymMatrix& s) {
    check_same(a.cols(), s.dim());
    const Matrix full = a * to_matrix(s) * transpose(a);
    SymMatrix r(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j <= i; ++j) r.set(i, j, 0.5 * (full(i, j) + full(j, i)));
    return r;
}

double determinant(const Matrix& a) {
    check_same(a.rows(), a.cols());
    Matrix lu = a;
    const std::size_t n = a.rows();
    double det = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(lu(r, c)) > std::abs(lu(piv, c))) piv = r;
        if (lu(piv, c) == 0.0) return 0.0;
        if (piv != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(c, j), lu(piv, j));
            det = -det;
        }
        det *= lu(c, c);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = lu(r, c) / lu(c, c);
            for (std::size_t j = c; j < n; ++j) lu(r, j) -= f * lu(c, j);
        }
    }
    return det;
}

// ---------------------------------------------------------------- LowerTriangular

LowerTriangular::LowerTriangular(std::size_t p) : p_(p), data_(p * (p + 1) / 2, 0.0) {}

Vec LowerTriangular::solve_lower(const Vec& b) const {
    check_same(b.size(), p_);
    Vec y(p_);
    for (std::size_t i = 0; i < p_; ++i) {
        double acc = b[i];
        for (std::size_t j = 0; j < i; ++j) acc -= (*this)(i, j) * y[j];
        y[i] = acc / (*this)(i, i);
    }
    return y;
}

Vec LowerTriangular::solve_upper(const Vec& y) const {
    check_same(y.size(), p_);
    Vec x(p_);
    for (std::size_t ii = p_; ii-- > 0;) {
        double acc = y[ii];
        for (std::size_t j = ii + 1; j < p_; ++j) acc -= (*this)(j, ii) * x[j];
        x[ii] = acc / (*this)(ii, ii);
    }
    return x;
}

Vec LowerTriangular::apply(const Vec& z) const {
    check_same(z.size(), p_);
    Vec r(p_);
    for (std::size_t i = 0; i < p_; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j <= i; ++j) acc += (*this)(i, j) * z[j];
        r[i] = acc;
    }
    return r;
}

SymMatrix LowerTriangular::gram() const {
    SymMatrix s(p_);
    for (std::size_t i = 0; i < p_; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k <= j; ++k) acc += (*this)(i, k) * (*this)(j, k);
            s.set(i, j, acc);
        }
    return s;
}

Matrix LowerTriangular::to_matrix() const {
    Matrix m(p_, p_);
    for (std::size_t i = 0; i < p_; ++i)
        for (std::size_t j = 0; j <= i; ++j) m(i, j) = (*this)(i, j);
    return m;
}

// ---------------------------------------------------------------- SPD operations

LowerTriangular cholesky(const SymMatrix& s) {
    const std::size_t p = s.dim();
    LowerTriangular l(p);
    for (std::size_t j = 0; j < p; ++j) {
        double d = s(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > kPivotFloor))
            throw Error(ErrorCode::NotPositiveDefinite, "pivot " + std::to_string(j) + " is " + std::to_string(d));
        const double ljj = std::sqrt(d);
        l.at(j, j) = ljj;
        for (std::size_t i = j + 1; i < p; ++i) {
            double acc = s(i, j);
            for (std::size_t k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
            l.at(i, j) = acc / ljj;
        }
    }
    return l;
}

Vec solve_spd(const SymMatrix& s, const Vec& b) {
    const LowerTriangular l = cholesky(s);
    return l.solve_upper(l.solve_lower(b));
}

SymMatrix inverse_spd(const SymMatrix& s) {
    const std::size_t p = s.dim();
    const LowerTriangular l = cholesky(s);
    SymMatrix inv(p);
    for (std::size_t c = 0; c < p; ++c) {
        Vec e(p);
        e[c] = 1.0;
        const Vec col = l.solve_upper(l.solve_lower(e));
        for (std::size_t r = c; r < p; ++r) inv.set(r, c, col[r]);
    }
    return inv;
}

double quad_form(const Vec& s_inv_applied, const Vec& v) { return dot(v, s_inv_applied); }

double det_spd(const SymMatrix& s) {
    const LowerTriangular l = cholesky(s);
    double d = 1.0;
    for (std::size_t i = 0; i < s.dim(); ++i) d *= l(i, i) * l(i, i);
    return d;
}

bool is_positive_definite(const SymMatrix& s) {
    try {
        (void)cholesky(s);
        return true;
    } catch (const Error&) {
        return false;
    }
}

} // namespace bfmle
