#pragma once
//
// Small dense symmetric positive definite linear algebra in double precision.
// Dimensions are capped at kMaxDim; every type is an immutable-after-build value.
//

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace bfmle {

inline constexpr std::size_t kMaxDim = 16;

class Vec {
public:
    Vec() = default;
    explicit Vec(std::size_t n, double fill = 0.0);
    Vec(std::initializer_list<double> xs);
    explicit Vec(std::vector<double> xs);

    std::size_t size() const noexcept { return data_.size(); }
    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }

    std::span<const double> values() const noexcept { return data_; }
    const std::vector<double>& std_vector() const noexcept { return data_; }

    double norm() const;

    friend Vec operator+(const Vec& a, const Vec& b);
    friend Vec operator-(const Vec& a, const Vec& b);
    friend Vec operator*(double s, const Vec& a);
    friend bool operator==(const Vec& a, const Vec& b) = default;

private:
    std::vector<double> data_;
};

double dot(const Vec& a, const Vec& b);

// Symmetric matrix stored as its packed lower triangle, so symmetry holds bit-for-bit.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(std::size_t p);

    // Builds from a full row-major p x p array; rejects asymmetry beyond rel_tol.
    static SymMatrix from_full(const std::vector<std::vector<double>>& rows, double rel_tol = 1e-12);
    static SymMatrix from_lower(std::size_t p, std::span<const double> packed);
    static SymMatrix identity(std::size_t p);
    static SymMatrix diagonal(const Vec& d);
    static SymMatrix outer(const Vec& v);

    std::size_t dim() const noexcept { return p_; }
    double operator()(std::size_t i, std::size_t j) const;
    void set(std::size_t i, std::size_t j, double value);

    std::vector<std::vector<double>> to_full() const;
    double max_abs() const;

    friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b);
    friend SymMatrix operator*(double s, const SymMatrix& a);
    friend bool operator==(const SymMatrix& a, const SymMatrix& b) = default;

private:
    static std::size_t index(std::size_t i, std::size_t j) { return i * (i + 1) / 2 + j; }

    std::size_t p_ = 0;
    std::vector<double> lower_;
};

Vec operator*(const SymMatrix& s, const Vec& v);

// General square matrix, row-major.  Used for affine transforms only.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

    double max_abs() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Vec operator*(const Matrix& a, const Vec& v);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix to_matrix(const SymMatrix& s);
// A * S * A', symmetrized through the lower triangle.
SymMatrix congruence(const Matrix& a, const SymMatrix& s);
// Determinant by partial-pivot LU.
double determinant(const Matrix& a);

class LowerTriangular {
public:
    LowerTriangular() = default;
    explicit LowerTriangular(std::size_t p);

    std::size_t dim() const noexcept { return p_; }
    double operator()(std::size_t i, std::size_t j) const { return j > i ? 0.0 : data_[i * (i + 1) / 2 + j]; }
    double& at(std::size_t i, std::size_t j) { return data_[i * (i + 1) / 2 + j]; }

    // Solves L y = b, then L' x = y.
    Vec solve_lower(const Vec& b) const;
    Vec solve_upper(const Vec& y) const;
    Vec apply(const Vec& z) const;
    // L * L'
    SymMatrix gram() const;
    Matrix to_matrix() const;

private:
    std::size_t p_ = 0;
    std::vector<double> data_;
};

LowerTriangular cholesky(const SymMatrix& s);
Vec solve_spd(const SymMatrix& s, const Vec& b);
SymMatrix inverse_spd(const SymMatrix& s);
// v' S^{-1} v, given S^{-1} v.
double quad_form(const Vec& s_inv_applied, const Vec& v);
double det_spd(const SymMatrix& s);
bool is_positive_definite(const SymMatrix& s);

} // namespace bfmle
