#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace qsir {

/// Dense row-major matrix. Also used as a point set: one point per row.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> values);
    /// n×1 matrix holding one scalar observation per row.
    static Matrix column(std::span<const double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    Matrix transpose() const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
std::vector<double> operator*(const Matrix& a, std::span<const double> v);

struct EigenPair {
    double value;
    std::vector<double> vector;
};

/// Covariance of the rows of `sample` with denominator n.
Matrix empirical_covariance(const Matrix& sample);

/// Eigenpairs of a symmetric matrix by cyclic Jacobi rotations, sorted by
/// descending value. Equal values keep their original column order.
std::vector<EigenPair> symmetric_eigen(const Matrix& m);

/// Lower-triangular L with a = L·Lᵀ. Throws ConditioningError on a
/// non-positive pivot.
Matrix cholesky(const Matrix& a);

/// Solves a·x = b for SPD a; b may have several columns.
Matrix solve_spd(const Matrix& a, const Matrix& b);
std::vector<double> solve_spd(const Matrix& a, std::span<const double> b);

double max_row_sum_norm(const Matrix& m);
double frobenius_norm(const Matrix& m);

bool is_symmetric(const Matrix& m, double tol);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

} // namespace qsir
