#include "qsir/numerics.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>

#include "qsir/errors.hpp"
#include "qsir/kernels.hpp"

namespace qsir {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_)
        throw ArgumentError("matrix: entry count does not match shape");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ArgumentError("matrix: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
    Matrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
}

Matrix Matrix::column(std::span<const double> values) {
    return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ArgumentError("matrix product: shape mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ArgumentError("matrix difference: shape mismatch");
    Matrix c = a;
    auto out = c.data();
    auto rhs = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= rhs[i];
    return c;
}

std::vector<double> operator*(const Matrix& a, std::span<const double> v) {
    if (a.cols() != v.size()) throw ArgumentError("matrix-vector product: shape mismatch");
    std::vector<double> out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), v);
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ArgumentError("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Matrix empirical_covariance(const Matrix& sample) {
    if (sample.rows() < 2) throw ArgumentError("empirical_covariance: need at least 2 observations");
    return kernels::covariance(sample);
}

bool is_symmetric(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j)
            if (std::abs(m(i, j) - m(j, i)) > tol) return false;
    return true;
}

std::vector<EigenPair> symmetric_eigen(const Matrix& m) {
    const std::size_t n = m.rows();
    if (n == 0 || !is_symmetric(m, 1e-8))
        throw ArgumentError("symmetric_eigen: input is not a symmetric square matrix");

    Matrix a = m;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (m(i, j) + m(j, i));
    Matrix v = Matrix::identity(n);

    const double scale = std::max(frobenius_norm(a), std::numeric_limits<double>::min());
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) <= 1e-15 * scale) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<EigenPair> pairs(n);
    for (std::size_t k = 0; k < n; ++k) {
        pairs[k].value = a(k, k);
        pairs[k].vector.resize(n);
        for (std::size_t i = 0; i < n; ++i) pairs[k].vector[i] = v(i, k);
        const double len = norm(pairs[k].vector);
        for (double& x : pairs[k].vector) x /= len;
    }
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const EigenPair& l, const EigenPair& r) { return l.value > r.value; });
    return pairs;
}

Matrix cholesky(const Matrix& a) {
    const std::size_t n = a.rows();
    if (n != a.cols() || n == 0) throw ArgumentError("cholesky: matrix must be square");
    if (!is_symmetric(a, 1e-8 * std::max(1.0, max_row_sum_norm(a))))
        throw ArgumentError("cholesky: matrix is not symmetric");
    // Pivots below this fraction of the largest diagonal entry are treated
    // as singular.
    double diag_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) diag_max = std::max(diag_max, std::abs(a(i, i)));
    const double floor = 1e-13 * diag_max;

    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = a(j, j);
        for (std::size_t k = 0; k < j; ++k) s -= l(j, k) * l(j, k);
        if (!(s > floor)) throw ConditioningError(j, s);
        const double ljj = std::sqrt(s);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double t = a(i, j);
            for (std::size_t k = 0; k < j; ++k) t -= l(i, k) * l(j, k);
            l(i, j) = t / ljj;
        }
    }
    return l;
}

namespace {

// Forward then backward substitution with L·Lᵀ, one column of b at a time.
void cholesky_solve_in_place(const Matrix& l, std::span<double> x) {
    const std::size_t n = l.rows();
    for (std::size_t i = 0; i < n; ++i) {
        double s = x[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x[k];
        x[i] = s / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
        x[ii] = s / l(ii, ii);
    }
}

} // namespace

Matrix solve_spd(const Matrix& a, const Matrix& b) {
    if (b.rows() != a.rows()) throw ArgumentError("solve_spd: right-hand side has wrong row count");
    const Matrix l = cholesky(a);
    Matrix x(b.rows(), b.cols());
    std::vector<double> col(b.rows());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        for (std::size_t i = 0; i < b.rows(); ++i) col[i] = b(i, j);
        cholesky_solve_in_place(l, col);
        for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = col[i];
    }
    return x;
}

std::vector<double> solve_spd(const Matrix& a, std::span<const double> b) {
    if (b.size() != a.rows()) throw ArgumentError("solve_spd: right-hand side has wrong length");
    const Matrix l = cholesky(a);
    std::vector<double> x(b.begin(), b.end());
    cholesky_solve_in_place(l, x);
    return x;
}

double max_row_sum_norm(const Matrix& m) {
    double best = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (double v : m.row(i)) s += std::abs(v);
        best = std::max(best, s);
    }
    return best;
}

double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += v * v;
    return std::sqrt(s);
}

} // namespace qsir
