#include "qsir/kernels.hpp"

#include <limits>

#include "qsir/errors.hpp"

namespace qsir::kernels {

namespace {

void check_nearest_args(const Matrix& points, const Matrix& codes,
                        std::span<std::size_t> index, std::span<double> sq_dist) {
    if (codes.rows() == 0) throw ArgumentError("nearest: empty codebook");
    if (points.rows() > 0 && points.cols() != codes.cols())
        throw ArgumentError("nearest: dimension mismatch");
    if (index.size() != points.rows() || sq_dist.size() != points.rows())
        throw ArgumentError("nearest: output size mismatch");
}

inline void nearest_one(std::span<const double> x, const Matrix& codes,
                        std::size_t& best_index, double& best_dist) {
    const std::size_t d = codes.cols();
    best_index = 0;
    best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < codes.rows(); ++k) {
        const double* c = codes.row(k).data();
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = x[j] - c[j];
            s += diff * diff;
        }
        if (s < best_dist) {
            best_dist = s;
            best_index = k;
        }
    }
}

void check_cells_args(const Matrix& points, std::span<const std::size_t> index,
                      std::size_t cells) {
    if (index.size() != points.rows()) throw ArgumentError("cell_sums: index size mismatch");
    for (std::size_t k : index)
        if (k >= cells) throw ArgumentError("cell_sums: index out of range");
}

Matrix centered_products(const Matrix& sample, bool parallel) {
    const std::size_t n = sample.rows();
    const std::size_t d = sample.cols();
    if (n == 0) throw ArgumentError("covariance: empty sample");
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += sample(i, j);
    for (double& m : mean) m /= static_cast<double>(n);

    Matrix cov(d, d);
    const auto fill_row = [&](std::size_t a) {
        for (std::size_t b = a; b < d; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                s += (sample(i, a) - mean[a]) * (sample(i, b) - mean[b]);
            cov(a, b) = s / static_cast<double>(n);
        }
    };
    if (parallel) {
        const auto rows = static_cast<std::ptrdiff_t>(d);
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t a = 0; a < rows; ++a) fill_row(static_cast<std::size_t>(a));
    } else {
        for (std::size_t a = 0; a < d; ++a) fill_row(a);
    }
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < a; ++b) cov(a, b) = cov(b, a);
    return cov;
}

} // namespace

void nearest_serial(const Matrix& points, const Matrix& codes,
                    std::span<std::size_t> index, std::span<double> sq_dist) {
    check_nearest_args(points, codes, index, sq_dist);
    for (std::size_t i = 0; i < points.rows(); ++i)
        nearest_one(points.row(i), codes, index[i], sq_dist[i]);
}

void nearest_parallel(const Matrix& points, const Matrix& codes,
                      std::span<std::size_t> index, std::span<double> sq_dist) {
    check_nearest_args(points, codes, index, sq_dist);
    const auto n = static_cast<std::ptrdiff_t>(points.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        nearest_one(points.row(u), codes, index[u], sq_dist[u]);
    }
}

Matrix cell_sums_serial(const Matrix& points, std::span<const std::size_t> index,
                        std::size_t cells, std::vector<std::size_t>& counts) {
    check_cells_args(points, index, cells);
    const std::size_t d = points.cols();
    Matrix sums(cells, d);
    counts.assign(cells, 0);
    for (std::size_t i = 0; i < points.rows(); ++i) {
        const std::size_t k = index[i];
        ++counts[k];
        for (std::size_t j = 0; j < d; ++j) sums(k, j) += points(i, j);
    }
    return sums;
}

Matrix cell_sums_parallel(const Matrix& points, std::span<const std::size_t> index,
                          std::size_t cells, std::vector<std::size_t>& counts) {
    check_cells_args(points, index, cells);
    const std::size_t n = points.rows();
    const std::size_t d = points.cols();

    // Stable counting sort into buckets keeps the per-cell order of the
    // serial loop.
    counts.assign(cells, 0);
    for (std::size_t k : index) ++counts[k];
    std::vector<std::size_t> offset(cells + 1, 0);
    for (std::size_t k = 0; k < cells; ++k) offset[k + 1] = offset[k] + counts[k];
    std::vector<std::size_t> order(n);
    {
        std::vector<std::size_t> cursor(offset.begin(), offset.end() - 1);
        for (std::size_t i = 0; i < n; ++i) order[cursor[index[i]]++] = i;
    }

    Matrix sums(cells, d);
    const auto ncells = static_cast<std::ptrdiff_t>(cells);
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t kk = 0; kk < ncells; ++kk) {
        const auto k = static_cast<std::size_t>(kk);
        auto out = sums.row(k);
        for (std::size_t pos = offset[k]; pos < offset[k + 1]; ++pos) {
            const auto x = points.row(order[pos]);
            for (std::size_t j = 0; j < d; ++j) out[j] += x[j];
        }
    }
    return sums;
}

Matrix covariance_serial(const Matrix& sample) { return centered_products(sample, false); }

Matrix covariance_parallel(const Matrix& sample) { return centered_products(sample, true); }

} // namespace qsir::kernels
