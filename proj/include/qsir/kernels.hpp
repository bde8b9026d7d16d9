#pragma once

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP variant that visit floating-point terms in the same order, so the
// two produce bitwise identical results for any thread count.

#include <cstddef>
#include <span>
#include <vector>

#include "qsir/numerics.hpp"

namespace qsir::kernels {

/// Nearest code point (Euclidean, ties to the lowest index) for every row of
/// `points`. Writes the index and the squared distance.
void nearest_serial(const Matrix& points, const Matrix& codes,
                    std::span<std::size_t> index, std::span<double> sq_dist);
void nearest_parallel(const Matrix& points, const Matrix& codes,
                      std::span<std::size_t> index, std::span<double> sq_dist);

/// Per-cell coordinate sums and counts; row k of the result sums the points
/// with index == k, accumulated in increasing point order.
Matrix cell_sums_serial(const Matrix& points, std::span<const std::size_t> index,
                        std::size_t cells, std::vector<std::size_t>& counts);
Matrix cell_sums_parallel(const Matrix& points, std::span<const std::size_t> index,
                          std::size_t cells, std::vector<std::size_t>& counts);

/// Population covariance (denominator n) of the rows.
Matrix covariance_serial(const Matrix& sample);
Matrix covariance_parallel(const Matrix& sample);

// Entry points used by the library.
inline void nearest(const Matrix& points, const Matrix& codes,
                    std::span<std::size_t> index, std::span<double> sq_dist) {
    nearest_parallel(points, codes, index, sq_dist);
}
inline Matrix cell_sums(const Matrix& points, std::span<const std::size_t> index,
                        std::size_t cells, std::vector<std::size_t>& counts) {
    return cell_sums_parallel(points, index, cells, counts);
}
inline Matrix covariance(const Matrix& sample) { return covariance_parallel(sample); }

} // namespace qsir::kernels
