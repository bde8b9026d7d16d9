#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "qsir/dataset.hpp"
#include "qsir/numerics.hpp"
#include "qsir/quantizer.hpp"

namespace qsir {

enum class SirMethod { classical, quantized, pooled };

std::string_view to_string(SirMethod method);

struct SirEstimate {
    std::vector<double> direction;  // unit length, first non-negligible coordinate positive
    double principal_value = 0.0;
    Matrix kernel;
    Matrix covariance;
    SirMethod method = SirMethod::quantized;
};

/// Equal-count slicing of a response. labels[i] is the slice of y[i].
struct SlicePartition {
    std::size_t slices = 0;
    std::vector<double> boundaries;  // slices - 1 cut points
    std::vector<std::size_t> labels;
};

SlicePartition slice_response(std::span<const double> y, std::size_t slices);

/// Σ_h p_h (m_h - m)(m_h - m)' over the non-empty groups of `labels`, with
/// p_h the group proportions and m_h the group means of the rows of `values`.
Matrix between_group_covariance(const Matrix& values, std::span<const std::size_t> labels);

/// Classical SIR kernel; every slice in [0, slices) must be occupied.
Matrix sir_kernel_classical(const Matrix& x, std::span<const std::size_t> labels,
                            std::size_t slices);

/// Covariance of E[X̂ | Ŷ] where X̂ is x_grid[x_assign] and Ŷ the cells of
/// y_assign. Empty Ŷ cells are dropped.
Matrix sir_kernel_quantized(const Codebook& x_grid, const Assignment& x_assign,
                            const Assignment& y_assign);

Matrix pooled_kernel(std::span<const Matrix> kernels);

/// Leading eigenvector of covariance⁻¹·kernel, computed in whitened form.
SirEstimate principal_direction(const Matrix& covariance, const Matrix& kernel,
                                SirMethod method = SirMethod::quantized);

double cos_squared(std::span<const double> a, std::span<const double> b);

SirEstimate estimate_classical_sir(const DataSet& data, std::size_t slices);

/// Quantization-based SIR pooled over `grids` independent (X, Y) grid pairs;
/// pair b is trained with seed config.seed + b.
SirEstimate estimate_quantized_sir(const DataSet& data, std::size_t x_grid_size,
                                   std::size_t y_grid_size, std::size_t grids, double norm_order,
                                   const TrainConfig& config);

/// Rescales `estimate` to the length of `reference` and flips it so the two
/// have a positive inner product.
std::vector<double> align_to_reference(std::span<const double> estimate,
                                       std::span<const double> reference);

} // namespace qsir
