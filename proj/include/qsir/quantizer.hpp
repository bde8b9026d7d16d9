#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qsir/numerics.hpp"

namespace qsir {

/// Hyperparameters of the stochastic competitive-learning pass and the
/// Lloyd refinement that follows it.
struct TrainConfig {
    std::size_t epochs = 10;
    double step_initial = 0.5;
    double step_decay = 1e-5;
    std::size_t lloyd_iterations = 50;
    std::uint64_t seed = 0;

    /// Gain at presentation t (0-based, counted across epochs).
    double step(std::size_t t) const {
        return step_initial / (1.0 + step_decay * static_cast<double>(t));
    }
    void validate() const;
};

/// An N-point grid of R^d together with the norm order it was trained for.
/// Points are pairwise distinct; the grid is immutable once built.
class Codebook {
public:
    Codebook(Matrix points, double norm_order, std::uint64_t seed = 0);

    const Matrix& points() const noexcept { return points_; }
    std::span<const double> point(std::size_t k) const { return points_.row(k); }
    std::size_t size() const noexcept { return points_.rows(); }
    std::size_t dimension() const noexcept { return points_.cols(); }
    double norm_order() const noexcept { return norm_order_; }
    /// Seed of the training run, kept as metadata.
    std::uint64_t seed() const noexcept { return seed_; }

private:
    Matrix points_;
    double norm_order_;
    std::uint64_t seed_;
};

/// Cell index of every sample point.
struct Assignment {
    std::vector<std::size_t> indices;
};

struct Projection {
    std::size_t index;
    std::vector<double> point;
};

struct CellMeans {
    Matrix means;                     // N × d, zero rows for empty cells
    std::vector<std::size_t> counts;  // occupancy per cell
};

Codebook train_grid(const Matrix& sample, std::size_t grid_size, double norm_order,
                    const TrainConfig& config);

Projection project(const Codebook& codebook, std::span<const double> x);

Assignment quantize_sample(const Codebook& codebook, const Matrix& sample);

/// Empirical L^p distortion (mean |x - Proj(x)|^p)^(1/p), Euclidean |.|.
double quantization_error(const Codebook& codebook, const Matrix& sample, double norm_order);

CellMeans cell_means(const Codebook& codebook, const Matrix& sample);

/// Rows of the sample replaced by their code points.
Matrix quantized_values(const Codebook& codebook, const Assignment& assignment);

std::size_t count_distinct_rows(const Matrix& sample);

} // namespace qsir
