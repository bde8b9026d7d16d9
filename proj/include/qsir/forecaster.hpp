#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qsir/dataset.hpp"
#include "qsir/numerics.hpp"
#include "qsir/quantizer.hpp"

namespace qsir {

/// Empirical transition matrix from a quantized scalar index to a quantized
/// response. Row k is the law of Ŷ given Û = input_grid[k]; rows of cells
/// that saw no data are all zero and carry count 0.
class TransitionModel {
public:
    TransitionModel(Codebook input_grid, Codebook output_grid, Matrix matrix,
                    std::vector<std::size_t> row_counts);

    const Codebook& input_grid() const noexcept { return input_grid_; }
    const Codebook& output_grid() const noexcept { return output_grid_; }
    const Matrix& matrix() const noexcept { return matrix_; }
    const std::vector<std::size_t>& row_counts() const noexcept { return row_counts_; }
    std::size_t sample_size() const noexcept;

private:
    Codebook input_grid_;
    Codebook output_grid_;
    Matrix matrix_;
    std::vector<std::size_t> row_counts_;
};

struct ConditionalDistribution {
    std::vector<double> support;
    std::vector<double> probabilities;
};

struct Interval {
    double low;
    double high;
};

TransitionModel fit_transition(std::span<const double> u, std::span<const double> y,
                               std::size_t input_cells, std::size_t output_cells,
                               double norm_order, const TrainConfig& config);

/// Law of Ŷ in the input cell nearest to u. Throws NoDataError when that
/// cell is empty.
ConditionalDistribution conditional_distribution(const TransitionModel& model, double u);

double conditional_expectation(const TransitionModel& model, double u);
double conditional_variance(const TransitionModel& model, double u);

/// Smallest support point whose cumulative probability reaches `level`.
double conditional_quantile(const TransitionModel& model, double u, double level);

/// Central interval (quantile((1-c)/2), quantile(1-(1-c)/2)).
Interval predictive_interval(const TransitionModel& model, double u, double confidence);

/// Projects the data on `beta` and fits an m×m transition model.
TransitionModel fit_pipeline(const DataSet& data, std::span<const double> beta, std::size_t cells,
                             double norm_order, const TrainConfig& config);

} // namespace qsir
