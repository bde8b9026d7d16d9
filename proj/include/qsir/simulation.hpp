#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qsir/dataset.hpp"
#include "qsir/quantizer.hpp"

namespace qsir {

enum class ModelId { M1, M2, M3 };

/// Single-index test models with X ~ N(0, I_d) and ε ~ N(0, 1):
///   M1: Y = (β'X)³ + ε
///   M2: Y = (β'X)³ + (β'X)·ε
///   M3: Y = (β'X)² exp(β'X / θ) + ε
struct ModelSpec {
    ModelId id = ModelId::M1;
    double theta = 1.0;
    std::size_t d = 4;
    std::vector<double> beta;

    /// beta defaults to (1, -1, 0, ..., 0).
    static ModelSpec make(ModelId id, std::size_t d, double theta = 1.0);
    void validate() const;

    /// "M1", "M2" or "M3".
    std::string name() const;
    /// Link f(index, ε).
    double response(double index, double noise) const;
};

/// Parses "M1", "M2", "M3" (case-insensitive). Throws ArgumentError otherwise.
ModelId parse_model_id(const std::string& text);

DataSet generate(const ModelSpec& spec, std::size_t n, std::uint64_t seed);

struct Moments {
    double mean;
    double variance;
};

Moments true_conditional_moments(const ModelSpec& spec, std::span<const double> x);

/// Signed (estimate - truth) / truth.
double relative_error(double estimate, double truth);

struct ReportRow {
    std::string model_id;
    std::optional<double> theta;  // set for M3 only
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t grid_x = 0;  // N; 0 on classical rows
    std::size_t grid_y = 0;  // m, or H on classical rows
    std::size_t grids = 0;   // B
    std::size_t replication = 0;
    std::string metric_name;  // cos2, cos2_classical, rel_err_mean, rel_err_var
    double metric_value = 0.0;
};

struct ExperimentReport {
    std::vector<ReportRow> rows;
};

struct EstimationExperiment {
    std::vector<ModelSpec> specs;
    std::vector<std::size_t> n_values;
    std::vector<std::size_t> grid_sizes;  // N values
    std::size_t y_grid_size = 5;          // m
    std::size_t grids = 5;                // B
    std::size_t slices = 5;               // H for classical SIR
    std::size_t replications = 100;
    double norm_order = 2.0;
    TrainConfig train{};
    std::uint64_t seed = 0;
};

struct ForecastExperiment {
    std::vector<ModelSpec> specs;
    std::size_t n = 10000;
    std::size_t grid_x = 200;         // N for the direction estimate
    std::size_t y_grid_estimation = 5;
    std::size_t forecast_cells = 100;  // m for the transition model
    std::vector<std::vector<double>> queries;
    std::size_t random_queries = 0;    // extra queries drawn uniformly on [-2, 2]^d
    bool use_true_beta = false;
    double norm_order = 2.0;
    TrainConfig train{};
    std::uint64_t seed = 0;
};

/// Rows per (spec, n, replication): one cos2 row per N value, then one
/// cos2_classical row.
ExperimentReport run_estimation_experiment(const EstimationExperiment& config);

/// Rows per (spec, query): rel_err_mean then rel_err_var.
ExperimentReport run_forecast_experiment(const ForecastExperiment& config);

/// Queries used by run_forecast_experiment: the explicit list followed by
/// the seeded uniform draws. Shared by every spec.
std::vector<std::vector<double>> forecast_queries(const ForecastExperiment& config);

struct SummaryRow {
    ReportRow key;  // replication and metric_value unused
    std::size_t count = 0;
    double mean = 0.0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

/// Boxplot statistics per (model, theta, n, d, N, m, B, metric) group, in
/// order of first appearance.
std::vector<SummaryRow> summarize(const ExperimentReport& report);

/// Linearly interpolated quantile of unsorted values, level in [0, 1].
double sample_quantile(std::vector<double> values, double level);

} // namespace qsir
