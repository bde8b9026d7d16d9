#include "qsir/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qsir/errors.hpp"

namespace qsir {

namespace {

void require_nonconstant(std::span<const double> v, const char* what) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    if (*lo == *hi) throw DegenerateError(std::string(what) + " is constant");
}

std::span<const double> row_for(const TransitionModel& model, double u) {
    const double x[1] = {u};
    const std::size_t cell = project(model.input_grid(), x).index;
    if (model.row_counts()[cell] == 0) throw NoDataError(cell);
    return model.matrix().row(cell);
}

} // namespace

TransitionModel::TransitionModel(Codebook input_grid, Codebook output_grid, Matrix matrix,
                                 std::vector<std::size_t> row_counts)
    : input_grid_(std::move(input_grid)), output_grid_(std::move(output_grid)),
      matrix_(std::move(matrix)), row_counts_(std::move(row_counts)) {
    if (input_grid_.dimension() != 1 || output_grid_.dimension() != 1)
        throw ArgumentError("transition model grids must be one-dimensional");
    if (matrix_.rows() != input_grid_.size() || matrix_.cols() != output_grid_.size())
        throw ArgumentError("transition matrix shape does not match the grids");
    if (row_counts_.size() != matrix_.rows())
        throw ArgumentError("row count vector does not match the matrix");
    for (std::size_t r = 0; r < matrix_.rows(); ++r) {
        double total = 0.0;
        for (double p : matrix_.row(r)) {
            if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("transition probabilities must lie in [0, 1]");
            total += p;
        }
        const bool ok = row_counts_[r] == 0 ? total == 0.0 : std::abs(total - 1.0) <= 1e-12;
        if (!ok) throw ArgumentError("transition row " + std::to_string(r) + " is not stochastic");
    }
}

std::size_t TransitionModel::sample_size() const noexcept {
    return std::accumulate(row_counts_.begin(), row_counts_.end(), std::size_t{0});
}

TransitionModel fit_transition(std::span<const double> u, std::span<const double> y,
                               std::size_t input_cells, std::size_t output_cells,
                               double norm_order, const TrainConfig& config) {
    if (u.size() != y.size()) throw ArgumentError("fit_transition: u and y lengths differ");
    if (u.empty()) throw ArgumentError("fit_transition: empty sample");
    require_nonconstant(u, "index u");
    require_nonconstant(y, "response y");

    const Matrix um = Matrix::column(u);
    const Matrix ym = Matrix::column(y);
    Codebook in = train_grid(um, input_cells, norm_order, config);
    Codebook out = train_grid(ym, output_cells, norm_order, config);
    const Assignment ua = quantize_sample(in, um);
    const Assignment ya = quantize_sample(out, ym);

    Matrix counts(in.size(), out.size());
    std::vector<std::size_t> rows(in.size(), 0);
    for (std::size_t i = 0; i < u.size(); ++i) {
        counts(ua.indices[i], ya.indices[i]) += 1.0;
        ++rows[ua.indices[i]];
    }
    for (std::size_t r = 0; r < in.size(); ++r) {
        if (rows[r] == 0) continue;
        auto row = counts.row(r);
        for (double& c : row) c /= static_cast<double>(rows[r]);
    }
    return TransitionModel(std::move(in), std::move(out), std::move(counts), std::move(rows));
}

ConditionalDistribution conditional_distribution(const TransitionModel& model, double u) {
    const auto row = row_for(model, u);
    ConditionalDistribution out;
    out.probabilities.assign(row.begin(), row.end());
    const auto& pts = model.output_grid().points().data();
    out.support.assign(pts.begin(), pts.end());
    return out;
}

double conditional_expectation(const TransitionModel& model, double u) {
    const auto row = row_for(model, u);
    return dot(row, model.output_grid().points().data());
}

double conditional_variance(const TransitionModel& model, double u) {
    const auto row = row_for(model, u);
    const auto s = model.output_grid().points().data();
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
        m1 += row[k] * s[k];
        m2 += row[k] * s[k] * s[k];
    }
    return std::max(m2 - m1 * m1, 0.0);
}

double conditional_quantile(const TransitionModel& model, double u, double level) {
    if (!(level > 0.0 && level < 1.0)) throw ArgumentError("quantile level must lie in (0, 1)");
    const auto row = row_for(model, u);
    const auto s = model.output_grid().points().data();
    std::vector<std::size_t> order(s.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });

    double cumulative = 0.0;
    for (std::size_t k : order) {
        if (row[k] == 0.0) continue;
        cumulative += row[k];
        if (cumulative >= level - 1e-12) return s[k];
    }
    // Unreachable for a stochastic row; return the largest charged point.
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if (row[*it] > 0.0) return s[*it];
    return s[order.back()];
}

Interval predictive_interval(const TransitionModel& model, double u, double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0)) throw ArgumentError("confidence must lie in (0, 1)");
    const double tail = (1.0 - confidence) / 2.0;
    return {conditional_quantile(model, u, tail), conditional_quantile(model, u, 1.0 - tail)};
}

TransitionModel fit_pipeline(const DataSet& data, std::span<const double> beta, std::size_t cells,
                             double norm_order, const TrainConfig& config) {
    data.validate();
    if (beta.size() != data.dimension()) throw ArgumentError("fit_pipeline: beta dimension mismatch");
    std::vector<double> u(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) u[i] = dot(data.x.row(i), beta);
    return fit_transition(u, data.y, cells, cells, norm_order, config);
}

} // namespace qsir
