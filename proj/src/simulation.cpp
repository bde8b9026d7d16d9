#include "qsir/simulation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <random>

#include "qsir/errors.hpp"
#include "qsir/forecaster.hpp"
#include "qsir/rng.hpp"
#include "qsir/sir.hpp"

namespace qsir {

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kGridStream = 2;
constexpr std::uint64_t kPipelineStream = 3;
constexpr std::uint64_t kQueryStream = 4;

ReportRow base_row(const ModelSpec& spec, std::size_t n) {
    ReportRow row;
    row.model_id = spec.name();
    if (spec.id == ModelId::M3) row.theta = spec.theta;
    row.n = n;
    row.d = spec.d;
    return row;
}

template <class Task>
void run_tasks(std::size_t count, Task&& task) {
    std::exception_ptr failure;
    const auto total = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t t = 0; t < total; ++t) {
        try {
            task(static_cast<std::size_t>(t));
        } catch (...) {
#pragma omp critical(qsir_simulation_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

bool same_group(const ReportRow& a, const ReportRow& b) {
    return a.model_id == b.model_id && a.theta == b.theta && a.n == b.n && a.d == b.d &&
           a.grid_x == b.grid_x && a.grid_y == b.grid_y && a.grids == b.grids &&
           a.metric_name == b.metric_name;
}

} // namespace

ModelSpec ModelSpec::make(ModelId id, std::size_t d, double theta) {
    ModelSpec spec;
    spec.id = id;
    spec.d = d;
    spec.theta = theta;
    spec.beta.assign(d, 0.0);
    if (d >= 1) spec.beta[0] = 1.0;
    if (d >= 2) spec.beta[1] = -1.0;
    spec.validate();
    return spec;
}

void ModelSpec::validate() const {
    if (d < 2) throw ArgumentError("model dimension must be at least 2");
    if (!(theta > 0.0) || !std::isfinite(theta)) throw ArgumentError("theta must be positive");
    if (beta.size() != d) throw ArgumentError("beta must have dimension d");
    if (norm(beta) == 0.0) throw ArgumentError("beta must be nonzero");
}

std::string ModelSpec::name() const {
    switch (id) {
    case ModelId::M1: return "M1";
    case ModelId::M2: return "M2";
    case ModelId::M3: return "M3";
    }
    return "?";
}

double ModelSpec::response(double index, double noise) const {
    switch (id) {
    case ModelId::M1: return index * index * index + noise;
    case ModelId::M2: return index * index * index + index * noise;
    case ModelId::M3: return index * index * std::exp(index / theta) + noise;
    }
    return 0.0;
}

ModelId parse_model_id(const std::string& text) {
    std::string up;
    for (char c : text) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (up == "M1") return ModelId::M1;
    if (up == "M2") return ModelId::M2;
    if (up == "M3") return ModelId::M3;
    throw ArgumentError("unknown model id '" + text + "'");
}

DataSet generate(const ModelSpec& spec, std::size_t n, std::uint64_t seed) {
    spec.validate();
    if (n == 0) throw ArgumentError("generate: n must be positive");
    Rng rng = make_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    DataSet data{Matrix(n, spec.d), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        auto x = data.x.row(i);
        for (double& v : x) v = normal(rng);
        const double noise = normal(rng);
        data.y[i] = spec.response(dot(spec.beta, x), noise);
    }
    return data;
}

Moments true_conditional_moments(const ModelSpec& spec, std::span<const double> x) {
    if (x.size() != spec.d) throw ArgumentError("true_conditional_moments: dimension mismatch");
    const double u = dot(spec.beta, x);
    switch (spec.id) {
    case ModelId::M1: return {u * u * u, 1.0};
    case ModelId::M2: return {u * u * u, u * u};
    case ModelId::M3: return {u * u * std::exp(u / spec.theta), 1.0};
    }
    return {0.0, 0.0};
}

double relative_error(double estimate, double truth) {
    if (truth == 0.0) throw ArgumentError("relative_error: true value is zero");
    return (estimate - truth) / truth;
}

ExperimentReport run_estimation_experiment(const EstimationExperiment& config) {
    if (config.specs.empty() || config.n_values.empty() || config.grid_sizes.empty())
        throw ArgumentError("estimation experiment: specs, n_values and N_values must be non-empty");
    if (config.replications == 0 || config.grids == 0 || config.slices == 0 ||
        config.y_grid_size == 0)
        throw ArgumentError("estimation experiment: counts must be positive");

    const std::size_t per_task = config.grid_sizes.size() + 1;
    const std::size_t tasks = config.specs.size() * config.n_values.size() * config.replications;
    std::vector<ReportRow> rows(tasks * per_task);

    run_tasks(tasks, [&](std::size_t t) {
        const std::size_t r = t % config.replications;
        const std::size_t ni = (t / config.replications) % config.n_values.size();
        const std::size_t s = t / (config.replications * config.n_values.size());
        const ModelSpec& spec = config.specs[s];
        const std::size_t n = config.n_values[ni];

        const DataSet data = generate(spec, n, derive_seed(config.seed, kDataStream, s * 1'000'003 + ni, r));
        TrainConfig train = config.train;
        train.seed = derive_seed(config.seed, kGridStream, s * 1'000'003 + ni, r);

        ReportRow* out = &rows[t * per_task];
        for (std::size_t g = 0; g < config.grid_sizes.size(); ++g) {
            const SirEstimate est = estimate_quantized_sir(data, config.grid_sizes[g], config.y_grid_size,
                                                           config.grids, config.norm_order, train);
            ReportRow row = base_row(spec, n);
            row.grid_x = config.grid_sizes[g];
            row.grid_y = config.y_grid_size;
            row.grids = config.grids;
            row.replication = r;
            row.metric_name = "cos2";
            row.metric_value = cos_squared(est.direction, spec.beta);
            out[g] = std::move(row);
        }
        const SirEstimate classical = estimate_classical_sir(data, config.slices);
        ReportRow row = base_row(spec, n);
        row.grid_x = 0;
        row.grid_y = config.slices;
        row.grids = 1;
        row.replication = r;
        row.metric_name = "cos2_classical";
        row.metric_value = cos_squared(classical.direction, spec.beta);
        out[config.grid_sizes.size()] = std::move(row);
    });
    return {std::move(rows)};
}

std::vector<std::vector<double>> forecast_queries(const ForecastExperiment& config) {
    std::vector<std::vector<double>> out = config.queries;
    if (config.random_queries > 0) {
        if (config.specs.empty()) throw ArgumentError("forecast experiment: no model specs");
        const std::size_t d = config.specs.front().d;
        Rng rng = make_rng(derive_seed(config.seed, kQueryStream));
        std::uniform_real_distribution<double> uniform(-2.0, 2.0);
        for (std::size_t q = 0; q < config.random_queries; ++q) {
            std::vector<double> x(d);
            for (double& v : x) v = uniform(rng);
            out.push_back(std::move(x));
        }
    }
    return out;
}

ExperimentReport run_forecast_experiment(const ForecastExperiment& config) {
    if (config.specs.empty()) throw ArgumentError("forecast experiment: no model specs");
    if (config.n < config.grid_x || config.n < config.forecast_cells)
        throw ArgumentError("forecast experiment: n must be at least N and m");
    const auto queries = forecast_queries(config);
    if (queries.empty()) throw ArgumentError("forecast experiment: no query points");
    for (const ModelSpec& spec : config.specs)
        for (const auto& q : queries)
            if (q.size() != spec.d) throw ArgumentError("forecast experiment: query dimension mismatch");

    const std::size_t per_spec = 2 * queries.size();
    std::vector<ReportRow> rows(config.specs.size() * per_spec);

    run_tasks(config.specs.size(), [&](std::size_t s) {
        const ModelSpec& spec = config.specs[s];
        const DataSet data = generate(spec, config.n, derive_seed(config.seed, kDataStream, s));

        std::vector<double> beta = spec.beta;
        if (!config.use_true_beta) {
            TrainConfig train = config.train;
            train.seed = derive_seed(config.seed, kGridStream, s);
            const SirEstimate est = estimate_quantized_sir(data, config.grid_x, config.y_grid_estimation,
                                                           1, config.norm_order, train);
            beta = align_to_reference(est.direction, spec.beta);
        }
        TrainConfig train = config.train;
        train.seed = derive_seed(config.seed, kPipelineStream, s);
        const TransitionModel model = fit_pipeline(data, beta, config.forecast_cells, config.norm_order, train);

        for (std::size_t q = 0; q < queries.size(); ++q) {
            const Moments truth = true_conditional_moments(spec, queries[q]);
            const double u = dot(beta, queries[q]);
            const double metrics[2] = {
                relative_error(conditional_expectation(model, u), truth.mean),
                relative_error(conditional_variance(model, u), truth.variance)};
            const char* names[2] = {"rel_err_mean", "rel_err_var"};
            for (int k = 0; k < 2; ++k) {
                ReportRow row = base_row(spec, config.n);
                row.grid_x = config.use_true_beta ? 0 : config.grid_x;
                row.grid_y = config.forecast_cells;
                row.grids = 1;
                row.replication = q;
                row.metric_name = names[k];
                row.metric_value = metrics[k];
                rows[s * per_spec + 2 * q + static_cast<std::size_t>(k)] = std::move(row);
            }
        }
    });
    return {std::move(rows)};
}

double sample_quantile(std::vector<double> values, double level) {
    if (values.empty()) throw ArgumentError("sample_quantile: no values");
    if (!(level >= 0.0 && level <= 1.0)) throw ArgumentError("sample_quantile: level outside [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = level * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<SummaryRow> summarize(const ExperimentReport& report) {
    std::vector<SummaryRow> out;
    std::vector<std::vector<double>> values;
    for (const ReportRow& row : report.rows) {
        std::size_t g = 0;
        while (g < out.size() && !same_group(out[g].key, row)) ++g;
        if (g == out.size()) {
            SummaryRow s;
            s.key = row;
            s.key.replication = 0;
            s.key.metric_value = 0.0;
            out.push_back(std::move(s));
            values.emplace_back();
        }
        values[g].push_back(row.metric_value);
    }
    for (std::size_t g = 0; g < out.size(); ++g) {
        auto& v = values[g];
        SummaryRow& s = out[g];
        s.count = v.size();
        double total = 0.0;
        for (double x : v) total += x;
        s.mean = total / static_cast<double>(v.size());
        s.min = sample_quantile(v, 0.0);
        s.q1 = sample_quantile(v, 0.25);
        s.median = sample_quantile(v, 0.5);
        s.q3 = sample_quantile(v, 0.75);
        s.max = sample_quantile(v, 1.0);
    }
    return out;
}

} // namespace qsir
