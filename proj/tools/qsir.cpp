// qsir: quantization, quantized SIR estimation, forecasting and the
// simulation experiments over CSV files.
//
// Exit codes: 0 success, 1 argument or config error, 2 I/O error,
// 3 degenerate data or an empty forecast cell.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qsir/config.hpp"
#include "qsir/errors.hpp"
#include "qsir/forecaster.hpp"
#include "qsir/io.hpp"
#include "qsir/simulation.hpp"
#include "qsir/sir.hpp"

namespace {

using qsir::io::format_double;

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
    return out;
}

template <class Writer>
void write_file(const std::string& path, Writer&& write) {
    std::ofstream out(path);
    if (!out) throw qsir::IoError("cannot open '" + path + "' for writing");
    write(out);
    out.flush();
    if (!out) throw qsir::IoError("failed writing '" + path + "'");
}

qsir::DataSet read_dataset(const std::string& path) {
    return qsir::io::dataset_from_table(qsir::io::read_csv_file(path));
}

qsir::TrainConfig train_config(std::uint64_t seed) {
    qsir::TrainConfig c;
    c.seed = seed;
    return c;
}

struct QuantizeArgs {
    std::string input, output;
    std::size_t grid = 0;
    double p = 2.0;
    std::uint64_t seed = 0;
};

void run_quantize(const QuantizeArgs& a) {
    const auto table = qsir::io::read_csv_file(a.input);
    const auto cb = qsir::train_grid(table.values, a.grid, a.p, train_config(a.seed));
    write_file(a.output, [&](std::ostream& out) { qsir::io::write_codebook(out, cb); });
    std::cout << "error=" << format_double(qsir::quantization_error(cb, table.values, a.p)) << "\n";
}

struct EstimateArgs {
    std::string input, output;
    std::size_t grid = 200, m = 5, grids = 5;
    std::optional<std::size_t> classical;
    double p = 2.0;
    std::uint64_t seed = 0;
};

void run_estimate(const EstimateArgs& a) {
    const auto data = read_dataset(a.input);
    std::vector<qsir::SirEstimate> out;
    out.push_back(qsir::estimate_quantized_sir(data, a.grid, a.m, a.grids, a.p, train_config(a.seed)));
    std::cout << "direction=" << join(out[0].direction) << "\n";
    std::cout << "principal_value=" << format_double(out[0].principal_value) << "\n";
    if (a.classical) {
        out.push_back(qsir::estimate_classical_sir(data, *a.classical));
        std::cout << "classical_direction=" << join(out[1].direction) << "\n";
        std::cout << "classical_principal_value=" << format_double(out[1].principal_value) << "\n";
    }
    if (!a.output.empty())
        write_file(a.output, [&](std::ostream& s) { qsir::io::write_estimates(s, out); });
}

struct ForecastArgs {
    std::string data, beta, estimate, align, x, save_model;
    std::size_t m = 100;
    double p = 2.0;
    std::uint64_t seed = 0;
    bool mean = false, var = false;
    std::vector<double> quantiles;
    std::optional<double> interval;
};

void run_forecast(const ForecastArgs& a) {
    const auto data = read_dataset(a.data);
    std::vector<double> beta;
    if (!a.beta.empty()) {
        beta = qsir::io::parse_vector(a.beta);
    } else {
        std::ifstream in(a.estimate);
        if (!in) throw qsir::IoError("cannot open '" + a.estimate + "' for reading");
        beta = qsir::io::read_estimate_direction(in);
    }
    if (beta.size() != data.dimension())
        throw qsir::ArgumentError("--beta has dimension " + std::to_string(beta.size()) + ", data has " +
                                  std::to_string(data.dimension()));
    if (!a.align.empty()) {
        const auto ref = qsir::io::parse_vector(a.align);
        if (ref.size() != beta.size()) throw qsir::ArgumentError("--align dimension does not match the data");
        beta = qsir::align_to_reference(beta, ref);
    }
    const auto x = qsir::io::parse_vector(a.x);
    if (x.size() != data.dimension())
        throw qsir::ArgumentError("--x has dimension " + std::to_string(x.size()) + ", data has " +
                                  std::to_string(data.dimension()));

    const auto model = qsir::fit_pipeline(data, beta, a.m, a.p, train_config(a.seed));
    if (!a.save_model.empty())
        write_file(a.save_model, [&](std::ostream& s) { qsir::io::write_transition(s, model); });

    const double u = qsir::dot(beta, x);
    std::cout << "index=" << format_double(u) << "\n";
    const bool any = a.mean || a.var || !a.quantiles.empty() || a.interval;
    if (a.mean || !any) std::cout << "mean=" << format_double(qsir::conditional_expectation(model, u)) << "\n";
    if (a.var) std::cout << "var=" << format_double(qsir::conditional_variance(model, u)) << "\n";
    for (double q : a.quantiles) {
        std::ostringstream key;
        key << "quantile_" << q;
        std::cout << key.str() << "=" << format_double(qsir::conditional_quantile(model, u, q)) << "\n";
    }
    if (a.interval) {
        const auto iv = qsir::predictive_interval(model, u, *a.interval);
        std::cout << "low=" << format_double(iv.low) << "\n";
        std::cout << "high=" << format_double(iv.high) << "\n";
    }
}

struct SimulateArgs {
    std::string model, output;
    std::optional<double> theta;
    std::size_t n = 0, d = 4;
    std::uint64_t seed = 0;
};

void run_simulate(const SimulateArgs& a) {
    const auto id = qsir::parse_model_id(a.model);
    if (id == qsir::ModelId::M3 && !a.theta) throw qsir::ArgumentError("--theta is required for M3");
    if (id != qsir::ModelId::M3 && a.theta) throw qsir::ArgumentError("--theta applies to M3 only");
    const auto spec = qsir::ModelSpec::make(id, a.d, a.theta.value_or(1.0));
    const auto data = qsir::generate(spec, a.n, a.seed);
    write_file(a.output, [&](std::ostream& s) { qsir::io::write_dataset(s, data); });
}

struct ExperimentArgs {
    std::string config, output, summary;
};

void run_experiment(const ExperimentArgs& a) {
    const auto cfg = qsir::load_experiment_config_file(a.config);
    const auto report = cfg.kind == qsir::ExperimentConfig::Kind::estimation
                            ? qsir::run_estimation_experiment(cfg.estimation)
                            : qsir::run_forecast_experiment(cfg.forecast);
    std::string summary_path = a.summary;
    if (summary_path.empty()) {
        summary_path = a.output;
        if (summary_path.size() > 4 && summary_path.compare(summary_path.size() - 4, 4, ".csv") == 0)
            summary_path.resize(summary_path.size() - 4);
        summary_path += "_summary.csv";
    }
    write_file(a.output, [&](std::ostream& s) { qsir::io::write_report(s, report); });
    const auto summary = qsir::summarize(report);
    write_file(summary_path, [&](std::ostream& s) { qsir::io::write_summary(s, summary); });
    std::cout << "rows=" << report.rows.size() << "\n";
    std::cout << "summary=" << summary_path << "\n";
}

int fail(int code, const std::string& message) {
    std::cerr << "qsir: " << message << "\n";
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantized sliced inverse regression and forecasting"};
    app.require_subcommand(1);

    QuantizeArgs qa;
    auto* quantize = app.add_subcommand("quantize", "Train an L^p quantization grid on a CSV sample");
    quantize->add_option("--input", qa.input, "Sample CSV (all columns are used)")->required();
    quantize->add_option("--N", qa.grid, "Number of code points")->required()->check(CLI::PositiveNumber);
    quantize->add_option("--p", qa.p, "Norm order")->check(CLI::Range(1.0, 1e9));
    quantize->add_option("--seed", qa.seed, "Training seed");
    quantize->add_option("--output", qa.output, "Codebook CSV")->required();

    EstimateArgs ea;
    auto* estimate = app.add_subcommand("estimate", "Estimate the index direction with quantized SIR");
    estimate->add_option("--input", ea.input, "Data CSV with columns x1..xd,y")->required();
    estimate->add_option("--N", ea.grid, "Code points for X")->check(CLI::PositiveNumber);
    estimate->add_option("--m", ea.m, "Code points for Y")->check(CLI::PositiveNumber);
    estimate->add_option("--B", ea.grids, "Number of pooled grids")->check(CLI::PositiveNumber);
    estimate->add_option("--p", ea.p, "Norm order")->check(CLI::Range(1.0, 1e9));
    estimate->add_option("--seed", ea.seed, "Training seed; grid b uses seed + b");
    estimate->add_option("--classical", ea.classical, "Also run classical SIR with H slices")
        ->check(CLI::PositiveNumber);
    estimate->add_option("--output", ea.output, "Estimate CSV");

    ForecastArgs fa;
    auto* forecast = app.add_subcommand("forecast", "Conditional moments and quantiles from a transition model");
    forecast->add_option("--data", fa.data, "Data CSV with columns x1..xd,y")->required();
    auto* beta_opt = forecast->add_option("--beta", fa.beta, "Index direction, comma separated");
    auto* est_opt = forecast->add_option("--estimate", fa.estimate, "Estimate CSV written by `estimate`");
    beta_opt->excludes(est_opt);
    forecast->add_option("--align", fa.align, "Rescale and sign the direction against this reference vector");
    forecast->add_option("--m", fa.m, "Code points for the index and for Y")->check(CLI::PositiveNumber);
    forecast->add_option("--x", fa.x, "Query point, comma separated")->required();
    forecast->add_option("--p", fa.p, "Norm order")->check(CLI::Range(1.0, 1e9));
    forecast->add_option("--seed", fa.seed, "Training seed");
    forecast->add_flag("--mean", fa.mean, "Print the conditional mean");
    forecast->add_flag("--var", fa.var, "Print the conditional variance");
    forecast->add_option("--quantile", fa.quantiles, "Print a conditional quantile (repeatable)")
        ->check(CLI::Range(0.0, 1.0));
    forecast->add_option("--interval", fa.interval, "Print a central predictive interval")
        ->check(CLI::Range(0.0, 1.0));
    forecast->add_option("--save-model", fa.save_model, "Write the fitted transition model");

    SimulateArgs sa;
    auto* simulate = app.add_subcommand("simulate", "Draw a sample from M1, M2 or M3");
    simulate->add_option("--model", sa.model, "M1, M2 or M3")->required();
    simulate->add_option("--theta", sa.theta, "M3 scale")->check(CLI::PositiveNumber);
    simulate->add_option("--n", sa.n, "Sample size")->required()->check(CLI::PositiveNumber);
    simulate->add_option("--d", sa.d, "Dimension")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
    simulate->add_option("--seed", sa.seed, "Seed");
    simulate->add_option("--output", sa.output, "Output CSV")->required();

    ExperimentArgs xa;
    auto* experiment = app.add_subcommand("experiment", "Run an estimation or forecast experiment");
    experiment->add_option("--config", xa.config, "Experiment config file")->required();
    experiment->add_option("--output", xa.output, "Report CSV")->required();
    experiment->add_option("--summary", xa.summary, "Summary CSV (default: <output>_summary.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*quantize) run_quantize(qa);
        if (*estimate) run_estimate(ea);
        if (*forecast) {
            if (fa.beta.empty() && fa.estimate.empty()) return fail(1, "forecast needs --beta or --estimate");
            run_forecast(fa);
        }
        if (*simulate) run_simulate(sa);
        if (*experiment) run_experiment(xa);
    } catch (const qsir::IoError& e) {
        return fail(2, e.what());
    } catch (const qsir::ArgumentError& e) {
        return fail(1, e.what());
    } catch (const qsir::NoDataError& e) {
        return fail(3, e.what());
    } catch (const qsir::DegenerateError& e) {
        return fail(3, e.what());
    } catch (const qsir::ConditioningError& e) {
        return fail(3, e.what());
    } catch (const qsir::AlignmentError& e) {
        return fail(3, e.what());
    } catch (const std::exception& e) {
        return fail(1, e.what());
    }
    return 0;
}
