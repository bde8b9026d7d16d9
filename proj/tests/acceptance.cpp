// Acceptance suite: one PASS/FAIL line per criterion, fixed seed, exit
// status 1 if any criterion fails.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "qsir/forecaster.hpp"
#include "qsir/io.hpp"
#include "qsir/numerics.hpp"
#include "qsir/quantizer.hpp"
#include "qsir/rng.hpp"
#include "qsir/simulation.hpp"
#include "qsir/sir.hpp"

namespace {

constexpr std::uint64_t kSeed = 2026;

// Tolerances.
constexpr double kMeanRelTol = 0.25;
constexpr double kVarRelTol = 0.30;
constexpr double kRuntimePerModel = 120.0;  // seconds
constexpr double kVarAbsTol = 0.25;
constexpr double kMedianCos2 = 0.90;
constexpr double kMedianGain = 0.05;
constexpr double kRateFactor = 3.0;
constexpr double kStationarity = 0.05;  // fraction of the coordinate sd
constexpr double kEigenTol = 1e-8;
constexpr double kRowSumTol = 1e-12;
constexpr double kSingleCenterTol = 0.05;

int failures = 0;

void report(int id, bool pass, const std::string& name, const std::string& detail) {
    std::printf("%s %d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

const qsir::ReportRow& find(const qsir::ExperimentReport& r, std::size_t index) { return r.rows.at(index); }

std::vector<qsir::ModelSpec> table_specs(std::size_t d) {
    return {qsir::ModelSpec::make(qsir::ModelId::M1, d), qsir::ModelSpec::make(qsir::ModelId::M2, d),
            qsir::ModelSpec::make(qsir::ModelId::M3, d, 1.0), qsir::ModelSpec::make(qsir::ModelId::M3, d, 5.0),
            qsir::ModelSpec::make(qsir::ModelId::M3, d, 10.0)};
}

std::string label(const qsir::ModelSpec& s) {
    return s.id == qsir::ModelId::M3 ? "M3(" + fmt("%g", s.theta) + ")" : s.name();
}

qsir::Matrix normal_sample(std::size_t n, std::size_t d, std::uint64_t seed) {
    auto gen = qsir::make_rng(seed);
    std::normal_distribution<double> normal;
    qsir::Matrix x(n, d);
    for (double& v : x.data()) v = normal(gen);
    return x;
}

void forecast_moments() {
    qsir::ForecastExperiment f;
    f.specs = table_specs(4);
    f.n = 10000;
    f.grid_x = 200;
    f.y_grid_estimation = 5;
    f.forecast_cells = 100;
    f.queries = {{0.5, -0.5, 1.0, 0.0}};
    f.seed = kSeed;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = qsir::run_forecast_experiment(f);
    const double per_model =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / f.specs.size();
    bool pass = per_model < kRuntimePerModel;
    std::string detail;
    for (std::size_t s = 0; s < f.specs.size(); ++s) {
        const double em = find(r, 2 * s).metric_value;
        const double ev = find(r, 2 * s + 1).metric_value;
        pass = pass && std::abs(em) <= kMeanRelTol && std::abs(ev) <= kVarRelTol;
        detail += label(f.specs[s]) + " mean " + fmt("%+.3f", em) + " var " + fmt("%+.3f", ev) + "; ";
    }
    detail += "limits 0.25/0.30, " + fmt("%.1f", per_model) + " s per model";
    report(1, pass, "forecast relative errors at x=(0.5,-0.5,1,0), n=10000, d=4", detail);
}

void heteroscedastic_variance() {
    qsir::ForecastExperiment f;
    f.specs = {qsir::ModelSpec::make(qsir::ModelId::M2, 4)};
    f.n = 10000;
    f.queries = {{-1.0 / 3.0, 0.5, 1.0, 1.0}};
    f.seed = kSeed;
    const auto r = qsir::run_forecast_experiment(f);
    const double truth = qsir::true_conditional_moments(f.specs[0], f.queries[0]).variance;
    const double estimate = truth * (1.0 + find(r, 1).metric_value);
    report(2, std::abs(estimate - truth) <= kVarAbsTol, "M2 conditional variance at x=(-1/3,0.5,1,1)",
           "estimate " + fmt("%.4f", estimate) + " vs " + fmt("%.4f", truth) + " (tolerance 0.25)");
}

std::vector<qsir::SummaryRow> estimation_summary(const qsir::ModelSpec& spec, std::vector<std::size_t> grids) {
    qsir::EstimationExperiment e;
    e.specs = {spec};
    e.n_values = {1000};
    e.grid_sizes = std::move(grids);
    e.y_grid_size = 5;
    e.grids = 5;
    e.slices = 5;
    e.replications = 20;
    e.seed = kSeed;
    return qsir::summarize(qsir::run_estimation_experiment(e));
}

void estimation_quality() {
    const auto s = estimation_summary(qsir::ModelSpec::make(qsir::ModelId::M1, 10), {20, 200});
    const double m20 = s.at(0).median, m200 = s.at(1).median;
    const bool pass = m200 >= kMedianCos2 && m200 - m20 >= kMedianGain;
    report(3, pass, "M1 estimation quality, n=1000, d=10, 20 replications",
           "median cos2 N=200 " + fmt("%.4f", m200) + " (>= 0.90), N=20 " + fmt("%.4f", m20) + ", gain " +
               fmt("%.4f", m200 - m20) + " (>= 0.05)");
}

void symmetric_dependence() {
    const auto s = estimation_summary(qsir::ModelSpec::make(qsir::ModelId::M3, 10, 10.0), {200});
    const double q = s.at(0).median, c = s.at(1).median;
    report(4, q > c, "M3(10) quantized vs classical SIR, n=1000, d=10, 20 replications",
           "median cos2 quantized " + fmt("%.4f", q) + ", classical " + fmt("%.4f", c));
}

void kernel_gap_bound() {
    const auto spec = qsir::ModelSpec::make(qsir::ModelId::M1, 4);
    const auto data = qsir::generate(spec, 2000, kSeed);
    qsir::TrainConfig cfg;
    cfg.seed = kSeed;
    const qsir::Matrix y = qsir::Matrix::column(data.y);
    const auto ya = qsir::quantize_sample(qsir::train_grid(y, 5, 2.0, cfg), y);
    const qsir::Matrix raw = qsir::between_group_covariance(data.x, ya.indices);
    double x_norm = 0.0;
    for (double v : data.x.data()) x_norm += v * v;
    x_norm = std::sqrt(x_norm / static_cast<double>(data.size()));
    int violations = 0;
    std::string detail;
    for (std::size_t n : {20u, 50u, 100u}) {
        const auto xg = qsir::train_grid(data.x, n, 2.0, cfg);
        const qsir::Matrix q = qsir::sir_kernel_quantized(xg, qsir::quantize_sample(xg, data.x), ya);
        const double gap = qsir::max_row_sum_norm(raw - q);
        const double bound = 2.0 * 4.0 * qsir::quantization_error(xg, data.x, 2.0) * x_norm;
        if (gap > bound) ++violations;
        detail += "N=" + std::to_string(n) + " gap " + fmt("%.4f", gap) + " <= " + fmt("%.4f", bound) + "; ";
    }
    detail += std::to_string(violations) + " violations";
    report(5, violations == 0, "kernel quantization gap bound, M1 n=2000 d=4", detail);
}

void quantization_rate() {
    bool pass = true;
    std::string detail;
    for (std::size_t d : {1u, 2u, 4u}) {
        const auto x = normal_sample(20000, d, qsir::derive_seed(kSeed, 6, d));
        std::vector<double> scaled;
        for (std::size_t n : {20u, 50u, 100u, 200u}) {
            qsir::TrainConfig cfg;
            cfg.seed = kSeed;
            const auto g = qsir::train_grid(x, n, 2.0, cfg);
            scaled.push_back(std::pow(static_cast<double>(n), 1.0 / static_cast<double>(d)) *
                             qsir::quantization_error(g, x, 2.0));
        }
        const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
        pass = pass && *hi <= kRateFactor * *lo;
        detail += "d=" + std::to_string(d) + " ratio " + fmt("%.3f", *hi / *lo) + "; ";
    }
    detail += "limit 3";
    report(6, pass, "N^(1/d) * error bounded across N in {20,50,100,200}, n=20000", detail);
}

void stationarity() {
    std::size_t cells = 0, good = 0;
    double worst = 0.0;
    for (std::size_t d : {1u, 2u, 4u}) {
        const auto x = normal_sample(10000, d, qsir::derive_seed(kSeed, 7, d));
        std::vector<double> sd(d, 0.0);
        for (std::size_t j = 0; j < d; ++j) {
            double mean = 0.0, sq = 0.0;
            for (std::size_t i = 0; i < x.rows(); ++i) mean += x(i, j);
            mean /= static_cast<double>(x.rows());
            for (std::size_t i = 0; i < x.rows(); ++i) sq += (x(i, j) - mean) * (x(i, j) - mean);
            sd[j] = std::sqrt(sq / static_cast<double>(x.rows() - 1));
        }
        for (std::size_t n : {10u, 20u, 50u}) {
            qsir::TrainConfig cfg;
            cfg.seed = kSeed + n;
            const auto g = qsir::train_grid(x, n, 2.0, cfg);
            const auto cm = qsir::cell_means(g, x);
            for (std::size_t k = 0; k < n; ++k) {
                if (cm.counts[k] == 0) continue;
                ++cells;
                bool ok = true;
                for (std::size_t j = 0; j < d; ++j) {
                    const double gap = std::abs(cm.means(k, j) - g.point(k)[j]) / sd[j];
                    worst = std::max(worst, gap);
                    ok = ok && gap <= kStationarity;
                }
                good += ok ? 1 : 0;
            }
        }
    }
    report(7, good == cells, "L2 grid stationarity, n=10000, d in {1,2,4}, N in {10,20,50}",
           std::to_string(good) + "/" + std::to_string(cells) + " occupied cells within 0.05 sd, worst " +
               fmt("%.4f", worst) + " sd");
}

double eigen_error(const qsir::Matrix& m, const std::vector<double>& values,
                   const std::vector<std::vector<double>>& vectors) {
    const auto pairs = qsir::symmetric_eigen(m);
    double worst = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        worst = std::max(worst, std::abs(pairs[k].value - values[k]));
        const double c = std::abs(qsir::dot(pairs[k].vector, vectors[k])) / qsir::norm(vectors[k]);
        worst = std::max(worst, std::abs(1.0 - c));
    }
    return worst;
}

void oracle_suites() {
    const double r2 = std::sqrt(2.0);
    double eig = 0.0;
    eig = std::max(eig, eigen_error(qsir::Matrix{{2, 1}, {1, 2}}, {3, 1}, {{1, 1}, {1, -1}}));
    eig = std::max(eig, eigen_error(qsir::Matrix{{4, 0}, {0, -1}}, {4, -1}, {{1, 0}, {0, 1}}));
    eig = std::max(eig, eigen_error(qsir::Matrix{{0, 2}, {2, 3}}, {4, -1}, {{1, 2}, {2, -1}}));
    eig = std::max(eig, eigen_error(qsir::Matrix{{2, -1, 0}, {-1, 2, -1}, {0, -1, 2}}, {2 + r2, 2, 2 - r2},
                                    {{1, -r2, 1}, {1, 0, -1}, {1, r2, 1}}));
    eig = std::max(eig, eigen_error(qsir::Matrix{{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}, {3}, {{1, 1, 1}}));
    eig = std::max(eig, eigen_error(qsir::Matrix{{5, 0, 0}, {0, 3, 4}, {0, 4, -3}}, {5, 5, -5},
                                    {{1, 0, 0}, {0, 2, 1}, {0, 1, -2}}));

    std::size_t models = 0;
    double row_gap = 0.0;
    bool rows_ok = true;
    std::uint64_t s = 0;
    for (const auto& spec : table_specs(4)) {
        const auto data = qsir::generate(spec, 10000, qsir::derive_seed(kSeed, 8, s++));
        for (std::size_t m : {1u, 10u, 100u}) {
            qsir::TrainConfig cfg;
            cfg.seed = kSeed;
            const auto model = qsir::fit_pipeline(data, spec.beta, m, 2.0, cfg);
            ++models;
            for (std::size_t r = 0; r < model.matrix().rows(); ++r) {
                if (model.row_counts()[r] == 0) continue;
                double total = 0.0;
                for (double v : model.matrix().row(r)) total += v;
                row_gap = std::max(row_gap, std::abs(total - 1.0));
            }
        }
    }
    rows_ok = row_gap <= kRowSumTol;

    const auto x = normal_sample(10000, 1, qsir::derive_seed(kSeed, 9));
    double mean = 0.0;
    for (double v : x.data()) mean += v;
    mean /= 10000.0;
    qsir::TrainConfig cfg;
    cfg.seed = kSeed;
    const double center = qsir::train_grid(x, 1, 2.0, cfg).point(0)[0];

    const bool pass = eig <= kEigenTol && rows_ok && std::abs(center - mean) <= kSingleCenterTol;
    report(8, pass, "oracle suites",
           "eigen max error " + fmt("%.2e", eig) + " (<= 1e-8); row sums max gap " + fmt("%.2e", row_gap) +
               " over " + std::to_string(models) + " models (<= 1e-12); N=1 center offset " +
               fmt("%.2e", std::abs(center - mean)) + " (<= 0.05)");
}

template <class Run>
std::string report_bytes(Run&& run) {
    std::ostringstream out;
    qsir::io::write_report(out, run());
    return out.str();
}

void determinism() {
    qsir::EstimationExperiment e;
    e.specs = {qsir::ModelSpec::make(qsir::ModelId::M2, 6), qsir::ModelSpec::make(qsir::ModelId::M3, 6, 5.0)};
    e.n_values = {500};
    e.grid_sizes = {20, 50};
    e.replications = 4;
    e.seed = kSeed;
    qsir::ForecastExperiment f;
    f.specs = table_specs(4);
    f.n = 3000;
    f.grid_x = 50;
    f.forecast_cells = 30;
    f.queries = {{0.5, -0.5, 1.0, 0.0}};
    f.random_queries = 5;
    f.seed = kSeed;

    const int threads = omp_get_max_threads();
    bool same = true;
    std::string first_e, first_f;
    for (int t : {threads, 1, 4, threads}) {
        omp_set_num_threads(t);
        const auto be = report_bytes([&] { return qsir::run_estimation_experiment(e); });
        const auto bf = report_bytes([&] { return qsir::run_forecast_experiment(f); });
        if (first_e.empty()) {
            first_e = be;
            first_f = bf;
        } else {
            same = same && be == first_e && bf == first_f;
        }
    }
    omp_set_num_threads(threads);
    report(9, same, "byte-identical reports on re-run",
           "estimation and forecast reports compared across 4 runs (thread counts " + std::to_string(threads) +
               ", 1, 4, " + std::to_string(threads) + ")");
}

} // namespace

int main() {
    std::printf("acceptance suite, seed %llu\n", static_cast<unsigned long long>(kSeed));
    forecast_moments();
    heteroscedastic_variance();
    estimation_quality();
    symmetric_dependence();
    kernel_gap_bound();
    quantization_rate();
    stationarity();
    oracle_suites();
    determinism();
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
