#include "qsir/sir.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qsir/errors.hpp"

namespace qsir {

namespace {

void apply_sign_convention(std::vector<double>& v) {
    for (double c : v) {
        if (std::abs(c) > 1e-12) {
            if (c < 0.0)
                for (double& x : v) x = -x;
            return;
        }
    }
}

// Solves L·X = B in place for lower-triangular L (columns of B independent).
void forward_substitute(const Matrix& l, Matrix& b) {
    const std::size_t n = l.rows();
    for (std::size_t c = 0; c < b.cols(); ++c)
        for (std::size_t i = 0; i < n; ++i) {
            double s = b(i, c);
            for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * b(k, c);
            b(i, c) = s / l(i, i);
        }
}

// Solves Lᵀ·x = w in place.
void backward_substitute_transposed(const Matrix& l, std::vector<double>& w) {
    const std::size_t n = l.rows();
    for (std::size_t i = n; i-- > 0;) {
        double s = w[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * w[k];
        w[i] = s / l(i, i);
    }
}

} // namespace

std::string_view to_string(SirMethod method) {
    switch (method) {
    case SirMethod::classical: return "classical";
    case SirMethod::quantized: return "quantized";
    case SirMethod::pooled: return "pooled";
    }
    return "unknown";
}

SlicePartition slice_response(std::span<const double> y, std::size_t slices) {
    const std::size_t n = y.size();
    if (slices == 0) throw ArgumentError("slice_response: number of slices must be positive");
    if (n < slices) throw ArgumentError("slice_response: fewer observations than slices");
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    if (*lo == *hi) throw DegenerateError("slice_response: response is constant");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });

    SlicePartition out;
    out.slices = slices;
    out.labels.resize(n);
    for (std::size_t rank = 0; rank < n; ++rank) out.labels[order[rank]] = rank * slices / n;
    for (std::size_t h = 1; h < slices; ++h) {
        const std::size_t first = (h * n + slices - 1) / slices;
        out.boundaries.push_back(0.5 * (y[order[first - 1]] + y[order[first]]));
    }
    return out;
}

Matrix between_group_covariance(const Matrix& values, std::span<const std::size_t> labels) {
    const std::size_t n = values.rows();
    const std::size_t d = values.cols();
    if (labels.size() != n) throw ArgumentError("group labels do not match the sample length");
    if (n == 0) throw ArgumentError("empty sample");
    const std::size_t groups = *std::max_element(labels.begin(), labels.end()) + 1;

    Matrix sums(groups, d);
    std::vector<std::size_t> counts(groups, 0);
    for (std::size_t i = 0; i < n; ++i) {
        ++counts[labels[i]];
        for (std::size_t j = 0; j < d; ++j) sums(labels[i], j) += values(i, j);
    }
    std::vector<double> grand(d, 0.0);
    for (std::size_t h = 0; h < groups; ++h)
        for (std::size_t j = 0; j < d; ++j) grand[j] += sums(h, j);
    for (double& g : grand) g /= static_cast<double>(n);

    Matrix out(d, d);
    std::vector<double> dev(d);
    for (std::size_t h = 0; h < groups; ++h) {
        if (counts[h] == 0) continue;
        const double weight = static_cast<double>(counts[h]) / static_cast<double>(n);
        for (std::size_t j = 0; j < d; ++j)
            dev[j] = sums(h, j) / static_cast<double>(counts[h]) - grand[j];
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = a; b < d; ++b) out(a, b) += weight * dev[a] * dev[b];
    }
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < a; ++b) out(a, b) = out(b, a);
    return out;
}

Matrix sir_kernel_classical(const Matrix& x, std::span<const std::size_t> labels,
                            std::size_t slices) {
    if (labels.size() != x.rows()) throw ArgumentError("sir_kernel_classical: label count mismatch");
    if (slices == 0) throw ArgumentError("sir_kernel_classical: number of slices must be positive");
    std::vector<std::size_t> counts(slices, 0);
    for (std::size_t h : labels) {
        if (h >= slices) throw ArgumentError("sir_kernel_classical: label out of range");
        ++counts[h];
    }
    for (std::size_t h = 0; h < slices; ++h)
        if (counts[h] == 0)
            throw ArgumentError("sir_kernel_classical: slice " + std::to_string(h) + " is empty");
    return between_group_covariance(x, labels);
}

Matrix sir_kernel_quantized(const Codebook& x_grid, const Assignment& x_assign,
                            const Assignment& y_assign) {
    if (x_assign.indices.size() != y_assign.indices.size())
        throw ArgumentError("sir_kernel_quantized: assignment lengths differ");
    if (x_assign.indices.size() < 2) throw ArgumentError("sir_kernel_quantized: need n >= 2");
    return between_group_covariance(quantized_values(x_grid, x_assign), y_assign.indices);
}

Matrix pooled_kernel(std::span<const Matrix> kernels) {
    if (kernels.empty()) throw ArgumentError("pooled_kernel: no kernels");
    Matrix out(kernels.front().rows(), kernels.front().cols());
    for (const Matrix& k : kernels) {
        if (k.rows() != out.rows() || k.cols() != out.cols())
            throw ArgumentError("pooled_kernel: shape mismatch");
        auto dst = out.data();
        auto src = k.data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    for (double& v : out.data()) v /= static_cast<double>(kernels.size());
    return out;
}

SirEstimate principal_direction(const Matrix& covariance, const Matrix& kernel, SirMethod method) {
    const std::size_t d = covariance.rows();
    if (covariance.cols() != d || kernel.rows() != d || kernel.cols() != d)
        throw ArgumentError("principal_direction: shape mismatch");
    if (!is_symmetric(kernel, 1e-8 * std::max(1.0, max_row_sum_norm(kernel))))
        throw ArgumentError("principal_direction: kernel is not symmetric");

    const Matrix l = cholesky(covariance);
    // whitened = L⁻¹ K L⁻ᵀ
    Matrix w = kernel;
    forward_substitute(l, w);
    Matrix whitened = w.transpose();
    forward_substitute(l, whitened);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a + 1; b < d; ++b)
            whitened(a, b) = whitened(b, a) = 0.5 * (whitened(a, b) + whitened(b, a));

    const auto pairs = symmetric_eigen(whitened);
    std::vector<double> direction = pairs.front().vector;
    backward_substitute_transposed(l, direction);
    const double len = norm(direction);
    for (double& v : direction) v /= len;
    apply_sign_convention(direction);

    SirEstimate out;
    out.direction = std::move(direction);
    out.principal_value = std::max(pairs.front().value, 0.0);
    out.kernel = kernel;
    out.covariance = covariance;
    out.method = method;
    return out;
}

double cos_squared(std::span<const double> a, std::span<const double> b) {
    const double aa = dot(a, a);
    const double bb = dot(b, b);
    if (aa == 0.0 || bb == 0.0) throw ArgumentError("cos_squared: zero vector");
    const double ab = dot(a, b);
    return std::clamp(ab * ab / (aa * bb), 0.0, 1.0);
}

SirEstimate estimate_classical_sir(const DataSet& data, std::size_t slices) {
    data.validate();
    const SlicePartition part = slice_response(data.y, slices);
    const Matrix s = empirical_covariance(data.x);
    return principal_direction(s, sir_kernel_classical(data.x, part.labels, slices),
                               SirMethod::classical);
}

SirEstimate estimate_quantized_sir(const DataSet& data, std::size_t x_grid_size,
                                   std::size_t y_grid_size, std::size_t grids, double norm_order,
                                   const TrainConfig& config) {
    data.validate();
    if (grids == 0) throw ArgumentError("estimate_quantized_sir: number of grids must be positive");
    const Matrix s = empirical_covariance(data.x);
    const Matrix y = Matrix::column(data.y);

    std::vector<Matrix> kernels(grids);
    std::exception_ptr failure;
    const auto count = static_cast<std::ptrdiff_t>(grids);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t b = 0; b < count; ++b) {
        try {
            TrainConfig local = config;
            local.seed = config.seed + static_cast<std::uint64_t>(b);
            const Codebook x_grid = train_grid(data.x, x_grid_size, norm_order, local);
            const Codebook y_grid = train_grid(y, y_grid_size, norm_order, local);
            kernels[static_cast<std::size_t>(b)] = sir_kernel_quantized(
                x_grid, quantize_sample(x_grid, data.x), quantize_sample(y_grid, y));
        } catch (...) {
#pragma omp critical(qsir_sir_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    const Matrix pooled = grids == 1 ? kernels.front() : pooled_kernel(kernels);
    return principal_direction(s, pooled, grids == 1 ? SirMethod::quantized : SirMethod::pooled);
}

std::vector<double> align_to_reference(std::span<const double> estimate,
                                       std::span<const double> reference) {
    const double en = norm(estimate);
    const double rn = norm(reference);
    if (en == 0.0 || rn == 0.0) throw ArgumentError("align_to_reference: zero vector");
    const double ip = dot(estimate, reference);
    if (std::abs(ip) <= 1e-12 * en * rn)
        throw AlignmentError("estimate is orthogonal to the reference direction");
    const double scale = (ip > 0.0 ? 1.0 : -1.0) * rn / en;
    std::vector<double> out(estimate.begin(), estimate.end());
    for (double& v : out) v *= scale;
    return out;
}

} // namespace qsir
