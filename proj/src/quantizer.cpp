#include "qsir/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "qsir/errors.hpp"
#include "qsir/kernels.hpp"
#include "qsir/rng.hpp"

namespace qsir {

namespace {

bool rows_equal(std::span<const double> a, std::span<const double> b) {
    return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

bool has_duplicate_rows(const Matrix& m) {
    std::set<std::vector<double>> seen;
    for (std::size_t k = 0; k < m.rows(); ++k) {
        auto r = m.row(k);
        if (!seen.emplace(r.begin(), r.end()).second) return true;
    }
    return false;
}

void check_norm_order(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw ArgumentError("norm order must be finite and >= 1");
}

std::size_t nearest_code(const Matrix& codes, std::span<const double> x) {
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < codes.rows(); ++k) {
        const auto c = codes.row(k);
        double s = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double diff = x[j] - c[j];
            s += diff * diff;
        }
        if (s < best_dist) {
            best_dist = s;
            best = k;
        }
    }
    return best;
}

// Draws grid_size pairwise distinct rows, visiting a seeded permutation of
// the sample.
Matrix initial_grid(const Matrix& sample, std::size_t grid_size, Rng& rng) {
    std::vector<std::size_t> order(sample.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    Matrix grid(grid_size, sample.cols());
    std::set<std::vector<double>> taken;
    std::size_t filled = 0;
    for (std::size_t i : order) {
        if (filled == grid_size) break;
        auto r = sample.row(i);
        if (!taken.emplace(r.begin(), r.end()).second) continue;
        std::copy(r.begin(), r.end(), grid.row(filled).begin());
        ++filled;
    }
    return grid;
}

void competitive_pass(const Matrix& sample, Matrix& grid, double p, const TrainConfig& config,
                      Rng& rng) {
    const std::size_t n = sample.rows();
    const std::size_t d = sample.cols();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> diff(d);
    std::size_t t = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t i : order) {
            const auto x = sample.row(i);
            auto c = grid.row(nearest_code(grid, x));
            double sq = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                diff[j] = x[j] - c[j];
                sq += diff[j] * diff[j];
            }
            double gain = config.step(t++);
            if (p != 2.0) {
                // Gradient of |x - c|^p, scaled so that p = 2 is the plain
                // competitive-learning update.
                if (sq == 0.0) continue;
                gain *= 0.5 * p * std::pow(std::sqrt(sq), p - 2.0);
                gain = std::min(gain, 1.0);
            }
            for (std::size_t j = 0; j < d; ++j) c[j] += gain * diff[j];
        }
    }
}

double median_of(std::vector<double>& v) {
    const std::size_t h = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h), v.end());
    const double upper = v[h];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h));
    return 0.5 * (lower + upper);
}

// Moves every cell flagged in `bad` onto the sample point currently farthest
// from the grid. Returns the number of cells moved.
std::size_t reseed_cells(const Matrix& sample, Matrix& grid, const std::vector<bool>& bad,
                         std::vector<double> sq_dist) {
    std::size_t moved = 0;
    for (std::size_t k = 0; k < grid.rows(); ++k) {
        if (!bad[k]) continue;
        const auto far = static_cast<std::size_t>(
            std::max_element(sq_dist.begin(), sq_dist.end()) - sq_dist.begin());
        if (!(sq_dist[far] > 0.0)) break;
        const auto x = sample.row(far);
        std::copy(x.begin(), x.end(), grid.row(k).begin());
        // Points equal to the new code point are no longer candidates.
        for (std::size_t i = 0; i < sample.rows(); ++i)
            if (rows_equal(sample.row(i), x)) sq_dist[i] = -1.0;
        ++moved;
    }
    return moved;
}

std::vector<bool> duplicate_cells(const Matrix& grid) {
    std::vector<bool> dup(grid.rows(), false);
    std::set<std::vector<double>> seen;
    for (std::size_t k = 0; k < grid.rows(); ++k) {
        auto r = grid.row(k);
        if (!seen.emplace(r.begin(), r.end()).second) dup[k] = true;
    }
    return dup;
}

void lloyd_refine(const Matrix& sample, Matrix& grid, double p, std::size_t iterations) {
    const std::size_t n = sample.rows();
    const std::size_t d = sample.cols();
    const std::size_t cells = grid.rows();
    std::vector<std::size_t> index(n), previous;
    std::vector<double> sq_dist(n);
    std::vector<std::size_t> counts;

    for (std::size_t it = 0; it < iterations; ++it) {
        kernels::nearest(sample, grid, index, sq_dist);
        Matrix sums = kernels::cell_sums(sample, index, cells, counts);

        std::vector<bool> empty(cells);
        bool any_empty = false;
        for (std::size_t k = 0; k < cells; ++k) any_empty |= (empty[k] = counts[k] == 0);
        if (any_empty) {
            reseed_cells(sample, grid, empty, sq_dist);
            previous.clear();
            continue;
        }
        if (index == previous) break;

        if (p == 1.0) {
            std::vector<std::vector<std::size_t>> members(cells);
            for (std::size_t i = 0; i < n; ++i) members[index[i]].push_back(i);
            std::vector<double> coord;
            for (std::size_t k = 0; k < cells; ++k) {
                for (std::size_t j = 0; j < d; ++j) {
                    coord.clear();
                    for (std::size_t i : members[k]) coord.push_back(sample(i, j));
                    grid(k, j) = median_of(coord);
                }
            }
        } else {
            for (std::size_t k = 0; k < cells; ++k)
                for (std::size_t j = 0; j < d; ++j)
                    grid(k, j) = sums(k, j) / static_cast<double>(counts[k]);
        }
        previous = index;
    }
}

} // namespace

void TrainConfig::validate() const {
    if (epochs == 0) throw ArgumentError("epochs must be positive");
    if (!(step_initial > 0.0)) throw ArgumentError("step_initial must be positive");
    if (!(step_decay > 0.0)) throw ArgumentError("step_decay must be positive");
}

Codebook::Codebook(Matrix points, double norm_order, std::uint64_t seed)
    : points_(std::move(points)), norm_order_(norm_order), seed_(seed) {
    if (points_.rows() == 0 || points_.cols() == 0)
        throw ArgumentError("codebook needs at least one point of positive dimension");
    check_norm_order(norm_order_);
    if (has_duplicate_rows(points_)) throw ArgumentError("codebook points must be pairwise distinct");
}

std::size_t count_distinct_rows(const Matrix& sample) {
    std::set<std::vector<double>> seen;
    for (std::size_t i = 0; i < sample.rows(); ++i) {
        auto r = sample.row(i);
        seen.emplace(r.begin(), r.end());
    }
    return seen.size();
}

Codebook train_grid(const Matrix& sample, std::size_t grid_size, double norm_order,
                    const TrainConfig& config) {
    if (grid_size == 0) throw ArgumentError("grid size must be positive");
    if (sample.rows() == 0 || sample.cols() == 0) throw ArgumentError("sample is empty");
    check_norm_order(norm_order);
    config.validate();
    if (sample.rows() < grid_size) throw DistinctPointsError(count_distinct_rows(sample), grid_size);
    const std::size_t distinct = count_distinct_rows(sample);
    if (distinct < grid_size) throw DistinctPointsError(distinct, grid_size);

    Rng rng = make_rng(config.seed);
    Matrix grid = initial_grid(sample, grid_size, rng);
    if (distinct > grid_size) {
        competitive_pass(sample, grid, norm_order, config, rng);
        if (norm_order == 1.0 || norm_order == 2.0)
            lloyd_refine(sample, grid, norm_order, config.lloyd_iterations);
    }

    // Final repair: no cell may end up empty or coincide with another.
    for (int round = 0; round < 8; ++round) {
        std::vector<std::size_t> index(sample.rows());
        std::vector<double> sq_dist(sample.rows());
        kernels::nearest(sample, grid, index, sq_dist);
        std::vector<bool> bad = duplicate_cells(grid);
        std::vector<std::size_t> counts(grid_size, 0);
        for (std::size_t k : index) ++counts[k];
        bool any = false;
        for (std::size_t k = 0; k < grid_size; ++k) any |= (bad[k] = bad[k] || counts[k] == 0);
        if (!any) break;
        if (reseed_cells(sample, grid, bad, sq_dist) == 0) break;
    }
    return Codebook(std::move(grid), norm_order, config.seed);
}

Projection project(const Codebook& codebook, std::span<const double> x) {
    if (x.size() != codebook.dimension()) throw ArgumentError("project: dimension mismatch");
    const std::size_t k = nearest_code(codebook.points(), x);
    const auto c = codebook.point(k);
    return {k, std::vector<double>(c.begin(), c.end())};
}

Assignment quantize_sample(const Codebook& codebook, const Matrix& sample) {
    Assignment out;
    if (sample.rows() == 0) return out;
    if (sample.cols() != codebook.dimension()) throw ArgumentError("quantize_sample: dimension mismatch");
    out.indices.resize(sample.rows());
    std::vector<double> sq_dist(sample.rows());
    kernels::nearest(sample, codebook.points(), out.indices, sq_dist);
    return out;
}

double quantization_error(const Codebook& codebook, const Matrix& sample, double norm_order) {
    if (sample.rows() == 0) throw ArgumentError("quantization_error: empty sample");
    if (sample.cols() != codebook.dimension())
        throw ArgumentError("quantization_error: dimension mismatch");
    check_norm_order(norm_order);
    std::vector<std::size_t> index(sample.rows());
    std::vector<double> sq_dist(sample.rows());
    kernels::nearest(sample, codebook.points(), index, sq_dist);
    double total = 0.0;
    if (norm_order == 2.0) {
        for (double s : sq_dist) total += s;
    } else {
        for (double s : sq_dist) total += std::pow(std::sqrt(s), norm_order);
    }
    return std::pow(total / static_cast<double>(sample.rows()), 1.0 / norm_order);
}

CellMeans cell_means(const Codebook& codebook, const Matrix& sample) {
    if (sample.rows() == 0) throw ArgumentError("cell_means: empty sample");
    const Assignment a = quantize_sample(codebook, sample);
    CellMeans out;
    out.means = kernels::cell_sums(sample, a.indices, codebook.size(), out.counts);
    for (std::size_t k = 0; k < codebook.size(); ++k) {
        if (out.counts[k] == 0) continue;
        for (double& v : out.means.row(k)) v /= static_cast<double>(out.counts[k]);
    }
    return out;
}

Matrix quantized_values(const Codebook& codebook, const Assignment& assignment) {
    Matrix out(assignment.indices.size(), codebook.dimension());
    for (std::size_t i = 0; i < assignment.indices.size(); ++i) {
        const std::size_t k = assignment.indices[i];
        if (k >= codebook.size()) throw ArgumentError("assignment index out of range");
        const auto c = codebook.point(k);
        std::copy(c.begin(), c.end(), out.row(i).begin());
    }
    return out;
}

} // namespace qsir
