#pragma once

#include <cstddef>
#include <vector>

#include "qsir/errors.hpp"
#include "qsir/numerics.hpp"

namespace qsir {

/// Paired observations: row i of x is X_i, y[i] is Y_i.
struct DataSet {
    Matrix x;
    std::vector<double> y;

    std::size_t size() const noexcept { return y.size(); }
    std::size_t dimension() const noexcept { return x.cols(); }

    void validate() const {
        if (x.rows() != y.size()) throw ArgumentError("dataset: x and y lengths differ");
    }
};

} // namespace qsir
