#pragma once

#include <cstddef>
#include <vector>

#include "faml/errors.hpp"

namespace faml {

using Vec = std::vector<double>;

// Dense row-major matrix. Rows are samples in data code and output units in
// network code.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

inline void require_same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b)
        throw DimensionError(std::string(what) + ": length " + std::to_string(a) +
                             " vs " + std::to_string(b));
}

} // namespace faml
