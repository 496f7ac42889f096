// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace databoost {

/// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    std::size_t size() const { return data.size(); }
    double& operator()(std::size_t r, std::size_t c) {
        assert(r < rows && c < cols);
        return data[r * cols + c];
    }
    double operator()(std::size_t r, std::size_t c) const {
        assert(r < rows && c < cols);
        return data[r * cols + c];
    }
    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    void append_row(std::span<const double> values) {
        assert(values.size() == cols);
        data.insert(data.end(), values.begin(), values.end());
        ++rows;
    }
    void set_zero() { std::fill(data.begin(), data.end(), 0.0); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    bool operator==(const Matrix&) const = default;
};

}  // namespace databoost
