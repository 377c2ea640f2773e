#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace secalloc {

using RealVector = std::vector<double>;
using BinaryVector = std::vector<std::uint8_t>;

// Dense row-major table with 0/1 entries.
class BinaryTable {
public:
    BinaryTable() = default;
    BinaryTable(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    std::uint8_t operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    std::uint8_t& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

    std::size_t row_sum(std::size_t i) const {
        std::size_t s = 0;
        for (std::size_t j = 0; j < cols_; ++j) s += data_[i * cols_ + j];
        return s;
    }

    bool operator==(const BinaryTable&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::uint8_t> data_;
};

// Dense row-major table of doubles.
class RealTable {
public:
    RealTable() = default;
    RealTable(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

    bool operator==(const RealTable&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

} // namespace secalloc
