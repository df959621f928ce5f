#pragma once

#include <algorithm>
#include <complex>
#include <span>
#include <tuple>
#include <type_traits>
#include <vector>

#include "sgap/error.hpp"

namespace sgap {

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

template <typename T>
inline T conj_if_complex(const T& v) {
    if constexpr (is_complex<T>::value) return std::conj(v);
    else return v;
}

template <typename T>
struct Triplet {
    int row;
    int col;
    T value;
};

/// Compressed sparse row matrix. Real or complex scalars.
template <typename T>
class SparseMatrix {
public:
    using Scalar = T;

    SparseMatrix() = default;

    /// Duplicate coordinates are summed.
    SparseMatrix(int rows, int cols, std::vector<Triplet<T>> triplets) : rows_(rows), cols_(cols) {
        if (rows < 0 || cols < 0) throw InvalidArgument("negative sparse matrix dimension");
        for (const auto& t : triplets) {
            if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
                throw InvalidArgument("sparse triplet out of range");
            }
        }
        std::sort(triplets.begin(), triplets.end(),
                  [](const auto& a, const auto& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });
        row_ptr_.assign(static_cast<std::size_t>(rows) + 1, 0);
        for (std::size_t k = 0; k < triplets.size(); ++k) {
            const auto& t = triplets[k];
            if (!col_idx_.empty() && k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
                values_.back() += t.value;
                continue;
            }
            col_idx_.push_back(t.col);
            values_.push_back(t.value);
            ++row_ptr_[static_cast<std::size_t>(t.row) + 1];
        }
        for (int r = 0; r < rows; ++r) row_ptr_[r + 1] += row_ptr_[r];
    }

    [[nodiscard]] int rows() const noexcept { return rows_; }
    [[nodiscard]] int cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t nonzeros() const noexcept { return values_.size(); }

    [[nodiscard]] bool all_zero() const {
        return std::all_of(values_.begin(), values_.end(), [](const T& v) { return v == T{}; });
    }

    /// y = A x
    void multiply(std::span<const T> x, std::span<T> y) const {
        for (int r = 0; r < rows_; ++r) {
            T acc{};
            for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += values_[k] * x[col_idx_[k]];
            y[r] = acc;
        }
    }

    /// y = A^H x
    void multiply_adjoint(std::span<const T> x, std::span<T> y) const {
        std::fill(y.begin(), y.end(), T{});
        for (int r = 0; r < rows_; ++r) {
            const T xr = x[r];
            for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) y[col_idx_[k]] += conj_if_complex(values_[k]) * xr;
        }
    }

    /// Calls f(row, col, value) for every stored entry in row-major order.
    template <typename F>
    void for_each(F&& f) const {
        for (int r = 0; r < rows_; ++r)
            for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) f(r, col_idx_[k], values_[k]);
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<int> row_ptr_{0};
    std::vector<int> col_idx_;
    std::vector<T> values_;
};

} // namespace sgap
