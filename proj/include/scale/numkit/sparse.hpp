// Copyright 2026 The scale Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "scale/numkit/tensor.hpp"

#include <cstddef>
#include <vector>

namespace scale::num {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Compressed-row sparse matrix. Column indices are strictly increasing inside each row.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols);

    /// Duplicate (row, col) entries are summed.
    static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);
    static SparseMatrix from_dense(const Tensor& dense);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return indices_.size(); }

    const std::vector<std::size_t>& offsets() const noexcept { return offsets_; }
    const std::vector<std::size_t>& indices() const noexcept { return indices_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& mutable_values() noexcept { return values_; }

    /// Row index of every stored entry, in storage order.
    std::vector<std::size_t> entry_rows() const;
    /// Storage position of (r, c), or nnz() when absent.
    std::size_t find(std::size_t r, std::size_t c) const;

    /// Same sparsity pattern with new values (length must be nnz()).
    SparseMatrix with_values(std::vector<double> values) const;
    /// Values as an nnz×1 tensor.
    Tensor values_tensor() const;

    Tensor to_dense() const;
    SparseMatrix transpose() const;
    std::vector<double> row_sums() const;
    std::vector<double> col_sums() const;
    std::vector<double> multiply(const std::vector<double>& x) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> offsets_{0};
    std::vector<std::size_t> indices_;
    std::vector<double> values_;
};

/// Plain sparse·dense product.
Tensor spmm(const SparseMatrix& a, const Tensor& b);

} // namespace scale::num
