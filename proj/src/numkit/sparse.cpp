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

#include "scale/numkit/sparse.hpp"

#include "scale/errors.hpp"

#include <algorithm>

namespace scale::num {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), offsets_(rows + 1, 0) {}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> triplets) {
    for (const auto& t : triplets)
        if (t.row >= rows || t.col >= cols) throw ShapeError("from_triplets: entry out of range");
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix m(rows, cols);
    m.indices_.reserve(triplets.size());
    m.values_.reserve(triplets.size());
    for (std::size_t i = 0; i < triplets.size(); ++i) {
        const auto& t = triplets[i];
        if (i > 0 && triplets[i - 1].row == t.row && triplets[i - 1].col == t.col) {
            m.values_.back() += t.value;
            continue;
        }
        m.indices_.push_back(t.col);
        m.values_.push_back(t.value);
        ++m.offsets_[t.row + 1];
    }
    for (std::size_t r = 0; r < rows; ++r) m.offsets_[r + 1] += m.offsets_[r];
    return m;
}

SparseMatrix SparseMatrix::from_dense(const Tensor& dense) {
    std::vector<Triplet> t;
    for (std::size_t r = 0; r < dense.rows(); ++r)
        for (std::size_t c = 0; c < dense.cols(); ++c)
            if (dense(r, c) != 0.0) t.push_back({r, c, dense(r, c)});
    return from_triplets(dense.rows(), dense.cols(), std::move(t));
}

std::vector<std::size_t> SparseMatrix::entry_rows() const {
    std::vector<std::size_t> out(nnz());
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) out[k] = r;
    return out;
}

std::size_t SparseMatrix::find(std::size_t r, std::size_t c) const {
    if (r >= rows_) return nnz();
    auto first = indices_.begin() + static_cast<std::ptrdiff_t>(offsets_[r]);
    auto last = indices_.begin() + static_cast<std::ptrdiff_t>(offsets_[r + 1]);
    auto it = std::lower_bound(first, last, c);
    if (it == last || *it != c) return nnz();
    return static_cast<std::size_t>(it - indices_.begin());
}

SparseMatrix SparseMatrix::with_values(std::vector<double> values) const {
    if (values.size() != nnz()) throw ShapeError("with_values: length != nnz");
    SparseMatrix m = *this;
    m.values_ = std::move(values);
    return m;
}

Tensor SparseMatrix::values_tensor() const { return Tensor(nnz(), 1, values_); }

Tensor SparseMatrix::to_dense() const {
    Tensor d(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) d(r, indices_[k]) = values_[k];
    return d;
}

SparseMatrix SparseMatrix::transpose() const {
    std::vector<Triplet> t;
    t.reserve(nnz());
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) t.push_back({indices_[k], r, values_[k]});
    return from_triplets(cols_, rows_, std::move(t));
}

std::vector<double> SparseMatrix::row_sums() const {
    std::vector<double> s(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) s[r] += values_[k];
    return s;
}

std::vector<double> SparseMatrix::col_sums() const {
    std::vector<double> s(cols_, 0.0);
    for (std::size_t k = 0; k < nnz(); ++k) s[indices_[k]] += values_[k];
    return s;
}

std::vector<double> SparseMatrix::multiply(const std::vector<double>& x) const {
    if (x.size() != cols_) throw ShapeError("multiply: vector length != cols");
    std::vector<double> y(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
        double acc = 0.0;
        for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) acc += values_[k] * x[indices_[k]];
        y[r] = acc;
    }
    return y;
}

Tensor spmm(const SparseMatrix& a, const Tensor& b) {
    if (a.cols() != b.rows())
        throw ShapeError("spmm: sparse " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " times " + b.shape_str());
    Tensor out(a.rows(), b.cols());
    const auto& off = a.offsets();
    const auto& idx = a.indices();
    const auto& val = a.values();
    const std::size_t n = b.cols();
    for (std::size_t r = 0; r < a.rows(); ++r) {
        double* o = out.row(r).data();
        for (std::size_t k = off[r]; k < off[r + 1]; ++k) {
            const double w = val[k];
            const double* src = b.row(idx[k]).data();
            for (std::size_t c = 0; c < n; ++c) o[c] += w * src[c];
        }
    }
    return out;
}

} // namespace scale::num
