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

#include "scale/numkit/tensor.hpp"

#include "scale/errors.hpp"
#include "numkit/eigen_map.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace scale::num {

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
        throw ShapeError("Tensor: data length " + std::to_string(data_.size()) + " != " +
                         std::to_string(rows_) + "x" + std::to_string(cols_));
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw ShapeError("Tensor::from_rows: ragged rows");
        data.insert(data.end(), row.begin(), row.end());
    }
    return Tensor(r, c, std::move(data));
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::add_inplace(const Tensor& o) {
    if (!same_shape(o)) throw ShapeError("add_inplace: " + shape_str() + " vs " + o.shape_str());
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
}

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Tensor::item() const {
    if (rows_ != 1 || cols_ != 1) throw ShapeError("item: tensor is " + shape_str() + ", not 1x1");
    return data_[0];
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << rows_ << "x" << cols_;
    return os.str();
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows())
        throw ShapeError("matmul: " + a.shape_str() + " times " + b.shape_str());
    Tensor out(a.rows(), b.cols());
    if (a.size() && b.size()) as_mat(out).noalias() = as_mat(a) * as_mat(b);
    return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows())
        throw ShapeError("matmul_tn: " + a.shape_str() + "ᵀ times " + b.shape_str());
    Tensor out(a.cols(), b.cols());
    if (a.size() && b.size()) as_mat(out).noalias() = as_mat(a).transpose() * as_mat(b);
    return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.cols())
        throw ShapeError("matmul_nt: " + a.shape_str() + " times " + b.shape_str() + "ᵀ");
    Tensor out(a.rows(), b.rows());
    if (a.size() && b.size()) as_mat(out).noalias() = as_mat(a) * as_mat(b).transpose();
    return out;
}

Tensor transpose(const Tensor& a) {
    Tensor out(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
    return out;
}

namespace {

void check_temperature(double t) {
    if (!(t > 0.0)) throw DomainError("softmax temperature must be positive");
}

} // namespace

Tensor rowwise_log_softmax(const Tensor& x, double temperature) {
    check_temperature(temperature);
    Tensor out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto in = x.row(r);
        auto o = out.row(r);
        double mx = -INFINITY;
        for (double v : in) mx = std::max(mx, v / temperature);
        double s = 0.0;
        for (double v : in) s += std::exp(v / temperature - mx);
        const double lse = mx + std::log(s);
        for (std::size_t c = 0; c < in.size(); ++c) o[c] = in[c] / temperature - lse;
    }
    return out;
}

Tensor rowwise_softmax(const Tensor& x, double temperature) {
    check_temperature(temperature);
    Tensor out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto in = x.row(r);
        auto o = out.row(r);
        double mx = -INFINITY;
        for (double v : in) mx = std::max(mx, v / temperature);
        double s = 0.0;
        for (std::size_t c = 0; c < in.size(); ++c) {
            o[c] = std::exp(in[c] / temperature - mx);
            s += o[c];
        }
        for (double& v : o) v /= s;
    }
    return out;
}

Tensor sigmoid(const Tensor& x) {
    Tensor out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = x[i];
        // Split on sign so exp never overflows.
        out[i] = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    }
    return out;
}

Tensor relu(const Tensor& x) {
    Tensor out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
    return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeError("hadamard: " + a.shape_str() + " vs " + b.shape_str());
    Tensor out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeError("add: " + a.shape_str() + " vs " + b.shape_str());
    Tensor out = a;
    out.add_inplace(b);
    return out;
}

Tensor log(const Tensor& x) {
    Tensor out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0)) throw DomainError("log of non-positive value");
        out[i] = std::log(x[i]);
    }
    return out;
}

Tensor add_row(const Tensor& x, const Tensor& bias) {
    if (bias.rows() != 1 || bias.cols() != x.cols())
        throw ShapeError("add_row: bias " + bias.shape_str() + " for " + x.shape_str());
    Tensor out = x;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto o = out.row(r);
        for (std::size_t c = 0; c < x.cols(); ++c) o[c] += bias[c];
    }
    return out;
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> idx) {
    Tensor out(idx.size(), x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= x.rows()) throw ShapeError("gather_rows: index out of range");
        std::copy_n(x.row(idx[i]).begin(), x.cols(), out.row(i).begin());
    }
    return out;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows())
        throw ShapeError("concat_cols: " + a.shape_str() + " vs " + b.shape_str());
    Tensor out(a.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto o = out.row(r);
        std::copy_n(a.row(r).begin(), a.cols(), o.begin());
        std::copy_n(b.row(r).begin(), b.cols(), o.begin() + a.cols());
    }
    return out;
}

std::vector<std::size_t> argmax_rows(const Tensor& x) {
    std::vector<std::size_t> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto row = x.row(r);
        out[r] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeError("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace scale::num
