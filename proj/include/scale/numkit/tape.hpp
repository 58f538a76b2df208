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

#include "scale/numkit/sparse.hpp"
#include "scale/numkit/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <vector>

namespace scale::num {

/// Trainable tensor with its gradient accumulator and Adam moments.
struct Parameter {
    Tensor value;
    Tensor grad;
    Tensor m;
    Tensor v;
    std::uint64_t step = 0;

    Parameter() = default;
    explicit Parameter(Tensor init);

    void zero_grad() { grad.fill(0.0); }
};

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
public:
    Var() = default;

    const Tensor& value() const;
    std::size_t id() const noexcept { return id_; }
    Tape* tape() const noexcept { return tape_; }
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Reverse-mode differentiation record. Nodes are appended in evaluation order, so the
/// record is already topologically sorted; backward() walks it once from the end.
///
/// A tape belongs to a single thread. Parameter gradients accumulate across backward()
/// calls until Parameter::zero_grad().
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, const Tensor& grad_out)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    Var param(Parameter& p);
    Var record(Tensor value, std::span<const Var> inputs, BackwardFn backward);

    const Tensor& value(std::size_t id) const { return nodes_[id].value; }
    bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
    void accumulate(Var v, const Tensor& grad);
    void accumulate(Var v, Tensor&& grad);

    void backward(Var loss);

    std::size_t size() const noexcept { return nodes_.size(); }
    void clear() { nodes_.clear(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool has_grad = false;
        bool requires_grad = false;
        Parameter* param = nullptr;
        BackwardFn backward;
    };

    std::deque<Node> nodes_;
};

// Recorded operations. Every op checks shapes and throws ShapeError/DomainError as the
// matching plain kernel does.
Var matmul(Var a, Var b);
Var spmm(const SparseMatrix& a, Var b);
/// Product with a matrix whose sparsity pattern is `pattern` and whose stored values are
/// the nnz×1 variable `values`; differentiable in both `values` and `b`.
Var spmm(const SparseMatrix& pattern, Var values, Var b);
Var add(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double s);
Var add_row(Var x, Var bias);
Var sigmoid(Var x);
Var relu(Var x);
Var log(Var x);
Var rowwise_softmax(Var x, double temperature = 1.0);
/// Softmax over the stored entries of each row of `pattern`; `logits` is nnz×1.
Var segment_softmax(const SparseMatrix& pattern, Var logits);
Var gather_rows(Var x, std::span<const std::size_t> idx);
Var concat_cols(Var a, Var b);
Var sum(Var x);
Var mean(Var x);
/// −(1/N) Σ_i Σ_c targets_ic · log softmax(logits_i / τ)_c. Targets are constants.
Var softmax_cross_entropy(Var logits, const Tensor& targets, double temperature = 1.0);

} // namespace scale::num
