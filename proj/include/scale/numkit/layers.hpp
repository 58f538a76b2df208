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

#include "scale/numkit/rng.hpp"
#include "scale/numkit/tape.hpp"

#include <vector>

namespace scale::num {

enum class Mode { Train, Infer };

/// Per-feature batch normalization with affine γ/β and running statistics.
struct BatchNorm {
    static constexpr double kEps = 1e-5;
    static constexpr double kMomentum = 0.1;

    Parameter gamma;
    Parameter beta;
    Tensor running_mean;
    Tensor running_var;
    bool has_stats = false; // set after the first train-mode pass

    BatchNorm() = default;
    explicit BatchNorm(std::size_t features);

    std::size_t features() const { return gamma.value.cols(); }
};

/// Train mode normalizes with (biased) batch statistics and updates the running averages
/// with the unbiased variance; infer mode reads the running statistics only.
Var batch_norm(Var x, BatchNorm& bn, Mode mode);
Tensor batch_norm_infer(const Tensor& x, const BatchNorm& bn);

/// Affine layer y = x·W + b, W is in×out.
struct Linear {
    Parameter weight;
    Parameter bias;

    Linear() = default;
    Linear(std::size_t in, std::size_t out, Rng& rng);

    std::size_t in_features() const { return weight.value.rows(); }
    std::size_t out_features() const { return weight.value.cols(); }

    Var forward(Tape& t, Var x);
    Tensor forward(const Tensor& x) const;
};

/// Uniform Glorot initialization for an in×out weight.
Tensor glorot_uniform(std::size_t in, std::size_t out, Rng& rng);

/// Adam with bias correction. Parameters with an all-zero gradient still advance their
/// step counter; their value does not move.
struct AdamOptions {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

void adam_step(std::span<Parameter* const> params, const AdamOptions& opt);
void zero_grad(std::span<Parameter* const> params);

} // namespace scale::num
