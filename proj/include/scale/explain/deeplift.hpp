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

#include "scale/models/models.hpp"

#include <optional>
#include <string>
#include <vector>

namespace scale::explain {

using num::Tensor;

/// Inference-mode MLP with every batch norm folded into the preceding affine layer.
/// ReLU follows every layer but the last.
struct FoldedMlp {
    std::vector<Tensor> weights; // in×out
    std::vector<Tensor> biases;  // 1×out

    std::size_t in_features() const { return weights.front().rows(); }
    std::size_t out_features() const { return weights.back().cols(); }
    /// Forward over rows of x.
    Tensor forward(const Tensor& x) const;
};

/// Throws ContractError when a batch norm has never seen a train-mode batch.
FoldedMlp fold_batchnorm(const models::Mlp& mlp);
/// Already folded: returned unchanged.
FoldedMlp fold_batchnorm(const FoldedMlp& mlp);

struct FeatureAttribution {
    std::size_t instance = 0;
    std::size_t target_class = 0;
    std::vector<double> phi;
    std::vector<double> reference;
    /// f(x) - f(reference) for the target logit; Σφ equals it up to rounding.
    double delta = 0.0;
};

/// Rescale-rule DeepLIFT for the target class's pre-softmax logit. A ReLU whose input
/// difference is below 1e-7 passes the gradient at x instead of Δout/Δin.
FeatureAttribution deeplift_attribute(const FoldedMlp& mlp, const std::vector<double>& x,
                                      const std::vector<double>& reference, std::size_t target_class);

/// Attributions of several rows at once; entry i explains row i of x.
std::vector<FeatureAttribution> deeplift_rows(const FoldedMlp& mlp, const Tensor& x, const std::vector<double>& reference,
                                              const std::vector<std::size_t>& target_class);

/// Mean over the rows' attributions (graph-level attribution of a mean-pooled model).
FeatureAttribution mean_attribution(const std::vector<FeatureAttribution>& rows, std::size_t instance);

struct FeatureImportance {
    std::size_t feature;
    double mean_abs;
};

struct ClassFeatureStats {
    int label;
    std::size_t count;
    std::vector<double> mean; // signed, per feature
    std::vector<double> min;
    std::vector<double> max;
};

struct AttributionSummary {
    /// Features by descending mean |φ|, ties by feature index.
    std::vector<FeatureImportance> ranking;
    std::vector<ClassFeatureStats> per_class; // ascending label
};

/// `labels[i]` groups attribution i for the per-class statistics. Throws ContractError
/// on an empty set or mismatched lengths.
AttributionSummary attribution_summary(const std::vector<FeatureAttribution>& attrs, const std::vector<int>& labels);

std::string to_json(const AttributionSummary& s);
std::string to_json(const FeatureAttribution& a);

} // namespace scale::explain
