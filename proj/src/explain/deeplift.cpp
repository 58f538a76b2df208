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

#include "scale/explain/deeplift.hpp"

#include "scale/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>

namespace scale::explain {

using nlohmann::json;

Tensor FoldedMlp::forward(const Tensor& x) const {
    Tensor a = x;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        a = num::add_row(num::matmul(a, weights[l]), biases[l]);
        if (l + 1 < weights.size()) a = num::relu(a);
    }
    return a;
}

FoldedMlp fold_batchnorm(const models::Mlp& mlp) {
    FoldedMlp f;
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        Tensor w = mlp.layers[l].weight.value;
        Tensor b = mlp.layers[l].bias.value;
        if (l < mlp.norms.size()) {
            const auto& bn = mlp.norms[l];
            if (!bn.has_stats) throw ContractError("fold_batchnorm: batch norm " + std::to_string(l) + " has no running statistics");
            for (std::size_t c = 0; c < w.cols(); ++c) {
                const double s = bn.gamma.value[c] / std::sqrt(bn.running_var[c] + num::BatchNorm::kEps);
                for (std::size_t r = 0; r < w.rows(); ++r) w(r, c) *= s;
                b[c] = (b[c] - bn.running_mean[c]) * s + bn.beta.value[c];
            }
        }
        f.weights.push_back(std::move(w));
        f.biases.push_back(std::move(b));
    }
    return f;
}

FoldedMlp fold_batchnorm(const FoldedMlp& mlp) { return mlp; }

std::vector<FeatureAttribution> deeplift_rows(const FoldedMlp& mlp, const Tensor& x, const std::vector<double>& reference,
                                              const std::vector<std::size_t>& target_class) {
    if (mlp.weights.empty()) throw ContractError("deeplift: empty model");
    if (x.cols() != mlp.in_features() || reference.size() != mlp.in_features())
        throw ShapeError("deeplift: input width != model input width");
    if (target_class.size() != x.rows()) throw ShapeError("deeplift: one target class per row required");
    const std::size_t n = x.rows(), layers = mlp.weights.size();

    Tensor ref(1, reference.size());
    std::copy(reference.begin(), reference.end(), ref.data().begin());
    // Pre-activations per layer for the inputs and for the reference.
    std::vector<Tensor> zx, zr;
    Tensor ax = x, ar = ref;
    for (std::size_t l = 0; l < layers; ++l) {
        zx.push_back(num::add_row(num::matmul(ax, mlp.weights[l]), mlp.biases[l]));
        zr.push_back(num::add_row(num::matmul(ar, mlp.weights[l]), mlp.biases[l]));
        ax = num::relu(zx.back());
        ar = num::relu(zr.back());
    }

    Tensor m = Tensor::zeros(n, mlp.out_features());
    for (std::size_t i = 0; i < n; ++i) {
        if (target_class[i] >= mlp.out_features()) throw ContractError("deeplift: target class out of range");
        m(i, target_class[i]) = 1.0;
    }
    for (std::size_t l = layers; l-- > 0;) {
        if (l + 1 < layers) {
            // m currently holds multipliers w.r.t. relu(z_l); rescale to z_l.
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t c = 0; c < m.cols(); ++c) {
                    const double a = zx[l](i, c), b = zr[l](0, c);
                    const double din = a - b;
                    const double ratio =
                        std::abs(din) < 1e-7 ? (a > 0.0 ? 1.0 : 0.0) : (std::max(a, 0.0) - std::max(b, 0.0)) / din;
                    m(i, c) *= ratio;
                }
        }
        m = num::matmul_nt(m, mlp.weights[l]);
    }

    std::vector<FeatureAttribution> out(n);
    const std::size_t last = layers - 1;
    for (std::size_t i = 0; i < n; ++i) {
        auto& a = out[i];
        a.instance = i;
        a.target_class = target_class[i];
        a.reference = reference;
        a.phi.resize(x.cols());
        for (std::size_t f = 0; f < x.cols(); ++f) a.phi[f] = m(i, f) * (x(i, f) - reference[f]);
        a.delta = zx[last](i, target_class[i]) - zr[last](0, target_class[i]);
    }
    return out;
}

FeatureAttribution deeplift_attribute(const FoldedMlp& mlp, const std::vector<double>& x,
                                      const std::vector<double>& reference, std::size_t target_class) {
    Tensor row(1, x.size());
    std::copy(x.begin(), x.end(), row.data().begin());
    return deeplift_rows(mlp, row, reference, {target_class}).front();
}

FeatureAttribution mean_attribution(const std::vector<FeatureAttribution>& rows, std::size_t instance) {
    if (rows.empty()) throw ContractError("mean_attribution: no rows");
    FeatureAttribution out;
    out.instance = instance;
    out.target_class = rows.front().target_class;
    out.reference = rows.front().reference;
    out.phi.assign(rows.front().phi.size(), 0.0);
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (const auto& r : rows) {
        for (std::size_t f = 0; f < out.phi.size(); ++f) out.phi[f] += r.phi[f] * inv;
        out.delta += r.delta * inv;
    }
    return out;
}

AttributionSummary attribution_summary(const std::vector<FeatureAttribution>& attrs, const std::vector<int>& labels) {
    if (attrs.empty()) throw ContractError("attribution_summary: empty attribution set");
    if (labels.size() != attrs.size()) throw ContractError("attribution_summary: one label per attribution required");
    const std::size_t d = attrs.front().phi.size();
    AttributionSummary s;
    std::vector<double> total(d, 0.0);
    std::map<int, ClassFeatureStats> classes;
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        const auto& phi = attrs[i].phi;
        if (phi.size() != d) throw ContractError("attribution_summary: attributions differ in width");
        auto [it, fresh] = classes.try_emplace(labels[i], ClassFeatureStats{labels[i], 0, std::vector<double>(d, 0.0), phi, phi});
        auto& c = it->second;
        ++c.count;
        for (std::size_t f = 0; f < d; ++f) {
            total[f] += std::abs(phi[f]);
            c.mean[f] += phi[f];
            c.min[f] = std::min(c.min[f], phi[f]);
            c.max[f] = std::max(c.max[f], phi[f]);
        }
    }
    for (std::size_t f = 0; f < d; ++f) s.ranking.push_back({f, total[f] / static_cast<double>(attrs.size())});
    std::stable_sort(s.ranking.begin(), s.ranking.end(), [](const auto& a, const auto& b) { return a.mean_abs > b.mean_abs; });
    for (auto& [_, c] : classes) {
        for (double& v : c.mean) v /= static_cast<double>(c.count);
        s.per_class.push_back(std::move(c));
    }
    return s;
}

std::string to_json(const AttributionSummary& s) {
    json rank = json::array();
    for (const auto& r : s.ranking) rank.push_back({{"feature", r.feature}, {"mean_abs", r.mean_abs}});
    json cls = json::array();
    for (const auto& c : s.per_class)
        cls.push_back({{"label", c.label}, {"count", c.count}, {"mean", c.mean}, {"min", c.min}, {"max", c.max}});
    return json{{"ranking", rank}, {"per_class", cls}}.dump(2) + "\n";
}

std::string to_json(const FeatureAttribution& a) {
    return json{{"instance", a.instance},
                {"target_class", a.target_class},
                {"phi", a.phi},
                {"reference", a.reference},
                {"delta", a.delta}}
               .dump(2) +
           "\n";
}

} // namespace scale::explain
