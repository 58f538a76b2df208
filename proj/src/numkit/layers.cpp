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

#include "scale/numkit/layers.hpp"

#include "scale/errors.hpp"

#include <cmath>
#include <vector>

namespace scale::num {

BatchNorm::BatchNorm(std::size_t features)
    : gamma(Tensor::ones(1, features)),
      beta(Tensor::zeros(1, features)),
      running_mean(1, features, 0.0),
      running_var(1, features, 1.0) {}

Tensor batch_norm_infer(const Tensor& x, const BatchNorm& bn) {
    if (x.cols() != bn.features())
        throw ShapeError("batch_norm: input " + x.shape_str() + " for " + std::to_string(bn.features()) +
                         " features");
    Tensor out(x.rows(), x.cols());
    for (std::size_t c = 0; c < x.cols(); ++c) {
        const double inv = 1.0 / std::sqrt(bn.running_var[c] + BatchNorm::kEps);
        const double g = bn.gamma.value[c];
        const double b = bn.beta.value[c];
        const double mu = bn.running_mean[c];
        for (std::size_t r = 0; r < x.rows(); ++r) out(r, c) = g * (x(r, c) - mu) * inv + b;
    }
    return out;
}

Var batch_norm(Var x, BatchNorm& bn, Mode mode) {
    Tape& t = *x.tape();
    const Tensor& xv = x.value();
    if (xv.cols() != bn.features())
        throw ShapeError("batch_norm: input " + xv.shape_str() + " for " + std::to_string(bn.features()) +
                         " features");
    Var gamma = t.param(bn.gamma);
    Var beta = t.param(bn.beta);

    if (mode == Mode::Infer) {
        // y = x·s + (β − μ·s) with s = γ/σ_running; affine in x, γ and β.
        const Var in[] = {x, gamma, beta};
        return t.record(batch_norm_infer(xv, bn), in, [x, gamma, beta, &bn](Tape& t, const Tensor& g) {
            const Tensor& xv = x.value();
            Tensor gx(g.rows(), g.cols()), gg(1, g.cols()), gb(1, g.cols());
            std::vector<double> inv(g.cols());
            for (std::size_t c = 0; c < g.cols(); ++c) inv[c] = 1.0 / std::sqrt(bn.running_var[c] + BatchNorm::kEps);
            for (std::size_t r = 0; r < g.rows(); ++r)
                for (std::size_t c = 0; c < g.cols(); ++c) {
                    gx(r, c) = g(r, c) * bn.gamma.value[c] * inv[c];
                    gg[c] += g(r, c) * (xv(r, c) - bn.running_mean[c]) * inv[c];
                    gb[c] += g(r, c);
                }
            t.accumulate(x, std::move(gx));
            t.accumulate(gamma, std::move(gg));
            t.accumulate(beta, std::move(gb));
        });
    }

    const std::size_t n = xv.rows();
    if (n < 2) throw ShapeError("batch_norm: train mode needs a batch of at least 2 rows");
    const std::size_t f = xv.cols();
    Tensor xhat(n, f);
    Tensor inv_std(1, f);
    Tensor out(n, f);
    std::vector<double> mu(f, 0.0), var(f, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < f; ++c) mu[c] += xv(r, c);
    for (double& m : mu) m /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < f; ++c) var[c] += (xv(r, c) - mu[c]) * (xv(r, c) - mu[c]);
    for (std::size_t c = 0; c < f; ++c) {
        var[c] /= static_cast<double>(n);
        inv_std[c] = 1.0 / std::sqrt(var[c] + BatchNorm::kEps);
    }
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < f; ++c) {
            xhat(r, c) = (xv(r, c) - mu[c]) * inv_std[c];
            out(r, c) = bn.gamma.value[c] * xhat(r, c) + bn.beta.value[c];
        }
    for (std::size_t c = 0; c < f; ++c) {
        const double unbiased = var[c] * static_cast<double>(n) / static_cast<double>(n - 1);
        bn.running_mean[c] = (1.0 - BatchNorm::kMomentum) * bn.running_mean[c] + BatchNorm::kMomentum * mu[c];
        bn.running_var[c] = (1.0 - BatchNorm::kMomentum) * bn.running_var[c] + BatchNorm::kMomentum * unbiased;
    }
    bn.has_stats = true;

    const Var in[] = {x, gamma, beta};
    const Tensor gamma_v = bn.gamma.value;
    return t.record(std::move(out), in,
                    [x, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std), gamma_v](
                        Tape& t, const Tensor& g) {
                        const std::size_t n = g.rows();
                        const std::size_t f = g.cols();
                        const double dn = static_cast<double>(n);
                        Tensor gx(n, f), gg(1, f), gb(1, f);
                        for (std::size_t r = 0; r < n; ++r)
                            for (std::size_t c = 0; c < f; ++c) {
                                gb[c] += g(r, c);
                                gg[c] += g(r, c) * xhat(r, c);
                            }
                        std::vector<double> k(f);
                        for (std::size_t c = 0; c < f; ++c) k[c] = gamma_v[c] * inv_std[c] / dn;
                        for (std::size_t r = 0; r < n; ++r)
                            for (std::size_t c = 0; c < f; ++c)
                                gx(r, c) = k[c] * (dn * g(r, c) - gb[c] - xhat(r, c) * gg[c]);
                        t.accumulate(x, std::move(gx));
                        t.accumulate(gamma, std::move(gg));
                        t.accumulate(beta, std::move(gb));
                    });
}

Tensor glorot_uniform(std::size_t in, std::size_t out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    Tensor w(in, out);
    for (double& v : w.data()) v = (2.0 * uniform01(rng) - 1.0) * limit;
    return w;
}

Linear::Linear(std::size_t in, std::size_t out, Rng& rng) : weight(glorot_uniform(in, out, rng)), bias(Tensor(1, out)) {
    const double limit = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& v : bias.value.data()) v = (2.0 * uniform01(rng) - 1.0) * limit;
}

Var Linear::forward(Tape& t, Var x) { return add_row(matmul(x, t.param(weight)), t.param(bias)); }

Tensor Linear::forward(const Tensor& x) const { return add_row(matmul(x, weight.value), bias.value); }

void adam_step(std::span<Parameter* const> params, const AdamOptions& opt) {
    for (Parameter* p : params) {
        ++p->step;
        const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(p->step));
        const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(p->step));
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double g = p->grad[i];
            p->m[i] = opt.beta1 * p->m[i] + (1.0 - opt.beta1) * g;
            p->v[i] = opt.beta2 * p->v[i] + (1.0 - opt.beta2) * g * g;
            const double mhat = p->m[i] / bc1;
            const double vhat = p->v[i] / bc2;
            p->value[i] -= opt.lr * mhat / (std::sqrt(vhat) + opt.eps);
        }
    }
}

void zero_grad(std::span<Parameter* const> params) {
    for (Parameter* p : params) p->zero_grad();
}

} // namespace scale::num
