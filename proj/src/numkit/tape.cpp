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

#include "scale/numkit/tape.hpp"

#include "scale/errors.hpp"
#include "numkit/eigen_map.hpp"

#include <cmath>

namespace scale::num {

Parameter::Parameter(Tensor init)
    : value(std::move(init)),
      grad(value.rows(), value.cols()),
      m(value.rows(), value.cols()),
      v(value.rows(), value.cols()) {}

const Tensor& Var::value() const { return tape_->value(id_); }

Var Tape::constant(Tensor value) {
    nodes_.push_back(Node{std::move(value), {}, false, false, nullptr, {}});
    return Var(this, nodes_.size() - 1);
}

Var Tape::param(Parameter& p) {
    nodes_.push_back(Node{p.value, {}, false, true, &p, {}});
    return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn backward) {
    bool rg = false;
    for (const Var& in : inputs) {
        if (in.tape() != this) throw ContractError("Tape::record: input from another tape");
        rg = rg || nodes_[in.id()].requires_grad;
    }
    nodes_.push_back(Node{std::move(value), {}, false, rg, nullptr, rg ? std::move(backward) : BackwardFn{}});
    return Var(this, nodes_.size() - 1);
}

void Tape::accumulate(Var v, const Tensor& grad) {
    Node& n = nodes_[v.id()];
    if (!n.requires_grad) return;
    if (!n.has_grad) {
        n.grad = grad;
        n.has_grad = true;
    } else {
        n.grad.add_inplace(grad);
    }
}

void Tape::accumulate(Var v, Tensor&& grad) {
    Node& n = nodes_[v.id()];
    if (!n.requires_grad) return;
    if (!n.has_grad) {
        n.grad = std::move(grad);
        n.has_grad = true;
    } else {
        n.grad.add_inplace(grad);
    }
}

void Tape::backward(Var loss) {
    if (loss.tape() != this) throw ContractError("backward: loss recorded on another tape");
    const Tensor& lv = loss.value();
    if (lv.rows() != 1 || lv.cols() != 1)
        throw ShapeError("backward: loss must be 1x1, got " + lv.shape_str());
    if (!std::isfinite(lv[0])) throw NumericError("backward: loss is not finite");
    for (auto& n : nodes_) {
        n.has_grad = false;
        n.grad = Tensor();
    }
    accumulate(loss, Tensor::scalar(1.0));
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.has_grad) continue;
        if (n.backward) n.backward(*this, n.grad);
        if (n.param) n.param->grad.add_inplace(n.grad);
        // Intermediate gradients are not needed after propagation.
        if (!n.param) n.grad = Tensor();
    }
}

// ---------------------------------------------------------------------------

Var matmul(Var a, Var b) {
    Tape& t = *a.tape();
    const Var in[] = {a, b};
    return t.record(num::matmul(a.value(), b.value()), in, [a, b](Tape& t, const Tensor& g) {
        if (t.requires_grad(a)) t.accumulate(a, matmul_nt(g, b.value()));
        if (t.requires_grad(b)) t.accumulate(b, matmul_tn(a.value(), g));
    });
}

Var spmm(const SparseMatrix& a, Var b) {
    Tape& t = *b.tape();
    const Var in[] = {b};
    // The matrix is captured by value: the tape may outlive the caller's copy.
    return t.record(num::spmm(a, b.value()), in, [at = a.transpose(), b](Tape& t, const Tensor& g) {
        t.accumulate(b, num::spmm(at, g));
    });
}

Var spmm(const SparseMatrix& pattern, Var values, Var b) {
    if (values.rows() != pattern.nnz() || values.cols() != 1)
        throw ShapeError("spmm: values must be nnz x 1, got " + values.value().shape_str());
    Tape& t = *b.tape();
    SparseMatrix a = pattern.with_values(values.value().values());
    Tensor out = num::spmm(a, b.value());
    const Var in[] = {values, b};
    return t.record(std::move(out), in, [a = std::move(a), values, b](Tape& t, const Tensor& g) {
        if (t.requires_grad(b)) t.accumulate(b, num::spmm(a.transpose(), g));
        if (t.requires_grad(values)) {
            const Tensor& bv = b.value();
            Tensor gv(a.nnz(), 1);
            const auto& off = a.offsets();
            const auto& idx = a.indices();
            for (std::size_t r = 0; r < a.rows(); ++r) {
                auto gr = g.row(r);
                for (std::size_t k = off[r]; k < off[r + 1]; ++k) {
                    auto br = bv.row(idx[k]);
                    double acc = 0.0;
                    for (std::size_t c = 0; c < gr.size(); ++c) acc += gr[c] * br[c];
                    gv[k] = acc;
                }
            }
            t.accumulate(values, std::move(gv));
        }
    });
}

Var add(Var a, Var b) {
    Tape& t = *a.tape();
    const Var in[] = {a, b};
    return t.record(num::add(a.value(), b.value()), in, [a, b](Tape& t, const Tensor& g) {
        t.accumulate(a, g);
        t.accumulate(b, g);
    });
}

Var hadamard(Var a, Var b) {
    Tape& t = *a.tape();
    const Var in[] = {a, b};
    return t.record(num::hadamard(a.value(), b.value()), in, [a, b](Tape& t, const Tensor& g) {
        if (t.requires_grad(a)) t.accumulate(a, num::hadamard(g, b.value()));
        if (t.requires_grad(b)) t.accumulate(b, num::hadamard(g, a.value()));
    });
}

Var scale(Var a, double s) {
    Tape& t = *a.tape();
    Tensor out = a.value();
    for (double& v : out.data()) v *= s;
    const Var in[] = {a};
    return t.record(std::move(out), in, [a, s](Tape& t, const Tensor& g) {
        Tensor ga = g;
        for (double& v : ga.data()) v *= s;
        t.accumulate(a, std::move(ga));
    });
}

Var add_row(Var x, Var bias) {
    Tape& t = *x.tape();
    const Var in[] = {x, bias};
    return t.record(num::add_row(x.value(), bias.value()), in, [x, bias](Tape& t, const Tensor& g) {
        t.accumulate(x, g);
        if (t.requires_grad(bias)) {
            Tensor gb(1, g.cols());
            for (std::size_t r = 0; r < g.rows(); ++r)
                for (std::size_t c = 0; c < g.cols(); ++c) gb[c] += g(r, c);
            t.accumulate(bias, std::move(gb));
        }
    });
}

Var sigmoid(Var x) {
    Tape& t = *x.tape();
    const Var in[] = {x};
    Tensor out = num::sigmoid(x.value());
    const std::size_t self = t.size();
    return t.record(std::move(out), in, [x, self](Tape& t, const Tensor& g) {
        const Tensor& y = t.value(self);
        Tensor gx(g.rows(), g.cols());
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] = g[i] * y[i] * (1.0 - y[i]);
        t.accumulate(x, std::move(gx));
    });
}

Var relu(Var x) {
    Tape& t = *x.tape();
    const Var in[] = {x};
    return t.record(num::relu(x.value()), in, [x](Tape& t, const Tensor& g) {
        const Tensor& xv = x.value();
        Tensor gx(g.rows(), g.cols());
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] = xv[i] > 0.0 ? g[i] : 0.0;
        t.accumulate(x, std::move(gx));
    });
}

Var log(Var x) {
    Tape& t = *x.tape();
    const Var in[] = {x};
    return t.record(num::log(x.value()), in, [x](Tape& t, const Tensor& g) {
        const Tensor& xv = x.value();
        Tensor gx(g.rows(), g.cols());
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] = g[i] / xv[i];
        t.accumulate(x, std::move(gx));
    });
}

Var rowwise_softmax(Var x, double temperature) {
    Tape& t = *x.tape();
    const Var in[] = {x};
    const std::size_t self = t.size();
    return t.record(num::rowwise_softmax(x.value(), temperature), in,
                    [x, self, temperature](Tape& t, const Tensor& g) {
                        const Tensor& y = t.value(self);
                        Tensor gx(g.rows(), g.cols());
                        for (std::size_t r = 0; r < g.rows(); ++r) {
                            double dot = 0.0;
                            for (std::size_t c = 0; c < g.cols(); ++c) dot += g(r, c) * y(r, c);
                            for (std::size_t c = 0; c < g.cols(); ++c)
                                gx(r, c) = y(r, c) * (g(r, c) - dot) / temperature;
                        }
                        t.accumulate(x, std::move(gx));
                    });
}

Var segment_softmax(const SparseMatrix& pattern, Var logits) {
    if (logits.rows() != pattern.nnz() || logits.cols() != 1)
        throw ShapeError("segment_softmax: logits must be nnz x 1");
    Tape& t = *logits.tape();
    const auto& off = pattern.offsets();
    const Tensor& z = logits.value();
    Tensor out(z.rows(), 1);
    for (std::size_t r = 0; r < pattern.rows(); ++r) {
        if (off[r] == off[r + 1]) continue;
        double mx = -INFINITY;
        for (std::size_t k = off[r]; k < off[r + 1]; ++k) mx = std::max(mx, z[k]);
        double s = 0.0;
        for (std::size_t k = off[r]; k < off[r + 1]; ++k) {
            out[k] = std::exp(z[k] - mx);
            s += out[k];
        }
        for (std::size_t k = off[r]; k < off[r + 1]; ++k) out[k] /= s;
    }
    const Var in[] = {logits};
    const std::size_t self = t.size();
    return t.record(std::move(out), in, [logits, self, off](Tape& t, const Tensor& g) {
        const Tensor& y = t.value(self);
        Tensor gx(g.rows(), 1);
        for (std::size_t r = 0; r + 1 < off.size(); ++r) {
            double dot = 0.0;
            for (std::size_t k = off[r]; k < off[r + 1]; ++k) dot += g[k] * y[k];
            for (std::size_t k = off[r]; k < off[r + 1]; ++k) gx[k] = y[k] * (g[k] - dot);
        }
        t.accumulate(logits, std::move(gx));
    });
}

Var gather_rows(Var x, std::span<const std::size_t> idx) {
    Tape& t = *x.tape();
    const Var in[] = {x};
    std::vector<std::size_t> rows(idx.begin(), idx.end());
    return t.record(num::gather_rows(x.value(), idx), in, [x, rows = std::move(rows)](Tape& t, const Tensor& g) {
        Tensor gx(x.rows(), x.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            auto dst = gx.row(rows[i]);
            auto src = g.row(i);
            for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
        }
        t.accumulate(x, std::move(gx));
    });
}

Var concat_cols(Var a, Var b) {
    Tape& t = *a.tape();
    const Var in[] = {a, b};
    return t.record(num::concat_cols(a.value(), b.value()), in, [a, b](Tape& t, const Tensor& g) {
        const std::size_t ca = a.cols();
        if (t.requires_grad(a)) {
            Tensor ga(g.rows(), ca);
            for (std::size_t r = 0; r < g.rows(); ++r)
                for (std::size_t c = 0; c < ca; ++c) ga(r, c) = g(r, c);
            t.accumulate(a, std::move(ga));
        }
        if (t.requires_grad(b)) {
            Tensor gb(g.rows(), g.cols() - ca);
            for (std::size_t r = 0; r < g.rows(); ++r)
                for (std::size_t c = 0; c < gb.cols(); ++c) gb(r, c) = g(r, ca + c);
            t.accumulate(b, std::move(gb));
        }
    });
}

Var sum(Var x) {
    Tape& t = *x.tape();
    double s = 0.0;
    for (double v : x.value().data()) s += v;
    const Var in[] = {x};
    return t.record(Tensor::scalar(s), in, [x](Tape& t, const Tensor& g) {
        t.accumulate(x, Tensor(x.rows(), x.cols(), g[0]));
    });
}

Var mean(Var x) {
    const std::size_t n = x.value().size();
    if (n == 0) throw ShapeError("mean: empty tensor");
    return scale(sum(x), 1.0 / static_cast<double>(n));
}

Var softmax_cross_entropy(Var logits, const Tensor& targets, double temperature) {
    if (!logits.value().same_shape(targets))
        throw ShapeError("cross entropy: logits " + logits.value().shape_str() + " vs targets " +
                         targets.shape_str());
    const std::size_t n = targets.rows();
    if (n == 0) throw ShapeError("cross entropy: empty batch");
    Tape& t = *logits.tape();
    const Tensor logp = rowwise_log_softmax(logits.value(), temperature);
    double acc = 0.0;
    for (std::size_t i = 0; i < logp.size(); ++i)
        if (targets[i] != 0.0) acc -= targets[i] * logp[i];
    const double inv_n = 1.0 / static_cast<double>(n);
    const Var in[] = {logits};
    return t.record(Tensor::scalar(acc * inv_n), in,
                    [logits, targets, logp, inv_n, temperature](Tape& t, const Tensor& g) {
                        Tensor gx(logp.rows(), logp.cols());
                        const double k = g[0] * inv_n / temperature;
                        for (std::size_t r = 0; r < logp.rows(); ++r) {
                            double mass = 0.0;
                            for (std::size_t c = 0; c < logp.cols(); ++c) mass += targets(r, c);
                            for (std::size_t c = 0; c < logp.cols(); ++c)
                                gx(r, c) = k * (std::exp(logp(r, c)) * mass - targets(r, c));
                        }
                        t.accumulate(logits, std::move(gx));
                    });
}

} // namespace scale::num
