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

#include "scale/models/models.hpp"

#include "scale/errors.hpp"

#include <algorithm>
#include <cmath>

namespace scale::models {

namespace {

GraphInput base_input(const graph::Graph& g) {
    GraphInput in;
    in.adj_norm = graph::symmetric_normalize(graph::build_adjacency(g, true)).matrix;
    in.rows = in.adj_norm.entry_rows();
    in.cols = in.adj_norm.indices();
    in.features = g.features();
    const auto& off = in.adj_norm.offsets();
    in.degree_scale = Tensor(in.rows.size(), 1);
    for (std::size_t k = 0; k < in.rows.size(); ++k) {
        const auto deg = [&](std::size_t v) { return static_cast<double>(off[v + 1] - off[v]); };
        in.degree_scale[k] = std::sqrt(deg(in.rows[k]));
    }
    return in;
}

void append(std::vector<Parameter*>& out, std::vector<Parameter*> more) {
    out.insert(out.end(), more.begin(), more.end());
}

void append(std::vector<Parameter*>& out, num::Linear& l) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
}

Var maybe_pool(const GraphInput& in, Var x) { return in.pooled() ? num::spmm(in.pool, x) : x; }

void check_input(const GraphInput& in, std::size_t in_dim, const char* who) {
    if (in.features.cols() != in_dim)
        throw ShapeError(std::string(who) + ": feature width " + std::to_string(in.features.cols()) +
                         " != model input width " + std::to_string(in_dim));
}

} // namespace

GraphInput make_node_input(const graph::Graph& g) { return base_input(g); }

GraphInput make_graph_input(const graph::GraphUnion& u) {
    GraphInput in = base_input(u.merged);
    const std::size_t graphs = u.node_offset.size() - 1;
    std::vector<num::Triplet> t;
    t.reserve(u.merged.num_nodes());
    for (std::size_t gi = 0; gi < graphs; ++gi) {
        const std::size_t lo = u.node_offset[gi], hi = u.node_offset[gi + 1];
        if (hi == lo) throw ContractError("make_graph_input: empty member graph");
        for (std::size_t v = lo; v < hi; ++v) t.push_back({gi, v, 1.0 / static_cast<double>(hi - lo)});
    }
    in.pool = SparseMatrix::from_triplets(graphs, u.merged.num_nodes(), std::move(t));
    return in;
}

void Architecture::validate() const {
    if (in_dim == 0 || hidden == 0 || classes == 0 || gcn_layers == 0 || mlp_layers == 0 || mask_in_dim == 0)
        throw ContractError("Architecture: widths and depths must be positive");
}

std::vector<std::size_t> mlp_widths(std::size_t hidden, std::size_t layers) {
    std::vector<std::size_t> w;
    std::size_t h = hidden;
    for (std::size_t i = 0; i + 1 < layers; ++i) {
        w.push_back(std::max<std::size_t>(h, 1));
        h /= 2;
    }
    return w;
}

Mlp::Mlp(std::size_t in, std::size_t hidden, std::size_t out, std::size_t depth, num::Rng& rng) {
    std::size_t prev = in;
    for (std::size_t w : mlp_widths(hidden, depth)) {
        layers.emplace_back(prev, w, rng);
        norms.emplace_back(w);
        prev = w;
    }
    layers.emplace_back(prev, out, rng);
}

Var Mlp::forward(Tape& t, Var x, Mode mode) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        x = layers[i].forward(t, x);
        if (i < norms.size()) x = num::relu(num::batch_norm(x, norms[i], mode));
    }
    return x;
}

std::vector<Parameter*> Mlp::parameters() {
    std::vector<Parameter*> p;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        append(p, layers[i]);
        if (i < norms.size()) {
            p.push_back(&norms[i].gamma);
            p.push_back(&norms[i].beta);
        }
    }
    return p;
}

GcnStack::GcnStack(std::size_t in, std::size_t hidden, std::size_t depth, num::Rng& rng) {
    for (std::size_t i = 0; i < depth; ++i) layers.emplace_back(i == 0 ? in : hidden, hidden, rng);
}

Var GcnStack::forward(Tape& t, const SparseMatrix& a, Var x) {
    for (auto& l : layers) x = num::relu(num::add_row(num::spmm(a, num::matmul(x, t.param(l.weight))), t.param(l.bias)));
    return x;
}

Var GcnStack::forward(Tape& t, const SparseMatrix& a, Var weights, Var x) {
    for (auto& l : layers)
        x = num::relu(num::add_row(num::spmm(a, weights, num::matmul(x, t.param(l.weight))), t.param(l.bias)));
    return x;
}

std::vector<Parameter*> GcnStack::parameters() {
    std::vector<Parameter*> p;
    for (auto& l : layers) append(p, l);
    return p;
}

Teacher::Teacher(const Architecture& arch, num::Rng& rng)
    : gcn(arch.in_dim, arch.hidden, arch.gcn_layers, rng), head(arch.hidden, arch.classes, rng) {
    arch.validate();
}

std::vector<Parameter*> Teacher::parameters() {
    auto p = gcn.parameters();
    append(p, head);
    return p;
}

MaskMlp::MaskMlp(std::size_t node_dim, std::size_t hidden, std::size_t depth, num::Rng& rng)
    : mlp(2 * node_dim, hidden, 1, depth, rng) {}

GraphMaskStudent::GraphMaskStudent(const Architecture& arch, num::Rng& rng)
    : gcn(arch.in_dim, arch.hidden, arch.gcn_layers, rng),
      head(arch.hidden, arch.classes, rng),
      mask(arch.mask_in_dim, arch.hidden, arch.mlp_layers, rng) {}

std::vector<Parameter*> GraphMaskStudent::parameters() {
    auto p = gcn.parameters();
    append(p, head);
    append(p, mask.parameters());
    return p;
}

NodeEdgeWeightStudent::NodeEdgeWeightStudent(const Architecture& arch, num::Rng& rng)
    : gcn(arch.in_dim, arch.hidden, arch.gcn_layers, rng),
      head(arch.hidden, arch.classes, rng),
      mask(arch.mask_in_dim, arch.hidden, arch.mlp_layers, rng) {}

std::vector<Parameter*> NodeEdgeWeightStudent::parameters() {
    auto p = gcn.parameters();
    append(p, head);
    append(p, mask.parameters());
    return p;
}

FeatureMlpStudent::FeatureMlpStudent(const Architecture& arch, num::Rng& rng)
    : mlp(arch.in_dim, arch.hidden, arch.classes, arch.mlp_layers, rng) {}

TeacherOutput teacher_forward(Tape& t, Teacher& m, const GraphInput& in) {
    check_input(in, m.gcn.layers.front().in_features(), "teacher_forward");
    const Var h = m.gcn.forward(t, in.adj_norm, t.constant(in.features));
    return {m.head.forward(t, maybe_pool(in, h)), h};
}

Var mask_logits(Tape& t, MaskMlp& m, Var h, const GraphInput& in, Mode mode) {
    if (2 * h.cols() != m.mlp.in_features())
        throw ShapeError("mask_logits: node vectors of width " + std::to_string(h.cols()) +
                         " for a mask MLP expecting " + std::to_string(m.mlp.in_features() / 2));
    if (h.rows() != in.num_nodes()) throw ShapeError("mask_logits: one node vector per node required");
    const Var pairs = num::concat_cols(num::gather_rows(h, in.rows), num::gather_rows(h, in.cols));
    return m.mlp.forward(t, pairs, mode);
}

Var compute_mask(Tape& t, MaskMlp& m, Var h, const GraphInput& in, Mode mode) {
    return num::sigmoid(mask_logits(t, m, h, in, mode));
}

Var graph_student_forward_with_mask(Tape& t, GraphMaskStudent& m, const GraphInput& in, Var mask) {
    check_input(in, m.gcn.layers.front().in_features(), "graph_student_forward");
    if (mask.rows() != in.adj_norm.nnz() || mask.cols() != 1) throw ShapeError("graph_student_forward: mask must be nnz×1");
    const Var weights = num::hadamard(t.constant(in.adj_norm.values_tensor()), mask);
    const Var h = m.gcn.forward(t, in.adj_norm, weights, t.constant(in.features));
    return m.head.forward(t, maybe_pool(in, h));
}

StudentOutput graph_student_forward(Tape& t, GraphMaskStudent& m, const GraphInput& in, Var mask_input,
                                    Mode mode) {
    const Var mask = compute_mask(t, m.mask, mask_input, in, mode);
    return {graph_student_forward_with_mask(t, m, in, mask), mask};
}

StudentOutput node_student_forward(Tape& t, NodeEdgeWeightStudent& m, const GraphInput& in, Var mask_input,
                                   Mode mode) {
    check_input(in, m.gcn.layers.front().in_features(), "node_student_forward");
    const Var a_hat = num::segment_softmax(in.adj_norm, mask_logits(t, m.mask, mask_input, in, mode));
    const Var weights = num::hadamard(t.constant(in.degree_scale), a_hat);
    const Var h = m.gcn.forward(t, in.adj_norm, weights, t.constant(in.features));
    return {m.head.forward(t, maybe_pool(in, h)), a_hat};
}

Var feature_student_forward(Tape& t, FeatureMlpStudent& m, const GraphInput& in, Mode mode) {
    check_input(in, m.mlp.in_features(), "feature_student_forward");
    return maybe_pool(in, m.mlp.forward(t, t.constant(in.features), mode));
}

} // namespace scale::models
