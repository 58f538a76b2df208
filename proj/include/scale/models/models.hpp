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

#include "scale/graph/graph.hpp"
#include "scale/numkit/layers.hpp"
#include "scale/numkit/tape.hpp"

#include <optional>
#include <string>
#include <vector>

namespace scale::models {

using num::Mode;
using num::Parameter;
using num::SparseMatrix;
using num::Tape;
using num::Tensor;
using num::Var;

/// Everything a forward pass needs about one (possibly merged) graph.
struct GraphInput {
    /// Symmetric-normalized adjacency with self-loops. Its sparsity pattern is the edge
    /// support shared by masks and learned edge weights.
    SparseMatrix adj_norm;
    /// Endpoints of each stored entry: entry k is the arc rows[k] -> cols[k].
    std::vector<std::size_t> rows;
    std::vector<std::size_t> cols;
    /// sqrt(deg_src / deg_dst) per stored entry (deg counts stored entries of the row).
    /// The node student propagates with Â ⊙ this, i.e. D^{1/2} Â D^{-1/2}, which equals
    /// adj_norm when Â is uniform over each row.
    Tensor degree_scale;
    Tensor features;
    /// graphs×nodes mean-pooling matrix; empty (0×0) for node tasks.
    SparseMatrix pool;

    std::size_t num_nodes() const { return features.rows(); }
    bool pooled() const { return pool.rows() > 0; }
};

GraphInput make_node_input(const graph::Graph& g);
/// Graph-task input over a disjoint union; one pooled output row per member graph.
GraphInput make_graph_input(const graph::GraphUnion& u);

struct Architecture {
    graph::Task task = graph::Task::NodeClassification;
    std::size_t in_dim = 0;
    std::size_t hidden = 64;
    std::size_t classes = 2;
    std::size_t gcn_layers = 3;
    std::size_t mlp_layers = 3;
    /// Width of the per-node vectors the mask MLP consumes (hidden for teacher
    /// embeddings, in_dim for raw features).
    std::size_t mask_in_dim = 64;

    /// Throws ContractError on zero widths or depths.
    void validate() const;
    bool operator==(const Architecture&) const = default;
};

/// Hidden widths of an MLP with `layers` linear layers: hidden, hidden/2, ... (min 1).
std::vector<std::size_t> mlp_widths(std::size_t hidden, std::size_t layers);

/// Linear layers with BatchNorm + ReLU after every hidden layer.
struct Mlp {
    std::vector<num::Linear> layers;
    std::vector<num::BatchNorm> norms;

    Mlp() = default;
    Mlp(std::size_t in, std::size_t hidden, std::size_t out, std::size_t depth, num::Rng& rng);

    Var forward(Tape& t, Var x, Mode mode);
    std::vector<Parameter*> parameters();
    std::size_t in_features() const { return layers.front().in_features(); }
};

/// Stack of GCN layers relu(A·H·W + b).
struct GcnStack {
    std::vector<num::Linear> layers;

    GcnStack() = default;
    GcnStack(std::size_t in, std::size_t hidden, std::size_t depth, num::Rng& rng);

    /// Propagation with a fixed matrix.
    Var forward(Tape& t, const SparseMatrix& a, Var x);
    /// Propagation with pattern `a` carrying the nnz×1 values `weights`.
    Var forward(Tape& t, const SparseMatrix& a, Var weights, Var x);
    std::vector<Parameter*> parameters();
};

struct Teacher {
    GcnStack gcn;
    num::Linear head;

    Teacher() = default;
    Teacher(const Architecture& arch, num::Rng& rng);
    std::vector<Parameter*> parameters();
};

/// Per-edge scores from [h_src ; h_dst]; the output layer has width 1.
struct MaskMlp {
    Mlp mlp;

    MaskMlp() = default;
    MaskMlp(std::size_t node_dim, std::size_t hidden, std::size_t depth, num::Rng& rng);
    std::vector<Parameter*> parameters() { return mlp.parameters(); }
};

struct GraphMaskStudent {
    GcnStack gcn;
    num::Linear head;
    MaskMlp mask;

    GraphMaskStudent() = default;
    GraphMaskStudent(const Architecture& arch, num::Rng& rng);
    std::vector<Parameter*> parameters();
};

struct NodeEdgeWeightStudent {
    GcnStack gcn;
    num::Linear head;
    MaskMlp mask;

    NodeEdgeWeightStudent() = default;
    NodeEdgeWeightStudent(const Architecture& arch, num::Rng& rng);
    std::vector<Parameter*> parameters();
};

struct FeatureMlpStudent {
    Mlp mlp;

    FeatureMlpStudent() = default;
    FeatureMlpStudent(const Architecture& arch, num::Rng& rng);
    std::vector<Parameter*> parameters() { return mlp.parameters(); }
};

struct TeacherOutput {
    Var logits;     // per node, or per graph when pooled
    Var embeddings; // last GCN layer output, per node
};

TeacherOutput teacher_forward(Tape& t, Teacher& m, const GraphInput& in);

/// Pre-sigmoid mask scores, one per stored adjacency entry (nnz×1).
Var mask_logits(Tape& t, MaskMlp& m, Var h, const GraphInput& in, Mode mode);
/// sigmoid(mask_logits): one value in (0,1) per arc of the support.
Var compute_mask(Tape& t, MaskMlp& m, Var h, const GraphInput& in, Mode mode);

struct StudentOutput {
    Var logits;
    Var edge_values; // M for the graph student, Â for the node student (nnz×1)
};

/// Propagates with A ⊙ M. `mask_input` holds per-node vectors fed to the mask MLP.
StudentOutput graph_student_forward(Tape& t, GraphMaskStudent& m, const GraphInput& in, Var mask_input,
                                    Mode mode);
/// Same, with a caller-supplied mask (nnz×1), bypassing the mask MLP.
Var graph_student_forward_with_mask(Tape& t, GraphMaskStudent& m, const GraphInput& in, Var mask);
/// Propagates every layer with diag(sqrt(deg))·Â, Â the row-softmaxed learned adjacency
/// (deg counts the self-loop).
/// Returns Â itself (row-stochastic) as edge_values.
StudentOutput node_student_forward(Tape& t, NodeEdgeWeightStudent& m, const GraphInput& in, Var mask_input,
                                   Mode mode);
Var feature_student_forward(Tape& t, FeatureMlpStudent& m, const GraphInput& in, Mode mode);

/// Teacher and whichever students were trained alongside it.
struct ModelBundle {
    Architecture arch;
    Teacher teacher;
    std::optional<GraphMaskStudent> graph_student;
    std::optional<NodeEdgeWeightStudent> node_student;
    std::optional<FeatureMlpStudent> feature_student;
    /// Serialized run configuration and its hash, carried through checkpoints verbatim.
    std::string config_json = "{}";
    std::uint64_t config_hash = 0;
};

/// Writes `<path>` (JSON manifest) and `<path>.bin` (little-endian f64 parameters and
/// batch-norm statistics). Loading reproduces every value bit for bit.
void save_checkpoint(ModelBundle& b, const std::string& path);
ModelBundle load_checkpoint(const std::string& path);

} // namespace scale::models
