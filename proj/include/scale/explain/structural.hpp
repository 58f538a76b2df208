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
#include "scale/models/models.hpp"
#include "scale/numkit/sparse.hpp"

#include <optional>
#include <string>
#include <vector>

namespace scale::explain {

using num::SparseMatrix;

struct RwrResult {
    std::vector<double> scores;
    std::size_t iterations = 0;
    double residual = 0.0; // L1 change of the last iteration
    bool converged = false;
};

/// Random walk with restart: r <- (1-d) r0 + d·P·r until ||Δr||_1 < tol or T iterations.
/// P must be column-stochastic on its support (ContractError otherwise, tolerance 1e-8)
/// and r0 a distribution. The result is renormalized to sum to 1.
RwrResult rwr(const SparseMatrix& transition, const std::vector<double>& r0, double d, std::size_t max_iter = 1000,
              double tol = 1e-10);

/// Column-stochastic transition from Â: transpose, drop self-loops of nodes that have
/// another edge, then divide each column by its sum.
SparseMatrix column_transition(const SparseMatrix& a_hat);

struct EdgeScore {
    std::size_t src;
    std::size_t dst;
    double score;
    bool operator==(const EdgeScore&) const = default;
};

struct StructuralExplanation {
    enum class Kind { Node, Graph } kind = Kind::Node;
    std::size_t target = 0;
    /// Node relevance (P_V) for node explanations; empty for graph explanations.
    std::vector<double> node_scores;
    /// P_E arcs (src -> dst, self-loops excluded) for node explanations; undirected
    /// edges (src < dst) scored by the mean of both arc masks for graph explanations.
    std::vector<EdgeScore> edge_scores;
    /// Top-k nodes by score, the target first.
    std::vector<std::size_t> selected_nodes;
    std::vector<graph::UndirectedEdge> selected_edges;
    std::optional<double> threshold;
    std::size_t rwr_iterations = 0;
};

struct NodeExplainOptions {
    double d = 0.55;
    std::size_t max_iter = 1000;
    double tol = 1e-10;
    std::size_t k = 5;
    /// Candidates are restricted to this many hops around the target (the computation
    /// graph of an L-layer model). 0 disables the restriction.
    std::size_t hops = 0;
};

/// Alg. 2 over a learned row-stochastic adjacency (support = arcs of g plus self-loops).
/// Ties in the top-k break by ascending node id. Selected edges are the edges of g whose
/// endpoints were both selected.
StructuralExplanation explain_node(const graph::Graph& g, const SparseMatrix& a_hat, std::size_t target,
                                   const NodeExplainOptions& opt);

/// Undirected edge scores of g from per-arc mask values stored on a matrix whose pattern
/// covers g's arcs. Self-loops are skipped; a missing reverse arc counts as its partner.
std::vector<EdgeScore> undirected_edge_scores(const graph::Graph& g, const SparseMatrix& mask);

/// Selects undirected edges with score > threshold.
StructuralExplanation explain_graph(std::size_t graph_id, const graph::Graph& g, const SparseMatrix& mask,
                                    double threshold);

/// Whether a structural student reads teacher embeddings or raw features.
enum class MaskSource { Embeddings, RawFeatures };

/// Learned row-stochastic Â of the node student on `in` (inference mode; no model state
/// changes). Throws ContractError when the bundle has no node student.
SparseMatrix learned_adjacency(models::ModelBundle& b, const models::GraphInput& in, MaskSource src);
/// Graph-student mask M on `in`, on the pattern of in.adj_norm.
SparseMatrix learned_mask(models::ModelBundle& b, const models::GraphInput& in, MaskSource src);

/// Splits a union-level matrix into the member graphs' local matrices.
std::vector<SparseMatrix> split_by_graph(const SparseMatrix& m, const std::vector<std::size_t>& node_offset);

std::string to_json(const StructuralExplanation& e, std::size_t max_scores = 0);
/// Inverse of to_json (node scores come back dense, zero where omitted). ParseError on
/// malformed input.
StructuralExplanation explanation_from_json(const std::string& text);
/// DOT digraph of the scored edges; pen width 5·score/max, selected edges drawn red.
std::string to_dot(const StructuralExplanation& e);

} // namespace scale::explain
