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
#include "scale/numkit/sparse.hpp"
#include "scale/numkit/tensor.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace scale::graph {

struct Edge {
    std::size_t src;
    std::size_t dst;
    bool operator==(const Edge&) const = default;
    auto operator<=>(const Edge&) const = default;
};

/// Unordered node pair with first <= second; the unit explanations are scored on.
using UndirectedEdge = std::pair<std::size_t, std::size_t>;

inline UndirectedEdge undirected(Edge e) {
    return e.src < e.dst ? UndirectedEdge{e.src, e.dst} : UndirectedEdge{e.dst, e.src};
}

/// Attributed graph. Undirected data stores both arcs. Immutable once constructed.
class Graph {
public:
    struct Init {
        std::size_t num_nodes = 0;
        std::vector<Edge> edges;
        num::Tensor features;
        std::optional<std::vector<int>> node_labels;
        std::optional<int> graph_label;
        std::optional<std::vector<bool>> gt_node_mask;
        std::optional<std::vector<bool>> gt_edge_mask;
    };

    /// Validates endpoints, duplicate arcs, feature rows and mask lengths; throws
    /// ContractError on violation.
    explicit Graph(Init init);

    std::size_t num_nodes() const noexcept { return num_nodes_; }
    std::size_t num_edges() const noexcept { return edges_.size(); }
    std::size_t feature_dim() const noexcept { return features_.cols(); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const num::Tensor& features() const noexcept { return features_; }
    const std::optional<std::vector<int>>& node_labels() const noexcept { return node_labels_; }
    const std::optional<int>& graph_label() const noexcept { return graph_label_; }
    const std::optional<std::vector<bool>>& gt_node_mask() const noexcept { return gt_node_mask_; }
    const std::optional<std::vector<bool>>& gt_edge_mask() const noexcept { return gt_edge_mask_; }

    /// Out-neighbours per node (sorted, self excluded).
    std::vector<std::vector<std::size_t>> adjacency_lists() const;
    /// Undirected ground-truth edges (deduplicated); empty without a mask.
    std::vector<UndirectedEdge> gt_undirected_edges() const;

    bool operator==(const Graph&) const = default;

private:
    std::size_t num_nodes_;
    std::vector<Edge> edges_;
    num::Tensor features_;
    std::optional<std::vector<int>> node_labels_;
    std::optional<int> graph_label_;
    std::optional<std::vector<bool>> gt_node_mask_;
    std::optional<std::vector<bool>> gt_edge_mask_;
};

enum class Task { NodeClassification, GraphClassification };

std::string to_string(Task t);
Task task_from_string(const std::string& s);

struct Splits {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
    bool operator==(const Splits&) const = default;
};

/// 8:1:1 random split of [0, n): |train| = round(0.8 n), |val| = round(0.1 n), rest test.
Splits make_splits(std::size_t n, num::Rng& rng);

struct Dataset {
    std::string name;
    Task task = Task::NodeClassification;
    std::size_t num_classes = 0;
    std::vector<Graph> graphs;
    /// Node indices of graphs[0] for node tasks; graph indices for graph tasks.
    Splits splits;

    /// Throws ContractError when splits overlap, index out of range, or labels are
    /// missing for the task.
    void validate() const;
    std::size_t total_nodes() const;
    bool operator==(const Dataset&) const = default;
};

/// Binary adjacency: A[src][dst] = 1 for every arc, plus the diagonal when requested.
num::SparseMatrix build_adjacency(const Graph& g, bool add_self_loops);

/// D^{-1/2} A D^{-1/2} with D the row-sum degree. Requires a square matrix without
/// zero-degree rows (DomainError otherwise).
struct NormalizedAdjacency {
    num::SparseMatrix matrix;
};
NormalizedAdjacency symmetric_normalize(const num::SparseMatrix& a);

/// Nodes within k hops of `center` (BFS over arcs), sorted ascending.
std::vector<std::size_t> khop_neighborhood(const Graph& g, std::size_t center, std::size_t k);

/// Motif membership derived from ground truth: connected components of the subgraph of
/// gt-positive edges. Entry is the component id, or -1 for nodes outside any motif.
std::vector<long> motif_components(const Graph& g);

/// Disjoint union of the selected graphs, in the given order.
struct GraphUnion {
    Graph merged;
    std::vector<std::size_t> node_offset; // size graphs+1
    std::vector<std::size_t> edge_offset; // size graphs+1
    std::vector<std::size_t> graph_ids;
};
GraphUnion disjoint_union(const Dataset& ds, const std::vector<std::size_t>& graph_ids);

} // namespace scale::graph
