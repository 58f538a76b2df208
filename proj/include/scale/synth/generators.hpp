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
#include "scale/numkit/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace scale::synth {

enum class MotifKind { House, Cycle6, Grid3x3, Cycle5 };

/// Planted substructure: node count, role label per node, and internal undirected edges.
/// Node 0 is the attachment point of the bridge edge.
struct MotifSpec {
    MotifKind kind;
    std::vector<int> roles;
    std::vector<std::pair<std::size_t, std::size_t>> edges;

    std::size_t size() const { return roles.size(); }
};

MotifSpec motif(MotifKind kind);

struct GenConfig {
    std::uint64_t seed = 0;
    std::size_t base_nodes = 300;
    std::size_t motif_count = 80;
    std::size_t attach_m = 5;
    /// Random negative edges added, as a fraction of the planted motif-edge count.
    double perturbation_ratio = 0.1;
    std::size_t feature_dim = 10;
    /// Expected total node count; generation fails when the arithmetic disagrees. 0 skips the check.
    std::size_t expected_nodes = 0;
    /// BA-Community only: mean shift between the two communities' Gaussian features.
    double community_offset = 1.0;
    /// BA-2motifs only: nodes of each BA base graph.
    std::size_t graph_base_nodes = 20;

    /// Throws ContractError on non-positive counts or a ratio outside [0, 1).
    void validate() const;
};

/// Barabási–Albert graph: a clique on the first m nodes, then each new node attaches to m
/// distinct existing nodes with probability proportional to degree.
graph::Graph gen_ba(std::size_t n, std::size_t m, num::Rng& rng);

graph::Dataset gen_ba_shapes(const GenConfig& cfg);
graph::Dataset gen_ba_community(const GenConfig& cfg);
graph::Dataset gen_tree_motif(MotifKind kind, const GenConfig& cfg);
graph::Dataset gen_ba2motifs(const GenConfig& cfg);

/// Known dataset names: ba-shapes, ba-community, tree-cycle, tree-grid, ba-2motifs.
const std::vector<std::string>& dataset_names();
bool is_known_dataset(const std::string& name);
/// Default construction parameters for a named benchmark at the given seed.
GenConfig default_config(const std::string& name, std::uint64_t seed);
graph::Dataset generate(const std::string& name, const GenConfig& cfg);
graph::Dataset generate(const std::string& name, std::uint64_t seed);

/// Ground-truth motif size of a named benchmark (house 5, cycle 6, grid 9).
std::size_t motif_size(const std::string& name);

} // namespace scale::synth
