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

#include "scale/errors.hpp"
#include "scale/graph/dataset_io.hpp"
#include "scale/synth/generators.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace scale;
using namespace scale::synth;
using graph::Dataset;
using graph::Graph;

namespace {

std::map<int, std::size_t> label_histogram(const Graph& g) {
    std::map<int, std::size_t> h;
    for (int l : *g.node_labels()) ++h[l];
    return h;
}

// Each undirected edge should appear as exactly two arcs with matching gt bits.
void check_symmetric(const Graph& g) {
    std::map<graph::UndirectedEdge, std::vector<bool>> seen;
    for (std::size_t i = 0; i < g.num_edges(); ++i) {
        const auto e = g.edges()[i];
        REQUIRE(e.src != e.dst);
        seen[graph::undirected(e)].push_back((*g.gt_edge_mask())[i]);
    }
    for (const auto& [_, bits] : seen) {
        REQUIRE(bits.size() == 2);
        CHECK(bits[0] == bits[1]);
    }
}

std::size_t undirected_gt(const Graph& g) { return g.gt_undirected_edges().size(); }

} // namespace

TEST_CASE("BA edge count matches clique plus m per added node") {
    for (auto [n, m] : {std::pair<std::size_t, std::size_t>{20, 1}, {300, 5}, {50, 3}}) {
        num::Rng rng = num::make_rng(3, "ba");
        const Graph g = gen_ba(n, m, rng);
        CHECK(g.num_edges() / 2 == m * (m - 1) / 2 + (n - m) * m);
    }
    num::Rng rng(1);
    CHECK_THROWS_AS(gen_ba(3, 3, rng), ContractError);
}

TEST_CASE("motif specs") {
    CHECK(motif(MotifKind::House).size() == 5);
    CHECK(motif(MotifKind::House).edges.size() == 6);
    CHECK(motif(MotifKind::Cycle6).edges.size() == 6);
    CHECK(motif(MotifKind::Cycle5).edges.size() == 5);
    CHECK(motif(MotifKind::Grid3x3).edges.size() == 12);
    // Node 0 of the house is a middle node.
    CHECK(motif(MotifKind::House).roles[0] == 2);
}

TEST_CASE("ba-shapes node count, labels and gt edges") {
    const Dataset ds = generate("ba-shapes", 0);
    const Graph& g = ds.graphs[0];
    CHECK(g.num_nodes() == 700);
    CHECK(ds.num_classes == 4);
    const auto h = label_histogram(g);
    CHECK(h.at(0) == 300);
    CHECK(h.at(1) == 80);
    CHECK(h.at(2) == 160);
    CHECK(h.at(3) == 160);
    check_symmetric(g);
    CHECK(undirected_gt(g) == 80 * 6);
    // BA base + 80 bridges + 48 perturbation edges.
    CHECK(g.num_edges() / 2 == (10 + 295 * 5) + 480 + 80 + 48);
    const auto comp = graph::motif_components(g);
    std::map<long, std::size_t> sizes;
    for (long c : comp)
        if (c >= 0) ++sizes[c];
    CHECK(sizes.size() == 80);
    for (const auto& [_, s] : sizes) CHECK(s == 5);
    CHECK(g.feature_dim() == 10);
}

TEST_CASE("ba-community doubles the graph and shifts labels") {
    const Dataset ds = generate("ba-community", 0);
    const Graph& g = ds.graphs[0];
    CHECK(g.num_nodes() == 1400);
    CHECK(ds.num_classes == 8);
    const auto h = label_histogram(g);
    for (int base : {0, 4}) {
        CHECK(h.at(base + 0) == 300);
        CHECK(h.at(base + 1) == 80);
        CHECK(h.at(base + 2) == 160);
        CHECK(h.at(base + 3) == 160);
    }
    check_symmetric(g);
    CHECK(undirected_gt(g) == 960);
    std::size_t cross = 0;
    for (const auto& e : g.edges())
        if ((e.src < 700) != (e.dst < 700)) ++cross;
    CHECK(cross / 2 == 96);
}

TEST_CASE("tree-cycle and tree-grid sizes") {
    const Dataset cyc = generate("tree-cycle", 0);
    CHECK(cyc.graphs[0].num_nodes() == 871);
    CHECK(undirected_gt(cyc.graphs[0]) == 60 * 6);
    check_symmetric(cyc.graphs[0]);
    const Dataset grid = generate("tree-grid", 0);
    CHECK(grid.graphs[0].num_nodes() == 1231);
    CHECK(undirected_gt(grid.graphs[0]) == 80 * 12);
    CHECK(label_histogram(grid.graphs[0]).at(1) == 720);
}

TEST_CASE("expected node count mismatch is reported") {
    GenConfig cfg = default_config("tree-grid", 0);
    cfg.base_nodes = 255;
    CHECK_THROWS_AS(generate("tree-grid", cfg), ContractError);
}

TEST_CASE("ba-2motifs class balance and per-graph structure") {
    const Dataset ds = generate("ba-2motifs", 0);
    CHECK(ds.graphs.size() == 1000);
    CHECK(ds.total_nodes() == 25000);
    std::size_t houses = 0;
    std::size_t edges = 0;
    for (const auto& g : ds.graphs) {
        CHECK(g.num_nodes() == 25);
        const std::size_t gt = undirected_gt(g);
        if (*g.graph_label() == 0) {
            ++houses;
            CHECK(gt == 6);
        } else {
            CHECK(gt == 5);
        }
        edges += g.num_edges();
    }
    CHECK(houses == 500);
    // 19 base edges + motif + bridge, both arcs.
    CHECK(edges == 2 * (500 * (19 + 6 + 1) + 500 * (19 + 5 + 1)));
    CHECK(ds.splits.train.size() == 800);
    CHECK(ds.splits.val.size() == 100);
    CHECK(ds.splits.test.size() == 100);
}

TEST_CASE("generation is deterministic in the seed") {
    for (const auto& name : dataset_names()) {
        if (name == "ba-2motifs") continue;
        const Dataset a = generate(name, 11), b = generate(name, 11), c = generate(name, 12);
        CHECK(a == b);
        CHECK_FALSE(a == c);
    }
    CHECK(graph::to_json(generate("ba-2motifs", 5)) == graph::to_json(generate("ba-2motifs", 5)));
}

TEST_CASE("generated datasets survive a JSON round trip") {
    const Dataset ds = generate("ba-community", 2);
    CHECK(graph::from_json(graph::to_json(ds)) == ds);
}

TEST_CASE("registry") {
    CHECK(is_known_dataset("tree-grid"));
    CHECK_FALSE(is_known_dataset("mutag"));
    CHECK_THROWS_AS(generate("nope", 0), ContractError);
    CHECK(motif_size("ba-shapes") == 5);
    CHECK(motif_size("tree-cycle") == 6);
    CHECK(motif_size("tree-grid") == 9);
    GenConfig bad;
    bad.perturbation_ratio = 1.5;
    CHECK_THROWS_AS(bad.validate(), ContractError);
}
