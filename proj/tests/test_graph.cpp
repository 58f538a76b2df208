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
#include "scale/graph/graph.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace scale;
using namespace scale::graph;
using num::Tensor;

namespace {

Graph::Init path_init(std::size_t n) {
    Graph::Init init;
    init.num_nodes = n;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        init.edges.push_back({i, i + 1});
        init.edges.push_back({i + 1, i});
    }
    init.features = Tensor::ones(n, 2);
    return init;
}

Dataset tiny_dataset() {
    Graph::Init init = path_init(4);
    init.node_labels = std::vector<int>{0, 1, 1, 0};
    init.gt_node_mask = std::vector<bool>{false, true, true, false};
    init.gt_edge_mask = std::vector<bool>{false, false, true, true, false, false};
    init.features(2, 1) = 0.1;
    init.features(3, 0) = -1e-300;
    Dataset ds;
    ds.name = "tiny";
    ds.task = Task::NodeClassification;
    ds.num_classes = 2;
    ds.graphs.emplace_back(std::move(init));
    ds.splits = {{0, 1}, {2}, {3}};
    return ds;
}

std::string message_of(const std::string& text) {
    try {
        (void)from_json(text);
    } catch (const ParseError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("graph rejects out-of-range endpoints and duplicate arcs") {
    auto bad = path_init(3);
    bad.edges.push_back({0, 3});
    CHECK_THROWS_AS(Graph{bad}, ContractError);
    auto dup = path_init(3);
    dup.edges.push_back({0, 1});
    CHECK_THROWS_AS(Graph{dup}, ContractError);
    auto feat = path_init(3);
    feat.features = Tensor::ones(2, 2);
    CHECK_THROWS_AS(Graph{feat}, ContractError);
}

TEST_CASE("symmetric normalization on a two-node graph with self-loops") {
    Graph g(path_init(2));
    const auto a = symmetric_normalize(build_adjacency(g, true)).matrix.to_dense();
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c) CHECK(a(r, c) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("symmetric normalization on a star uses 1/sqrt(d_i d_j)") {
    // Hub 0 with seven leaves: hub degree 8, leaf degree 2 after self-loops.
    Graph::Init init;
    init.num_nodes = 8;
    for (std::size_t i = 1; i < 8; ++i) {
        init.edges.push_back({0, i});
        init.edges.push_back({i, 0});
    }
    init.features = Tensor::ones(8, 1);
    const auto a = symmetric_normalize(build_adjacency(Graph(init), true)).matrix.to_dense();
    CHECK(a(0, 0) == doctest::Approx(1.0 / 8.0).epsilon(1e-15));
    CHECK(a(0, 3) == doctest::Approx(1.0 / std::sqrt(16.0)).epsilon(1e-15));
    CHECK(a(3, 3) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(a(1, 2) == 0.0);
}

TEST_CASE("normalization refuses zero-degree rows") {
    Graph::Init init;
    init.num_nodes = 2;
    init.features = Tensor::ones(2, 1);
    CHECK_THROWS_AS(symmetric_normalize(build_adjacency(Graph(init), false)), DomainError);
}

TEST_CASE("adjacency stays binary when a self-loop arc already exists") {
    auto init = path_init(2);
    init.edges.push_back({0, 0});
    const auto a = build_adjacency(Graph(init), true);
    for (double v : a.values()) CHECK(v == 1.0);
    CHECK(a.nnz() == 4);
}

TEST_CASE("k-hop neighbourhood on a path") {
    Graph g(path_init(6));
    CHECK(khop_neighborhood(g, 2, 0) == std::vector<std::size_t>{2});
    CHECK(khop_neighborhood(g, 2, 1) == std::vector<std::size_t>{1, 2, 3});
    CHECK(khop_neighborhood(g, 2, 2) == std::vector<std::size_t>{0, 1, 2, 3, 4});
    CHECK(khop_neighborhood(g, 0, 10).size() == 6);
    CHECK_THROWS_AS(khop_neighborhood(g, 6, 1), ContractError);
}

TEST_CASE("motif components follow gt edges") {
    const Dataset ds = tiny_dataset();
    const auto comp = motif_components(ds.graphs[0]);
    CHECK(comp == std::vector<long>{-1, 0, 0, -1});
    CHECK(ds.graphs[0].gt_undirected_edges() == std::vector<UndirectedEdge>{{1, 2}});
}

TEST_CASE("splits are 8:1:1, disjoint, covering and sorted") {
    for (std::size_t n : {10u, 700u, 871u, 1000u, 1231u}) {
        num::Rng rng = num::make_rng(7, "data");
        const Splits s = make_splits(n, rng);
        CHECK(s.train.size() == static_cast<std::size_t>(std::llround(0.8 * n)));
        CHECK(s.val.size() == static_cast<std::size_t>(std::llround(0.1 * n)));
        CHECK(s.train.size() + s.val.size() + s.test.size() == n);
        std::vector<int> seen(n, 0);
        for (const auto* p : {&s.train, &s.val, &s.test}) {
            CHECK(std::is_sorted(p->begin(), p->end()));
            for (auto i : *p) ++seen[i];
        }
        CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    }
}

TEST_CASE("dataset validation catches overlapping splits and bad labels") {
    Dataset ds = tiny_dataset();
    CHECK_NOTHROW(ds.validate());
    ds.splits.val = {1};
    CHECK_THROWS_AS(ds.validate(), ContractError);
    ds = tiny_dataset();
    ds.num_classes = 1;
    CHECK_THROWS_AS(ds.validate(), ContractError);
}

TEST_CASE("dataset JSON round-trips bit-exactly") {
    const Dataset ds = tiny_dataset();
    const Dataset back = from_json(to_json(ds));
    CHECK(back == ds);
    CHECK(to_json(back) == to_json(ds));

    const auto path = std::filesystem::temp_directory_path() / "scale_test_graph_rt.json";
    save_dataset(ds, path);
    CHECK(load_dataset(path) == ds);
    std::filesystem::remove(path);
}

TEST_CASE("JSON syntax errors report line and column") {
    const std::string msg = message_of("{\n  \"schema_version\": 1,\n  \"name\": ]\n}");
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("column") != std::string::npos);
}

TEST_CASE("JSON schema errors name the offending field") {
    std::string text = to_json(tiny_dataset());
    const auto pos = text.find("[[0,1]");
    REQUIRE(pos != std::string::npos);
    std::string bad = text;
    bad.replace(pos, 6, "[[0,9]");
    CHECK(message_of(bad).find("$.graphs[0].edges[0]") != std::string::npos);

    bad = text;
    bad.replace(pos, 6, "[[0,\"x\"]");
    CHECK(message_of(bad).find("$.graphs[0].edges[0][1]") != std::string::npos);

    bad = text;
    bad.replace(text.find("\"num_classes\""), 13, "\"numclasses\"");
    CHECK(message_of(bad).find("$.num_classes") != std::string::npos);
}

TEST_CASE("loading a missing file is an I/O error") {
    CHECK_THROWS_AS(load_dataset("/nonexistent/dir/x.json"), IoError);
}

TEST_CASE("disjoint union offsets nodes and edges") {
    Dataset ds;
    ds.task = Task::GraphClassification;
    ds.num_classes = 2;
    for (std::size_t n : {2u, 3u}) {
        auto init = path_init(n);
        init.graph_label = static_cast<int>(n % 2);
        ds.graphs.emplace_back(std::move(init));
    }
    ds.splits = {{0}, {}, {1}};
    const GraphUnion u = disjoint_union(ds, {1, 0});
    CHECK(u.merged.num_nodes() == 5);
    CHECK(u.node_offset == std::vector<std::size_t>{0, 3, 5});
    CHECK(u.edge_offset == std::vector<std::size_t>{0, 4, 6});
    CHECK(u.merged.edges()[4] == Edge{3, 4});
}
