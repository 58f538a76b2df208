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

#include "fd_check.hpp"

#include "scale/errors.hpp"
#include "scale/models/models.hpp"
#include "scale/synth/generators.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace scale;
using namespace scale::models;
using graph::Graph;

namespace {

Graph small_graph(std::size_t n, std::size_t feat, std::uint64_t seed) {
    num::Rng rng(seed);
    Graph::Init init;
    init.num_nodes = n;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        init.edges.push_back({i, i + 1});
        init.edges.push_back({i + 1, i});
    }
    if (n > 3) {
        init.edges.push_back({0, n - 1});
        init.edges.push_back({n - 1, 0});
    }
    init.features = Tensor(n, feat);
    for (double& v : init.features.data()) v = num::standard_normal(rng);
    return Graph(std::move(init));
}

Architecture small_arch(std::size_t feat, graph::Task task = graph::Task::NodeClassification) {
    Architecture a;
    a.task = task;
    a.in_dim = feat;
    a.hidden = 8;
    a.classes = 3;
    a.gcn_layers = 2;
    a.mlp_layers = 3;
    a.mask_in_dim = 8;
    return a;
}

void zero_all(std::vector<Parameter*> ps) {
    for (auto* p : ps) p->value.fill(0.0);
}

Tensor eval(const std::function<Var(Tape&)>& f) {
    Tape t;
    return f(t).value();
}

} // namespace

TEST_CASE("teacher with zero weights gives uniform class probabilities") {
    const auto g = small_graph(5, 4, 1);
    const auto in = make_node_input(g);
    num::Rng rng(2);
    Teacher m(small_arch(4), rng);
    zero_all(m.parameters());
    const Tensor p = num::rowwise_softmax(eval([&](Tape& t) { return teacher_forward(t, m, in).logits; }));
    for (double v : p.data()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("single-node one-layer teacher matches a hand-rolled forward") {
    Graph::Init init;
    init.num_nodes = 1;
    init.features = Tensor::from_rows({{0.5, -2.0}});
    const auto in = make_node_input(Graph(init));
    Architecture a = small_arch(2);
    a.hidden = 2;
    a.gcn_layers = 1;
    a.classes = 2;
    num::Rng rng(3);
    Teacher m(a, rng);
    m.gcn.layers[0].weight.value = Tensor::from_rows({{1.0, -1.0}, {0.25, 0.5}});
    m.gcn.layers[0].bias.value = Tensor::from_rows({{0.1, 0.2}});
    m.head.weight.value = Tensor::from_rows({{2.0, 0.0}, {1.0, 3.0}});
    m.head.bias.value = Tensor::from_rows({{0.0, -1.0}});
    // Self-loop only: normalized weight 1. Pre-activation (0.5 - 0.5 + 0.1, -0.5 - 1 + 0.2).
    const double h0 = std::max(0.0, 0.5 * 1.0 + -2.0 * 0.25 + 0.1);
    const double h1 = std::max(0.0, 0.5 * -1.0 + -2.0 * 0.5 + 0.2);
    const Tensor z = eval([&](Tape& t) { return teacher_forward(t, m, in).logits; });
    CHECK(z(0, 0) == doctest::Approx(h0 * 2.0 + h1 * 1.0).epsilon(1e-15));
    CHECK(z(0, 1) == doctest::Approx(h0 * 0.0 + h1 * 3.0 - 1.0).epsilon(1e-15));
}

TEST_CASE("graph task: identical member graphs give identical pooled logits") {
    graph::Dataset ds;
    ds.task = graph::Task::GraphClassification;
    ds.num_classes = 3;
    for (int i = 0; i < 2; ++i) {
        Graph g = small_graph(6, 4, 9);
        Graph::Init init{g.num_nodes(), g.edges(), g.features(), std::nullopt, 0, std::nullopt, std::nullopt};
        ds.graphs.emplace_back(std::move(init));
    }
    ds.splits = {{0, 1}, {}, {}};
    const auto in = make_graph_input(graph::disjoint_union(ds, {0, 1}));
    num::Rng rng(4);
    Teacher m(small_arch(4, graph::Task::GraphClassification), rng);
    const Tensor z = eval([&](Tape& t) { return teacher_forward(t, m, in).logits; });
    REQUIRE(z.rows() == 2);
    for (std::size_t c = 0; c < 3; ++c) CHECK(z(0, c) == z(1, c));
}

TEST_CASE("mask MLP basics") {
    const auto g = small_graph(6, 4, 5);
    const auto in = make_node_input(g);
    num::Rng rng(6);
    MaskMlp m(4, 8, 3, rng);

    SUBCASE("zero weights give 0.5 everywhere") {
        zero_all(m.parameters());
        const Tensor v = eval([&](Tape& t) { return compute_mask(t, m, t.constant(in.features), in, Mode::Train); });
        CHECK(v.rows() == in.adj_norm.nnz());
        for (double x : v.data()) CHECK(x == 0.5);
    }
    SUBCASE("identical node vectors give identical masks") {
        const Tensor h = Tensor::ones(6, 4);
        const Tensor v = eval([&](Tape& t) { return compute_mask(t, m, t.constant(h), in, Mode::Infer); });
        for (double x : v.data()) CHECK(x == v[0]);
    }
    SUBCASE("a one-layer mask MLP is a closed-form sigmoid") {
        MaskMlp lin(2, 8, 1, rng);
        lin.mlp.layers[0].weight.value = Tensor::from_rows({{1.0}, {-2.0}, {0.5}, {3.0}});
        lin.mlp.layers[0].bias.value = Tensor::from_rows({{0.25}});
        Graph::Init init;
        init.num_nodes = 3;
        init.edges = {{0, 1}, {1, 2}};
        init.features = Tensor::from_rows({{1.0, 0.0}, {0.0, 1.0}, {2.0, -1.0}});
        const auto tiny = make_node_input(Graph(init));
        const Tensor v = eval([&](Tape& t) { return compute_mask(t, lin, t.constant(tiny.features), tiny, Mode::Infer); });
        for (std::size_t k = 0; k < tiny.rows.size(); ++k) {
            const auto& x = tiny.features;
            const std::size_t i = tiny.rows[k], j = tiny.cols[k];
            const double s = x(i, 0) * 1.0 + x(i, 1) * -2.0 + x(j, 0) * 0.5 + x(j, 1) * 3.0 + 0.25;
            CHECK(v[k] == doctest::Approx(1.0 / (1.0 + std::exp(-s))).epsilon(1e-14));
        }
    }
    SUBCASE("width mismatch is a shape error") {
        Tape t;
        CHECK_THROWS_AS(compute_mask(t, m, t.constant(Tensor::ones(6, 3)), in, Mode::Train), ShapeError);
    }
}

TEST_CASE("graph student with an all-ones mask reproduces the teacher") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto g = small_graph(7 + seed, 4, seed);
        const auto in = make_node_input(g);
        num::Rng rng(seed + 100);
        const Architecture a = small_arch(4);
        Teacher teacher(a, rng);
        GraphMaskStudent s(a, rng);
        s.gcn = teacher.gcn;
        s.head = teacher.head;
        const Tensor zt = eval([&](Tape& t) { return teacher_forward(t, teacher, in).logits; });
        const Tensor zs = eval([&](Tape& t) {
            return graph_student_forward_with_mask(t, s, in, t.constant(Tensor::ones(in.adj_norm.nnz(), 1)));
        });
        CHECK(num::max_abs_diff(zt, zs) < 1e-10);
    }
}

TEST_CASE("graph student with an all-zero mask sees only biases") {
    const auto g = small_graph(6, 4, 1);
    const auto in = make_node_input(g);
    num::Rng rng(7);
    const Architecture a = small_arch(4);
    GraphMaskStudent s(a, rng);
    for (auto& l : s.gcn.layers) l.bias.value = Tensor::from_rows({{0.3, -0.1, 0.0, 1.0, -2.0, 0.5, 0.2, 0.0}});
    const Tensor z = eval(
        [&](Tape& t) { return graph_student_forward_with_mask(t, s, in, t.constant(Tensor::zeros(in.adj_norm.nnz(), 1))); });
    // With A ⊙ 0 every layer is relu(bias), so all nodes agree.
    for (std::size_t r = 1; r < z.rows(); ++r)
        for (std::size_t c = 0; c < z.cols(); ++c) CHECK(z(r, c) == z(0, c));
}

TEST_CASE("graph student gradients reach the mask MLP (finite differences)") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto g = small_graph(5, 3, seed);
        const auto in = make_node_input(g);
        num::Rng rng(seed + 50);
        Architecture a = small_arch(3);
        a.hidden = 4;
        a.mask_in_dim = 3;
        a.mlp_layers = 2;
        GraphMaskStudent s(a, rng);
        Tensor targets = Tensor::zeros(5, 3);
        for (std::size_t r = 0; r < 5; ++r) targets(r, (r + seed) % 3) = 1.0;
        const auto res = testing::check_gradients(s.mask.parameters(), [&](Tape& t) {
            const auto out = graph_student_forward(t, s, in, t.constant(in.features), Mode::Train);
            return num::softmax_cross_entropy(out.logits, targets);
        });
        CHECK(res.max_rel_error < 1e-4);
    }
}

TEST_CASE("node student gradients pass finite differences") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto g = small_graph(6, 3, seed + 7);
        const auto in = make_node_input(g);
        num::Rng rng(seed + 70);
        Architecture a = small_arch(3);
        a.hidden = 4;
        a.mask_in_dim = 3;
        a.mlp_layers = 2;
        NodeEdgeWeightStudent s(a, rng);
        Tensor targets = Tensor::zeros(6, 3);
        for (std::size_t r = 0; r < 6; ++r) targets(r, (r * 2 + seed) % 3) = 1.0;
        const auto res = testing::check_gradients(s.parameters(), [&](Tape& t) {
            const auto out = node_student_forward(t, s, in, t.constant(in.features), Mode::Train);
            return num::softmax_cross_entropy(out.logits, targets, 2.0);
        });
        CHECK(res.max_rel_error < 1e-4);
    }
}

TEST_CASE("node student learned adjacency") {
    SUBCASE("isolated node keeps weight 1 on its self-loop") {
        Graph::Init init;
        init.num_nodes = 3;
        init.edges = {{0, 1}, {1, 0}};
        init.features = Tensor::ones(3, 2);
        const auto in = make_node_input(Graph(init));
        num::Rng rng(1);
        Architecture a = small_arch(2);
        a.mask_in_dim = 2;
        NodeEdgeWeightStudent s(a, rng);
        const Tensor w = eval([&](Tape& t) { return node_student_forward(t, s, in, t.constant(in.features), Mode::Infer).edge_values; });
        CHECK(w[in.adj_norm.find(2, 2)] == 1.0);
    }
    SUBCASE("zero-weight mask MLP spreads 1/k over k entries") {
        const auto g = small_graph(6, 4, 2);
        const auto in = make_node_input(g);
        num::Rng rng(2);
        NodeEdgeWeightStudent s(small_arch(4), rng);
        zero_all(s.mask.parameters());
        const Tensor w =
            eval([&](Tape& t) { return node_student_forward(t, s, in, t.constant(Tensor::ones(6, 8)), Mode::Train).edge_values; });
        const auto& off = in.adj_norm.offsets();
        for (std::size_t r = 0; r < 6; ++r)
            for (std::size_t k = off[r]; k < off[r + 1]; ++k)
                CHECK(w[k] == doctest::Approx(1.0 / static_cast<double>(off[r + 1] - off[r])).epsilon(1e-15));
    }
    SUBCASE("rows are stochastic on ba-shapes") {
        const auto ds = synth::generate("ba-shapes", 0);
        const auto in = make_node_input(ds.graphs[0]);
        num::Rng rng(3);
        Architecture a = small_arch(10);
        a.hidden = 32;
        a.mask_in_dim = 32;
        a.classes = 4;
        Teacher teacher(a, rng);
        NodeEdgeWeightStudent s(a, rng);
        Tape t;
        const auto h = teacher_forward(t, teacher, in).embeddings;
        const auto out = node_student_forward(t, s, in, t.constant(h.value()), Mode::Train);
        const auto vals = out.edge_values.value().data();
        const auto sums = in.adj_norm.with_values({vals.begin(), vals.end()}).row_sums();
        double worst = 0.0;
        for (double v : sums) worst = std::max(worst, std::abs(v - 1.0));
        CHECK(worst < 1e-9);
    }
}

TEST_CASE("feature student") {
    const auto g = small_graph(6, 4, 11);
    const auto in = make_node_input(g);
    num::Rng rng(12);
    FeatureMlpStudent s(small_arch(4), rng);

    SUBCASE("permuting rows permutes logits") {
        const Tensor z = eval([&](Tape& t) { return feature_student_forward(t, s, in, Mode::Infer); });
        GraphInput perm = in;
        const std::vector<std::size_t> order{5, 4, 3, 2, 1, 0};
        perm.features = num::gather_rows(in.features, order);
        const Tensor zp = eval([&](Tape& t) { return feature_student_forward(t, s, perm, Mode::Infer); });
        for (std::size_t r = 0; r < 6; ++r)
            for (std::size_t c = 0; c < 3; ++c) CHECK(zp(r, c) == z(order[r], c));
    }
    SUBCASE("zero weights give uniform probabilities") {
        zero_all(s.parameters());
        const Tensor p = num::rowwise_softmax(eval([&](Tape& t) { return feature_student_forward(t, s, in, Mode::Train); }));
        for (double v : p.data()) CHECK(v == doctest::Approx(1.0 / 3.0));
    }
    SUBCASE("one linear layer is a plain matmul") {
        Architecture a = small_arch(4);
        a.mlp_layers = 1;
        FeatureMlpStudent lin(a, rng);
        const Tensor z = eval([&](Tape& t) { return feature_student_forward(t, lin, in, Mode::Train); });
        const Tensor ref = num::add_row(num::matmul(in.features, lin.mlp.layers[0].weight.value), lin.mlp.layers[0].bias.value);
        CHECK(num::max_abs_diff(z, ref) == 0.0);
    }
}

TEST_CASE("checkpoints round-trip bit for bit") {
    const auto g = small_graph(6, 4, 13);
    const auto in = make_node_input(g);
    num::Rng rng(14);
    ModelBundle b;
    b.arch = small_arch(4);
    b.teacher = Teacher(b.arch, rng);
    b.node_student.emplace(b.arch, rng);
    b.feature_student.emplace(b.arch, rng);
    b.config_json = R"({"dataset":"x","lambda":0.1})";
    b.config_hash = 0xdeadbeefcafeULL;
    {
        Tape t;
        feature_student_forward(t, *b.feature_student, in, Mode::Train); // populate running stats
    }
    const auto dir = std::filesystem::temp_directory_path() / "scale_test_ckpt";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "model.json").string();
    save_checkpoint(b, path);
    ModelBundle back = load_checkpoint(path);
    CHECK(back.arch == b.arch);
    CHECK(back.config_hash == b.config_hash);
    CHECK(back.config_json == b.config_json);
    CHECK_FALSE(back.graph_student.has_value());
    REQUIRE(back.node_student.has_value());
    const auto pa = b.teacher.parameters(), pb = back.teacher.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);
    CHECK(back.feature_student->mlp.norms[0].running_mean == b.feature_student->mlp.norms[0].running_mean);
    const Tensor z1 = eval([&](Tape& t) { return feature_student_forward(t, *b.feature_student, in, Mode::Infer); });
    const Tensor z2 = eval([&](Tape& t) { return feature_student_forward(t, *back.feature_student, in, Mode::Infer); });
    CHECK(z1 == z2);

    std::filesystem::resize_file(path + ".bin", 16);
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);
    CHECK_THROWS_AS(load_checkpoint((dir / "missing.json").string()), IoError);
    std::filesystem::remove_all(dir);
}
