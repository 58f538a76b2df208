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
#include "scale/synth/generators.hpp"
#include "scale/train/trainer.hpp"

#include <doctest.h>

#include <cmath>

using namespace scale;
using namespace scale::train;
using num::Tensor;

namespace {

double scalar(const num::Var& v) { return v.value()(0, 0); }

graph::Dataset small_shapes(std::uint64_t seed) {
    synth::GenConfig c;
    c.seed = seed;
    c.base_nodes = 60;
    c.motif_count = 10;
    c.attach_m = 2;
    return synth::gen_ba_shapes(c);
}

RunConfig small_config(std::size_t epochs) {
    RunConfig c;
    c.dataset = "ba-shapes";
    c.gcn_layers = 2;
    c.hidden_size = 8;
    c.epochs = epochs;
    return c;
}

std::vector<Tensor> values(const std::vector<num::Parameter*>& ps) {
    std::vector<Tensor> out;
    for (auto* p : ps) out.push_back(p->value);
    return out;
}

} // namespace

TEST_CASE("cross entropy of zero logits over two classes is ln 2") {
    num::Tape t;
    const auto z = t.constant(Tensor::zeros(3, 2));
    CHECK(scalar(ce_loss(z, one_hot({0, 1, 1}, 2))) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    // Uniform teacher and student: soft CE is the entropy of the uniform distribution.
    CHECK(scalar(soft_ce_loss(t.constant(Tensor::zeros(2, 4)), Tensor::zeros(2, 4), 2.0)) ==
          doctest::Approx(std::log(4.0)).epsilon(1e-15));
}

TEST_CASE("lambda = 0 gives exactly the hard-label loss") {
    num::Tape t;
    const auto z = t.constant(Tensor::from_rows({{1.0, -2.0, 0.5}, {0.3, 0.3, 2.0}}));
    const Tensor zt = Tensor::from_rows({{4.0, 0.0, -1.0}, {0.0, 1.0, 0.0}});
    const Tensor y = one_hot({2, 0}, 3);
    CHECK(scalar(student_loss(z, y, zt, 0.0, 2.0)) == scalar(ce_loss(z, y)));
    const double mixed = scalar(student_loss(z, y, zt, 0.7, 2.0));
    CHECK(mixed == doctest::Approx(scalar(ce_loss(z, y)) + 0.7 * scalar(soft_ce_loss(z, zt, 2.0))).epsilon(1e-14));
}

TEST_CASE("losses are means over rows") {
    const Tensor a = Tensor::from_rows({{1.0, -2.0, 0.5}});
    const Tensor b = Tensor::from_rows({{0.3, 0.3, 2.0}});
    const Tensor ta = Tensor::from_rows({{4.0, 0.0, -1.0}});
    const Tensor tb = Tensor::from_rows({{0.0, 1.0, 0.0}});
    num::Tape t;
    const double la = scalar(soft_ce_loss(t.constant(a), ta, 2.0));
    const double lb = scalar(soft_ce_loss(t.constant(b), tb, 2.0));
    const Tensor ab = Tensor::from_rows({{1.0, -2.0, 0.5}, {0.3, 0.3, 2.0}});
    const Tensor tab = Tensor::from_rows({{4.0, 0.0, -1.0}, {0.0, 1.0, 0.0}});
    CHECK(scalar(soft_ce_loss(t.constant(ab), tab, 2.0)) == doctest::Approx((la + lb) / 2).epsilon(1e-14));
    const double ca = scalar(ce_loss(t.constant(a), one_hot({1}, 3)));
    const double cb = scalar(ce_loss(t.constant(b), one_hot({2}, 3)));
    CHECK(scalar(ce_loss(t.constant(ab), one_hot({1, 2}, 3))) == doctest::Approx((ca + cb) / 2).epsilon(1e-14));
    CHECK_THROWS_AS(soft_ce_loss(t.constant(a), ta, 0.0), DomainError);
}

TEST_CASE("soft cross entropy gradient passes finite differences") {
    num::Rng rng(2);
    num::Parameter zs(Tensor(4, 3));
    for (double& v : zs.value.data()) v = num::standard_normal(rng);
    Tensor zt(4, 3);
    for (double& v : zt.data()) v = num::standard_normal(rng) * 3.0;
    const Tensor y = one_hot({0, 2, 1, 1}, 3);
    for (double tau : {0.5, 2.0, 7.0}) {
        const auto r = testing::check_gradients({&zs}, [&](num::Tape& t) { return student_loss(t.param(zs), y, zt, 1.3, tau); });
        CHECK(r.max_rel_error < 1e-6);
        CHECK(r.checked == 12);
    }
}

TEST_CASE("students never influence the teacher") {
    const auto ds = small_shapes(1);
    auto a = small_config(6);
    auto b = a;
    b.lambda = 4.0;
    b.students = {StudentKind::FeatureMlp};
    auto ra = train::train(ds, a);
    auto rb = train::train(ds, b);
    CHECK(values(ra.models.teacher.parameters()) == values(rb.models.teacher.parameters()));
    for (std::size_t e = 0; e < ra.log.epochs.size(); ++e)
        CHECK(ra.log.epochs[e].teacher_loss == rb.log.epochs[e].teacher_loss);
}

TEST_CASE("a tiny lambda stays close to lambda = 0") {
    const auto ds = small_shapes(2);
    auto a = small_config(5);
    a.lambda = 0.0;
    auto b = a;
    b.lambda = 1e-8;
    auto ra = train::train(ds, a);
    auto rb = train::train(ds, b);
    const auto va = values(ra.models.node_student->parameters());
    const auto vb = values(rb.models.node_student->parameters());
    double worst = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i)
        for (std::size_t j = 0; j < va[i].size(); ++j) worst = std::max(worst, std::abs(va[i][j] - vb[i][j]));
    CHECK(worst < 1e-6);
}

TEST_CASE("same seed, same trajectory; different seed, different one") {
    const auto ds = small_shapes(3);
    const auto cfg = small_config(4);
    auto r1 = train::train(ds, cfg);
    auto r2 = train::train(ds, cfg);
    CHECK(r1.log.same_trajectory(r2.log));
    CHECK(values(r1.models.node_student->parameters()) == values(r2.models.node_student->parameters()));
    auto other = cfg;
    other.seed = 9;
    CHECK_FALSE(r1.log.same_trajectory(train::train(ds, other).log));

    // Threads only schedule students; results are identical.
    auto r3 = train::train(ds, cfg, TrainOptions{3});
    CHECK(r1.log.same_trajectory(r3.log));
}

TEST_CASE("run configuration JSON round-trips and rejects unknown keys") {
    auto c = preset("tree-grid");
    c.seed = 12;
    c.students = {StudentKind::GraphMask, StudentKind::FeatureMlp};
    c.stop_at_val_acc = 0.8;
    c.mask_input = MaskInput::RawFeatures;
    CHECK(config_from_json(to_json(c), RunConfig{}) == c);
    CHECK(config_hash(c) == config_hash(config_from_json(to_json(c), RunConfig{})));
    auto d = c;
    d.lambda = 0.2;
    CHECK(config_hash(c) != config_hash(d));
    CHECK(config_from_json(R"({"epochs": 7})", c).epochs == 7);
    CHECK_THROWS_AS(config_from_json(R"({"epoch": 7})", c), ParseError);
    CHECK_THROWS_AS(config_from_json("[1]", c), ParseError);
    CHECK_THROWS_AS(config_from_json("{", c), ParseError);
    CHECK_THROWS_AS(load_config("/nonexistent/cfg.json", c), IoError);
}

TEST_CASE("presets") {
    const auto shapes = preset("ba-shapes");
    CHECK(shapes.gcn_layers == 6);
    CHECK(shapes.hidden_size == 32);
    CHECK(shapes.top_k == 5);
    CHECK(preset("tree-grid").d == 0.9);
    CHECK(preset("tree-grid").top_k == 9);
    CHECK(preset("tree-cycle").top_k == 6);
    const auto motifs = preset("ba-2motifs");
    CHECK(motifs.lambda == 4.0);
    CHECK(motifs.epochs == 200);
    CHECK(motifs.gcn_layers == 4);
    for (const auto& n : synth::dataset_names()) {
        const auto p = preset(n);
        CHECK(p.lr == 0.01);
        CHECK(p.tau == 2.0);
        p.validate();
    }
    CHECK_THROWS_AS(preset("mutag"), ContractError);
    auto bad = shapes;
    bad.d = 1.0;
    CHECK_THROWS_AS(bad.validate(), ContractError);
}

TEST_CASE("divergent training stops with a numeric error") {
    const auto ds = small_shapes(4);
    auto cfg = small_config(20);
    cfg.lr = 1e305;
    CHECK_THROWS_AS(train::train(ds, cfg), NumericError);
}

TEST_CASE("teacher loss goes down over training") {
    const auto ds = small_shapes(5);
    const auto r = train::train(ds, small_config(40));
    REQUIRE(r.log.epochs.size() == 40);
    CHECK(r.log.epochs.back().teacher_loss < r.log.epochs.front().teacher_loss);
    CHECK(r.log.epochs.back().students.front().loss < r.log.epochs.front().students.front().loss);
    const auto csv = r.log.to_csv();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 41);
}

TEST_CASE("early stop at a validation accuracy") {
    const auto ds = small_shapes(6);
    auto cfg = small_config(200);
    cfg.stop_at_val_acc = 0.0;
    const auto r = train::train(ds, cfg);
    CHECK(r.log.epochs.size() == 1);
}
