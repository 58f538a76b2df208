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

#include "scale/train/trainer.hpp"

#include "scale/errors.hpp"
#include "scale/synth/generators.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

namespace scale::train {

using models::ModelBundle;
using nlohmann::json;
using num::Mode;
using num::Tape;

std::string to_string(StudentKind k) {
    switch (k) {
    case StudentKind::GraphMask: return "graph-mask";
    case StudentKind::NodeEdgeWeight: return "node-edge-weight";
    case StudentKind::FeatureMlp: return "feature-mlp";
    }
    return "?";
}

StudentKind student_from_string(const std::string& s) {
    if (s == "graph-mask") return StudentKind::GraphMask;
    if (s == "node-edge-weight") return StudentKind::NodeEdgeWeight;
    if (s == "feature-mlp") return StudentKind::FeatureMlp;
    throw ParseError("unknown student '" + s + "' (graph-mask, node-edge-weight, feature-mlp)");
}

void RunConfig::validate() const {
    if (!(lambda >= 0.0)) throw ContractError("RunConfig: lambda must be >= 0");
    if (!(tau > 0.0)) throw ContractError("RunConfig: tau must be > 0");
    if (!(d > 0.0 && d < 1.0)) throw ContractError("RunConfig: d must lie in (0, 1)");
    if (!(lr > 0.0)) throw ContractError("RunConfig: lr must be > 0");
    if (mlp_layers == 0 || gcn_layers == 0 || hidden_size == 0 || top_k == 0)
        throw ContractError("RunConfig: layer counts, hidden size and top_k must be positive");
}

RunConfig preset(const std::string& dataset) {
    RunConfig c;
    c.dataset = dataset;
    c.mlp_layers = 3;
    c.lr = 0.01;
    c.tau = 2.0;
    if (dataset == "ba-2motifs") {
        c.gcn_layers = 4;
        c.hidden_size = 64;
        c.lambda = 4.0;
        c.epochs = 200;
        c.top_k = 5;
        return c;
    }
    if (!synth::is_known_dataset(dataset)) throw ContractError("no preset for dataset '" + dataset + "'");
    c.gcn_layers = 6;
    c.hidden_size = dataset == "ba-shapes" ? 32 : 64;
    c.lambda = 0.1;
    c.epochs = 1000;
    c.d = dataset == "tree-grid" ? 0.9 : 0.55;
    c.top_k = synth::motif_size(dataset);
    return c;
}

std::string to_json(const RunConfig& c) {
    json students = json::array();
    for (auto k : c.students) students.push_back(to_string(k));
    json j = {{"dataset", c.dataset},
              {"seed", c.seed},
              {"mlp_layers", c.mlp_layers},
              {"gcn_layers", c.gcn_layers},
              {"hidden_size", c.hidden_size},
              {"lambda", c.lambda},
              {"epochs", c.epochs},
              {"lr", c.lr},
              {"tau", c.tau},
              {"d", c.d},
              {"top_k", c.top_k},
              {"mask_input", c.mask_input == MaskInput::Embeddings ? "embeddings" : "features"},
              {"students", students},
              {"stop_at_val_acc", c.stop_at_val_acc ? json(*c.stop_at_val_acc) : json(nullptr)}};
    return j.dump();
}

RunConfig config_from_json(const std::string& text, const RunConfig& base) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("config: expected a JSON object");
    RunConfig c = base;
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "dataset") c.dataset = v.get<std::string>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "mlp_layers") c.mlp_layers = v.get<std::size_t>();
            else if (key == "gcn_layers") c.gcn_layers = v.get<std::size_t>();
            else if (key == "hidden_size") c.hidden_size = v.get<std::size_t>();
            else if (key == "lambda") c.lambda = v.get<double>();
            else if (key == "epochs") c.epochs = v.get<std::size_t>();
            else if (key == "lr") c.lr = v.get<double>();
            else if (key == "tau") c.tau = v.get<double>();
            else if (key == "d") c.d = v.get<double>();
            else if (key == "top_k") c.top_k = v.get<std::size_t>();
            else if (key == "mask_input") {
                const auto s = v.get<std::string>();
                if (s == "embeddings") c.mask_input = MaskInput::Embeddings;
                else if (s == "features") c.mask_input = MaskInput::RawFeatures;
                else throw ParseError("config: mask_input must be 'embeddings' or 'features'");
            } else if (key == "students") {
                c.students.clear();
                for (const auto& s : v) c.students.push_back(student_from_string(s.get<std::string>()));
            } else if (key == "stop_at_val_acc") {
                c.stop_at_val_acc = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
            } else {
                throw ParseError("config: unknown key '" + key + "'");
            }
        }
    } catch (const json::type_error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    try {
        c.validate();
    } catch (const ContractError& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    return c;
}

RunConfig load_config(const std::string& path, const RunConfig& base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str(), base);
}

std::uint64_t config_hash(const RunConfig& c) { return num::fnv1a64(to_json(c)); }

std::vector<StudentKind> default_students(graph::Task task) {
    if (task == graph::Task::NodeClassification) return {StudentKind::NodeEdgeWeight, StudentKind::FeatureMlp};
    return {StudentKind::GraphMask, StudentKind::FeatureMlp};
}

std::vector<StudentKind> resolved_students(const RunConfig& c, graph::Task task) {
    return c.students.empty() ? default_students(task) : c.students;
}

Var ce_loss(Var logits, const Tensor& onehot) { return num::softmax_cross_entropy(logits, onehot, 1.0); }

Var soft_ce_loss(Var z_s, const Tensor& z_t, double tau) {
    if (!(tau > 0.0)) throw DomainError("soft_ce_loss: temperature must be > 0");
    return num::softmax_cross_entropy(z_s, num::rowwise_softmax(z_t, tau), tau);
}

Var student_loss(Var z_s, const Tensor& onehot, const Tensor& z_t, double lambda, double tau) {
    const Var ce = ce_loss(z_s, onehot);
    if (lambda == 0.0) return ce;
    return num::add(ce, num::scale(soft_ce_loss(z_s, z_t, tau), lambda));
}

Tensor one_hot(const std::vector<int>& labels, std::size_t classes) {
    Tensor t = Tensor::zeros(labels.size(), classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes)
            throw ContractError("one_hot: label " + std::to_string(labels[i]) + " out of range");
        t(i, static_cast<std::size_t>(labels[i])) = 1.0;
    }
    return t;
}

TrainingView make_view(const graph::Dataset& ds) {
    ds.validate();
    TrainingView v;
    v.splits = ds.splits;
    v.classes = ds.num_classes;
    if (ds.task == graph::Task::NodeClassification) {
        v.input = models::make_node_input(ds.graphs[0]);
        v.labels = *ds.graphs[0].node_labels();
    } else {
        std::vector<std::size_t> all(ds.graphs.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        v.input = models::make_graph_input(graph::disjoint_union(ds, all));
        for (const auto& g : ds.graphs) v.labels.push_back(*g.graph_label());
    }
    return v;
}

models::Architecture architecture_for(const graph::Dataset& ds, const RunConfig& c) {
    models::Architecture a;
    a.task = ds.task;
    a.in_dim = ds.graphs.at(0).feature_dim();
    a.hidden = c.hidden_size;
    a.classes = ds.num_classes;
    a.gcn_layers = c.gcn_layers;
    a.mlp_layers = c.mlp_layers;
    a.mask_in_dim = c.mask_input == MaskInput::Embeddings ? c.hidden_size : a.in_dim;
    a.validate();
    return a;
}

ModelBundle init_models(const graph::Dataset& ds, const RunConfig& c) {
    c.validate();
    ModelBundle b;
    b.arch = architecture_for(ds, c);
    num::Rng teacher_rng = num::make_rng(c.seed, "teacher");
    b.teacher = models::Teacher(b.arch, teacher_rng);
    for (StudentKind k : resolved_students(c, ds.task)) {
        num::Rng rng = num::make_rng(c.seed, "student." + to_string(k));
        switch (k) {
        case StudentKind::GraphMask: b.graph_student.emplace(b.arch, rng); break;
        case StudentKind::NodeEdgeWeight: b.node_student.emplace(b.arch, rng); break;
        case StudentKind::FeatureMlp: b.feature_student.emplace(b.arch, rng); break;
        }
    }
    b.config_json = to_json(c);
    b.config_hash = config_hash(c);
    return b;
}

double accuracy(const Tensor& logits, const std::vector<int>& labels, const std::vector<std::size_t>& idx) {
    if (idx.empty()) return 0.0;
    const auto pred = num::argmax_rows(logits);
    std::size_t hit = 0;
    for (std::size_t i : idx) hit += static_cast<int>(pred.at(i)) == labels.at(i) ? 1 : 0;
    return static_cast<double>(hit) / static_cast<double>(idx.size());
}

bool TrainLog::same_trajectory(const TrainLog& o) const {
    if (students != o.students || epochs.size() != o.epochs.size()) return false;
    for (std::size_t i = 0; i < epochs.size(); ++i) {
        const auto &a = epochs[i], &b = o.epochs[i];
        if (a.epoch != b.epoch || a.teacher_loss != b.teacher_loss || a.teacher_train_acc != b.teacher_train_acc ||
            a.teacher_val_acc != b.teacher_val_acc || a.teacher_test_acc != b.teacher_test_acc ||
            a.students != b.students)
            return false;
    }
    return true;
}

std::string TrainLog::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "epoch,teacher_loss,teacher_train_acc,teacher_val_acc,teacher_test_acc";
    for (auto k : students) {
        const auto n = to_string(k);
        os << ',' << n << "_loss," << n << "_train_acc," << n << "_val_acc," << n << "_test_acc";
    }
    os << ",teacher_seconds,student_seconds\n";
    for (const auto& e : epochs) {
        os << e.epoch << ',' << e.teacher_loss << ',' << e.teacher_train_acc << ',' << e.teacher_val_acc << ','
           << e.teacher_test_acc;
        for (const auto& s : e.students) os << ',' << s.loss << ',' << s.train_acc << ',' << s.val_acc << ',' << s.test_acc;
        os << ',' << e.teacher_seconds << ',' << e.student_seconds << '\n';
    }
    return os.str();
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void check_finite(const Var& loss, std::size_t epoch, const std::string& who) {
    if (!std::isfinite(loss.value().item()))
        throw NumericError("non-finite " + who + " loss at epoch " + std::to_string(epoch));
}

// Teacher forward on its own tape, kept alive so the next epoch's step can reuse it.
struct TeacherPass {
    std::unique_ptr<Tape> tape = std::make_unique<Tape>();
    models::TeacherOutput out;
};

TeacherPass teacher_pass(models::Teacher& m, const TrainingView& v) {
    TeacherPass p;
    p.out = models::teacher_forward(*p.tape, m, v.input);
    return p;
}

std::vector<int> pick(const std::vector<int>& labels, const std::vector<std::size_t>& idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(labels.at(i));
    return out;
}

struct StudentTask {
    StudentKind kind;
    std::vector<num::Parameter*> params;
};

StudentEpoch student_step(ModelBundle& b, StudentKind kind, const std::vector<num::Parameter*>& params,
                          const TrainingView& v, const Tensor& mask_input, const Tensor& zt_train,
                          const Tensor& y_train, const RunConfig& cfg, std::size_t epoch) {
    Tape t;
    Var logits;
    switch (kind) {
    case StudentKind::GraphMask:
        logits = models::graph_student_forward(t, *b.graph_student, v.input, t.constant(mask_input), Mode::Train).logits;
        break;
    case StudentKind::NodeEdgeWeight:
        logits = models::node_student_forward(t, *b.node_student, v.input, t.constant(mask_input), Mode::Train).logits;
        break;
    case StudentKind::FeatureMlp:
        logits = models::feature_student_forward(t, *b.feature_student, v.input, Mode::Train);
        break;
    }
    const Var loss = student_loss(num::gather_rows(logits, v.splits.train), y_train, zt_train, cfg.lambda, cfg.tau);
    check_finite(loss, epoch, to_string(kind));
    t.backward(loss);
    num::adam_step(params, {cfg.lr});
    num::zero_grad(params);
    StudentEpoch r;
    r.loss = loss.value().item();
    r.train_acc = accuracy(logits.value(), v.labels, v.splits.train);
    r.val_acc = accuracy(logits.value(), v.labels, v.splits.val);
    r.test_acc = accuracy(logits.value(), v.labels, v.splits.test);
    return r;
}

} // namespace

TrainLog joint_train(ModelBundle& b, const graph::Dataset& ds, const RunConfig& cfg, const TrainOptions& opt) {
    cfg.validate();
    const TrainingView v = make_view(ds);
    if (v.splits.train.empty()) throw ContractError("joint_train: empty train split");
    const Tensor y_train = one_hot(pick(v.labels, v.splits.train), v.classes);

    TrainLog log;
    std::vector<StudentTask> tasks;
    if (b.graph_student) tasks.push_back({StudentKind::GraphMask, b.graph_student->parameters()});
    if (b.node_student) tasks.push_back({StudentKind::NodeEdgeWeight, b.node_student->parameters()});
    if (b.feature_student) tasks.push_back({StudentKind::FeatureMlp, b.feature_student->parameters()});
    for (const auto& t : tasks) log.students.push_back(t.kind);

    auto teacher_params = b.teacher.parameters();
    TeacherPass pass = teacher_pass(b.teacher, v);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        EpochRecord rec;
        rec.epoch = epoch;
        auto t0 = Clock::now();

        const Var loss = ce_loss(num::gather_rows(pass.out.logits, v.splits.train), y_train);
        check_finite(loss, epoch, "teacher");
        pass.tape->backward(loss);
        num::adam_step(teacher_params, {cfg.lr});
        num::zero_grad(teacher_params);
        rec.teacher_loss = loss.value().item();

        // Post-step forward: constants for the students, and next epoch's teacher step.
        pass = teacher_pass(b.teacher, v);
        const Tensor& zt = pass.out.logits.value();
        rec.teacher_train_acc = accuracy(zt, v.labels, v.splits.train);
        rec.teacher_val_acc = accuracy(zt, v.labels, v.splits.val);
        rec.teacher_test_acc = accuracy(zt, v.labels, v.splits.test);
        rec.teacher_seconds = seconds_since(t0);

        t0 = Clock::now();
        const Tensor zt_train = num::gather_rows(zt, v.splits.train);
        const Tensor& mask_input =
            cfg.mask_input == MaskInput::Embeddings ? pass.out.embeddings.value() : v.input.features;
        rec.students.resize(tasks.size());
        auto run = [&](std::size_t i) {
            rec.students[i] = student_step(b, tasks[i].kind, tasks[i].params, v, mask_input, zt_train, y_train, cfg, epoch);
        };
        const std::size_t threads = std::min(opt.threads, tasks.size());
        if (threads <= 1) {
            for (std::size_t i = 0; i < tasks.size(); ++i) run(i);
        } else {
            std::vector<std::exception_ptr> errors(tasks.size());
            std::vector<std::thread> pool;
            for (std::size_t i = 0; i < tasks.size(); ++i)
                pool.emplace_back([&, i] {
                    try {
                        run(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                });
            for (auto& th : pool) th.join();
            for (auto& e : errors)
                if (e) std::rethrow_exception(e);
        }
        rec.student_seconds = seconds_since(t0);
        log.epochs.push_back(std::move(rec));
        if (cfg.stop_at_val_acc && log.epochs.back().teacher_val_acc >= *cfg.stop_at_val_acc) break;
    }
    return log;
}

TrainResult train(const graph::Dataset& ds, const RunConfig& cfg, const TrainOptions& opt) {
    TrainResult r{init_models(ds, cfg), {}};
    r.log = joint_train(r.models, ds, cfg, opt);
    return r;
}

std::size_t env_threads() {
    const char* s = std::getenv("SCALE_THREADS");
    if (!s || !*s) return 1;
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end == s || v < 1) return 1;
    return static_cast<std::size_t>(v);
}

} // namespace scale::train
