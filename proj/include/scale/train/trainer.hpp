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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace scale::train {

using num::Tensor;
using num::Var;

enum class StudentKind { GraphMask, NodeEdgeWeight, FeatureMlp };

std::string to_string(StudentKind k);
StudentKind student_from_string(const std::string& s);

/// What the mask MLP of a structural student sees per node.
enum class MaskInput { Embeddings, RawFeatures };

struct RunConfig {
    std::string dataset;
    std::uint64_t seed = 0;
    std::size_t mlp_layers = 3;
    std::size_t gcn_layers = 3;
    std::size_t hidden_size = 64;
    double lambda = 0.1;
    std::size_t epochs = 1000;
    double lr = 0.01;
    double tau = 2.0;
    double d = 0.55;
    std::size_t top_k = 5;
    MaskInput mask_input = MaskInput::Embeddings;
    /// Empty means the students relevant to the task (see default_students).
    std::vector<StudentKind> students;
    /// Stop after the first epoch whose teacher validation accuracy reaches this value.
    std::optional<double> stop_at_val_acc;

    /// Throws ContractError: λ < 0, τ <= 0, d outside (0,1), zero sizes.
    void validate() const;
    bool operator==(const RunConfig&) const = default;
};

/// Preset for a named dataset: GCN depth, width, λ, epochs, d and k per dataset, lr 0.01, τ 2.
RunConfig preset(const std::string& dataset);

std::string to_json(const RunConfig& c);
/// Starts from `base` and overrides every key present in `text`. Unknown keys are errors.
RunConfig config_from_json(const std::string& text, const RunConfig& base);
RunConfig load_config(const std::string& path, const RunConfig& base);
/// FNV-1a of the canonical JSON form.
std::uint64_t config_hash(const RunConfig& c);

std::vector<StudentKind> default_students(graph::Task task);
std::vector<StudentKind> resolved_students(const RunConfig& c, graph::Task task);

// Losses. Targets are constants; gradients flow into the first argument only.
Var ce_loss(Var logits, const Tensor& onehot);
/// −(1/N) Σ softmax(z_t/τ)·log softmax(z_s/τ). Throws DomainError for τ <= 0.
Var soft_ce_loss(Var z_s, const Tensor& z_t, double tau);
/// ce_loss + λ·soft_ce_loss; λ = 0 returns ce_loss itself.
Var student_loss(Var z_s, const Tensor& onehot, const Tensor& z_t, double lambda, double tau);

Tensor one_hot(const std::vector<int>& labels, std::size_t classes);

/// Row-per-instance view of a dataset: node rows for node tasks, graph rows (over the
/// disjoint union of all graphs) for graph tasks.
struct TrainingView {
    models::GraphInput input;
    std::vector<int> labels; // one per output row
    graph::Splits splits;
    std::size_t classes = 0;
};
TrainingView make_view(const graph::Dataset& ds);

models::Architecture architecture_for(const graph::Dataset& ds, const RunConfig& c);
/// Freshly initialized teacher and students, each from its own named seed stream.
models::ModelBundle init_models(const graph::Dataset& ds, const RunConfig& c);

struct StudentEpoch {
    double loss = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;
    double test_acc = 0.0;
    bool operator==(const StudentEpoch&) const = default;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double teacher_loss = 0.0;
    double teacher_train_acc = 0.0;
    double teacher_val_acc = 0.0;
    double teacher_test_acc = 0.0;
    std::vector<StudentEpoch> students; // in TrainLog::students order
    double teacher_seconds = 0.0;
    double student_seconds = 0.0;
};

struct TrainLog {
    std::vector<StudentKind> students;
    std::vector<EpochRecord> epochs;

    /// Compares every logged value except wall-clock columns.
    bool same_trajectory(const TrainLog& other) const;
    std::string to_csv() const;
};

struct TrainOptions {
    /// Students of one epoch run on up to this many threads.
    std::size_t threads = 1;
};

/// Joint online distillation. Each epoch: one teacher step on the hard-label loss over
/// the train split; then every student steps on ce + λ·soft-ce against the updated
/// teacher's logits, with the updated teacher's embeddings as mask-MLP input. Teacher
/// outputs enter students as constants. A non-finite loss throws NumericError naming the
/// epoch and model.
TrainLog joint_train(models::ModelBundle& models, const graph::Dataset& ds, const RunConfig& cfg,
                     const TrainOptions& opt = {});

/// Convenience: init_models + joint_train, with the config embedded in the bundle.
struct TrainResult {
    models::ModelBundle models;
    TrainLog log;
};
TrainResult train(const graph::Dataset& ds, const RunConfig& cfg, const TrainOptions& opt = {});

/// Classification accuracy of `logits` rows `idx` against `labels`.
double accuracy(const Tensor& logits, const std::vector<int>& labels, const std::vector<std::size_t>& idx);

/// Parallelism cap from SCALE_THREADS (default 1, clamped to >= 1).
std::size_t env_threads();

} // namespace scale::train
