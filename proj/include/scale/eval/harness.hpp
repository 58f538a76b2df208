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

#include "scale/explain/structural.hpp"
#include "scale/graph/graph.hpp"
#include "scale/models/models.hpp"
#include "scale/train/trainer.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace scale::eval {

using graph::UndirectedEdge;

struct Counts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    Counts& operator+=(const Counts& o);
    bool operator==(const Counts&) const = default;
};

/// Edge-set comparison; both inputs are deduplicated undirected pairs.
Counts count(const std::vector<UndirectedEdge>& selected, const std::vector<UndirectedEdge>& gt);

struct PrecisionRecall {
    double precision = 1.0;
    double recall = 1.0;
    /// Nothing selected: precision is reported as 1.
    bool precision_undefined = false;
    /// No ground truth: recall is reported as 1.
    bool recall_undefined = false;
};

PrecisionRecall precision_recall(const Counts& c);
PrecisionRecall precision_recall(const std::vector<UndirectedEdge>& selected, const std::vector<UndirectedEdge>& gt);

struct YoudenResult {
    double threshold = 0.0;
    double j = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;
    /// All scores equal: no threshold separates anything; everything is selected.
    bool degenerate = false;
};

/// Maximizes TPR - FPR for the rule "score > threshold" over candidate thresholds at
/// the midpoints of consecutive distinct scores plus one below the minimum and one above
/// the maximum. Ties go to the lower threshold. Needs both classes (ContractError).
YoudenResult youden_threshold(const std::vector<double>& scores, const std::vector<bool>& positive);

struct InstanceResult {
    std::size_t target = 0;
    Counts counts;
};

struct MetricReport {
    std::string dataset;
    graph::Task task = graph::Task::NodeClassification;
    double precision = 0.0; // micro
    double recall = 0.0;    // micro
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    bool precision_undefined = false;
    Counts totals;
    std::vector<InstanceResult> instances;
    double seconds = 0.0;
    std::optional<double> threshold;
    bool degenerate_threshold = false;
    std::size_t k = 0;
    double d = 0.0;

    std::string to_csv() const;
    std::string instances_csv() const;
    std::string to_json() const;
};

/// Returns the selected nodes of the explanation for `target`.
using NodeSelector = std::function<std::vector<std::size_t>(std::size_t target)>;
/// Returns undirected edge scores (local node ids) for graph `graph_id`.
using EdgeScorer = std::function<std::vector<explain::EdgeScore>(std::size_t graph_id)>;

/// Per-instance ground truth of a node target: the gt edges of its own motif.
std::vector<std::vector<UndirectedEdge>> motif_edges_by_node(const graph::Graph& g);

/// Node-task scoring: selected edges are the edges of g between selected nodes.
MetricReport score_node_task(const graph::Graph& g, const std::vector<std::size_t>& targets, const NodeSelector& select);
/// Graph-task scoring with a Youden threshold fit on the pooled edge scores of `ids`.
MetricReport score_graph_task(const graph::Dataset& ds, const std::vector<std::size_t>& ids, const EdgeScorer& scorer);

/// Motif nodes for node tasks, test-split graphs for graph tasks.
std::vector<std::size_t> explanation_targets(const graph::Dataset& ds);

struct EvalOptions {
    double d = 0.55;
    std::size_t k = 5;
    /// Candidate radius for node explanations; 0 means the teacher's GCN depth.
    std::size_t hops = 0;
    explain::MaskSource source = explain::MaskSource::Embeddings;
    std::size_t threads = 1;
};

EvalOptions eval_options(const train::RunConfig& cfg);

/// Explains every target with the trained students (no parameter changes) and scores
/// against ground truth. `seconds` covers the explanation loop only.
MetricReport evaluate(const graph::Dataset& ds, models::ModelBundle& b, const EvalOptions& opt);

enum class AblationKind { JumpD, Lambda, KdSetting, ModelAccuracy };

std::string to_string(AblationKind k);
AblationKind ablation_from_string(const std::string& s);

/// "a:b:step" (inclusive), a comma list, or a single value.
std::vector<double> parse_grid(const std::string& text);

struct SweepRow {
    std::string grid_value;
    std::uint64_t seed = 0;
    double precision = 0.0;
    double recall = 0.0;
    double teacher_val_acc = 0.0;
    std::size_t epochs_run = 0;
};

struct SweepReport {
    AblationKind kind = AblationKind::JumpD;
    std::vector<SweepRow> rows;

    /// Long format: grid_value,precision,recall,seed,teacher_val_acc,epochs_run.
    std::string to_csv() const;
    /// Mean precision/recall over seeds for one grid value.
    std::pair<double, double> mean_at(const std::string& grid_value) const;
};

/// Knowledge-distillation settings: naive (raw-feature mask input, no soft targets),
/// embed (embeddings, no soft targets), kdl (raw features, soft targets), joint
/// (embeddings, soft targets).
std::vector<std::string> kd_settings();
train::RunConfig apply_kd_setting(const train::RunConfig& base, const std::string& setting);

std::string grid_label(double v);

/// One evaluate() per (grid value, seed). jump_d reuses one trained model set per seed;
/// the other kinds train per point. `grid` is ignored for kd_setting.
SweepReport ablate(AblationKind kind, const std::vector<double>& grid, const graph::Dataset& ds,
                   const train::RunConfig& base, const std::vector<std::uint64_t>& seeds, std::size_t threads = 1);

/// Runs fn(0..n-1) on up to `threads` threads; the first exception is rethrown.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

} // namespace scale::eval
