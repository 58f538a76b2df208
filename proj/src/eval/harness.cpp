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

#include "scale/eval/harness.hpp"

#include "scale/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace scale::eval {

using nlohmann::json;

Counts& Counts::operator+=(const Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
}

Counts count(const std::vector<UndirectedEdge>& selected, const std::vector<UndirectedEdge>& gt) {
    const std::set<UndirectedEdge> truth(gt.begin(), gt.end());
    const std::set<UndirectedEdge> sel(selected.begin(), selected.end());
    Counts c;
    for (const auto& e : sel) (truth.count(e) ? c.tp : c.fp) += 1;
    c.fn = truth.size() - c.tp;
    return c;
}

PrecisionRecall precision_recall(const Counts& c) {
    PrecisionRecall r;
    if (c.tp + c.fp == 0) r.precision_undefined = true;
    else r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn == 0) r.recall_undefined = true;
    else r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    return r;
}

PrecisionRecall precision_recall(const std::vector<UndirectedEdge>& selected, const std::vector<UndirectedEdge>& gt) {
    return precision_recall(count(selected, gt));
}

YoudenResult youden_threshold(const std::vector<double>& scores, const std::vector<bool>& positive) {
    if (scores.size() != positive.size()) throw ShapeError("youden_threshold: one label per score required");
    long long pos = 0, neg = 0;
    for (bool p : positive) (p ? pos : neg) += 1;
    if (pos == 0 || neg == 0) throw ContractError("youden_threshold: needs at least one positive and one negative");
    for (double s : scores)
        if (!std::isfinite(s)) throw DomainError("youden_threshold: non-finite score");

    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

    // Ascending sweep: at a threshold just below distinct value v, everything >= v is selected.
    long long tp = pos, fp = neg; // threshold below the minimum
    YoudenResult best;
    long long best_num = tp * neg - fp * pos;
    best.threshold = scores[order.front()] - 1.0;
    best.tpr = 1.0;
    best.fpr = 1.0;
    std::size_t distinct = 1;
    for (std::size_t i = 0; i < order.size();) {
        const double v = scores[order[i]];
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == v) {
            (positive[order[j]] ? tp : fp) -= 1;
            ++j;
        }
        const double thr = j < order.size() ? 0.5 * (v + scores[order[j]]) : v + 1.0;
        if (j < order.size()) ++distinct;
        const long long num = tp * neg - fp * pos;
        if (num > best_num) {
            best_num = num;
            best.threshold = thr;
            best.tpr = static_cast<double>(tp) / static_cast<double>(pos);
            best.fpr = static_cast<double>(fp) / static_cast<double>(neg);
        }
        i = j;
    }
    best.j = static_cast<double>(best_num) / static_cast<double>(pos * neg);
    best.degenerate = distinct == 1;
    return best;
}

std::vector<std::vector<UndirectedEdge>> motif_edges_by_node(const graph::Graph& g) {
    const auto comp = graph::motif_components(g);
    std::map<long, std::vector<UndirectedEdge>> by_comp;
    for (const auto& e : g.gt_undirected_edges()) by_comp[comp[e.first]].push_back(e);
    std::vector<std::vector<UndirectedEdge>> out(g.num_nodes());
    for (std::size_t v = 0; v < g.num_nodes(); ++v)
        if (comp[v] >= 0) out[v] = by_comp[comp[v]];
    return out;
}

namespace {

void finalize(MetricReport& r) {
    Counts total;
    double sp = 0.0, sr = 0.0;
    for (const auto& inst : r.instances) {
        total += inst.counts;
        const auto pr = precision_recall(inst.counts);
        sp += pr.precision;
        sr += pr.recall;
    }
    r.totals = total;
    const auto pr = precision_recall(total);
    r.precision = pr.precision;
    r.recall = pr.recall;
    r.precision_undefined = pr.precision_undefined;
    const double n = r.instances.empty() ? 1.0 : static_cast<double>(r.instances.size());
    r.macro_precision = sp / n;
    r.macro_recall = sr / n;
}

std::vector<UndirectedEdge> induced(const graph::Graph& g, const std::vector<std::size_t>& nodes) {
    std::vector<char> in(g.num_nodes(), 0);
    for (auto v : nodes) in.at(v) = 1;
    std::set<UndirectedEdge> out;
    for (const auto& e : g.edges())
        if (e.src != e.dst && in[e.src] && in[e.dst]) out.insert(graph::undirected(e));
    return {out.begin(), out.end()};
}

} // namespace

MetricReport score_node_task(const graph::Graph& g, const std::vector<std::size_t>& targets, const NodeSelector& select) {
    if (!g.gt_edge_mask()) throw ContractError("score_node_task: graph has no ground truth");
    const auto truth = motif_edges_by_node(g);
    MetricReport r;
    r.task = graph::Task::NodeClassification;
    for (std::size_t t : targets) {
        if (truth.at(t).empty()) throw ContractError("score_node_task: target " + std::to_string(t) + " has no ground truth");
        r.instances.push_back({t, count(induced(g, select(t)), truth[t])});
    }
    finalize(r);
    return r;
}

MetricReport score_graph_task(const graph::Dataset& ds, const std::vector<std::size_t>& ids, const EdgeScorer& scorer) {
    MetricReport r;
    r.task = graph::Task::GraphClassification;
    std::vector<std::vector<explain::EdgeScore>> per_graph;
    std::vector<std::set<UndirectedEdge>> truth;
    std::vector<double> pooled;
    std::vector<bool> labels;
    for (std::size_t id : ids) {
        const auto& g = ds.graphs.at(id);
        if (!g.gt_edge_mask()) throw ContractError("score_graph_task: graph " + std::to_string(id) + " has no ground truth");
        const auto gt = g.gt_undirected_edges();
        truth.emplace_back(gt.begin(), gt.end());
        per_graph.push_back(scorer(id));
        for (const auto& s : per_graph.back()) {
            pooled.push_back(s.score);
            labels.push_back(truth.back().count({s.src, s.dst}) > 0);
        }
    }
    const YoudenResult y = youden_threshold(pooled, labels);
    r.threshold = y.threshold;
    r.degenerate_threshold = y.degenerate;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        std::vector<UndirectedEdge> sel;
        for (const auto& s : per_graph[i])
            if (s.score > y.threshold) sel.push_back({s.src, s.dst});
        r.instances.push_back({ids[i], count(sel, {truth[i].begin(), truth[i].end()})});
    }
    finalize(r);
    return r;
}

std::vector<std::size_t> explanation_targets(const graph::Dataset& ds) {
    if (ds.task == graph::Task::GraphClassification) return ds.splits.test;
    const auto& g = ds.graphs.at(0);
    if (!g.gt_node_mask()) throw ContractError("explanation_targets: dataset has no ground-truth node mask");
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < g.num_nodes(); ++v)
        if ((*g.gt_node_mask())[v]) out.push_back(v);
    return out;
}

EvalOptions eval_options(const train::RunConfig& cfg) {
    EvalOptions o;
    o.d = cfg.d;
    o.k = cfg.top_k;
    o.source = cfg.mask_input == train::MaskInput::Embeddings ? explain::MaskSource::Embeddings
                                                               : explain::MaskSource::RawFeatures;
    return o;
}

MetricReport evaluate(const graph::Dataset& ds, models::ModelBundle& b, const EvalOptions& opt) {
    ds.validate();
    const auto targets = explanation_targets(ds);
    const auto t0 = std::chrono::steady_clock::now();
    MetricReport r;
    if (ds.task == graph::Task::NodeClassification) {
        const auto& g = ds.graphs[0];
        const auto in = models::make_node_input(g);
        const auto a_hat = explain::learned_adjacency(b, in, opt.source);
        explain::NodeExplainOptions eo;
        eo.d = opt.d;
        eo.k = opt.k;
        eo.hops = opt.hops ? opt.hops : b.arch.gcn_layers;
        std::vector<std::vector<std::size_t>> selections(g.num_nodes());
        parallel_for(targets.size(), opt.threads, [&](std::size_t i) {
            selections[targets[i]] = explain::explain_node(g, a_hat, targets[i], eo).selected_nodes;
        });
        r = score_node_task(g, targets, [&](std::size_t t) { return selections[t]; });
    } else {
        const auto u = graph::disjoint_union(ds, targets);
        const auto in = models::make_graph_input(u);
        const auto parts = explain::split_by_graph(explain::learned_mask(b, in, opt.source), u.node_offset);
        std::map<std::size_t, std::size_t> slot;
        for (std::size_t i = 0; i < targets.size(); ++i) slot[targets[i]] = i;
        r = score_graph_task(ds, targets, [&](std::size_t id) {
            return explain::undirected_edge_scores(ds.graphs[id], parts[slot.at(id)]);
        });
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.dataset = ds.name;
    r.k = opt.k;
    r.d = opt.d;
    return r;
}

std::string MetricReport::to_csv() const {
    std::ostringstream os;
    os.precision(10);
    os << "dataset,task,precision,recall,macro_precision,macro_recall,tp,fp,fn,instances,seconds,threshold,k,d\n";
    os << dataset << ',' << graph::to_string(task) << ',' << precision << ',' << recall << ',' << macro_precision << ','
       << macro_recall << ',' << totals.tp << ',' << totals.fp << ',' << totals.fn << ',' << instances.size() << ','
       << seconds << ',';
    if (threshold) os << *threshold;
    os << ',' << k << ',' << d << '\n';
    return os.str();
}

std::string MetricReport::instances_csv() const {
    std::ostringstream os;
    os << "target,tp,fp,fn\n";
    for (const auto& i : instances) os << i.target << ',' << i.counts.tp << ',' << i.counts.fp << ',' << i.counts.fn << '\n';
    return os.str();
}

std::string MetricReport::to_json() const {
    json inst = json::array();
    for (const auto& i : instances)
        inst.push_back({{"target", i.target}, {"tp", i.counts.tp}, {"fp", i.counts.fp}, {"fn", i.counts.fn}});
    json j = {{"dataset", dataset},
              {"task", graph::to_string(task)},
              {"precision", precision},
              {"recall", recall},
              {"macro_precision", macro_precision},
              {"macro_recall", macro_recall},
              {"precision_undefined", precision_undefined},
              {"tp", totals.tp},
              {"fp", totals.fp},
              {"fn", totals.fn},
              {"seconds", seconds},
              {"threshold", threshold ? json(*threshold) : json(nullptr)},
              {"degenerate_threshold", degenerate_threshold},
              {"k", k},
              {"d", d},
              {"instances", inst}};
    return j.dump(2) + "\n";
}

std::string to_string(AblationKind k) {
    switch (k) {
    case AblationKind::JumpD: return "jump_d";
    case AblationKind::Lambda: return "lambda";
    case AblationKind::KdSetting: return "kd_setting";
    case AblationKind::ModelAccuracy: return "model_accuracy";
    }
    return "?";
}

AblationKind ablation_from_string(const std::string& s) {
    if (s == "jump_d") return AblationKind::JumpD;
    if (s == "lambda") return AblationKind::Lambda;
    if (s == "kd_setting") return AblationKind::KdSetting;
    if (s == "model_accuracy") return AblationKind::ModelAccuracy;
    throw ParseError("unknown ablation kind '" + s + "' (jump_d, lambda, kd_setting, model_accuracy)");
}

std::vector<double> parse_grid(const std::string& text) {
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size() || !std::isfinite(v)) throw ParseError("grid: bad number '" + s + "' in '" + text + "'");
        return v;
    };
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() != 3) throw ParseError("grid: expected start:stop:step, got '" + text + "'");
        const double a = number(parts[0]), b = number(parts[1]), step = number(parts[2]);
        if (!(step > 0.0) || b < a) throw ParseError("grid: need step > 0 and stop >= start in '" + text + "'");
        const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9));
        for (std::size_t i = 0; i <= n; ++i) out.push_back(std::round((a + static_cast<double>(i) * step) * 1e12) / 1e12);
    } else {
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ',');) out.push_back(number(p));
    }
    if (out.empty()) throw ParseError("grid: empty");
    return out;
}

std::string grid_label(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::vector<std::string> kd_settings() { return {"naive", "embed", "kdl", "joint"}; }

train::RunConfig apply_kd_setting(const train::RunConfig& base, const std::string& setting) {
    train::RunConfig c = base;
    if (setting == "naive") {
        c.mask_input = train::MaskInput::RawFeatures;
        c.lambda = 0.0;
    } else if (setting == "embed") {
        c.mask_input = train::MaskInput::Embeddings;
        c.lambda = 0.0;
    } else if (setting == "kdl") {
        c.mask_input = train::MaskInput::RawFeatures;
    } else if (setting == "joint") {
        c.mask_input = train::MaskInput::Embeddings;
    } else {
        throw ParseError("unknown kd setting '" + setting + "'");
    }
    return c;
}

std::string SweepReport::to_csv() const {
    std::ostringstream os;
    os.precision(10);
    os << "grid_value,precision,recall,seed,teacher_val_acc,epochs_run\n";
    for (const auto& r : rows)
        os << r.grid_value << ',' << r.precision << ',' << r.recall << ',' << r.seed << ',' << r.teacher_val_acc << ','
           << r.epochs_run << '\n';
    return os.str();
}

std::pair<double, double> SweepReport::mean_at(const std::string& grid_value) const {
    double p = 0.0, r = 0.0;
    std::size_t n = 0;
    for (const auto& row : rows)
        if (row.grid_value == grid_value) {
            p += row.precision;
            r += row.recall;
            ++n;
        }
    if (n == 0) throw ContractError("mean_at: no rows for grid value " + grid_value);
    return {p / static_cast<double>(n), r / static_cast<double>(n)};
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

SweepReport ablate(AblationKind kind, const std::vector<double>& grid, const graph::Dataset& ds,
                   const train::RunConfig& base, const std::vector<std::uint64_t>& seeds, std::size_t threads) {
    if (seeds.empty()) throw ContractError("ablate: no seeds");
    std::vector<std::string> labels;
    if (kind == AblationKind::KdSetting) {
        labels = kd_settings();
    } else {
        if (grid.empty()) throw ContractError("ablate: empty grid");
        for (double v : grid) {
            if (kind == AblationKind::JumpD && !(v > 0.0 && v < 1.0)) throw ContractError("ablate: d must lie in (0, 1)");
            if (kind == AblationKind::Lambda && !(v >= 0.0)) throw ContractError("ablate: lambda must be >= 0");
            if (kind == AblationKind::ModelAccuracy && !(v > 0.0 && v <= 1.0))
                throw ContractError("ablate: accuracy band must lie in (0, 1]");
            labels.push_back(grid_label(v));
        }
    }

    SweepReport report;
    report.kind = kind;
    // rows[g][s]
    std::vector<std::vector<SweepRow>> rows(labels.size(), std::vector<SweepRow>(seeds.size()));
    auto run_point = [&](std::size_t gi, std::size_t si, const train::RunConfig& cfg) {
        auto trained = train::train(ds, cfg);
        const auto rep = evaluate(ds, trained.models, eval_options(cfg));
        rows[gi][si] = {labels[gi], seeds[si], rep.precision, rep.recall, trained.log.epochs.back().teacher_val_acc,
                        trained.log.epochs.size()};
    };

    if (kind == AblationKind::JumpD) {
        parallel_for(seeds.size(), threads, [&](std::size_t si) {
            train::RunConfig cfg = base;
            cfg.seed = seeds[si];
            auto trained = train::train(ds, cfg);
            for (std::size_t gi = 0; gi < grid.size(); ++gi) {
                EvalOptions o = eval_options(cfg);
                o.d = grid[gi];
                const auto rep = evaluate(ds, trained.models, o);
                rows[gi][si] = {labels[gi], seeds[si], rep.precision, rep.recall,
                                trained.log.epochs.back().teacher_val_acc, trained.log.epochs.size()};
            }
        });
    } else {
        parallel_for(labels.size() * seeds.size(), threads, [&](std::size_t job) {
            const std::size_t gi = job / seeds.size(), si = job % seeds.size();
            train::RunConfig cfg = base;
            cfg.seed = seeds[si];
            if (kind == AblationKind::Lambda) cfg.lambda = grid[gi];
            if (kind == AblationKind::KdSetting) cfg = apply_kd_setting(cfg, labels[gi]);
            if (kind == AblationKind::ModelAccuracy) cfg.stop_at_val_acc = grid[gi];
            run_point(gi, si, cfg);
        });
    }
    for (auto& g : rows)
        for (auto& r : g) report.rows.push_back(std::move(r));
    return report;
}

} // namespace scale::eval
