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

#include "scale/allocator.hpp"
#include "scale/errors.hpp"
#include "scale/eval/harness.hpp"
#include "scale/explain/deeplift.hpp"
#include "scale/explain/structural.hpp"
#include "scale/graph/dataset_io.hpp"
#include "scale/synth/generators.hpp"
#include "scale/train/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#ifndef SCALE_VERSION
#define SCALE_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scale;

namespace {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kNumeric = 3, kIo = 4 };

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open '" + p.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::error_code ec;
    if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write '" + p.string() + "'");
    out << text;
    if (!out.flush()) throw IoError("write failed for '" + p.string() + "'");
}

std::string digest(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Enough to rerun the command: arguments, resolved configuration and input digests.
// No timestamps, so identical runs give identical manifests.
struct Manifest {
    std::string command;
    std::vector<std::string> argv;
    json config = nullptr;
    json inputs = json::object();
    json outputs = json::array();
    json extra = json::object();

    void input(const fs::path& p) { inputs[p.string()] = digest(read_text(p)); }
    void output(const fs::path& p) { outputs.push_back(p.string()); }

    void write(const fs::path& p) const {
        json j = {{"tool", "scale"},       {"version", SCALE_VERSION}, {"compiler", __VERSION__},
                  {"command", command},    {"argv", argv},             {"inputs", inputs},
                  {"outputs", outputs}};
        if (!config.is_null()) {
            j["config"] = config;
            j["config_hash"] = extra.value("config_hash", json(nullptr));
        }
        for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
        write_text(p, j.dump(2) + "\n");
    }
};

fs::path sidecar(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

void set_config(Manifest& m, const train::RunConfig& cfg) {
    m.config = json::parse(train::to_json(cfg));
    m.extra["config_hash"] = train::config_hash(cfg);
    m.extra["seed"] = cfg.seed;
}

train::RunConfig base_config(const graph::Dataset& ds) {
    if (synth::is_known_dataset(ds.name)) return train::preset(ds.name);
    train::RunConfig c;
    c.dataset = ds.name;
    return c;
}

std::vector<train::StudentKind> parse_students(const std::string& text) {
    std::vector<train::StudentKind> out;
    std::stringstream ss(text);
    for (std::string s; std::getline(ss, s, ',');)
        if (!s.empty()) out.push_back(train::student_from_string(s));
    return out;
}

struct Checkpoint {
    fs::path dir;
    models::ModelBundle bundle;
    train::RunConfig cfg;
    graph::Dataset ds;
    fs::path model_path;
    fs::path data_path;
};

Checkpoint open_checkpoint(const fs::path& dir, const std::string& data_override) {
    Checkpoint c;
    c.dir = dir;
    c.model_path = dir / "model.json";
    if (!fs::exists(c.model_path)) throw IoError("no checkpoint at '" + dir.string() + "' (model.json missing)");
    c.bundle = models::load_checkpoint(c.model_path.string());
    c.cfg = train::config_from_json(c.bundle.config_json, train::RunConfig{});
    c.data_path = data_override.empty() ? dir / "dataset.json" : fs::path(data_override);
    c.ds = graph::load_dataset(c.data_path);
    return c;
}

// ---- generate ----

struct GenerateArgs {
    std::string dataset;
    std::uint64_t seed = 0;
    std::string out;
};

int run_generate(const GenerateArgs& a, const std::vector<std::string>& argv) {
    if (!synth::is_known_dataset(a.dataset)) {
        std::string names;
        for (const auto& n : synth::dataset_names()) names += (names.empty() ? "" : ", ") + n;
        throw UsageError("unknown dataset '" + a.dataset + "' (known: " + names + ")");
    }
    const auto ds = synth::generate(a.dataset, a.seed);
    write_text(a.out, graph::to_json(ds));
    Manifest m{"generate", argv};
    m.extra["dataset"] = a.dataset;
    m.extra["seed"] = a.seed;
    m.output(a.out);
    m.write(sidecar(a.out));
    std::size_t nodes = 0;
    for (const auto& g : ds.graphs) nodes += g.num_nodes();
    std::cout << a.dataset << ": " << ds.graphs.size() << " graph(s), " << nodes << " nodes -> " << a.out << "\n";
    return kOk;
}

// ---- train ----

struct TrainArgs {
    std::string data, config, out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> epochs;
    std::optional<double> lambda;
    std::optional<double> stop_at;
    std::string students, mask_input;
    std::size_t threads = 0;
};

train::RunConfig resolve_config(const graph::Dataset& ds, const std::string& config_path, const TrainArgs& a) {
    auto cfg = base_config(ds);
    if (!config_path.empty()) cfg = train::load_config(config_path, cfg);
    if (a.seed) cfg.seed = *a.seed;
    if (a.epochs) cfg.epochs = *a.epochs;
    if (a.lambda) cfg.lambda = *a.lambda;
    if (a.stop_at) cfg.stop_at_val_acc = *a.stop_at;
    if (!a.students.empty()) cfg.students = parse_students(a.students);
    if (!a.mask_input.empty()) {
        if (a.mask_input == "embeddings") cfg.mask_input = train::MaskInput::Embeddings;
        else if (a.mask_input == "features") cfg.mask_input = train::MaskInput::RawFeatures;
        else throw UsageError("--mask-input must be 'embeddings' or 'features'");
    }
    cfg.validate();
    return cfg;
}

int run_train(const TrainArgs& a, const std::vector<std::string>& argv) {
    const auto ds = graph::load_dataset(a.data);
    const auto cfg = resolve_config(ds, a.config, a);
    const fs::path dir = a.out;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());

    train::TrainOptions opt;
    opt.threads = a.threads ? a.threads : train::env_threads();
    auto result = train::train(ds, cfg, opt);

    models::save_checkpoint(result.models, (dir / "model.json").string());
    write_text(dir / "train_log.csv", result.log.to_csv());
    write_text(dir / "config.json", train::to_json(cfg));
    write_text(dir / "dataset.json", graph::to_json(ds));

    Manifest m{"train", argv};
    set_config(m, cfg);
    m.input(a.data);
    if (!a.config.empty()) m.input(a.config);
    for (const char* f : {"model.json", "model.json.bin", "train_log.csv", "config.json", "dataset.json"}) m.output(dir / f);
    m.extra["threads"] = opt.threads;
    m.write(dir / "manifest.json");

    const auto& last = result.log.epochs.back();
    std::cout << "trained " << result.log.epochs.size() << " epochs; teacher acc train/val/test " << last.teacher_train_acc
              << " / " << last.teacher_val_acc << " / " << last.teacher_test_acc << "\n";
    for (std::size_t i = 0; i < result.log.students.size(); ++i)
        std::cout << "  " << train::to_string(result.log.students[i]) << " val acc " << last.students[i].val_acc << "\n";
    std::cout << "checkpoint -> " << dir.string() << "\n";
    return kOk;
}

// ---- explain ----

struct ExplainArgs {
    std::string checkpoint, data, target_kind, out, dot;
    std::size_t id = 0;
    std::optional<std::size_t> k, hops;
    std::optional<double> d, threshold;
    bool features = false;
    std::size_t threads = 0;
};

explain::MaskSource source_of(const train::RunConfig& c) {
    return c.mask_input == train::MaskInput::Embeddings ? explain::MaskSource::Embeddings : explain::MaskSource::RawFeatures;
}

std::size_t argmax_row(const num::Tensor& t, std::size_t r) {
    const auto row = t.row(r);
    return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

json feature_attribution(models::ModelBundle& b, const graph::Graph& g, std::optional<std::size_t> node) {
    if (!b.feature_student) throw UsageError("--features: checkpoint has no feature-mlp student");
    const auto folded = explain::fold_batchnorm(b.feature_student->mlp);
    const num::Tensor& x = g.features();
    const std::vector<double> ref(x.cols(), 0.0);
    const num::Tensor logits = folded.forward(x);
    if (node) {
        const std::size_t cls = argmax_row(logits, *node);
        num::Tensor row(1, x.cols());
        std::copy(x.row(*node).begin(), x.row(*node).end(), row.data().begin());
        auto a = explain::deeplift_rows(folded, row, ref, {cls}).front();
        a.instance = *node;
        return json::parse(explain::to_json(a));
    }
    num::Tensor pooled(1, logits.cols());
    for (std::size_t r = 0; r < logits.rows(); ++r)
        for (std::size_t c = 0; c < logits.cols(); ++c) pooled(0, c) += logits(r, c) / static_cast<double>(logits.rows());
    const std::size_t cls = argmax_row(pooled, 0);
    const auto rows = explain::deeplift_rows(folded, x, ref, std::vector<std::size_t>(x.rows(), cls));
    return json::parse(explain::to_json(explain::mean_attribution(rows, 0)));
}

int run_explain(const ExplainArgs& a, const std::vector<std::string>& argv) {
    if (a.target_kind != "node" && a.target_kind != "graph") throw UsageError("--target must be 'node' or 'graph'");
    auto c = open_checkpoint(a.checkpoint, a.data);
    const bool node_task = c.ds.task == graph::Task::NodeClassification;
    if (node_task != (a.target_kind == "node"))
        throw UsageError("--target " + a.target_kind + " does not match the dataset's " + graph::to_string(c.ds.task) +
                         " task");
    const std::size_t k = a.k.value_or(c.cfg.top_k);
    const double d = a.d.value_or(c.cfg.d);
    if (k == 0) throw UsageError("--k must be positive");
    if (!(d > 0.0 && d < 1.0)) throw UsageError("--d must lie in (0, 1)");

    explain::StructuralExplanation e;
    json features = nullptr;
    if (node_task) {
        const auto& g = c.ds.graphs.at(0);
        if (a.id >= g.num_nodes())
            throw UsageError("node " + std::to_string(a.id) + " out of range (graph has " + std::to_string(g.num_nodes()) +
                             " nodes)");
        const auto in = models::make_node_input(g);
        const auto a_hat = explain::learned_adjacency(c.bundle, in, source_of(c.cfg));
        explain::NodeExplainOptions eo;
        eo.d = d;
        eo.k = k;
        eo.hops = a.hops.value_or(c.bundle.arch.gcn_layers);
        e = explain::explain_node(g, a_hat, a.id, eo);
        if (a.features) features = feature_attribution(c.bundle, g, a.id);
    } else {
        if (a.id >= c.ds.graphs.size())
            throw UsageError("graph " + std::to_string(a.id) + " out of range (dataset has " +
                             std::to_string(c.ds.graphs.size()) + " graphs)");
        double threshold = 0.0;
        if (a.threshold) {
            threshold = *a.threshold;
        } else {
            // Same threshold the evaluation uses: Youden's J on the test split.
            eval::EvalOptions eo;
            eo.source = source_of(c.cfg);
            eo.threads = a.threads ? a.threads : train::env_threads();
            threshold = eval::evaluate(c.ds, c.bundle, eo).threshold.value();
        }
        const auto u = graph::disjoint_union(c.ds, {a.id});
        const auto mask = explain::split_by_graph(
            explain::learned_mask(c.bundle, models::make_graph_input(u), source_of(c.cfg)), u.node_offset);
        e = explain::explain_graph(a.id, c.ds.graphs[a.id], mask.front(), threshold);
        if (a.features) features = feature_attribution(c.bundle, c.ds.graphs[a.id], std::nullopt);
    }

    json doc = json::parse(explain::to_json(e));
    if (node_task) {
        doc["k"] = k;
        doc["d"] = d;
    }
    if (!features.is_null()) doc["feature_attribution"] = features;
    const std::string text = doc.dump(2) + "\n";

    Manifest m{"explain", argv};
    set_config(m, c.cfg);
    m.input(c.model_path);
    m.input(c.data_path);
    if (a.out.empty()) {
        std::cout << text;
    } else {
        write_text(a.out, text);
        m.output(a.out);
    }
    if (!a.dot.empty()) {
        write_text(a.dot, explain::to_dot(e));
        m.output(a.dot);
    }
    if (!a.out.empty() || !a.dot.empty()) m.write(sidecar(a.out.empty() ? a.dot : a.out));
    if (!a.out.empty()) {
        std::cerr << a.target_kind << " " << a.id << ": selected nodes";
        for (auto v : e.selected_nodes) std::cerr << ' ' << v;
        std::cerr << " (" << e.selected_edges.size() << " edges)\n";
    }
    return kOk;
}

// ---- evaluate ----

struct EvaluateArgs {
    std::string checkpoint, data, out, instances, json_out;
    std::optional<std::size_t> k, hops;
    std::optional<double> d;
    std::size_t threads = 0;
};

int run_evaluate(const EvaluateArgs& a, const std::vector<std::string>& argv) {
    auto c = open_checkpoint(a.checkpoint, a.data);
    auto opt = eval::eval_options(c.cfg);
    if (a.k) opt.k = *a.k;
    if (a.d) opt.d = *a.d;
    if (a.hops) opt.hops = *a.hops;
    opt.threads = a.threads ? a.threads : train::env_threads();
    const auto r = eval::evaluate(c.ds, c.bundle, opt);

    Manifest m{"evaluate", argv};
    set_config(m, c.cfg);
    m.input(c.model_path);
    m.input(c.data_path);
    std::cout << r.to_csv();
    if (!a.out.empty()) {
        write_text(a.out, r.to_csv());
        m.output(a.out);
    }
    if (!a.instances.empty()) {
        write_text(a.instances, r.instances_csv());
        m.output(a.instances);
    }
    if (!a.json_out.empty()) {
        write_text(a.json_out, r.to_json());
        m.output(a.json_out);
    }
    if (!m.outputs.empty()) m.write(sidecar(m.outputs.front().get<std::string>()));
    return kOk;
}

// ---- ablate ----

struct AblateArgs {
    std::string data, config, kind, grid, out;
    std::uint64_t seed = 0;
    std::size_t runs = 1;
    std::optional<std::size_t> epochs;
    std::size_t threads = 0;
};

std::string default_grid(eval::AblationKind k) {
    switch (k) {
    case eval::AblationKind::JumpD: return "0.1:0.9:0.1";
    case eval::AblationKind::Lambda: return "0,0.1,0.5,1,2,4";
    case eval::AblationKind::ModelAccuracy: return "0.6:0.9:0.1";
    case eval::AblationKind::KdSetting: return "";
    }
    return "";
}

int run_ablate(const AblateArgs& a, const std::vector<std::string>& argv) {
    eval::AblationKind kind;
    std::vector<double> grid;
    try {
        kind = eval::ablation_from_string(a.kind);
        const std::string g = a.grid.empty() ? default_grid(kind) : a.grid;
        if (kind != eval::AblationKind::KdSetting) grid = eval::parse_grid(g);
    } catch (const ParseError& e) {
        throw UsageError(e.what());
    }
    if (a.runs == 0) throw UsageError("--runs must be positive");
    const auto ds = graph::load_dataset(a.data);
    TrainArgs overrides;
    overrides.seed = a.seed;
    overrides.epochs = a.epochs;
    const auto cfg = resolve_config(ds, a.config, overrides);
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < a.runs; ++i) seeds.push_back(a.seed + i);

    const auto report = eval::ablate(kind, grid, ds, cfg, seeds, a.threads ? a.threads : train::env_threads());
    std::cout << report.to_csv();
    if (!a.out.empty()) {
        write_text(a.out, report.to_csv());
        Manifest m{"ablate", argv};
        set_config(m, cfg);
        m.input(a.data);
        if (!a.config.empty()) m.input(a.config);
        m.extra["kind"] = eval::to_string(kind);
        m.extra["grid"] = grid;
        m.extra["seeds"] = seeds;
        m.output(a.out);
        m.write(sidecar(a.out));
    }
    return kOk;
}

// ---- export-dot ----

int run_export_dot(const std::string& in, const std::string& out, const std::vector<std::string>& argv) {
    const auto e = explain::explanation_from_json(read_text(in));
    const std::string dot = explain::to_dot(e);
    if (out.empty()) {
        std::cout << dot;
        return kOk;
    }
    write_text(out, dot);
    Manifest m{"export-dot", argv};
    m.input(in);
    m.output(out);
    m.write(sidecar(out));
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    tune_allocator();
    std::vector<std::string> args(argv, argv + argc);

    CLI::App app{"Structure-aware explanations of graph neural networks by online knowledge distillation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", SCALE_VERSION);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Write a synthetic benchmark dataset as JSON");
    g->add_option("--dataset", gen.dataset, "ba-shapes, ba-community, tree-cycle, tree-grid or ba-2motifs")->required();
    g->add_option("--seed", gen.seed, "Generation seed");
    g->add_option("--out", gen.out, "Output dataset JSON")->required();

    TrainArgs tr;
    std::uint64_t tr_seed = 0;
    std::size_t tr_epochs = 0;
    double tr_lambda = 0.0, tr_stop = 0.0;
    auto* t = app.add_subcommand("train", "Jointly train the teacher and its students");
    t->add_option("--data", tr.data, "Dataset JSON")->required()->check(CLI::ExistingFile);
    t->add_option("--config", tr.config, "Run configuration JSON; keys override the dataset preset")->check(CLI::ExistingFile);
    t->add_option("--out", tr.out, "Checkpoint directory (created if missing)")->required();
    auto* t_seed = t->add_option("--seed", tr_seed, "Seed for all model randomness");
    auto* t_epochs = t->add_option("--epochs", tr_epochs);
    auto* t_lambda = t->add_option("--lambda", tr_lambda, "Soft-target weight");
    auto* t_stop = t->add_option("--stop-at-val-acc", tr_stop, "Stop once teacher validation accuracy reaches this");
    t->add_option("--students", tr.students, "Comma list of graph-mask, node-edge-weight, feature-mlp");
    t->add_option("--mask-input", tr.mask_input, "embeddings or features");
    t->add_option("--threads", tr.threads, "Student threads (default SCALE_THREADS)");

    ExplainArgs ex;
    std::size_t ex_k = 0, ex_hops = 0;
    double ex_d = 0.0, ex_thr = 0.0;
    auto* e = app.add_subcommand("explain", "Explain one node or graph from a checkpoint");
    e->add_option("--checkpoint", ex.checkpoint, "Checkpoint directory")->required();
    e->add_option("--data", ex.data, "Dataset JSON (default: the checkpoint's copy)");
    e->add_option("--target", ex.target_kind, "node or graph")->required();
    e->add_option("id", ex.id, "Node or graph id")->required();
    auto* e_k = e->add_option("--k", ex_k, "Nodes to select (default from the run config)");
    auto* e_d = e->add_option("--d", ex_d, "Jump probability (default from the run config)");
    auto* e_hops = e->add_option("--hops", ex_hops, "Candidate radius; 0 disables (default GCN depth)");
    auto* e_thr = e->add_option("--threshold", ex_thr, "Edge threshold for graphs (default Youden on the test split)");
    e->add_option("--out", ex.out, "Explanation JSON (default stdout)");
    e->add_option("--dot", ex.dot, "Also write a DOT rendering");
    e->add_flag("--features", ex.features, "Add feature attributions from the feature student");
    e->add_option("--threads", ex.threads);

    EvaluateArgs ev;
    std::size_t ev_k = 0, ev_hops = 0;
    double ev_d = 0.0;
    auto* v = app.add_subcommand("evaluate", "Explanation precision and recall against ground truth");
    v->add_option("--checkpoint", ev.checkpoint, "Checkpoint directory")->required();
    v->add_option("--data", ev.data, "Dataset JSON (default: the checkpoint's copy)");
    auto* v_k = v->add_option("--k", ev_k);
    auto* v_d = v->add_option("--d", ev_d);
    auto* v_hops = v->add_option("--hops", ev_hops);
    v->add_option("--out", ev.out, "Metrics CSV");
    v->add_option("--instances", ev.instances, "Per-instance counts CSV");
    v->add_option("--json", ev.json_out, "Full report JSON");
    v->add_option("--threads", ev.threads);

    AblateArgs ab;
    std::size_t ab_epochs = 0;
    auto* a = app.add_subcommand("ablate", "Sweep one factor and report precision/recall per point and seed");
    a->add_option("--data", ab.data, "Dataset JSON")->required()->check(CLI::ExistingFile);
    a->add_option("--config", ab.config, "Base run configuration JSON")->check(CLI::ExistingFile);
    a->add_option("--kind", ab.kind, "jump_d, lambda, kd_setting or model_accuracy")->required();
    a->add_option("--grid", ab.grid, "start:stop:step or a comma list");
    a->add_option("--seed", ab.seed, "First seed");
    a->add_option("--runs", ab.runs, "Seeds per point (seed, seed+1, ...)");
    auto* a_epochs = a->add_option("--epochs", ab_epochs);
    a->add_option("--out", ab.out, "Long-format CSV");
    a->add_option("--threads", ab.threads, "Parallel training runs (default SCALE_THREADS)");

    std::string dot_in, dot_out;
    auto* x = app.add_subcommand("export-dot", "Render an explanation JSON as Graphviz DOT");
    x->add_option("--explanation", dot_in, "Explanation JSON")->required()->check(CLI::ExistingFile);
    x->add_option("--out", dot_out, "DOT file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*g) return run_generate(gen, args);
        if (*t) {
            if (*t_seed) tr.seed = tr_seed;
            if (*t_epochs) tr.epochs = tr_epochs;
            if (*t_lambda) tr.lambda = tr_lambda;
            if (*t_stop) tr.stop_at = tr_stop;
            return run_train(tr, args);
        }
        if (*e) {
            if (*e_k) ex.k = ex_k;
            if (*e_d) ex.d = ex_d;
            if (*e_hops) ex.hops = ex_hops;
            if (*e_thr) ex.threshold = ex_thr;
            return run_explain(ex, args);
        }
        if (*v) {
            if (*v_k) ev.k = ev_k;
            if (*v_d) ev.d = ev_d;
            if (*v_hops) ev.hops = ev_hops;
            return run_evaluate(ev, args);
        }
        if (*a) {
            if (*a_epochs) ab.epochs = ab_epochs;
            return run_ablate(ab, args);
        }
        if (*x) return run_export_dot(dot_in, dot_out, args);
    } catch (const UsageError& err) {
        std::cerr << "usage error: " << err.what() << "\n";
        return kUsage;
    } catch (const NumericError& err) {
        std::cerr << "numeric failure: " << err.what() << "\n";
        return kNumeric;
    } catch (const IoError& err) {
        std::cerr << "i/o error: " << err.what() << "\n";
        return kIo;
    } catch (const ParseError& err) {
        std::cerr << "invalid input: " << err.what() << "\n";
        return kUsage;
    } catch (const ContractError& err) {
        std::cerr << "invalid input: " << err.what() << "\n";
        return kUsage;
    } catch (const DomainError& err) {
        std::cerr << "invalid input: " << err.what() << "\n";
        return kUsage;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kFailure;
    }
    return kUsage;
}
