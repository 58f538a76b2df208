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

#include "scale/synth/generators.hpp"

#include "scale/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace scale::synth {

using graph::Dataset;
using graph::Edge;
using graph::Graph;
using num::Rng;
using num::Tensor;

MotifSpec motif(MotifKind kind) {
    switch (kind) {
    case MotifKind::House:
        // 0,1 middle pair (roof attaches here), 2,3 bottom pair, 4 top.
        return {kind, {2, 2, 3, 3, 1}, {{0, 1}, {1, 3}, {3, 2}, {2, 0}, {4, 0}, {4, 1}}};
    case MotifKind::Cycle6:
        return {kind, {1, 1, 1, 1, 1, 1}, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}}};
    case MotifKind::Cycle5:
        return {kind, {1, 1, 1, 1, 1}, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}}};
    case MotifKind::Grid3x3: {
        MotifSpec s{kind, std::vector<int>(9, 1), {}};
        for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t c = 0; c < 3; ++c) {
                const std::size_t u = r * 3 + c;
                if (c + 1 < 3) s.edges.push_back({u, u + 1});
                if (r + 1 < 3) s.edges.push_back({u, u + 3});
            }
        return s;
    }
    }
    throw ContractError("unknown motif kind");
}

void GenConfig::validate() const {
    if (base_nodes == 0 || motif_count == 0 || attach_m == 0 || feature_dim == 0 || graph_base_nodes == 0)
        throw ContractError("GenConfig: counts must be positive");
    if (!(perturbation_ratio >= 0.0 && perturbation_ratio < 1.0))
        throw ContractError("GenConfig: perturbation ratio must lie in [0, 1)");
}

namespace {

// Accumulates undirected edges once each, then emits both arcs.
class Builder {
public:
    explicit Builder(std::size_t n) : n_(n) {}

    std::size_t num_nodes() const { return n_; }
    std::size_t add_nodes(std::size_t k) {
        const std::size_t first = n_;
        n_ += k;
        return first;
    }

    bool has(std::size_t u, std::size_t v) const { return present_.count(key(u, v)) > 0; }

    bool add(std::size_t u, std::size_t v, bool gt) {
        if (u == v || has(u, v)) return false;
        present_.insert(key(u, v));
        edges_.push_back({u, v});
        gt_.push_back(gt);
        return true;
    }

    std::size_t undirected_count() const { return edges_.size(); }

    Graph::Init finish() const {
        Graph::Init init;
        init.num_nodes = n_;
        init.gt_edge_mask.emplace();
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            init.edges.push_back({edges_[i].first, edges_[i].second});
            init.edges.push_back({edges_[i].second, edges_[i].first});
            init.gt_edge_mask->push_back(gt_[i]);
            init.gt_edge_mask->push_back(gt_[i]);
        }
        return init;
    }

private:
    static std::pair<std::size_t, std::size_t> key(std::size_t u, std::size_t v) {
        return u < v ? std::pair{u, v} : std::pair{v, u};
    }

    std::size_t n_;
    std::set<std::pair<std::size_t, std::size_t>> present_;
    std::vector<std::pair<std::size_t, std::size_t>> edges_;
    std::vector<bool> gt_;
};

// Preferential attachment into an existing builder over nodes [first, first + n).
void grow_ba(Builder& b, std::size_t first, std::size_t n, std::size_t m, Rng& rng) {
    std::vector<std::size_t> endpoints; // node repeated once per incident edge
    for (std::size_t i = 0; i < m && i < n; ++i)
        for (std::size_t j = i + 1; j < m && j < n; ++j) {
            b.add(first + i, first + j, false);
            endpoints.push_back(first + i);
            endpoints.push_back(first + j);
        }
    for (std::size_t u = m; u < n; ++u) {
        std::set<std::size_t> targets;
        while (targets.size() < m) {
            const std::size_t t = endpoints.empty() ? first + num::uniform_index(rng, u)
                                                    : endpoints[num::uniform_index(rng, endpoints.size())];
            targets.insert(t);
            // Fewer than m distinct candidates can exist only while the seed clique is degree-free.
            if (endpoints.empty() && targets.size() == u) break;
        }
        for (std::size_t t : targets) {
            b.add(first + u, t, false);
            endpoints.push_back(first + u);
            endpoints.push_back(t);
        }
    }
}

// Adds a motif whose node 0 is bridged to `anchor`; returns the motif's first node id.
std::size_t attach_motif(Builder& b, const MotifSpec& spec, std::size_t anchor) {
    const std::size_t first = b.add_nodes(spec.size());
    for (auto [u, v] : spec.edges) b.add(first + u, first + v, true);
    b.add(first, anchor, false);
    return first;
}

void perturb(Builder& b, std::size_t count, Rng& rng) {
    const std::size_t n = b.num_nodes();
    std::size_t added = 0;
    while (added < count) {
        const std::size_t u = num::uniform_index(rng, n), v = num::uniform_index(rng, n);
        if (b.add(u, v, false)) ++added;
    }
}

std::size_t perturbation_count(double ratio, std::size_t motif_edges) {
    return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(motif_edges)));
}

void check_nodes(const GenConfig& cfg, std::size_t actual, const std::string& what) {
    if (cfg.expected_nodes != 0 && cfg.expected_nodes != actual)
        throw ContractError(what + ": construction yields " + std::to_string(actual) + " nodes, config expects " +
                            std::to_string(cfg.expected_nodes));
}

// Node-task graph: base nodes labelled 0, motif nodes labelled by role (offset by `label_base`).
struct PlantedGraph {
    Builder builder{0};
    std::vector<int> labels;
    std::vector<bool> node_mask;
};

PlantedGraph plant(std::size_t base_nodes, const MotifSpec& spec, std::size_t count, Rng& rng,
                   const std::function<void(Builder&)>& build_base) {
    PlantedGraph pg;
    pg.builder = Builder(base_nodes);
    build_base(pg.builder);
    pg.labels.assign(base_nodes, 0);
    pg.node_mask.assign(base_nodes, false);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t anchor = num::uniform_index(rng, base_nodes);
        attach_motif(pg.builder, spec, anchor);
        pg.labels.insert(pg.labels.end(), spec.roles.begin(), spec.roles.end());
        pg.node_mask.insert(pg.node_mask.end(), spec.size(), true);
    }
    return pg;
}

Dataset node_dataset(std::string name, std::size_t classes, Graph::Init init, Rng& split_rng) {
    Dataset ds;
    ds.name = std::move(name);
    ds.task = graph::Task::NodeClassification;
    ds.num_classes = classes;
    const std::size_t n = init.num_nodes;
    ds.graphs.emplace_back(std::move(init));
    ds.splits = graph::make_splits(n, split_rng);
    ds.validate();
    return ds;
}

} // namespace

Graph gen_ba(std::size_t n, std::size_t m, Rng& rng) {
    if (m == 0 || n <= m) throw ContractError("gen_ba: requires n > m >= 1");
    Builder b(n);
    grow_ba(b, 0, n, m, rng);
    Graph::Init init = b.finish();
    init.features = Tensor::ones(n, 1);
    init.gt_edge_mask.reset();
    return Graph(std::move(init));
}

Dataset gen_ba_shapes(const GenConfig& cfg) {
    cfg.validate();
    const MotifSpec house = motif(MotifKind::House);
    check_nodes(cfg, cfg.base_nodes + cfg.motif_count * house.size(), "ba-shapes");
    Rng rng = num::make_rng(cfg.seed, "structure");
    PlantedGraph pg = plant(cfg.base_nodes, house, cfg.motif_count, rng,
                            [&](Builder& b) { grow_ba(b, 0, cfg.base_nodes, cfg.attach_m, rng); });
    perturb(pg.builder, perturbation_count(cfg.perturbation_ratio, cfg.motif_count * house.edges.size()), rng);
    Graph::Init init = pg.builder.finish();
    init.features = Tensor::ones(init.num_nodes, cfg.feature_dim);
    init.node_labels = std::move(pg.labels);
    init.gt_node_mask = std::move(pg.node_mask);
    Rng split_rng = num::make_rng(cfg.seed, "splits");
    return node_dataset("ba-shapes", 4, std::move(init), split_rng);
}

Dataset gen_ba_community(const GenConfig& cfg) {
    cfg.validate();
    const MotifSpec house = motif(MotifKind::House);
    const std::size_t half = cfg.base_nodes + cfg.motif_count * house.size();
    check_nodes(cfg, 2 * half, "ba-community");
    Rng rng = num::make_rng(cfg.seed, "structure");
    Builder all(0);
    std::vector<int> labels;
    std::vector<bool> node_mask;
    for (int community = 0; community < 2; ++community) {
        PlantedGraph pg = plant(cfg.base_nodes, house, cfg.motif_count, rng,
                                [&](Builder& b) { grow_ba(b, 0, cfg.base_nodes, cfg.attach_m, rng); });
        perturb(pg.builder, perturbation_count(cfg.perturbation_ratio, cfg.motif_count * house.edges.size()), rng);
        const Graph::Init part = pg.builder.finish();
        const std::size_t offset = all.add_nodes(part.num_nodes);
        for (std::size_t i = 0; i < part.edges.size(); i += 2)
            all.add(part.edges[i].src + offset, part.edges[i].dst + offset, (*part.gt_edge_mask)[i]);
        for (int l : pg.labels) labels.push_back(l + 4 * community);
        node_mask.insert(node_mask.end(), pg.node_mask.begin(), pg.node_mask.end());
    }
    // Inter-community edges join the two halves.
    const std::size_t bridges = perturbation_count(cfg.perturbation_ratio, 2 * cfg.motif_count * house.edges.size());
    std::size_t added = 0;
    while (added < std::max<std::size_t>(bridges, 1)) {
        const std::size_t u = num::uniform_index(rng, half), v = half + num::uniform_index(rng, half);
        if (all.add(u, v, false)) ++added;
    }
    Graph::Init init = all.finish();
    init.features = Tensor(init.num_nodes, cfg.feature_dim);
    Rng feat_rng = num::make_rng(cfg.seed, "features");
    for (std::size_t r = 0; r < init.num_nodes; ++r) {
        const double mu = r < half ? 0.0 : cfg.community_offset;
        for (double& v : init.features.row(r)) v = mu + num::standard_normal(feat_rng);
    }
    init.node_labels = std::move(labels);
    init.gt_node_mask = std::move(node_mask);
    Rng split_rng = num::make_rng(cfg.seed, "splits");
    return node_dataset("ba-community", 8, std::move(init), split_rng);
}

Dataset gen_tree_motif(MotifKind kind, const GenConfig& cfg) {
    cfg.validate();
    if (kind != MotifKind::Cycle6 && kind != MotifKind::Grid3x3)
        throw ContractError("gen_tree_motif: motif must be cycle6 or grid3x3");
    const MotifSpec spec = motif(kind);
    const std::string name = kind == MotifKind::Cycle6 ? "tree-cycle" : "tree-grid";
    check_nodes(cfg, cfg.base_nodes + cfg.motif_count * spec.size(), name);
    Rng rng = num::make_rng(cfg.seed, "structure");
    PlantedGraph pg = plant(cfg.base_nodes, spec, cfg.motif_count, rng, [&](Builder& b) {
        // Balanced binary tree in heap order: children of i are 2i+1 and 2i+2.
        for (std::size_t i = 1; i < cfg.base_nodes; ++i) b.add((i - 1) / 2, i, false);
    });
    perturb(pg.builder, perturbation_count(cfg.perturbation_ratio, cfg.motif_count * spec.edges.size()), rng);
    Graph::Init init = pg.builder.finish();
    init.features = Tensor::ones(init.num_nodes, cfg.feature_dim);
    init.node_labels = std::move(pg.labels);
    init.gt_node_mask = std::move(pg.node_mask);
    Rng split_rng = num::make_rng(cfg.seed, "splits");
    return node_dataset(name, 2, std::move(init), split_rng);
}

Dataset gen_ba2motifs(const GenConfig& cfg) {
    cfg.validate();
    Rng rng = num::make_rng(cfg.seed, "structure");
    Dataset ds;
    ds.name = "ba-2motifs";
    ds.task = graph::Task::GraphClassification;
    ds.num_classes = 2;
    const std::size_t n_graphs = cfg.motif_count;
    for (std::size_t gi = 0; gi < n_graphs; ++gi) {
        const bool house = gi < n_graphs / 2;
        const MotifSpec spec = motif(house ? MotifKind::House : MotifKind::Cycle5);
        Builder b(cfg.graph_base_nodes);
        grow_ba(b, 0, cfg.graph_base_nodes, cfg.attach_m, rng);
        attach_motif(b, spec, num::uniform_index(rng, cfg.graph_base_nodes));
        perturb(b, perturbation_count(cfg.perturbation_ratio, spec.edges.size()), rng);
        Graph::Init init = b.finish();
        init.features = Tensor::ones(init.num_nodes, cfg.feature_dim);
        init.graph_label = house ? 0 : 1;
        init.gt_node_mask = std::vector<bool>(cfg.graph_base_nodes, false);
        init.gt_node_mask->resize(init.num_nodes, true);
        ds.graphs.emplace_back(std::move(init));
    }
    check_nodes(cfg, ds.total_nodes(), "ba-2motifs");
    Rng split_rng = num::make_rng(cfg.seed, "splits");
    ds.splits = graph::make_splits(n_graphs, split_rng);
    ds.validate();
    return ds;
}

const std::vector<std::string>& dataset_names() {
    static const std::vector<std::string> names{"ba-shapes", "ba-community", "tree-cycle", "tree-grid", "ba-2motifs"};
    return names;
}

bool is_known_dataset(const std::string& name) {
    const auto& n = dataset_names();
    return std::find(n.begin(), n.end(), name) != n.end();
}

GenConfig default_config(const std::string& name, std::uint64_t seed) {
    GenConfig c;
    c.seed = seed;
    if (name == "ba-shapes") {
        c.base_nodes = 300, c.motif_count = 80, c.attach_m = 5, c.expected_nodes = 700;
    } else if (name == "ba-community") {
        c.base_nodes = 300, c.motif_count = 80, c.attach_m = 5, c.expected_nodes = 1400;
    } else if (name == "tree-cycle") {
        c.base_nodes = 511, c.motif_count = 60, c.expected_nodes = 871;
    } else if (name == "tree-grid") {
        c.base_nodes = 511, c.motif_count = 80, c.expected_nodes = 1231;
    } else if (name == "ba-2motifs") {
        c.base_nodes = 20, c.graph_base_nodes = 20, c.motif_count = 1000, c.attach_m = 1;
        c.perturbation_ratio = 0.0, c.expected_nodes = 25000;
    } else {
        throw ContractError("unknown dataset '" + name + "'");
    }
    return c;
}

Dataset generate(const std::string& name, const GenConfig& cfg) {
    if (name == "ba-shapes") return gen_ba_shapes(cfg);
    if (name == "ba-community") return gen_ba_community(cfg);
    if (name == "tree-cycle") return gen_tree_motif(MotifKind::Cycle6, cfg);
    if (name == "tree-grid") return gen_tree_motif(MotifKind::Grid3x3, cfg);
    if (name == "ba-2motifs") return gen_ba2motifs(cfg);
    throw ContractError("unknown dataset '" + name + "'");
}

Dataset generate(const std::string& name, std::uint64_t seed) { return generate(name, default_config(name, seed)); }

std::size_t motif_size(const std::string& name) {
    if (name == "ba-shapes" || name == "ba-community" || name == "ba-2motifs") return 5;
    if (name == "tree-cycle") return 6;
    if (name == "tree-grid") return 9;
    throw ContractError("no motif size for dataset '" + name + "'");
}

} // namespace scale::synth
