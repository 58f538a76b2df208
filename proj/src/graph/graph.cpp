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

#include "scale/graph/graph.hpp"

#include "scale/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>

namespace scale::graph {

Graph::Graph(Init init)
    : num_nodes_(init.num_nodes),
      edges_(std::move(init.edges)),
      features_(std::move(init.features)),
      node_labels_(std::move(init.node_labels)),
      graph_label_(init.graph_label),
      gt_node_mask_(std::move(init.gt_node_mask)),
      gt_edge_mask_(std::move(init.gt_edge_mask)) {
    if (features_.rows() != num_nodes_)
        throw ContractError("Graph: features have " + std::to_string(features_.rows()) + " rows for " +
                            std::to_string(num_nodes_) + " nodes");
    std::vector<Edge> sorted = edges_;
    for (const Edge& e : sorted)
        if (e.src >= num_nodes_ || e.dst >= num_nodes_)
            throw ContractError("Graph: edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) +
                                ") has endpoint >= num_nodes " + std::to_string(num_nodes_));
    std::sort(sorted.begin(), sorted.end());
    if (auto it = std::adjacent_find(sorted.begin(), sorted.end()); it != sorted.end())
        throw ContractError("Graph: duplicate edge (" + std::to_string(it->src) + "," +
                            std::to_string(it->dst) + ")");
    if (node_labels_ && node_labels_->size() != num_nodes_)
        throw ContractError("Graph: node_labels length != num_nodes");
    if (gt_node_mask_ && gt_node_mask_->size() != num_nodes_)
        throw ContractError("Graph: gt_node_mask length != num_nodes");
    if (gt_edge_mask_ && gt_edge_mask_->size() != edges_.size())
        throw ContractError("Graph: gt_edge_mask length != number of edges");
}

std::vector<std::vector<std::size_t>> Graph::adjacency_lists() const {
    std::vector<std::vector<std::size_t>> adj(num_nodes_);
    for (const Edge& e : edges_)
        if (e.src != e.dst) adj[e.src].push_back(e.dst);
    for (auto& l : adj) std::sort(l.begin(), l.end());
    return adj;
}

std::vector<UndirectedEdge> Graph::gt_undirected_edges() const {
    std::set<UndirectedEdge> out;
    if (!gt_edge_mask_) return {};
    for (std::size_t i = 0; i < edges_.size(); ++i)
        if ((*gt_edge_mask_)[i] && edges_[i].src != edges_[i].dst) out.insert(undirected(edges_[i]));
    return {out.begin(), out.end()};
}

std::string to_string(Task t) {
    return t == Task::NodeClassification ? "node-classification" : "graph-classification";
}

Task task_from_string(const std::string& s) {
    if (s == "node-classification" || s == "node") return Task::NodeClassification;
    if (s == "graph-classification" || s == "graph") return Task::GraphClassification;
    throw ParseError("unknown task '" + s + "'");
}

Splits make_splits(std::size_t n, num::Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[num::uniform_index(rng, i)]);
    const auto n_train = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(n)));
    const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(n))));
    Splits s;
    s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.val.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                 idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), idx.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

void Dataset::validate() const {
    if (graphs.empty()) throw ContractError("Dataset: no graphs");
    if (task == Task::NodeClassification && graphs.size() != 1)
        throw ContractError("Dataset: node-classification datasets hold exactly one graph");
    const std::size_t universe = task == Task::NodeClassification ? graphs[0].num_nodes() : graphs.size();
    std::vector<char> seen(universe, 0);
    for (const auto* part : {&splits.train, &splits.val, &splits.test}) {
        for (std::size_t i : *part) {
            if (i >= universe) throw ContractError("Dataset: split index " + std::to_string(i) + " out of range");
            if (seen[i]) throw ContractError("Dataset: splits overlap at index " + std::to_string(i));
            seen[i] = 1;
        }
    }
    const std::size_t d = graphs[0].feature_dim();
    for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
        const Graph& g = graphs[gi];
        if (g.feature_dim() != d) throw ContractError("Dataset: graphs disagree on feature dimension");
        if (task == Task::NodeClassification) {
            if (!g.node_labels()) throw ContractError("Dataset: node task without node_labels");
            for (int l : *g.node_labels())
                if (l < 0 || static_cast<std::size_t>(l) >= num_classes)
                    throw ContractError("Dataset: node label out of range");
        } else {
            if (!g.graph_label()) throw ContractError("Dataset: graph " + std::to_string(gi) + " without graph_label");
            if (*g.graph_label() < 0 || static_cast<std::size_t>(*g.graph_label()) >= num_classes)
                throw ContractError("Dataset: graph label out of range");
        }
    }
}

std::size_t Dataset::total_nodes() const {
    std::size_t n = 0;
    for (const auto& g : graphs) n += g.num_nodes();
    return n;
}

num::SparseMatrix build_adjacency(const Graph& g, bool add_self_loops) {
    std::vector<num::Triplet> t;
    t.reserve(g.num_edges() + (add_self_loops ? g.num_nodes() : 0));
    for (const Edge& e : g.edges()) t.push_back({e.src, e.dst, 1.0});
    if (add_self_loops)
        for (std::size_t i = 0; i < g.num_nodes(); ++i) t.push_back({i, i, 1.0});
    auto a = num::SparseMatrix::from_triplets(g.num_nodes(), g.num_nodes(), std::move(t));
    // An explicit self-loop arc plus the added loop would sum to 2; keep it binary.
    auto vals = a.values();
    for (double& v : vals) v = 1.0;
    return a.with_values(std::move(vals));
}

NormalizedAdjacency symmetric_normalize(const num::SparseMatrix& a) {
    if (a.rows() != a.cols()) throw ShapeError("symmetric_normalize: matrix is not square");
    const auto deg = a.row_sums();
    std::vector<double> inv_sqrt(deg.size());
    for (std::size_t i = 0; i < deg.size(); ++i) {
        if (!(deg[i] > 0.0)) throw DomainError("symmetric_normalize: row " + std::to_string(i) + " has zero degree");
        inv_sqrt[i] = 1.0 / std::sqrt(deg[i]);
    }
    std::vector<double> vals = a.values();
    const auto rows = a.entry_rows();
    for (std::size_t k = 0; k < vals.size(); ++k) vals[k] *= inv_sqrt[rows[k]] * inv_sqrt[a.indices()[k]];
    return {a.with_values(std::move(vals))};
}

std::vector<std::size_t> khop_neighborhood(const Graph& g, std::size_t center, std::size_t k) {
    if (center >= g.num_nodes())
        throw ContractError("khop_neighborhood: center " + std::to_string(center) + " out of range");
    const auto adj = g.adjacency_lists();
    std::vector<std::size_t> dist(g.num_nodes(), SIZE_MAX);
    std::deque<std::size_t> q{center};
    dist[center] = 0;
    std::vector<std::size_t> out{center};
    while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop_front();
        if (dist[u] == k) continue;
        for (std::size_t v : adj[u]) {
            if (dist[v] != SIZE_MAX) continue;
            dist[v] = dist[u] + 1;
            out.push_back(v);
            q.push_back(v);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<long> motif_components(const Graph& g) {
    std::vector<long> comp(g.num_nodes(), -1);
    if (!g.gt_edge_mask()) return comp;
    std::vector<std::vector<std::size_t>> adj(g.num_nodes());
    for (std::size_t i = 0; i < g.num_edges(); ++i) {
        if (!(*g.gt_edge_mask())[i]) continue;
        const Edge e = g.edges()[i];
        if (e.src == e.dst) continue;
        adj[e.src].push_back(e.dst);
        adj[e.dst].push_back(e.src);
    }
    long next = 0;
    for (std::size_t s = 0; s < g.num_nodes(); ++s) {
        if (comp[s] != -1 || adj[s].empty()) continue;
        std::vector<std::size_t> stack{s};
        comp[s] = next;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t v : adj[u])
                if (comp[v] == -1) {
                    comp[v] = next;
                    stack.push_back(v);
                }
        }
        ++next;
    }
    return comp;
}

GraphUnion disjoint_union(const Dataset& ds, const std::vector<std::size_t>& graph_ids) {
    Graph::Init init;
    std::vector<std::size_t> node_off{0}, edge_off{0};
    bool labels = true, node_mask = true, edge_mask = true;
    std::size_t n = 0;
    for (std::size_t id : graph_ids) {
        const Graph& g = ds.graphs.at(id);
        n += g.num_nodes();
        labels = labels && g.node_labels().has_value();
        node_mask = node_mask && g.gt_node_mask().has_value();
        edge_mask = edge_mask && g.gt_edge_mask().has_value();
    }
    const std::size_t d = ds.graphs.empty() ? 0 : ds.graphs[0].feature_dim();
    init.num_nodes = n;
    init.features = num::Tensor(n, d);
    if (labels) init.node_labels.emplace();
    if (node_mask) init.gt_node_mask.emplace();
    if (edge_mask) init.gt_edge_mask.emplace();
    std::size_t base = 0;
    for (std::size_t id : graph_ids) {
        const Graph& g = ds.graphs[id];
        for (const Edge& e : g.edges()) init.edges.push_back({e.src + base, e.dst + base});
        for (std::size_t r = 0; r < g.num_nodes(); ++r)
            std::copy_n(g.features().row(r).begin(), d, init.features.row(base + r).begin());
        if (labels) init.node_labels->insert(init.node_labels->end(), g.node_labels()->begin(), g.node_labels()->end());
        if (node_mask)
            init.gt_node_mask->insert(init.gt_node_mask->end(), g.gt_node_mask()->begin(), g.gt_node_mask()->end());
        if (edge_mask)
            init.gt_edge_mask->insert(init.gt_edge_mask->end(), g.gt_edge_mask()->begin(), g.gt_edge_mask()->end());
        base += g.num_nodes();
        node_off.push_back(base);
        edge_off.push_back(init.edges.size());
    }
    return GraphUnion{Graph(std::move(init)), std::move(node_off), std::move(edge_off), graph_ids};
}

} // namespace scale::graph
