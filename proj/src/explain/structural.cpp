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

#include "scale/explain/structural.hpp"

#include "scale/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

namespace scale::explain {

using nlohmann::json;

RwrResult rwr(const SparseMatrix& p, const std::vector<double>& r0, double d, std::size_t max_iter, double tol) {
    if (p.rows() != p.cols()) throw ShapeError("rwr: transition must be square");
    if (r0.size() != p.rows()) throw ShapeError("rwr: restart vector length != transition size");
    if (!(d >= 0.0 && d < 1.0)) throw DomainError("rwr: d must lie in [0, 1)");
    const auto cs = p.col_sums();
    for (std::size_t c = 0; c < cs.size(); ++c)
        if (std::abs(cs[c] - 1.0) > 1e-8)
            throw ContractError("rwr: transition column " + std::to_string(c) + " sums to " + std::to_string(cs[c]));
    double mass = 0.0;
    for (double v : r0) {
        if (v < 0.0) throw ContractError("rwr: restart vector has a negative entry");
        mass += v;
    }
    if (std::abs(mass - 1.0) > 1e-10) throw ContractError("rwr: restart vector does not sum to 1");

    RwrResult out;
    std::vector<double> r = r0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        std::vector<double> next = p.multiply(r);
        double delta = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i) {
            next[i] = (1.0 - d) * r0[i] + d * next[i];
            delta += std::abs(next[i] - r[i]);
        }
        r.swap(next);
        out.iterations = it + 1;
        out.residual = delta;
        if (delta < tol) {
            out.converged = true;
            break;
        }
    }
    const double total = std::accumulate(r.begin(), r.end(), 0.0);
    for (double& v : r) v /= total;
    out.scores = std::move(r);
    return out;
}

SparseMatrix column_transition(const SparseMatrix& a_hat) {
    if (a_hat.rows() != a_hat.cols()) throw ShapeError("column_transition: adjacency must be square");
    SparseMatrix t = a_hat.transpose();
    std::vector<double> vals = t.values();
    const auto rows = t.entry_rows();
    // Column c of t is row c of Â. The student's self-loops are not graph edges, so the
    // walker leaves through real edges; a node with no other edge keeps its self-loop.
    std::vector<double> off_diag(t.cols(), 0.0);
    for (std::size_t k = 0; k < vals.size(); ++k)
        if (rows[k] != t.indices()[k]) off_diag[t.indices()[k]] += vals[k];
    for (std::size_t k = 0; k < vals.size(); ++k)
        if (rows[k] == t.indices()[k] && off_diag[rows[k]] > 0.0) vals[k] = 0.0;
    t = t.with_values(std::move(vals));
    const auto cs = t.col_sums();
    vals = t.values();
    for (std::size_t k = 0; k < vals.size(); ++k) {
        const double s = cs[t.indices()[k]];
        if (!(s > 0.0)) throw ContractError("column_transition: row " + std::to_string(t.indices()[k]) + " of the adjacency has no mass");
        vals[k] /= s;
    }
    return t.with_values(std::move(vals));
}

namespace {

std::vector<graph::UndirectedEdge> induced_edges(const graph::Graph& g, const std::vector<std::size_t>& nodes) {
    std::vector<char> in(g.num_nodes(), 0);
    for (auto v : nodes) in[v] = 1;
    std::set<graph::UndirectedEdge> out;
    for (const auto& e : g.edges())
        if (e.src != e.dst && in[e.src] && in[e.dst]) out.insert(graph::undirected(e));
    return {out.begin(), out.end()};
}

} // namespace

StructuralExplanation explain_node(const graph::Graph& g, const SparseMatrix& a_hat, std::size_t target,
                                   const NodeExplainOptions& opt) {
    if (target >= g.num_nodes())
        throw ContractError("explain_node: target " + std::to_string(target) + " out of range (" +
                            std::to_string(g.num_nodes()) + " nodes)");
    if (a_hat.rows() != g.num_nodes()) throw ShapeError("explain_node: adjacency size != node count");
    if (opt.k == 0) throw ContractError("explain_node: k must be positive");

    std::vector<double> r0(g.num_nodes(), 0.0);
    r0[target] = 1.0;
    const RwrResult walk = rwr(column_transition(a_hat), r0, opt.d, opt.max_iter, opt.tol);

    StructuralExplanation e;
    e.kind = StructuralExplanation::Kind::Node;
    e.target = target;
    e.node_scores = walk.scores;
    e.rwr_iterations = walk.iterations;

    const auto rows = a_hat.entry_rows();
    for (std::size_t k = 0; k < a_hat.nnz(); ++k) {
        const std::size_t i = rows[k], j = a_hat.indices()[k];
        if (i == j || walk.scores[i] == 0.0) continue;
        e.edge_scores.push_back({i, j, walk.scores[i] * a_hat.values()[k]});
    }

    std::vector<std::size_t> candidates;
    if (opt.hops > 0) {
        candidates = graph::khop_neighborhood(g, target, opt.hops);
    } else {
        candidates.resize(g.num_nodes());
        std::iota(candidates.begin(), candidates.end(), 0);
    }
    candidates.erase(std::remove(candidates.begin(), candidates.end(), target), candidates.end());
    const std::size_t take = std::min(opt.k - 1, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (walk.scores[a] != walk.scores[b]) return walk.scores[a] > walk.scores[b];
                          return a < b;
                      });
    e.selected_nodes.push_back(target);
    e.selected_nodes.insert(e.selected_nodes.end(), candidates.begin(),
                            candidates.begin() + static_cast<std::ptrdiff_t>(take));
    e.selected_edges = induced_edges(g, e.selected_nodes);
    return e;
}

std::vector<EdgeScore> undirected_edge_scores(const graph::Graph& g, const SparseMatrix& mask) {
    if (mask.rows() != g.num_nodes()) throw ShapeError("undirected_edge_scores: mask size != node count");
    std::map<graph::UndirectedEdge, std::pair<double, int>> acc;
    for (const auto& e : g.edges()) {
        if (e.src == e.dst) continue;
        const std::size_t k = mask.find(e.src, e.dst);
        if (k == mask.nnz()) throw ContractError("undirected_edge_scores: arc missing from mask support");
        auto& slot = acc[graph::undirected(e)];
        slot.first += mask.values()[k];
        slot.second += 1;
    }
    std::vector<EdgeScore> out;
    out.reserve(acc.size());
    for (const auto& [uv, s] : acc) out.push_back({uv.first, uv.second, s.first / s.second});
    return out;
}

StructuralExplanation explain_graph(std::size_t graph_id, const graph::Graph& g, const SparseMatrix& mask,
                                    double threshold) {
    StructuralExplanation e;
    e.kind = StructuralExplanation::Kind::Graph;
    e.target = graph_id;
    e.edge_scores = undirected_edge_scores(g, mask);
    e.threshold = threshold;
    std::set<std::size_t> nodes;
    for (const auto& s : e.edge_scores)
        if (s.score > threshold) {
            e.selected_edges.push_back({s.src, s.dst});
            nodes.insert(s.src);
            nodes.insert(s.dst);
        }
    e.selected_nodes.assign(nodes.begin(), nodes.end());
    return e;
}

namespace {

num::Tensor mask_input(models::ModelBundle& b, const models::GraphInput& in, MaskSource src) {
    if (src == MaskSource::RawFeatures) return in.features;
    num::Tape t;
    return models::teacher_forward(t, b.teacher, in).embeddings.value();
}

SparseMatrix on_pattern(const models::GraphInput& in, const num::Tensor& values) {
    const auto v = values.data();
    return in.adj_norm.with_values({v.begin(), v.end()});
}

} // namespace

SparseMatrix learned_adjacency(models::ModelBundle& b, const models::GraphInput& in, MaskSource src) {
    if (!b.node_student) throw ContractError("learned_adjacency: model bundle has no node-edge-weight student");
    const num::Tensor h = mask_input(b, in, src);
    num::Tape t;
    const auto out = models::node_student_forward(t, *b.node_student, in, t.constant(h), num::Mode::Infer);
    return on_pattern(in, out.edge_values.value());
}

SparseMatrix learned_mask(models::ModelBundle& b, const models::GraphInput& in, MaskSource src) {
    if (!b.graph_student) throw ContractError("learned_mask: model bundle has no graph-mask student");
    const num::Tensor h = mask_input(b, in, src);
    num::Tape t;
    const auto m = models::compute_mask(t, b.graph_student->mask, t.constant(h), in, num::Mode::Infer);
    return on_pattern(in, m.value());
}

std::vector<SparseMatrix> split_by_graph(const SparseMatrix& m, const std::vector<std::size_t>& node_offset) {
    std::vector<SparseMatrix> out;
    const auto& off = m.offsets();
    for (std::size_t gi = 0; gi + 1 < node_offset.size(); ++gi) {
        const std::size_t lo = node_offset[gi], hi = node_offset[gi + 1];
        std::vector<num::Triplet> t;
        for (std::size_t r = lo; r < hi; ++r)
            for (std::size_t k = off[r]; k < off[r + 1]; ++k) {
                const std::size_t c = m.indices()[k];
                if (c < lo || c >= hi) throw ContractError("split_by_graph: entry crosses member graphs");
                t.push_back({r - lo, c - lo, m.values()[k]});
            }
        out.push_back(SparseMatrix::from_triplets(hi - lo, hi - lo, std::move(t)));
    }
    return out;
}

std::string to_json(const StructuralExplanation& e, std::size_t max_scores) {
    json j;
    j["kind"] = e.kind == StructuralExplanation::Kind::Node ? "node" : "graph";
    j["target"] = e.target;
    j["selected_nodes"] = e.selected_nodes;
    json sel = json::array();
    for (const auto& [u, v] : e.selected_edges) sel.push_back({u, v});
    j["selected_edges"] = sel;
    j["threshold"] = e.threshold ? json(*e.threshold) : json(nullptr);
    if (e.kind == StructuralExplanation::Kind::Node) j["rwr_iterations"] = e.rwr_iterations;

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < e.node_scores.size(); ++i)
        if (e.node_scores[i] > 0.0) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return e.node_scores[a] > e.node_scores[b]; });
    if (max_scores && order.size() > max_scores) order.resize(max_scores);
    json ns = json::array();
    for (auto i : order) ns.push_back({{"node", i}, {"score", e.node_scores[i]}});
    j["node_scores"] = ns;

    std::vector<EdgeScore> edges = e.edge_scores;
    std::stable_sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
    if (max_scores && edges.size() > max_scores) edges.resize(max_scores);
    json es = json::array();
    for (const auto& s : edges) es.push_back({{"src", s.src}, {"dst", s.dst}, {"score", s.score}});
    j["edge_scores"] = es;
    return j.dump(2) + "\n";
}

StructuralExplanation explanation_from_json(const std::string& text) {
    StructuralExplanation e;
    try {
        const json j = json::parse(text);
        const std::string kind = j.at("kind").get<std::string>();
        if (kind != "node" && kind != "graph") throw ParseError("explanation: kind must be 'node' or 'graph'");
        e.kind = kind == "node" ? StructuralExplanation::Kind::Node : StructuralExplanation::Kind::Graph;
        e.target = j.at("target").get<std::size_t>();
        e.selected_nodes = j.at("selected_nodes").get<std::vector<std::size_t>>();
        for (const auto& p : j.at("selected_edges")) e.selected_edges.push_back({p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>()});
        if (!j.at("threshold").is_null()) e.threshold = j["threshold"].get<double>();
        if (j.contains("rwr_iterations")) e.rwr_iterations = j["rwr_iterations"].get<std::size_t>();
        for (const auto& n : j.at("node_scores")) {
            const auto v = n.at("node").get<std::size_t>();
            if (v >= e.node_scores.size()) e.node_scores.resize(v + 1, 0.0);
            e.node_scores[v] = n.at("score").get<double>();
        }
        for (const auto& s : j.at("edge_scores"))
            e.edge_scores.push_back({s.at("src").get<std::size_t>(), s.at("dst").get<std::size_t>(), s.at("score").get<double>()});
    } catch (const json::exception& ex) {
        throw ParseError(std::string("explanation: ") + ex.what());
    }
    return e;
}

std::string to_dot(const StructuralExplanation& e) {
    double top = 0.0;
    for (const auto& s : e.edge_scores) top = std::max(top, s.score);
    const std::set<graph::UndirectedEdge> selected(e.selected_edges.begin(), e.selected_edges.end());
    const bool directed = e.kind == StructuralExplanation::Kind::Node;
    std::ostringstream os;
    os.precision(6);
    os << (directed ? "digraph" : "graph") << " explanation {\n";
    os << "  node [shape=circle];\n";
    if (directed) os << "  " << e.target << " [shape=doublecircle];\n";
    for (auto v : e.selected_nodes)
        if (v != e.target || !directed) os << "  " << v << " [style=filled, fillcolor=lightgrey];\n";
    std::vector<EdgeScore> edges = e.edge_scores;
    std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) { return std::tie(a.src, a.dst) < std::tie(b.src, b.dst); });
    for (const auto& s : edges) {
        if (top <= 0.0 || s.score < 1e-3 * top) continue;
        const bool sel = selected.count(graph::undirected({s.src, s.dst})) > 0;
        os << "  " << s.src << (directed ? " -> " : " -- ") << s.dst << " [penwidth=" << 5.0 * s.score / top
           << (sel ? ", color=red" : "") << "];\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace scale::explain
