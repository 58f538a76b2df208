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

#include "scale/graph/dataset_io.hpp"

#include "scale/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace scale::graph {

using nlohmann::json;

namespace {

json graph_to_json(const Graph& g) {
    json j;
    j["num_nodes"] = g.num_nodes();
    json edges = json::array();
    for (const Edge& e : g.edges()) edges.push_back({e.src, e.dst});
    j["edges"] = std::move(edges);
    json feats = json::array();
    for (std::size_t r = 0; r < g.num_nodes(); ++r) {
        auto row = g.features().row(r);
        feats.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["features"] = std::move(feats);
    if (g.node_labels()) j["node_labels"] = *g.node_labels();
    if (g.graph_label()) j["graph_label"] = *g.graph_label();
    auto bits = [](const std::vector<bool>& m) {
        std::vector<int> out(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] ? 1 : 0;
        return out;
    };
    if (g.gt_node_mask()) j["gt_node_mask"] = bits(*g.gt_node_mask());
    if (g.gt_edge_mask()) j["gt_edge_mask"] = bits(*g.gt_edge_mask());
    return j;
}

// Schema reader that reports the path of the offending field.
struct Reader {
    [[noreturn]] static void fail(const std::string& path, const std::string& what) {
        throw ParseError("dataset field '" + path + "': " + what);
    }

    static const json& field(const json& obj, const std::string& key, const std::string& path) {
        if (!obj.is_object()) fail(path, "expected an object");
        auto it = obj.find(key);
        if (it == obj.end()) fail(path + "." + key, "missing");
        return *it;
    }

    static std::size_t index(const json& j, const std::string& path) {
        if (!j.is_number_integer() || j.get<long long>() < 0) fail(path, "expected a non-negative integer");
        return j.get<std::size_t>();
    }

    static int integer(const json& j, const std::string& path) {
        if (!j.is_number_integer()) fail(path, "expected an integer");
        return j.get<int>();
    }

    static double real(const json& j, const std::string& path) {
        if (!j.is_number()) fail(path, "expected a number");
        return j.get<double>();
    }

    static bool bit(const json& j, const std::string& path) {
        if (j.is_boolean()) return j.get<bool>();
        if (j.is_number_integer() && (j.get<int>() == 0 || j.get<int>() == 1)) return j.get<int>() == 1;
        fail(path, "expected 0, 1, true or false");
    }

    static const json& array(const json& j, const std::string& path) {
        if (!j.is_array()) fail(path, "expected an array");
        return j;
    }

    static std::vector<std::size_t> indices(const json& j, const std::string& path) {
        std::vector<std::size_t> out;
        const auto& a = array(j, path);
        out.reserve(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) out.push_back(index(a[i], path + "[" + std::to_string(i) + "]"));
        return out;
    }

    static std::vector<bool> bits(const json& j, const std::string& path) {
        std::vector<bool> out;
        const auto& a = array(j, path);
        for (std::size_t i = 0; i < a.size(); ++i) out.push_back(bit(a[i], path + "[" + std::to_string(i) + "]"));
        return out;
    }

    static Graph graph(const json& j, const std::string& path) {
        Graph::Init init;
        init.num_nodes = index(field(j, "num_nodes", path), path + ".num_nodes");
        const auto& edges = array(field(j, "edges", path), path + ".edges");
        init.edges.reserve(edges.size());
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const std::string ep = path + ".edges[" + std::to_string(i) + "]";
            if (!edges[i].is_array() || edges[i].size() != 2) fail(ep, "expected [src, dst]");
            Edge e{index(edges[i][0], ep + "[0]"), index(edges[i][1], ep + "[1]")};
            if (e.src >= init.num_nodes || e.dst >= init.num_nodes)
                fail(ep, "endpoint >= num_nodes (" + std::to_string(init.num_nodes) + ")");
            init.edges.push_back(e);
        }
        const auto& feats = array(field(j, "features", path), path + ".features");
        if (feats.size() != init.num_nodes) fail(path + ".features", "row count != num_nodes");
        const std::size_t d = feats.empty() ? 0 : array(feats[0], path + ".features[0]").size();
        init.features = num::Tensor(init.num_nodes, d);
        for (std::size_t r = 0; r < feats.size(); ++r) {
            const std::string rp = path + ".features[" + std::to_string(r) + "]";
            const auto& row = array(feats[r], rp);
            if (row.size() != d) fail(rp, "ragged feature row");
            for (std::size_t c = 0; c < d; ++c) init.features(r, c) = real(row[c], rp + "[" + std::to_string(c) + "]");
        }
        if (j.contains("node_labels")) {
            const auto& a = array(j["node_labels"], path + ".node_labels");
            init.node_labels.emplace();
            for (std::size_t i = 0; i < a.size(); ++i)
                init.node_labels->push_back(integer(a[i], path + ".node_labels[" + std::to_string(i) + "]"));
        }
        if (j.contains("graph_label")) init.graph_label = integer(j["graph_label"], path + ".graph_label");
        if (j.contains("gt_node_mask")) init.gt_node_mask = bits(j["gt_node_mask"], path + ".gt_node_mask");
        if (j.contains("gt_edge_mask")) init.gt_edge_mask = bits(j["gt_edge_mask"], path + ".gt_edge_mask");
        try {
            return Graph(std::move(init));
        } catch (const ContractError& e) {
            fail(path, e.what());
        }
    }
};

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

} // namespace

std::string to_json(const Dataset& ds) {
    json j;
    j["schema_version"] = kDatasetSchemaVersion;
    j["name"] = ds.name;
    j["task"] = to_string(ds.task);
    j["num_classes"] = ds.num_classes;
    json graphs = json::array();
    for (const auto& g : ds.graphs) graphs.push_back(graph_to_json(g));
    j["graphs"] = std::move(graphs);
    j["splits"] = {{"train", ds.splits.train}, {"val", ds.splits.val}, {"test", ds.splits.test}};
    return j.dump() + "\n";
}

Dataset from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ParseError("dataset JSON syntax error at line " + std::to_string(line) + ", column " +
                         std::to_string(col) + ": " + e.what());
    }
    const int version = Reader::integer(Reader::field(j, "schema_version", "$"), "$.schema_version");
    if (version != kDatasetSchemaVersion)
        Reader::fail("$.schema_version", "unsupported version " + std::to_string(version));
    Dataset ds;
    const auto& name = Reader::field(j, "name", "$");
    if (!name.is_string()) Reader::fail("$.name", "expected a string");
    ds.name = name.get<std::string>();
    const auto& task = Reader::field(j, "task", "$");
    if (!task.is_string()) Reader::fail("$.task", "expected a string");
    ds.task = task_from_string(task.get<std::string>());
    ds.num_classes = Reader::index(Reader::field(j, "num_classes", "$"), "$.num_classes");
    const auto& graphs = Reader::array(Reader::field(j, "graphs", "$"), "$.graphs");
    ds.graphs.reserve(graphs.size());
    for (std::size_t i = 0; i < graphs.size(); ++i)
        ds.graphs.push_back(Reader::graph(graphs[i], "$.graphs[" + std::to_string(i) + "]"));
    const auto& splits = Reader::field(j, "splits", "$");
    ds.splits.train = Reader::indices(Reader::field(splits, "train", "$.splits"), "$.splits.train");
    ds.splits.val = Reader::indices(Reader::field(splits, "val", "$.splits"), "$.splits.val");
    ds.splits.test = Reader::indices(Reader::field(splits, "test", "$.splits"), "$.splits.test");
    try {
        ds.validate();
    } catch (const ContractError& e) {
        throw ParseError(std::string("dataset invalid: ") + e.what());
    }
    return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << to_json(ds);
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

} // namespace scale::graph
