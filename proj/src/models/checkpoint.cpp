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

#include "scale/errors.hpp"
#include "scale/models/models.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>

namespace scale::models {

using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint blobs assume a little-endian host");

constexpr int kCheckpointVersion = 1;

using Visitor = std::function<void(const std::string& name, Tensor& t)>;

void visit(const std::string& prefix, num::Linear& l, const Visitor& f) {
    f(prefix + ".weight", l.weight.value);
    f(prefix + ".bias", l.bias.value);
}

void visit(const std::string& prefix, Mlp& m, const Visitor& f) {
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        visit(prefix + ".linear" + std::to_string(i), m.layers[i], f);
        if (i < m.norms.size()) {
            auto& bn = m.norms[i];
            const std::string p = prefix + ".bn" + std::to_string(i);
            f(p + ".gamma", bn.gamma.value);
            f(p + ".beta", bn.beta.value);
            f(p + ".running_mean", bn.running_mean);
            f(p + ".running_var", bn.running_var);
        }
    }
}

void visit(const std::string& prefix, GcnStack& g, const Visitor& f) {
    for (std::size_t i = 0; i < g.layers.size(); ++i) visit(prefix + ".gcn" + std::to_string(i), g.layers[i], f);
}

void visit(ModelBundle& b, const Visitor& f) {
    visit("teacher", b.teacher.gcn, f);
    visit("teacher.head", b.teacher.head, f);
    if (b.graph_student) {
        visit("graph_student", b.graph_student->gcn, f);
        visit("graph_student.head", b.graph_student->head, f);
        visit("graph_student.mask", b.graph_student->mask.mlp, f);
    }
    if (b.node_student) {
        visit("node_student", b.node_student->gcn, f);
        visit("node_student.head", b.node_student->head, f);
        visit("node_student.mask", b.node_student->mask.mlp, f);
    }
    if (b.feature_student) visit("feature_student", b.feature_student->mlp, f);
}

void mark_stats(ModelBundle& b) {
    auto mark = [](Mlp& m) {
        for (auto& bn : m.norms) bn.has_stats = true;
    };
    if (b.graph_student) mark(b.graph_student->mask.mlp);
    if (b.node_student) mark(b.node_student->mask.mlp);
    if (b.feature_student) mark(b.feature_student->mlp);
}

json arch_to_json(const Architecture& a) {
    return {{"task", graph::to_string(a.task)}, {"in_dim", a.in_dim},         {"hidden", a.hidden},
            {"classes", a.classes},             {"gcn_layers", a.gcn_layers}, {"mlp_layers", a.mlp_layers},
            {"mask_in_dim", a.mask_in_dim}};
}

Architecture arch_from_json(const json& j) {
    Architecture a;
    a.task = graph::task_from_string(j.at("task").get<std::string>());
    a.in_dim = j.at("in_dim").get<std::size_t>();
    a.hidden = j.at("hidden").get<std::size_t>();
    a.classes = j.at("classes").get<std::size_t>();
    a.gcn_layers = j.at("gcn_layers").get<std::size_t>();
    a.mlp_layers = j.at("mlp_layers").get<std::size_t>();
    a.mask_in_dim = j.at("mask_in_dim").get<std::size_t>();
    a.validate();
    return a;
}

std::string blob_path(const std::string& manifest) { return manifest + ".bin"; }

std::string blob_name(const std::string& manifest) {
    const auto slash = manifest.find_last_of('/');
    return (slash == std::string::npos ? manifest : manifest.substr(slash + 1)) + ".bin";
}

} // namespace

void save_checkpoint(ModelBundle& b, const std::string& path) {
    json tensors = json::array();
    std::vector<double> blob;
    visit(b, [&](const std::string& name, Tensor& t) {
        tensors.push_back({{"name", name}, {"rows", t.rows()}, {"cols", t.cols()}, {"offset", blob.size()}});
        blob.insert(blob.end(), t.data().begin(), t.data().end());
    });
    json students = json::array();
    if (b.graph_student) students.push_back("graph-mask");
    if (b.node_student) students.push_back("node-edge-weight");
    if (b.feature_student) students.push_back("feature-mlp");

    json manifest = {{"format", "scale-checkpoint"},
                     {"version", kCheckpointVersion},
                     {"architecture", arch_to_json(b.arch)},
                     {"students", students},
                     {"config_hash", b.config_hash},
                     {"config", json::parse(b.config_json)},
                     {"blob", blob_name(path)},
                     {"blob_values", blob.size()},
                     {"tensors", tensors}};

    std::ofstream bin(blob_path(path), std::ios::binary);
    if (!bin) throw IoError("cannot open '" + blob_path(path) + "' for writing");
    bin.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size() * sizeof(double)));
    if (!bin) throw IoError("failed writing '" + blob_path(path) + "'");

    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << manifest.dump(2) << "\n";
    if (!out) throw IoError("failed writing '" + path + "'");
}

ModelBundle load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint '" + path + "'");
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("checkpoint manifest '" + path + "': " + e.what());
    }

    ModelBundle b;
    try {
        if (manifest.at("format") != "scale-checkpoint" || manifest.at("version") != kCheckpointVersion)
            throw ParseError("checkpoint '" + path + "': unsupported format or version");
        b.arch = arch_from_json(manifest.at("architecture"));
        b.config_hash = manifest.at("config_hash").get<std::uint64_t>();
        b.config_json = manifest.at("config").dump();
        // Shapes only; values come from the blob.
        num::Rng rng(0);
        b.teacher = Teacher(b.arch, rng);
        for (const auto& s : manifest.at("students")) {
            if (s == "graph-mask") b.graph_student.emplace(b.arch, rng);
            else if (s == "node-edge-weight") b.node_student.emplace(b.arch, rng);
            else if (s == "feature-mlp") b.feature_student.emplace(b.arch, rng);
            else throw ParseError("checkpoint '" + path + "': unknown student " + s.dump());
        }
    } catch (const json::exception& e) {
        throw ParseError("checkpoint manifest '" + path + "': " + e.what());
    } catch (const ContractError& e) {
        throw ParseError("checkpoint manifest '" + path + "': " + e.what());
    }

    std::ifstream bin(blob_path(path), std::ios::binary);
    if (!bin) throw IoError("cannot open checkpoint blob '" + blob_path(path) + "'");
    std::ostringstream ss;
    ss << bin.rdbuf();
    const std::string bytes = ss.str();
    const auto expected = manifest.at("blob_values").get<std::size_t>();
    if (bytes.size() != expected * sizeof(double))
        throw ParseError("checkpoint blob '" + blob_path(path) + "' has " + std::to_string(bytes.size()) +
                         " bytes, manifest expects " + std::to_string(expected * sizeof(double)));

    const auto& tensors = manifest.at("tensors");
    std::size_t i = 0;
    visit(b, [&](const std::string& name, Tensor& t) {
        if (i >= tensors.size()) throw ParseError("checkpoint: manifest lists too few tensors");
        const auto& e = tensors[i++];
        if (e.at("name") != name || e.at("rows") != t.rows() || e.at("cols") != t.cols())
            throw ParseError("checkpoint: tensor '" + name + "' " + t.shape_str() + " does not match manifest entry " +
                             e.dump());
        const auto off = e.at("offset").get<std::size_t>();
        if (off + t.size() > expected) throw ParseError("checkpoint: tensor '" + name + "' overruns the blob");
        std::memcpy(t.data().data(), bytes.data() + off * sizeof(double), t.size() * sizeof(double));
    });
    if (i != tensors.size()) throw ParseError("checkpoint: manifest lists extra tensors");
    mark_stats(b);
    return b;
}

} // namespace scale::models
