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

#include <filesystem>
#include <string>

namespace scale::graph {

inline constexpr int kDatasetSchemaVersion = 1;

/// Dataset JSON document:
///
///   { "schema_version": 1, "name": str, "task": "node-classification"|"graph-classification",
///     "num_classes": int,
///     "graphs": [ { "num_nodes": int, "edges": [[src,dst],...], "features": [[...],...],
///                   "node_labels"?: [int], "graph_label"?: int,
///                   "gt_node_mask"?: [0|1], "gt_edge_mask"?: [0|1] } ],
///     "splits": { "train": [int], "val": [int], "test": [int] } }
///
/// Reals are written in shortest round-trip form, so save/load is bit-exact.
std::string to_json(const Dataset& ds);
/// Throws ParseError naming the line (syntax) or the field path (schema).
Dataset from_json(const std::string& text);

void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

} // namespace scale::graph
