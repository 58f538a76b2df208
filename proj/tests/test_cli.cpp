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

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kWork = fs::temp_directory_path() / "scale_cli_test";

int run(const std::string& args) {
    const std::string cmd = "cd '" + kWork.string() + "' && '" SCALE_CLI_PATH "' " + args + " > out.txt 2> err.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(kWork / p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

struct Workdir {
    Workdir() {
        fs::remove_all(kWork);
        fs::create_directories(kWork);
    }
};

} // namespace

TEST_CASE("generate is deterministic and rejects unknown names") {
    Workdir w;
    REQUIRE(run("generate --dataset ba-shapes --seed 3 --out a.json") == 0);
    REQUIRE(run("generate --dataset ba-shapes --seed 3 --out b.json") == 0);
    CHECK(slurp("a.json") == slurp("b.json"));
    CHECK(fs::exists(kWork / "a.json.manifest.json"));
    const auto ds = json::parse(slurp("a.json"));
    CHECK(ds["graphs"][0]["num_nodes"] == 700);
    CHECK(run("generate --dataset mutag --out c.json") == 2);
    CHECK(run("generate --dataset ba-shapes") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("--help") == 0);
    CHECK(run("generate --dataset ba-shapes --out /proc/forbidden/x.json") == 4);
}

TEST_CASE("train, explain, evaluate and export on a short run") {
    Workdir w;
    REQUIRE(run("generate --dataset ba-shapes --seed 0 --out d.json") == 0);
    REQUIRE(run("train --data d.json --out new/ck --epochs 5") == 0);
    for (const char* f : {"model.json", "model.json.bin", "train_log.csv", "config.json", "dataset.json", "manifest.json"})
        CHECK(fs::exists(kWork / "new/ck" / f));
    CHECK(lines(slurp("new/ck/train_log.csv")) == 6);
    const auto manifest = json::parse(slurp("new/ck/manifest.json"));
    CHECK(manifest["config"]["epochs"] == 5);
    CHECK(manifest["seed"] == 0);
    CHECK(manifest.contains("config_hash"));

    REQUIRE(run("explain --checkpoint new/ck --target node 420 --k 2 --out e2.json") == 0);
    REQUIRE(run("explain --checkpoint new/ck --target node 420 --k 4 --out e4.json --dot e4.dot") == 0);
    const auto e2 = json::parse(slurp("e2.json"))["selected_nodes"].get<std::vector<std::size_t>>();
    const auto e4 = json::parse(slurp("e4.json"))["selected_nodes"].get<std::vector<std::size_t>>();
    CHECK(e2.size() == 2);
    CHECK(e4.size() == 4);
    for (auto v : e2) CHECK(std::find(e4.begin(), e4.end(), v) != e4.end());
    CHECK(slurp("e4.dot").find("penwidth=5") != std::string::npos);

    REQUIRE(run("export-dot --explanation e4.json --out again.dot") == 0);
    CHECK(slurp("again.dot") == slurp("e4.dot"));

    CHECK(run("explain --checkpoint new/ck --target graph 0") == 2);
    CHECK(run("explain --checkpoint new/ck --target node 700") == 2);
    CHECK(run("explain --checkpoint missing --target node 1") == 4);

    REQUIRE(run("evaluate --checkpoint new/ck --out m.csv --json m.json") == 0);
    const auto csv = slurp("m.csv");
    CHECK(csv.rfind("dataset,task,precision,recall,", 0) == 0);
    CHECK(lines(csv) == 2);
    CHECK(json::parse(slurp("m.json"))["instances"].size() == 400);
}

TEST_CASE("lambda = 0 from a config file equals the no-distillation run") {
    Workdir w;
    REQUIRE(run("generate --dataset ba-shapes --seed 0 --out d.json") == 0);
    {
        std::ofstream(kWork / "cfg.json") << R"({"lambda": 0, "epochs": 4})";
    }
    REQUIRE(run("train --data d.json --config cfg.json --out a") == 0);
    REQUIRE(run("train --data d.json --out b --epochs 4 --lambda 0") == 0);
    CHECK(slurp("a/model.json.bin") == slurp("b/model.json.bin"));
}

TEST_CASE("a diverging run exits with the numeric failure code") {
    Workdir w;
    REQUIRE(run("generate --dataset tree-cycle --seed 0 --out d.json") == 0);
    {
        std::ofstream(kWork / "cfg.json") << R"({"lr": 1e305, "epochs": 20, "gcn_layers": 2})";
    }
    CHECK(run("train --data d.json --config cfg.json --out ck") == 3);
    CHECK(slurp("err.txt").find("epoch") != std::string::npos);
    {
        std::ofstream(kWork / "bad.json") << R"({"lamda": 1})";
    }
    CHECK(run("train --data d.json --config bad.json --out ck") == 2);
}

TEST_CASE("ablation sweeps write one row per point") {
    Workdir w;
    REQUIRE(run("generate --dataset ba-shapes --seed 0 --out d.json") == 0);
    REQUIRE(run("ablate --data d.json --kind jump_d --grid 0.1:0.9:0.1 --epochs 2 --out jump.csv") == 0);
    CHECK(lines(slurp("jump.csv")) == 10);
    REQUIRE(run("ablate --data d.json --kind kd_setting --epochs 2 --out kd.csv") == 0);
    const auto kd = slurp("kd.csv");
    CHECK(lines(kd) == 5);
    for (const char* s : {"naive", "embed", "kdl", "joint"}) CHECK(kd.find(std::string("\n") + s + ",") != std::string::npos);
    CHECK(fs::exists(kWork / "kd.csv.manifest.json"));
    CHECK(run("ablate --data d.json --kind sideways --out x.csv") == 2);
    CHECK(run("ablate --data d.json --kind lambda --grid 1:0:1 --out x.csv") == 2);
}
