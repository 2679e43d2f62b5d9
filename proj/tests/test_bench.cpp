#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "lapt/bench.hpp"

using namespace lapt;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& content)
        : path("/tmp/lapt_test_" + name) {
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

BenchmarkTable small_synth() {
    return synth_generate(SpaceDescriptor::make("synth-3x3"), {5, 0.0, 0.0},
                          {{"t0", "acc", Direction::Maximize}, {"t1", "loss", Direction::Minimize}});
}

}  // namespace

TEST_CASE("synth_generate covers the whole trans101 space") {
    auto table = synth_generate(SpaceDescriptor::make("trans101"), {7, 0.0, 0.0},
                                {{"t0", "acc", Direction::Maximize}});
    CHECK(table.size() == 4096);
    CHECK(table.complete());
}

TEST_CASE("load round-trips through the benchmark JSON schema") {
    auto table = small_synth();
    TempFile f("bench_roundtrip.json", table.to_json().dump());
    auto back = BenchmarkTable::load(f.path);
    CHECK(back.size() == table.size());
    CHECK(back.complete());
    CHECK(back.records() == table.records());
}

TEST_CASE("load rejects a repeated record key") {
    TempFile f("bench_dup.json", R"({
      "space_id": "synth-1x2",
      "tasks": [{"name": "t0", "metric": "acc", "direction": "maximize"}],
      "records": {"|op0|": {"t0": 1.0}, "|op0|": {"t0": 2.0}}
    })");
    CHECK_THROWS_WITH_AS(BenchmarkTable::load(f.path), doctest::Contains("|op0|"), DuplicateKey);
}

TEST_CASE("load rejects a record missing a declared task") {
    TempFile f("bench_missing.json", R"({
      "space_id": "synth-1x2",
      "tasks": [{"name": "t0", "metric": "acc", "direction": "maximize"},
                 {"name": "seg", "metric": "miou", "direction": "maximize"}],
      "records": {"|op0|": {"t0": 1.0, "seg": 2.0}, "|op1|": {"t0": 1.5}}
    })");
    CHECK_THROWS_WITH_AS(BenchmarkTable::load(f.path), doctest::Contains("seg"), TableSchemaError);
}

TEST_CASE("load rejects an undecodable key") {
    TempFile f("bench_badkey.json", R"({
      "space_id": "synth-1x2",
      "tasks": [{"name": "t0", "metric": "acc", "direction": "maximize"}],
      "records": {"|conv7|": {"t0": 1.0}, "|op1|": {"t0": 1.5}}
    })");
    CHECK_THROWS_AS(BenchmarkTable::load(f.path), UndecodableKey);
}

TEST_CASE("normalized applies the direction rule") {
    CHECK(normalize(73.45, Direction::Maximize) == 73.45);
    CHECK(normalize(60.18, Direction::Minimize) == -60.18);
}

TEST_CASE("evaluate throws on an absent key") {
    auto table = small_synth();
    CHECK_THROWS_AS(table.evaluate("|op0|op0|", "t0"), UnknownArchitecture);
}

TEST_CASE("normalized preserves within-task ordering for minimize metrics") {
    auto table = small_synth();
    std::string a, b;
    for (const auto& [key, values] : table.records()) {
        if (a.empty()) a = key;
        else if (b.empty()) b = key;
    }
    const bool raw_less = table.evaluate(a, "t1") < table.evaluate(b, "t1");
    const bool norm_greater = table.normalized(a, "t1") > table.normalized(b, "t1");
    CHECK(raw_less == norm_greater);
}

TEST_CASE("model_rank of the best architecture is 1 and matches a full scan") {
    auto table = small_synth();
    auto best = top_k(table, "t0", 1).entries[0];
    CHECK(table.model_rank(best.key, "t0") == 1);

    Rng rng(9);
    auto arch = sample_uniform(table.space(), rng);
    auto key = encode(arch, table.space());
    int better = 0;
    for (const auto& [k, values] : table.records()) {
        if (values.at("t0") > table.evaluate(key, "t0")) ++better;
    }
    CHECK(table.model_rank(key, "t0") == 1 + better);
}

TEST_CASE("tied best architectures share rank 1") {
    std::map<std::string, std::map<std::string, double>> records = {
        {"|op0|", {{"t0", 2.0}}}, {"|op1|", {{"t0", 2.0}}}, {"|op2|", {{"t0", 1.0}}}};
    BenchmarkTable table(SpaceDescriptor::make("synth-1x3"), {{"t0", "acc", Direction::Maximize}},
                         records);
    CHECK(table.model_rank("|op0|", "t0") == 1);
    CHECK(table.model_rank("|op1|", "t0") == 1);
    CHECK(table.model_rank("|op2|", "t0") == 3);
}

TEST_CASE("model_rank requires a complete table") {
    std::map<std::string, std::map<std::string, double>> records = {{"|op0|", {{"t0", 2.0}}}};
    BenchmarkTable table(SpaceDescriptor::make("synth-1x3"), {{"t0", "acc", Direction::Maximize}},
                         records);
    CHECK_FALSE(table.complete());
    CHECK_THROWS_AS(table.model_rank("|op0|", "t0"), PartialTable);
}

TEST_CASE("lambda=0 sigma=0 separable landscape: argmax formula equals enumeration") {
    auto space = SpaceDescriptor::make("synth-4x3");
    SynthParams params{11, 0.0, 0.0};
    auto table = synth_generate(space, params, {{"t0", "acc", Direction::Maximize}});

    // per-layer argmax of the unary terms
    Architecture formula_best;
    for (std::size_t i = 0; i < space.num_layers(); ++i) {
        std::string best_op;
        double best_u = -1.0;
        for (const auto& op : space.layers[i].candidate_ops) {
            Architecture probe;
            for (std::size_t l = 0; l < space.num_layers(); ++l) {
                probe.choices.push_back({l == i ? op : space.layers[l].candidate_ops[0],
                                         space.layers[l].candidate_sources});
            }
            // isolate layer i's contribution by differencing against op0
            Architecture base;
            for (std::size_t l = 0; l < space.num_layers(); ++l) {
                base.choices.push_back({space.layers[l].candidate_ops[0], space.layers[l].candidate_sources});
            }
            double u = synth_score(space, params, 0, probe) - synth_score(space, params, 0, base);
            if (u > best_u) {
                best_u = u;
                best_op = op;
            }
        }
        formula_best.choices.push_back({best_op, space.layers[i].candidate_sources});
    }
    auto enum_best = top_k(table, "t0", 1).entries[0];
    CHECK(encode(formula_best, space) == enum_best.key);
}

TEST_CASE("synth_generate is a pure function of its inputs") {
    auto a = synth_generate(SpaceDescriptor::make("synth-3x3"), {5, 0.5, 0.1},
                            {{"t0", "acc", Direction::Maximize}});
    auto b = synth_generate(SpaceDescriptor::make("synth-3x3"), {5, 0.5, 0.1},
                            {{"t0", "acc", Direction::Maximize}});
    CHECK(a.to_json().dump() == b.to_json().dump());
}

TEST_CASE("separable score equals the sum of per-layer unary terms") {
    auto space = SpaceDescriptor::make("synth-3x4");
    SynthParams params{21, 0.0, 0.0};
    Rng rng(3);
    auto arch = sample_uniform(space, rng);
    Architecture base;
    for (const auto& slot : space.layers) base.choices.push_back({slot.candidate_ops[0], slot.candidate_sources});
    double sum = 0.0;
    for (std::size_t i = 0; i < space.num_layers(); ++i) {
        Architecture probe = base;
        probe.choices[i] = arch.choices[i];
        sum += synth_score(space, params, 0, probe) - synth_score(space, params, 0, base);
    }
    sum += synth_score(space, params, 0, base);
    CHECK(std::abs(sum - synth_score(space, params, 0, arch)) < 1e-12);
}

TEST_CASE("top_k returns the whole table sorted when k equals its size") {
    auto table = small_synth();
    auto archive = top_k(table, "t0", table.size());
    CHECK(archive.entries.size() == table.size());
    for (std::size_t i = 1; i < archive.entries.size(); ++i) {
        CHECK(archive.entries[i - 1].score >= archive.entries[i].score);
    }
}

TEST_CASE("top_k matches an independent sort of a full scan") {
    auto table = synth_generate(SpaceDescriptor::make("trans101"), {7, 0.0, 0.0},
                                {{"t0", "acc", Direction::Maximize}});
    auto archive = top_k(table, "t0", 50);
    std::vector<std::pair<double, std::string>> scan;
    for (const auto& [key, values] : table.records()) scan.push_back({-values.at("t0"), key});
    std::sort(scan.begin(), scan.end());
    REQUIRE(archive.entries.size() == 50);
    for (std::size_t i = 0; i < 50; ++i) CHECK(archive.entries[i].key == scan[i].second);
}

TEST_CASE("top_k rejects k beyond the table size") {
    auto table = small_synth();
    CHECK_THROWS_AS(top_k(table, "t0", table.size() + 1), BenchError);
}

TEST_CASE("ingest_csv builds the canonical table") {
    TempFile f("ingest.csv",
               "arch_key,task,value\n"
               "|op0|,t0,1.5\n"
               "|op1|,t0,2.5\n"
               "|op2|,t0,0.5\n");
    auto table = ingest_csv(f.path, SpaceDescriptor::make("synth-1x3"));
    CHECK(table.size() == 3);
    CHECK(table.complete());
    CHECK(table.evaluate("|op1|", "t0") == 2.5);
}

TEST_CASE("ingest_csv rejects a duplicated key/task pair and a bad header") {
    TempFile dup("ingest_dup.csv",
                 "arch_key,task,value\n"
                 "|op0|,t0,1.5\n"
                 "|op0|,t0,2.5\n");
    CHECK_THROWS_AS(ingest_csv(dup.path, SpaceDescriptor::make("synth-1x3")), DuplicateKey);
    TempFile bad("ingest_bad.csv", "key;task;value\n");
    CHECK_THROWS_AS(ingest_csv(bad.path, SpaceDescriptor::make("synth-1x3")), TableSchemaError);
}
