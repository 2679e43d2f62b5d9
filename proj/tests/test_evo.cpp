#include <doctest.h>

#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "lapt/bench.hpp"
#include "lapt/evo.hpp"

using namespace lapt;

namespace {

// oracle over a frozen synthetic table (normalized scores)
struct TableOracle {
    const BenchmarkTable& table;
    std::string task;
    double operator()(const Architecture&, const std::string& key) const {
        return table.normalized(key, task);
    }
};

BenchmarkTable trans101_table() {
    return synth_generate(SpaceDescriptor::make("trans101"), {7, 0.0, 0.0},
                          {{"t0", "acc", Direction::Maximize}});
}

}  // namespace

TEST_CASE("single-architecture space: the best is the only member") {
    auto space = SpaceDescriptor::make("synth-3x1");
    EvalCache cache;
    auto oracle = [](const Architecture&, const std::string&) { return 0.5; };
    auto result = run_evolution(space, oracle, {.population_size = 4, .generations = 2, .seed = 1}, cache);
    CHECK(result.best_key == "|op0|op0|op0|");
    CHECK(cache.unique_evaluations() == 1);
}

TEST_CASE("generations=0 returns the best of the initial population") {
    auto table = trans101_table();
    EvalCache cache;
    auto result = run_evolution(table.space(), TableOracle{table, "t0"},
                                {.population_size = 8, .generations = 0, .seed = 3}, cache);
    CHECK(result.trace.entries.size() == 8);
    double best = result.trace.entries[0].score;
    for (const auto& e : result.trace.entries) best = std::max(best, e.score);
    CHECK(result.best_score == best);
    for (const auto& e : result.trace.entries) CHECK(e.generation == 0);
}

TEST_CASE("exhaustive budget finds the global optimum of a separable landscape") {
    auto table = trans101_table();
    auto global = top_k(table, "t0", 1).entries[0];
    EvalCache cache;
    auto result = run_evolution(table.space(), TableOracle{table, "t0"},
                                {.population_size = 50, .generations = 400, .tournament_size = 5, .seed = 11},
                                cache);
    CHECK(result.best_key == global.key);
    CHECK(result.best_score == doctest::Approx(normalize(global.score, Direction::Maximize)));
}

TEST_CASE("tournament picks the higher score and is bounded by the pool") {
    Rng rng(4);
    std::vector<double> scores = {0.2, 0.9};
    for (int i = 0; i < 20; ++i) CHECK(tournament(scores, 2, rng) == 1);

    // size 1 degenerates to a uniform pick; both members must appear
    std::set<std::size_t> seen;
    for (int i = 0; i < 200; ++i) seen.insert(tournament(scores, 1, rng));
    CHECK(seen == std::set<std::size_t>{0, 1});

    // size beyond the population clamps to the whole pool
    CHECK(tournament({0.3, 0.1, 0.7, 0.2}, 100, rng) == 2);
}

TEST_CASE("tournament ties resolve to the earliest index") {
    Rng rng(8);
    std::vector<double> scores = {0.5, 0.5, 0.5};
    for (int i = 0; i < 50; ++i) CHECK(tournament(scores, 3, rng) == 0);
}

TEST_CASE("crossover of an architecture with itself is the identity") {
    auto space = SpaceDescriptor::make("darts");
    Rng rng(6);
    for (int i = 0; i < 20; ++i) {
        auto a = sample_uniform(space, rng);
        CHECK(crossover(a, a, space, rng) == a);
    }
}

TEST_CASE("crossover takes every layer from one of the two parents (fixed-source space)") {
    auto space = SpaceDescriptor::make("trans101");
    Rng rng(13);
    for (int i = 0; i < 100; ++i) {
        auto a = sample_uniform(space, rng);
        auto b = sample_uniform(space, rng);
        auto child = crossover(a, b, space, rng);
        for (std::size_t l = 0; l < space.num_layers(); ++l) {
            CHECK((child.choices[l] == a.choices[l] || child.choices[l] == b.choices[l]));
        }
    }
}

TEST_CASE("crossover keeps closure on darts across 1000 trials") {
    auto space = SpaceDescriptor::make("darts");
    Rng rng(21);
    for (int i = 0; i < 1000; ++i) {
        auto a = sample_uniform(space, rng);
        auto b = sample_uniform(space, rng);
        CHECK(validate(crossover(a, b, space, rng), space).empty());
    }
}

TEST_CASE("the cache counts each unique key once and reports hits") {
    auto space = SpaceDescriptor::make("synth-1x3");
    EvalCache cache;
    int calls = 0;
    auto oracle = [&](const Architecture&, const std::string&) { return static_cast<double>(++calls); };
    Rng rng(2);
    auto a = sample_uniform(space, rng);
    auto key = encode(a, space);
    auto first = cache.evaluate(a, key, oracle);
    auto second = cache.evaluate(a, key, oracle);
    CHECK_FALSE(first.second);
    CHECK(second.second);
    CHECK(first.first == second.first);
    CHECK(calls == 1);
    CHECK(cache.unique_evaluations() == 1);
    CHECK(cache.contains(key));
}

TEST_CASE("the cache persists across consecutive searches") {
    auto table = trans101_table();
    EvalCache cache;
    EvoParams params{.population_size = 10, .generations = 3, .tournament_size = 3, .seed = 5};
    auto r1 = run_evolution(table.space(), TableOracle{table, "t0"}, params, cache);
    const auto after_first = cache.unique_evaluations();
    CHECK(r1.trace.unique_evaluations == after_first);
    auto r2 = run_evolution(table.space(), TableOracle{table, "t0"}, params, cache);
    // same seed revisits the same keys, so no new unique evaluations
    CHECK(r2.trace.unique_evaluations == after_first);
    CHECK(r2.trace.entries.front().cache_hit);
}

TEST_CASE("equal seeds produce byte-identical traces") {
    auto table = trans101_table();
    EvoParams params{.population_size = 10, .generations = 5, .tournament_size = 3,
                     .crossover_prob = 0.5, .mutation_prob = 0.5, .seed = 9};
    EvalCache c1, c2;
    auto r1 = run_evolution(table.space(), TableOracle{table, "t0"}, params, c1);
    auto r2 = run_evolution(table.space(), TableOracle{table, "t0"}, params, c2);
    CHECK(r1.trace.to_jsonl() == r2.trace.to_jsonl());
    CHECK(r1.best_key == r2.best_key);
}

TEST_CASE("trace length matches the budget and best_so_far is nondecreasing") {
    auto table = trans101_table();
    EvalCache cache;
    auto r = run_evolution(table.space(), TableOracle{table, "t0"},
                           {.population_size = 10, .generations = 4, .tournament_size = 3, .seed = 17},
                           cache);
    CHECK(r.trace.entries.size() == 10 + 4 * 10);
    REQUIRE(r.trace.best_so_far.size() == r.trace.entries.size());
    for (std::size_t i = 1; i < r.trace.best_so_far.size(); ++i) {
        CHECK(r.trace.best_so_far[i] >= r.trace.best_so_far[i - 1]);
    }
    CHECK(r.trace.best_so_far.back() == r.best_score);
    // every generation label in range, population-size children per generation
    std::map<int, int> per_gen;
    for (const auto& e : r.trace.entries) ++per_gen[e.generation];
    for (int g = 0; g <= 4; ++g) CHECK(per_gen[g] == 10);
}

TEST_CASE("trace serializes to one JSON object per line") {
    SearchTrace trace;
    trace.entries = {{"|op0|", 0.25, 0, false}, {"|op1|", 0.5, 1, true}};
    auto jsonl = trace.to_jsonl();
    std::istringstream in(jsonl);
    std::string line;
    std::vector<nlohmann::json> rows;
    while (std::getline(in, line)) rows.push_back(nlohmann::json::parse(line));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0]["key"] == "|op0|");
    CHECK(rows[1]["cache_hit"] == true);
    CHECK(rows[1]["gen"] == 1);
}
