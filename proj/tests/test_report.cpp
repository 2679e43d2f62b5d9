#include <doctest.h>

#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "lapt/report.hpp"

using namespace lapt;

namespace {

BenchmarkTable trans101_table() {
    return synth_generate(SpaceDescriptor::make("trans101"), {7, 0.0, 0.0},
                          {{"t0", "acc", Direction::Maximize}, {"t1", "loss", Direction::Minimize}});
}

EedfCurve quartile_curve() {
    EedfCurve c;
    c.breakpoints = {{0.1, 0.25}, {0.2, 0.5}, {0.3, 0.75}, {0.4, 1.0}};
    c.n = 4;
    c.label = "quartiles";
    return c;
}

}  // namespace

TEST_CASE("the step function evaluates right-continuously") {
    auto c = quartile_curve();
    CHECK(c.at(0.05) == 0.0);
    CHECK(c.at(0.1) == 0.25);
    CHECK(c.at(0.25) == 0.5);
    CHECK(c.at(0.3) == 0.75);
    CHECK(c.at(10.0) == 1.0);
}

TEST_CASE("eedf of the full table starts at the optimum and ends at 1") {
    auto table = trans101_table();
    for (const char* task : {"t0", "t1"}) {
        auto curve = eedf(table, task);
        REQUIRE_FALSE(curve.breakpoints.empty());
        CHECK(curve.n == table.size());
        CHECK(curve.breakpoints.front().error == doctest::Approx(0.0));
        CHECK(curve.breakpoints.back().fraction == doctest::Approx(1.0));
        for (std::size_t i = 1; i < curve.breakpoints.size(); ++i) {
            CHECK(curve.breakpoints[i].error > curve.breakpoints[i - 1].error);
            CHECK(curve.breakpoints[i].fraction > curve.breakpoints[i - 1].fraction);
        }
    }
}

TEST_CASE("eedf fraction at an error equals a direct count") {
    auto table = trans101_table();
    auto curve = eedf(table, "t0");
    const double e = curve.breakpoints[curve.breakpoints.size() / 2].error;

    double best = -1e300;
    for (const auto& [key, values] : table.records()) best = std::max(best, values.at("t0"));
    std::size_t count = 0;
    for (const auto& [key, values] : table.records()) {
        if (best - values.at("t0") <= e) ++count;
    }
    CHECK(curve.at(e) == doctest::Approx(static_cast<double>(count) / table.size()));
}

TEST_CASE("eedf refuses a partial table") {
    std::map<std::string, std::map<std::string, double>> records = {{"|op0|", {{"t0", 1.0}}}};
    BenchmarkTable table(SpaceDescriptor::make("synth-1x3"), {{"t0", "acc", Direction::Maximize}},
                        records);
    CHECK_THROWS_AS(eedf(table, "t0"), PartialTable);
}

TEST_CASE("a subspace refined from the learned principle dominates the full space") {
    auto table = trans101_table();
    StatReasoner reasoner({.keep_m = 2});
    auto p = learn_stage(table, "t0", 50, reasoner);
    auto constraints = to_constraints(p, table.space());

    auto full = eedf(table, "t0", nullptr, "full");
    auto refined = eedf(table, "t0", &constraints, "refined");
    CHECK(refined.n == 64);  // 2^6 architectures survive
    auto d = dominance(refined, full);
    CHECK(d.relation == DominanceRelation::Dominates);
    CHECK(d.max_gap > 0.0);
}

TEST_CASE("dominance of a curve with itself is Equal with zero gap") {
    auto c = quartile_curve();
    auto d = dominance(c, c);
    CHECK(d.relation == DominanceRelation::Equal);
    CHECK(d.max_gap == 0.0);
}

TEST_CASE("dominance on single-point curves follows the error order") {
    EedfCurve a{{{0.1, 1.0}}, 1, "a"};
    EedfCurve b{{{0.2, 1.0}}, 1, "b"};
    CHECK(dominance(a, b).relation == DominanceRelation::Dominates);
    CHECK(dominance(b, a).relation == DominanceRelation::Dominated);
}

TEST_CASE("dominance detects crossing curves") {
    EedfCurve a{{{0.1, 0.5}, {0.5, 1.0}}, 2, "a"};
    EedfCurve b{{{0.2, 0.9}, {0.3, 1.0}}, 2, "b"};
    CHECK(dominance(a, b).relation == DominanceRelation::Crossing);
}

TEST_CASE("eedf surfaces an empty constrained subspace") {
    SpaceDescriptor space;
    space.space_id = "pairspace";
    LayerSlot slot;
    slot.candidate_ops = {"op0", "op1"};
    slot.candidate_sources = {"a", "b", "c"};
    slot.arity_min = slot.arity_max = 2;
    slot.distinct_sources = true;
    space.layers.push_back(slot);

    std::map<std::string, std::map<std::string, double>> records;
    double v = 0.0;
    for (const auto& arch : enumerate(space, 100)) {
        records[encode(arch, space)] = {{"t0", v += 1.0}};
    }
    BenchmarkTable table(space, {{"t0", "acc", Direction::Maximize}}, records);

    SubspaceConstraints constraints;
    constraints.per_layer.push_back({{"op0", "op1"}, {"a"}});  // arity 2 cannot be met
    CHECK_THROWS_AS(eedf(table, "t0", &constraints), EmptySubspace);
}

TEST_CASE("curve CSV carries the header and the label") {
    auto csv = quartile_curve().to_csv();
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "e,F,label");
    std::getline(in, line);
    CHECK(line == "0.1,0.25,quartiles");
}

TEST_CASE("summarize aggregates per task and averages ranks across tasks") {
    auto table = trans101_table();

    auto make_result = [](const std::string& task, double raw, int rank, std::uint64_t uniq) {
        LaptResult r;
        r.task = task;
        r.best_raw = raw;
        r.model_rank = rank;
        r.unique_evaluations = uniq;
        return r;
    };
    std::vector<LaptResult> results = {
        make_result("t0", 1.0, 9, 40),
        make_result("t0", 3.0, 3, 60),
        make_result("t1", 2.0, 5, 50),
    };

    auto j = summarize(results, table);
    CHECK(j["tasks"]["t0"]["runs"] == 2);
    CHECK(j["tasks"]["t0"]["best_raw_mean"] == doctest::Approx(2.0));
    CHECK(j["tasks"]["t0"]["best_raw_sigma"] == doctest::Approx(1.0));
    CHECK(j["tasks"]["t0"]["model_rank_mean"] == doctest::Approx(6.0));
    CHECK(j["tasks"]["t0"]["unique_evaluations_mean"] == doctest::Approx(50.0));
    CHECK(j["tasks"]["t1"]["model_rank_mean"] == doctest::Approx(5.0));
    CHECK(j["tasks"]["t1"]["metric"] == "loss");
    CHECK(j["average_rank"] == doctest::Approx((6.0 + 5.0) / 2.0));
}

TEST_CASE("summarize omits rank statistics when no run has a rank") {
    auto table = trans101_table();
    LaptResult r;
    r.task = "t0";
    r.best_raw = 1.0;
    auto j = summarize({r}, table);
    CHECK_FALSE(j["tasks"]["t0"].contains("model_rank_mean"));
    CHECK_FALSE(j.contains("average_rank"));
}

TEST_CASE("summarize of a 20-run sweep reports consistent statistics") {
    auto table = trans101_table();
    StatReasoner reasoner;
    auto initial = learn_stage(table, "t0", 50, reasoner);
    auto config = LaptConfig::defaults_for("trans101");

    std::vector<LaptResult> results;
    for (std::uint64_t s = 0; s < 20; ++s) {
        config.seed = s;
        auto runs = run_suite({"t1"}, table, initial, config, reasoner);
        results.push_back(std::move(runs[0]));
    }
    auto j = summarize(results, table);
    CHECK(j["tasks"]["t1"]["runs"] == 20);
    const double mean_rank = j["tasks"]["t1"]["model_rank_mean"];
    CHECK(mean_rank >= 1.0);
    CHECK(mean_rank <= 4096.0);
    // every run stayed within the trans101 evaluation budget implied by the config
    const double mean_uniq = j["tasks"]["t1"]["unique_evaluations_mean"];
    CHECK(mean_uniq <= 4 * 2 * 10);
    CHECK(j["average_rank"] == mean_rank);
}
