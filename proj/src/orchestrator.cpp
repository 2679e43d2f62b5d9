#include "lapt/orchestrator.hpp"

#include <algorithm>
#include <map>
#include <nlohmann/json.hpp>

namespace lapt {
namespace {

std::uint64_t fnv1a(std::uint64_t seed, const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t seed, int iteration) {
    std::uint64_t h = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(iteration + 1);
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
    return h ^ (h >> 31);
}

std::string branch_name(Branch b) {
    switch (b) {
        case Branch::Adapt: return "adapt";
        case Branch::Explore: return "explore";
        case Branch::None: return "none";
    }
    return "none";
}

// Distinct architectures evaluated in one iteration, best-first.
Archive iteration_archive(const SearchTrace& trace, const SpaceDescriptor& space,
                          const std::string& task) {
    std::map<std::string, double> seen;
    for (const auto& e : trace.entries) seen.emplace(e.key, e.score);
    Archive archive;
    archive.task = task;
    for (const auto& [key, score] : seen) {
        archive.entries.push_back({decode(key, space), key, score});
    }
    std::sort(archive.entries.begin(), archive.entries.end(), [](const ScoredArch& a, const ScoredArch& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.key < b.key;
    });
    return archive;
}

}  // namespace

LaptConfig LaptConfig::defaults_for(const std::string& space_id) {
    LaptConfig c;
    if (space_id == "nas201") {
        c.learn_samples = 50;
        c.top_r = 5;
        c.iterations = 3;
        c.evo = {.population_size = 5, .generations = 1, .tournament_size = 2,
                 .crossover_prob = 0.0, .mutation_prob = 1.0, .seed = 0};
    } else if (space_id == "trans101") {
        c.learn_samples = 50;
        c.top_r = 15;
        c.iterations = 4;
        c.evo = {.population_size = 10, .generations = 1, .tournament_size = 5,
                 .crossover_prob = 0.0, .mutation_prob = 1.0, .seed = 0};
    } else if (space_id == "darts") {
        c.learn_samples = 100;
        c.top_r = 50;
        c.iterations = 2;
        c.evo = {.population_size = 20, .generations = 10, .tournament_size = 2,
                 .crossover_prob = 0.5, .mutation_prob = 0.5, .seed = 0};
    }
    return c;
}

nlohmann::json LaptConfig::to_json() const {
    return {{"learn_samples", learn_samples},
            {"top_r", top_r},
            {"iterations", iterations},
            {"evo",
             {{"population_size", evo.population_size},
              {"generations", evo.generations},
              {"tournament_size", evo.tournament_size},
              {"crossover_prob", evo.crossover_prob},
              {"mutation_prob", evo.mutation_prob}}},
            {"transfer_enabled", transfer_enabled},
            {"adaptation_enabled", adaptation_enabled},
            {"seed", seed}};
}

LaptConfig LaptConfig::from_json(const nlohmann::json& j) {
    LaptConfig c;
    c.learn_samples = j.value("learn_samples", c.learn_samples);
    c.top_r = j.value("top_r", c.top_r);
    c.iterations = j.value("iterations", c.iterations);
    if (j.contains("evo")) {
        const auto& e = j.at("evo");
        c.evo.population_size = e.value("population_size", c.evo.population_size);
        c.evo.generations = e.value("generations", c.evo.generations);
        c.evo.tournament_size = e.value("tournament_size", c.evo.tournament_size);
        c.evo.crossover_prob = e.value("crossover_prob", c.evo.crossover_prob);
        c.evo.mutation_prob = e.value("mutation_prob", c.evo.mutation_prob);
    }
    c.transfer_enabled = j.value("transfer_enabled", c.transfer_enabled);
    c.adaptation_enabled = j.value("adaptation_enabled", c.adaptation_enabled);
    c.seed = j.value("seed", c.seed);
    if (c.top_r < 1 || c.iterations < 1) throw std::runtime_error("config: top_r and iterations must be >= 1");
    return c;
}

nlohmann::json LaptResult::to_json() const {
    nlohmann::json j;
    j["task"] = task;
    j["best_key"] = best_key;
    j["best_raw"] = best_raw;
    j["best_normalized"] = best_normalized;
    if (model_rank) j["model_rank"] = *model_rank;
    j["unique_evaluations"] = unique_evaluations;
    j["iterations"] = nlohmann::json::array();
    for (const auto& it : iterations) {
        j["iterations"].push_back({{"iteration", it.iteration},
                                   {"best_score", it.best_score},
                                   {"base_after", it.base_after},
                                   {"branch", branch_name(it.branch)},
                                   {"subspace_cardinality", it.subspace_cardinality.str()}});
    }
    j["lineage"] = nlohmann::json::array();
    for (const auto& p : lineage) j["lineage"].push_back(serialize(p));
    return j;
}

DesignPrinciple learn_stage(const BenchmarkTable& source_table, const std::string& source_task,
                            std::size_t k, Reasoner& reasoner) {
    return reasoner.learn(top_k(source_table, source_task, k), source_table.space());
}

AdaptOutcome adapt_step(const DesignPrinciple& principle, const Archive& evaluated, double base,
                        double best, std::size_t top_r, Reasoner& reasoner,
                        const SpaceDescriptor& space) {
    AdaptOutcome out{principle, base, Branch::None};
    if (base <= best) {
        Archive top = evaluated;
        if (top.entries.size() > top_r) top.entries.resize(top_r);
        out.principle = reasoner.adapt(principle, top, space);
        out.base = best;
        out.branch = Branch::Adapt;
    } else {
        out.principle = reasoner.explore(principle, space);
        out.branch = Branch::Explore;
    }
    return out;
}

LaptResult run_task(const std::string& task, const BenchmarkTable& table,
                    const DesignPrinciple& initial, const LaptConfig& config, Reasoner& reasoner) {
    const SpaceDescriptor& space = table.space();
    DesignPrinciple principle =
        config.transfer_enabled ? initial : DesignPrinciple::all(space, initial.provenance);

    LaptResult result;
    result.task = task;
    result.lineage.push_back(principle);

    EvalCache cache;
    const EvalCache::Oracle oracle = [&](const Architecture&, const std::string& key) {
        return table.normalized(key, task);
    };

    double base = -std::numeric_limits<double>::infinity();
    bool have_best = false;

    for (int g = 1; g <= config.iterations; ++g) {
        SpaceDescriptor refined;
        try {
            refined = refine(space, to_constraints(principle, space));
        } catch (const std::exception& e) {
            throw EmptyRefinedSpace(e.what(), serialize(principle).dump(2));
        }

        EvoParams params = config.evo;
        params.seed = derive_seed(config.evo.seed, g);
        auto evo = run_evolution(refined, oracle, params, cache);

        const double best_this_iter = evo.best_score;
        if (!have_best || best_this_iter > result.best_normalized) {
            result.best_key = evo.best_key;
            result.best_normalized = best_this_iter;
            have_best = true;
        }

        IterationRecord record;
        record.iteration = g;
        record.best_score = best_this_iter;
        record.subspace_cardinality = cardinality(refined);

        if (config.adaptation_enabled) {
            auto outcome = adapt_step(principle, iteration_archive(evo.trace, space, task), base,
                                      best_this_iter, static_cast<std::size_t>(config.top_r),
                                      reasoner, space);
            principle = std::move(outcome.principle);
            base = outcome.base;
            record.branch = outcome.branch;
        } else {
            base = std::max(base, best_this_iter);
            record.branch = Branch::None;
        }
        record.base_after = base;
        result.iterations.push_back(std::move(record));
        result.lineage.push_back(principle);
        result.traces.push_back(std::move(evo.trace));
    }

    result.best_raw = table.evaluate(result.best_key, task);
    result.unique_evaluations = cache.unique_evaluations();
    if (table.complete()) result.model_rank = table.model_rank(result.best_key, task);
    return result;
}

std::vector<LaptResult> run_suite(const std::vector<std::string>& tasks, const BenchmarkTable& table,
                                  const DesignPrinciple& initial, const LaptConfig& config,
                                  Reasoner& reasoner) {
    std::vector<LaptResult> results;
    for (const auto& task : tasks) {
        LaptConfig per_task = config;
        per_task.evo.seed = fnv1a(config.seed, task);
        results.push_back(run_task(task, table, initial, per_task, reasoner));
    }
    return results;
}

}  // namespace lapt
