#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "lapt/space.hpp"

namespace lapt {

/// Regularized (aging) evolution settings; defaults per space come from the
/// run configuration.
struct EvoParams {
    int population_size = 10;
    int generations = 1;  // one generation = population_size child productions
    int tournament_size = 5;
    double crossover_prob = 0.0;
    double mutation_prob = 1.0;
    std::uint64_t seed = 0;
};

/// ArchKey -> normalized score, counting each oracle call exactly once.
/// Shared across iterations of one task run.
class EvalCache {
public:
    using Oracle = std::function<double(const Architecture&, const std::string& key)>;

    /// Returns (score, was_cache_hit).
    std::pair<double, bool> evaluate(const Architecture& arch, const std::string& key,
                                     const Oracle& oracle);

    std::uint64_t unique_evaluations() const;
    bool contains(const std::string& key) const;

private:
    mutable std::mutex mutex_;
    std::unordered_map<std::string, double> scores_;
};

struct TraceEntry {
    std::string key;
    double score = 0.0;
    int generation = 0;  // 0 = initial population
    bool cache_hit = false;
};

struct SearchTrace {
    std::vector<TraceEntry> entries;
    std::vector<double> best_so_far;  // parallel to entries, nondecreasing
    std::uint64_t unique_evaluations = 0;  // cache total after the run

    std::string to_jsonl() const;
};

struct EvoResult {
    Architecture best;
    std::string best_key;
    double best_score = 0.0;
    SearchTrace trace;
};

/// Index of the tournament winner (best score, ties to the earliest member).
std::size_t tournament(const std::vector<double>& scores, int tournament_size, Rng& rng);

/// Uniform per-layer recombination with repair against distinctness.
Architecture crossover(const Architecture& a, const Architecture& b, const SpaceDescriptor& space,
                       Rng& rng);

EvoResult run_evolution(const SpaceDescriptor& space, const EvalCache::Oracle& oracle,
                        const EvoParams& params, EvalCache& cache);

}  // namespace lapt
