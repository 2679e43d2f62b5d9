#include "lapt/evo.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

namespace lapt {

std::pair<double, bool> EvalCache::evaluate(const Architecture& arch, const std::string& key,
                                            const Oracle& oracle) {
    {
        std::lock_guard lock(mutex_);
        auto it = scores_.find(key);
        if (it != scores_.end()) return {it->second, true};
    }
    const double score = oracle(arch, key);
    std::lock_guard lock(mutex_);
    auto [it, inserted] = scores_.emplace(key, score);
    return {it->second, !inserted};
}

std::uint64_t EvalCache::unique_evaluations() const {
    std::lock_guard lock(mutex_);
    return scores_.size();
}

bool EvalCache::contains(const std::string& key) const {
    std::lock_guard lock(mutex_);
    return scores_.count(key) != 0;
}

std::string SearchTrace::to_jsonl() const {
    std::ostringstream out;
    for (const auto& e : entries) {
        out << "{\"key\":\"" << e.key << "\",\"score\":" << e.score << ",\"gen\":" << e.generation
            << ",\"cache_hit\":" << (e.cache_hit ? "true" : "false") << "}\n";
    }
    return out.str();
}

std::size_t tournament(const std::vector<double>& scores, int tournament_size, Rng& rng) {
    const std::size_t n = scores.size();
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(tournament_size), n);
    std::vector<std::size_t> indices(n);
    for (std::size_t i = 0; i < n; ++i) indices[i] = i;
    // partial Fisher-Yates: first k entries are a uniform sample without replacement
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(indices[i], indices[pick(rng)]);
    }
    std::size_t winner = indices[0];
    for (std::size_t i = 1; i < k; ++i) {
        const std::size_t c = indices[i];
        if (scores[c] > scores[winner] || (scores[c] == scores[winner] && c < winner)) winner = c;
    }
    return winner;
}

Architecture crossover(const Architecture& a, const Architecture& b, const SpaceDescriptor& space,
                       Rng& rng) {
    std::bernoulli_distribution coin(0.5);
    Architecture child;
    for (std::size_t i = 0; i < space.num_layers(); ++i) {
        child.choices.push_back(coin(rng) ? a.choices[i] : b.choices[i]);
        const auto& slot = space.layers[i];
        if (!slot.distinct_sources) continue;
        // repair duplicated sources by resampling from unused candidates
        auto& sources = child.choices[i].sources;
        std::set<std::string> seen;
        for (auto& s : sources) {
            if (seen.insert(s).second) continue;
            std::vector<std::string> alternatives;
            for (const auto& c : slot.candidate_sources) {
                if (!seen.count(c)) alternatives.push_back(c);
            }
            if (alternatives.empty()) continue;
            std::uniform_int_distribution<std::size_t> pick(0, alternatives.size() - 1);
            s = alternatives[pick(rng)];
            seen.insert(s);
        }
        std::sort(sources.begin(), sources.end(), [&](const auto& x, const auto& y) {
            return slot.source_index(x) < slot.source_index(y);
        });
    }
    return child;
}

EvoResult run_evolution(const SpaceDescriptor& space, const EvalCache::Oracle& oracle,
                        const EvoParams& params, EvalCache& cache) {
    Rng rng(params.seed);
    std::bernoulli_distribution do_crossover(params.crossover_prob);
    std::bernoulli_distribution do_mutation(params.mutation_prob);

    struct Member {
        Architecture arch;
        std::string key;
        double score;
    };
    std::deque<Member> population;

    EvoResult result;
    bool have_best = false;
    auto record = [&](const Architecture& arch, int generation) {
        const std::string key = encode(arch, space);
        auto [score, hit] = cache.evaluate(arch, key, oracle);
        result.trace.entries.push_back({key, score, generation, hit});
        if (!have_best || score > result.best_score) {
            result.best = arch;
            result.best_key = key;
            result.best_score = score;
            have_best = true;
        }
        result.trace.best_so_far.push_back(result.best_score);
        return Member{arch, key, score};
    };

    for (int i = 0; i < params.population_size; ++i) {
        population.push_back(record(sample_uniform(space, rng), 0));
    }

    for (int g = 1; g <= params.generations; ++g) {
        for (int c = 0; c < params.population_size; ++c) {
            std::vector<double> scores;
            scores.reserve(population.size());
            for (const auto& m : population) scores.push_back(m.score);

            Architecture child;
            if (do_crossover(rng)) {
                const auto& pa = population[tournament(scores, params.tournament_size, rng)];
                const auto& pb = population[tournament(scores, params.tournament_size, rng)];
                child = crossover(pa.arch, pb.arch, space, rng);
            } else {
                child = population[tournament(scores, params.tournament_size, rng)].arch;
            }
            if (do_mutation(rng)) child = mutate(child, space, rng);

            population.push_back(record(child, g));
            population.pop_front();  // aging: retire the oldest member
        }
    }

    result.trace.unique_evaluations = cache.unique_evaluations();
    return result;
}

}  // namespace lapt
