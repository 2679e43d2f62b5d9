#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lapt/bench.hpp"
#include "lapt/evo.hpp"
#include "lapt/principle.hpp"
#include "lapt/reasoner.hpp"

namespace lapt {

class EmptyRefinedSpace : public std::runtime_error {
public:
    EmptyRefinedSpace(const std::string& why, std::string principle_doc)
        : std::runtime_error("refined space is empty: " + why), principle_doc(std::move(principle_doc)) {}
    std::string principle_doc;  // offending principle, serialized for diagnosis
};

struct LaptConfig {
    int learn_samples = 50;  // archive size for the learning stage
    int top_r = 15;          // architectures fed into adaptation
    int iterations = 4;      // G
    EvoParams evo;
    bool transfer_enabled = true;    // false: start from the ALL principle
    bool adaptation_enabled = true;  // false: principle never updated
    std::uint64_t seed = 0;

    /// Table 1 presets: "nas201", "trans101", "darts".
    static LaptConfig defaults_for(const std::string& space_id);

    nlohmann::json to_json() const;
    static LaptConfig from_json(const nlohmann::json& j);
};

enum class Branch { Adapt, Explore, None };

struct IterationRecord {
    int iteration = 0;  // 1-based
    double best_score = 0.0;  // normalized best of this iteration
    double base_after = 0.0;
    Branch branch = Branch::None;
    BigInt subspace_cardinality;
};

struct LaptResult {
    std::string task;
    std::string best_key;
    double best_raw = 0.0;
    double best_normalized = 0.0;
    std::optional<int> model_rank;  // when the table covers the space
    std::uint64_t unique_evaluations = 0;
    std::vector<DesignPrinciple> lineage;  // initial + one per iteration
    std::vector<IterationRecord> iterations;
    std::vector<SearchTrace> traces;  // one per iteration

    nlohmann::json to_json() const;
};

/// Archive of the k best entries of the source task's table, then one
/// reasoner.learn call: the transferable principle.
DesignPrinciple learn_stage(const BenchmarkTable& source_table, const std::string& source_task,
                            std::size_t k, Reasoner& reasoner);

/// One branch decision: adapt (and raise the base) when the iteration's best
/// reaches it, otherwise explore.
struct AdaptOutcome {
    DesignPrinciple principle;
    double base = 0.0;
    Branch branch = Branch::None;
};
AdaptOutcome adapt_step(const DesignPrinciple& principle, const Archive& evaluated, double base,
                        double best, std::size_t top_r, Reasoner& reasoner,
                        const SpaceDescriptor& space);

LaptResult run_task(const std::string& task, const BenchmarkTable& table,
                    const DesignPrinciple& initial, const LaptConfig& config, Reasoner& reasoner);

/// Independent per-task runs sharing the initial principle; seeds derived
/// from (config.seed, task name) so task order does not matter.
std::vector<LaptResult> run_suite(const std::vector<std::string>& tasks, const BenchmarkTable& table,
                                  const DesignPrinciple& initial, const LaptConfig& config,
                                  Reasoner& reasoner);

}  // namespace lapt
