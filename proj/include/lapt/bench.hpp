#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lapt/space.hpp"

namespace lapt {

class BenchError : public std::runtime_error {
public:
    explicit BenchError(const std::string& msg) : std::runtime_error(msg) {}
};

class DuplicateKey : public BenchError {
public:
    explicit DuplicateKey(const std::string& key) : BenchError("duplicate record key: " + key) {}
};

class UnknownArchitecture : public BenchError {
public:
    explicit UnknownArchitecture(const std::string& key)
        : BenchError("architecture not in table: " + key) {}
};

class UndecodableKey : public BenchError {
public:
    UndecodableKey(const std::string& key, const std::string& why)
        : BenchError("undecodable record key " + key + ": " + why) {}
};

class TableSchemaError : public BenchError {
public:
    explicit TableSchemaError(const std::string& msg) : BenchError("schema: " + msg) {}
};

class PartialTable : public BenchError {
public:
    PartialTable() : BenchError("operation requires a table covering the full space") {}
};

enum class Direction { Maximize, Minimize };

struct TaskSpec {
    std::string name;
    std::string metric;
    Direction direction = Direction::Maximize;
};

/// Raw metric under the task's direction rule: higher is always better.
inline double normalize(double raw, Direction dir) {
    return dir == Direction::Maximize ? raw : -raw;
}

/// Evaluation oracle: ArchKey -> per-task raw metric values.
class BenchmarkTable {
public:
    BenchmarkTable(SpaceDescriptor space, std::vector<TaskSpec> tasks,
                   std::map<std::string, std::map<std::string, double>> records);

    const SpaceDescriptor& space() const { return space_; }
    const std::vector<TaskSpec>& tasks() const { return tasks_; }
    const TaskSpec& task(const std::string& name) const;
    const std::map<std::string, std::map<std::string, double>>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool complete() const { return complete_; }

    double evaluate(const std::string& key, const std::string& task) const;
    double normalized(const std::string& key, const std::string& task) const;

    /// 1 = best; ties share the best rank. Requires a complete table.
    int model_rank(const std::string& key, const std::string& task) const;

    nlohmann::json to_json() const;
    static BenchmarkTable from_json(const nlohmann::json& j);
    static BenchmarkTable load(const std::string& path);
    void save(const std::string& path) const;

private:
    SpaceDescriptor space_;
    std::vector<TaskSpec> tasks_;
    std::map<std::string, std::map<std::string, double>> records_;
    bool complete_ = false;
};

struct SynthParams {
    std::uint64_t seed = 0;
    double interaction_strength = 0.0;  // lambda
    double noise_sigma = 0.0;
};

/// Score of one architecture under the synthetic landscape; pure in
/// (space, params, task index, arch), so any entry is recomputable alone.
double synth_score(const SpaceDescriptor& space, const SynthParams& params, std::size_t task_index,
                   const Architecture& arch);

/// Exhaustive synthetic table over the space (cardinality capped at 1e6).
BenchmarkTable synth_generate(const SpaceDescriptor& space, const SynthParams& params,
                              const std::vector<TaskSpec>& tasks);

struct ScoredArch {
    Architecture arch;
    std::string key;
    double score = 0.0;  // normalized, higher is better
};

/// Top-performing architectures for `learn`; sorted best-first.
struct Archive {
    std::vector<ScoredArch> entries;
    std::string task;
};

Archive top_k(const BenchmarkTable& table, const std::string& task, std::size_t k);

/// CSV rows `arch_key,task,value` -> canonical table.
BenchmarkTable ingest_csv(const std::string& csv_path, const SpaceDescriptor& space);

}  // namespace lapt
