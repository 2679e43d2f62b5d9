#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lapt/bench.hpp"
#include "lapt/orchestrator.hpp"

namespace lapt {

class ReportError : public std::runtime_error {
public:
    explicit ReportError(const std::string& msg) : std::runtime_error(msg) {}
};

class EmptySubspace : public ReportError {
public:
    EmptySubspace() : ReportError("constrained subspace contains no architectures") {}
};

/// Error empirical distribution function: F(e) = fraction of architectures
/// with error <= e (right-continuous step function).
struct EedfCurve {
    struct Point {
        double error;
        double fraction;
    };
    std::vector<Point> breakpoints;  // sorted by error, fraction nondecreasing
    std::size_t n = 0;
    std::string label;

    double at(double error) const;
    std::string to_csv() const;
};

/// Error = regret from the table's per-task best under the direction rule,
/// so 0 marks the global best for every metric.
EedfCurve eedf(const BenchmarkTable& table, const std::string& task,
               const SubspaceConstraints* constraints = nullptr, const std::string& label = "");

enum class DominanceRelation { Dominates, Dominated, Crossing, Equal };

struct DominanceResult {
    DominanceRelation relation = DominanceRelation::Equal;
    double max_gap = 0.0;  // largest |F_a - F_b| over the union of breakpoints
};

DominanceResult dominance(const EedfCurve& a, const EedfCurve& b);

/// Per-task mean/sigma of best score, unique evaluations and model rank,
/// plus the cross-task average rank.
nlohmann::json summarize(const std::vector<LaptResult>& results, const BenchmarkTable& table);

}  // namespace lapt
