#include "lapt/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

namespace lapt {
namespace {

struct MeanSigma {
    double mean = 0.0;
    double sigma = 0.0;
};

MeanSigma mean_sigma(const std::vector<double>& values) {
    MeanSigma out;
    if (values.empty()) return out;
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(values.size());
    for (double v : values) out.sigma += (v - out.mean) * (v - out.mean);
    out.sigma = std::sqrt(out.sigma / static_cast<double>(values.size()));
    return out;
}

}  // namespace

double EedfCurve::at(double error) const {
    // right-continuous: the last breakpoint with error <= e
    double f = 0.0;
    for (const auto& p : breakpoints) {
        if (p.error > error) break;
        f = p.fraction;
    }
    return f;
}

std::string EedfCurve::to_csv() const {
    std::ostringstream out;
    out << "e,F,label\n";
    for (const auto& p : breakpoints) out << p.error << "," << p.fraction << "," << label << "\n";
    return out.str();
}

EedfCurve eedf(const BenchmarkTable& table, const std::string& task,
               const SubspaceConstraints* constraints, const std::string& label) {
    if (!table.complete()) throw PartialTable();
    const Direction dir = table.task(task).direction;

    double best = -std::numeric_limits<double>::infinity();
    for (const auto& [key, values] : table.records()) {
        best = std::max(best, normalize(values.at(task), dir));
    }

    std::vector<double> errors;
    if (constraints) {
        std::vector<Architecture> archs;
        try {
            archs = enumerate(refine(table.space(), *constraints), 1'000'000);
        } catch (const ConstraintEmpty&) {
            throw EmptySubspace();
        }
        if (archs.empty()) throw EmptySubspace();
        for (const auto& a : archs) {
            errors.push_back(best - table.normalized(encode(a, table.space()), task));
        }
    } else {
        for (const auto& [key, values] : table.records()) {
            errors.push_back(best - normalize(values.at(task), dir));
        }
    }
    std::sort(errors.begin(), errors.end());

    EedfCurve curve;
    curve.n = errors.size();
    curve.label = label;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        const double f = static_cast<double>(i + 1) / static_cast<double>(errors.size());
        if (!curve.breakpoints.empty() && curve.breakpoints.back().error == errors[i]) {
            curve.breakpoints.back().fraction = f;  // collapse ties onto one step
        } else {
            curve.breakpoints.push_back({errors[i], f});
        }
    }
    return curve;
}

DominanceResult dominance(const EedfCurve& a, const EedfCurve& b) {
    std::vector<double> grid;
    for (const auto& p : a.breakpoints) grid.push_back(p.error);
    for (const auto& p : b.breakpoints) grid.push_back(p.error);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    bool a_strict = false, b_strict = false;
    DominanceResult out;
    for (double e : grid) {
        const double fa = a.at(e), fb = b.at(e);
        if (fa > fb) a_strict = true;
        if (fb > fa) b_strict = true;
        out.max_gap = std::max(out.max_gap, std::abs(fa - fb));
    }
    if (a_strict && b_strict) {
        out.relation = DominanceRelation::Crossing;
    } else if (a_strict) {
        out.relation = DominanceRelation::Dominates;
    } else if (b_strict) {
        out.relation = DominanceRelation::Dominated;
    } else {
        out.relation = DominanceRelation::Equal;
    }
    return out;
}

nlohmann::json summarize(const std::vector<LaptResult>& results, const BenchmarkTable& table) {
    std::map<std::string, std::vector<const LaptResult*>> by_task;
    for (const auto& r : results) by_task[r.task].push_back(&r);

    nlohmann::json j;
    j["tasks"] = nlohmann::json::object();
    std::vector<double> task_mean_ranks;
    for (const auto& [task, rs] : by_task) {
        std::vector<double> raw, uniq, ranks;
        for (const auto* r : rs) {
            raw.push_back(r->best_raw);
            uniq.push_back(static_cast<double>(r->unique_evaluations));
            if (r->model_rank) ranks.push_back(static_cast<double>(*r->model_rank));
        }
        auto raw_ms = mean_sigma(raw);
        nlohmann::json tj = {{"runs", rs.size()},
                             {"metric", table.task(task).metric},
                             {"best_raw_mean", raw_ms.mean},
                             {"best_raw_sigma", raw_ms.sigma},
                             {"unique_evaluations_mean", mean_sigma(uniq).mean}};
        if (!ranks.empty()) {
            auto rank_ms = mean_sigma(ranks);
            tj["model_rank_mean"] = rank_ms.mean;
            tj["model_rank_sigma"] = rank_ms.sigma;
            task_mean_ranks.push_back(rank_ms.mean);
        }
        j["tasks"][task] = tj;
    }
    if (!task_mean_ranks.empty()) {
        j["average_rank"] = mean_sigma(task_mean_ranks).mean;
    }
    return j;
}

}  // namespace lapt
