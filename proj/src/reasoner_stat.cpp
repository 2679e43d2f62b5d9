#include <algorithm>
#include <cmath>
#include <map>

#include "lapt/reasoner.hpp"

namespace lapt {
namespace {

// Candidate indices ranked by (count desc, candidate order).
std::vector<std::size_t> rank_by_count(const std::vector<std::string>& candidates,
                                       const std::map<std::string, int>& counts) {
    std::vector<std::size_t> idx(candidates.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        auto ca = counts.count(candidates[a]) ? counts.at(candidates[a]) : 0;
        auto cb = counts.count(candidates[b]) ? counts.at(candidates[b]) : 0;
        return ca > cb;
    });
    return idx;
}

std::optional<std::vector<std::string>> as_all_if_full(std::vector<std::string> set,
                                                       const std::vector<std::string>& candidates) {
    if (set.size() == candidates.size()) return std::nullopt;
    return set;
}

// Keep candidate-list order in the stored set.
std::vector<std::string> in_candidate_order(const std::vector<std::string>& members,
                                            const std::vector<std::string>& candidates) {
    std::vector<std::string> out;
    for (const auto& c : candidates) {
        if (std::find(members.begin(), members.end(), c) != members.end()) out.push_back(c);
    }
    return out;
}

}  // namespace

DesignPrinciple StatReasoner::learn(const Archive& archive, const SpaceDescriptor& space) {
    if (archive.entries.empty()) throw ReasonerError("learn: archive is empty");
    std::vector<DesignPrinciple::Layer> per_layer;
    for (std::size_t i = 0; i < space.num_layers(); ++i) {
        const auto& slot = space.layers[i];
        std::map<std::string, int> op_counts, src_counts;
        for (const auto& e : archive.entries) {
            ++op_counts[e.arch.choices[i].op];
            for (const auto& s : e.arch.choices[i].sources) ++src_counts[s];
        }
        DesignPrinciple::Layer layer;

        auto keep = std::min<std::size_t>(params_.keep_m, slot.candidate_ops.size());
        auto ranked = rank_by_count(slot.candidate_ops, op_counts);
        std::vector<std::string> ops;
        for (std::size_t r = 0; r < keep; ++r) ops.push_back(slot.candidate_ops[ranked[r]]);
        layer.allowed_ops = as_all_if_full(in_candidate_order(ops, slot.candidate_ops), slot.candidate_ops);

        if (slot.sources_forced()) {
            layer.allowed_sources = std::nullopt;
        } else {
            auto keep_s = std::max<std::size_t>(std::min<std::size_t>(params_.keep_s, slot.candidate_sources.size()),
                                                static_cast<std::size_t>(slot.arity_min));
            auto sranked = rank_by_count(slot.candidate_sources, src_counts);
            std::vector<std::string> srcs;
            for (std::size_t r = 0; r < keep_s; ++r) srcs.push_back(slot.candidate_sources[sranked[r]]);
            layer.allowed_sources =
                as_all_if_full(in_candidate_order(srcs, slot.candidate_sources), slot.candidate_sources);
        }
        per_layer.push_back(std::move(layer));
    }
    DesignPrinciple::Provenance prov;
    prov.source_task = archive.task;
    prov.backend = backend_id();
    prov.generation = 0;
    return DesignPrinciple::create(space.space_id, std::move(per_layer),
                                   {"kept the most frequent operators per layer from " +
                                    std::to_string(archive.entries.size()) + " top architectures of task '" +
                                    archive.task + "'"},
                                   std::move(prov), space);
}

DesignPrinciple StatReasoner::adapt(const DesignPrinciple& principle, const Archive& top_archs,
                                    const SpaceDescriptor& space) {
    if (top_archs.entries.empty()) throw ReasonerError("adapt: no architectures given");
    DesignPrinciple out = principle;
    for (std::size_t i = 0; i < space.num_layers(); ++i) {
        const auto& slot = space.layers[i];

        auto rebuild = [&](const std::vector<std::string>& candidates,
                           const std::optional<std::vector<std::string>>& prev_allowed,
                           std::size_t keep, std::size_t min_size,
                           auto&& extract) -> std::optional<std::vector<std::string>> {
            std::map<std::string, int> counts;
            for (const auto& e : top_archs.entries) extract(e.arch.choices[i], counts);

            // most frequent observed members, truncated to keep
            auto ranked = rank_by_count(candidates, counts);
            std::vector<std::string> next;
            for (auto r : ranked) {
                if (next.size() >= keep) break;
                if (counts.count(candidates[r]) && counts.at(candidates[r]) > 0) {
                    next.push_back(candidates[r]);
                }
            }
            // union with the retained head of the previous allowed set
            const auto prev = prev_allowed.value_or(candidates);
            auto retained = static_cast<std::size_t>(
                std::ceil(params_.retention * static_cast<double>(prev.size())));
            for (std::size_t r = 0; r < retained; ++r) {
                if (std::find(next.begin(), next.end(), prev[r]) == next.end()) next.push_back(prev[r]);
            }
            if (params_.pad_to_keep_m) {
                for (auto r : ranked) {
                    if (next.size() >= keep) break;
                    if (std::find(next.begin(), next.end(), candidates[r]) == next.end()) {
                        next.push_back(candidates[r]);
                    }
                }
            }
            while (next.size() < min_size && next.size() < candidates.size()) {
                for (auto r : ranked) {
                    if (std::find(next.begin(), next.end(), candidates[r]) == next.end()) {
                        next.push_back(candidates[r]);
                        break;
                    }
                }
            }
            return as_all_if_full(in_candidate_order(next, candidates), candidates);
        };

        out.per_layer[i].allowed_ops =
            rebuild(slot.candidate_ops, principle.per_layer[i].allowed_ops, params_.keep_m, 1,
                    [](const Architecture::LayerChoice& c, std::map<std::string, int>& counts) {
                        ++counts[c.op];
                    });
        if (slot.sources_forced()) {
            out.per_layer[i].allowed_sources = std::nullopt;
        } else {
            out.per_layer[i].allowed_sources =
                rebuild(slot.candidate_sources, principle.per_layer[i].allowed_sources, params_.keep_s,
                        static_cast<std::size_t>(slot.arity_min),
                        [](const Architecture::LayerChoice& c, std::map<std::string, int>& counts) {
                            for (const auto& s : c.sources) ++counts[s];
                        });
        }
    }
    out.rationale.push_back("adapted to the top " + std::to_string(top_archs.entries.size()) +
                            " architectures found for task '" + top_archs.task + "'");
    out.provenance.backend = backend_id();
    out.provenance.generation = principle.provenance.generation + 1;
    return DesignPrinciple::create(out.space_id, std::move(out.per_layer), std::move(out.rationale),
                                   std::move(out.provenance), space);
}

DesignPrinciple StatReasoner::explore(const DesignPrinciple& principle, const SpaceDescriptor& space) {
    return complement(principle, space);
}

}  // namespace lapt
