#include "lapt/principle.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>

namespace lapt {
namespace {

// Canonicalize to candidate-list order, dropping duplicates; reject unknowns.
std::vector<std::string> canonicalize(const std::vector<std::string>& names,
                                      const std::vector<std::string>& candidates, int layer) {
    for (const auto& n : names) {
        if (std::find(candidates.begin(), candidates.end(), n) == candidates.end()) {
            throw UnknownName(layer, n);
        }
    }
    std::vector<std::string> out;
    for (const auto& c : candidates) {
        if (std::find(names.begin(), names.end(), c) != names.end()) out.push_back(c);
    }
    return out;
}

nlohmann::json set_to_json(const std::optional<std::vector<std::string>>& set) {
    if (!set) return "ALL";
    return *set;
}

std::optional<std::vector<std::string>> set_from_json(const nlohmann::json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "ALL") return std::nullopt;
        throw SchemaError("allowed set must be a list or \"ALL\", got \"" + j.get<std::string>() + "\"");
    }
    if (!j.is_array()) throw SchemaError("allowed set must be a list or \"ALL\"");
    return j.get<std::vector<std::string>>();
}

}  // namespace

DesignPrinciple DesignPrinciple::create(std::string space_id, std::vector<Layer> per_layer,
                                        std::vector<std::string> rationale, Provenance provenance,
                                        const SpaceDescriptor& space) {
    if (space_id != space.space_id) {
        throw SchemaError("principle targets space '" + space_id + "', got '" + space.space_id + "'");
    }
    if (per_layer.size() != space.num_layers()) {
        throw SchemaError("principle has " + std::to_string(per_layer.size()) + " layers, space has " +
                          std::to_string(space.num_layers()));
    }
    for (std::size_t i = 0; i < per_layer.size(); ++i) {
        auto& layer = per_layer[i];
        const auto& slot = space.layers[i];
        if (layer.allowed_ops) {
            if (layer.allowed_ops->empty()) throw EmptyLayer(static_cast<int>(i));
            layer.allowed_ops = canonicalize(*layer.allowed_ops, slot.candidate_ops, static_cast<int>(i));
        }
        if (layer.allowed_sources) {
            layer.allowed_sources =
                canonicalize(*layer.allowed_sources, slot.candidate_sources, static_cast<int>(i));
        }
    }
    DesignPrinciple p;
    p.space_id = std::move(space_id);
    p.per_layer = std::move(per_layer);
    p.rationale = std::move(rationale);
    p.provenance = std::move(provenance);
    return p;
}

DesignPrinciple DesignPrinciple::all(const SpaceDescriptor& space, Provenance provenance) {
    DesignPrinciple p;
    p.space_id = space.space_id;
    p.per_layer.resize(space.num_layers());
    p.provenance = std::move(provenance);
    return p;
}

SubspaceConstraints to_constraints(const DesignPrinciple& p, const SpaceDescriptor& space) {
    if (p.space_id != space.space_id || p.per_layer.size() != space.num_layers()) {
        throw SchemaError("principle does not target this space");
    }
    SubspaceConstraints c;
    for (std::size_t i = 0; i < space.num_layers(); ++i) {
        const auto& slot = space.layers[i];
        const auto& layer = p.per_layer[i];
        SubspaceConstraints::Layer out;
        out.allowed_ops = layer.allowed_ops.value_or(slot.candidate_ops);
        out.allowed_sources = layer.allowed_sources.value_or(slot.candidate_sources);
        if (out.allowed_ops.empty()) throw EmptyLayer(static_cast<int>(i));
        if (slot.distinct_sources && static_cast<int>(out.allowed_sources.size()) < slot.arity_min) {
            throw ArityUnsatisfiable(static_cast<int>(i));
        }
        c.per_layer.push_back(std::move(out));
    }
    return c;
}

DesignPrinciple complement(const DesignPrinciple& p, const SpaceDescriptor& space) {
    DesignPrinciple out = p;
    for (std::size_t i = 0; i < space.num_layers(); ++i) {
        const auto& slot = space.layers[i];
        auto flip = [](const std::optional<std::vector<std::string>>& allowed,
                       const std::vector<std::string>& candidates)
            -> std::optional<std::vector<std::string>> {
            if (!allowed) return std::nullopt;  // ALL stays ALL
            std::vector<std::string> rest;
            for (const auto& c : candidates) {
                if (std::find(allowed->begin(), allowed->end(), c) == allowed->end()) rest.push_back(c);
            }
            if (rest.empty()) return std::nullopt;  // allowed everything already
            return rest;
        };
        out.per_layer[i].allowed_ops = flip(p.per_layer[i].allowed_ops, slot.candidate_ops);
        out.per_layer[i].allowed_sources = flip(p.per_layer[i].allowed_sources, slot.candidate_sources);
    }
    out.rationale.push_back("exploration: flipped to operators and sources excluded by the previous principle");
    out.provenance.generation = p.provenance.generation + 1;
    return out;
}

nlohmann::json serialize(const DesignPrinciple& p) {
    nlohmann::json j;
    j["space_id"] = p.space_id;
    j["per_layer"] = nlohmann::json::array();
    for (const auto& layer : p.per_layer) {
        j["per_layer"].push_back({{"allowed_ops", set_to_json(layer.allowed_ops)},
                                  {"allowed_sources", set_to_json(layer.allowed_sources)}});
    }
    j["rationale"] = p.rationale;
    j["provenance"] = {{"source_task", p.provenance.source_task},
                       {"backend", p.provenance.backend},
                       {"generation", p.provenance.generation},
                       {"created_at", p.provenance.created_at}};
    return j;
}

DesignPrinciple deserialize(const nlohmann::json& doc, const SpaceDescriptor& space) {
    if (!doc.is_object()) throw SchemaError("principle document must be an object");
    if (!doc.contains("per_layer")) throw SchemaError("missing per_layer");
    std::vector<DesignPrinciple::Layer> per_layer;
    try {
        for (const auto& lj : doc.at("per_layer")) {
            DesignPrinciple::Layer layer;
            layer.allowed_ops = set_from_json(lj.at("allowed_ops"));
            layer.allowed_sources = set_from_json(lj.at("allowed_sources"));
            per_layer.push_back(std::move(layer));
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(e.what());
    }
    std::vector<std::string> rationale;
    DesignPrinciple::Provenance prov;
    try {
        if (doc.contains("rationale")) rationale = doc.at("rationale").get<std::vector<std::string>>();
        if (doc.contains("provenance")) {
            const auto& pj = doc.at("provenance");
            prov.source_task = pj.value("source_task", "");
            prov.backend = pj.value("backend", "");
            prov.generation = pj.value("generation", 0);
            prov.created_at = pj.value("created_at", "");
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(e.what());
    }
    std::string space_id = doc.value("space_id", space.space_id);
    return DesignPrinciple::create(std::move(space_id), std::move(per_layer), std::move(rationale),
                                   std::move(prov), space);
}

}  // namespace lapt
