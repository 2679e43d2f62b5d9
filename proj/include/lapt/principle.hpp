#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lapt/space.hpp"

namespace lapt {

class PrincipleError : public std::runtime_error {
public:
    explicit PrincipleError(const std::string& msg) : std::runtime_error(msg) {}
};

class UnknownName : public PrincipleError {
public:
    UnknownName(int layer, const std::string& name)
        : PrincipleError("layer " + std::to_string(layer) + ": unknown name '" + name + "'") {}
};

class EmptyLayer : public PrincipleError {
public:
    explicit EmptyLayer(int layer)
        : PrincipleError("layer " + std::to_string(layer) + ": allowed set is empty"), layer(layer) {}
    int layer;
};

class ArityUnsatisfiable : public PrincipleError {
public:
    explicit ArityUnsatisfiable(int layer)
        : PrincipleError("layer " + std::to_string(layer) +
                         ": allowed sources cannot satisfy source arity"),
          layer(layer) {}
    int layer;
};

class SchemaError : public PrincipleError {
public:
    explicit SchemaError(const std::string& msg) : PrincipleError("schema: " + msg) {}
};

/// A transferable design principle: per-layer allowed operator/source sets
/// (nullopt = ALL) plus the free-text rationale behind them.
struct DesignPrinciple {
    struct Layer {
        std::optional<std::vector<std::string>> allowed_ops;      // nullopt = ALL
        std::optional<std::vector<std::string>> allowed_sources;  // nullopt = ALL
        bool operator==(const Layer&) const = default;
    };
    struct Provenance {
        std::string source_task;
        std::string backend;
        int generation = 0;  // 0 = transferred-in
        std::string created_at;
    };

    std::string space_id;
    std::vector<Layer> per_layer;
    std::vector<std::string> rationale;
    Provenance provenance;

    /// Checks layer count and that every named op/source exists in the space.
    /// Throws UnknownName / SchemaError. Allowed sets are canonicalized to
    /// candidate-list order.
    static DesignPrinciple create(std::string space_id, std::vector<Layer> per_layer,
                                  std::vector<std::string> rationale, Provenance provenance,
                                  const SpaceDescriptor& space);

    /// The unconstrained principle (ALL at every layer).
    static DesignPrinciple all(const SpaceDescriptor& space, Provenance provenance);
};

SubspaceConstraints to_constraints(const DesignPrinciple& p, const SpaceDescriptor& space);

/// Flips every layer to the operators/sources the principle currently
/// excludes; layers allowing everything stay ALL.
DesignPrinciple complement(const DesignPrinciple& p, const SpaceDescriptor& space);

nlohmann::json serialize(const DesignPrinciple& p);
DesignPrinciple deserialize(const nlohmann::json& doc, const SpaceDescriptor& space);

}  // namespace lapt
