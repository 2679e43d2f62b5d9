#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json_fwd.hpp>

namespace lapt {

using BigInt = boost::multiprecision::cpp_int;
using Rng = std::mt19937_64;

class SpaceError : public std::runtime_error {
public:
    explicit SpaceError(const std::string& msg) : std::runtime_error(msg) {}
};

class ConstraintEmpty : public SpaceError {
public:
    ConstraintEmpty(int layer, const std::string& what_empty)
        : SpaceError("empty candidate set at layer " + std::to_string(layer) +
                     " (" + what_empty + ")"),
          layer(layer) {}
    int layer;
};

class TooLarge : public SpaceError {
public:
    TooLarge(const BigInt& cardinality, std::uint64_t cap)
        : SpaceError("space cardinality " + cardinality.str() +
                     " exceeds cap " + std::to_string(cap)) {}
};

class ParseError : public SpaceError {
public:
    explicit ParseError(const std::string& msg) : SpaceError("parse error: " + msg) {}
};

/// One layer of a cell-based space: which operators may sit here and which
/// earlier positions it may read from.
struct LayerSlot {
    std::vector<std::string> candidate_ops;
    std::vector<std::string> candidate_sources;
    int arity_min = 0;
    int arity_max = 0;
    bool distinct_sources = true;

    /// Sources carry no choice: every architecture takes all of them.
    bool sources_forced() const {
        return arity_min == arity_max &&
               arity_min == static_cast<int>(candidate_sources.size()) &&
               distinct_sources;
    }

    int op_index(const std::string& op) const;
    int source_index(const std::string& src) const;
};

struct SpaceDescriptor {
    std::string space_id;
    std::vector<LayerSlot> layers;

    std::size_t num_layers() const { return layers.size(); }

    nlohmann::json to_json() const;
    static SpaceDescriptor from_json(const nlohmann::json& j);

    /// Built-in shapes: "nas201", "trans101", "darts", "synth-<L>x<K>".
    static SpaceDescriptor make(const std::string& space_id);
};

/// One point in the space: per layer, an operator and the selected sources
/// (stored as sorted candidate indices into the slot's candidate_sources).
struct Architecture {
    struct LayerChoice {
        std::string op;
        std::vector<std::string> sources;  // sorted by candidate index
        bool operator==(const LayerChoice&) const = default;
    };
    std::vector<LayerChoice> choices;

    bool operator==(const Architecture&) const = default;
};

struct SubspaceConstraints {
    struct Layer {
        std::vector<std::string> allowed_ops;
        std::vector<std::string> allowed_sources;
    };
    std::vector<Layer> per_layer;
};

struct Violation {
    int layer;  // -1 for whole-architecture problems
    std::string rule;
};

std::vector<Violation> validate(const Architecture& arch, const SpaceDescriptor& space);

/// Exact size of the (optionally constrained) space.
BigInt cardinality(const SpaceDescriptor& space,
                   const SubspaceConstraints* constraints = nullptr);

/// Shrinks every layer's candidate sets to the allowed ones; throws
/// ConstraintEmpty when a layer ends up unsatisfiable.
SpaceDescriptor refine(const SpaceDescriptor& space, const SubspaceConstraints& constraints);

Architecture sample_uniform(const SpaceDescriptor& space, Rng& rng);

/// Every architecture exactly once, in canonical (layer, op, sources) order.
/// Throws TooLarge when cardinality exceeds cap.
std::vector<Architecture> enumerate(const SpaceDescriptor& space, std::uint64_t cap);

/// Re-randomizes exactly one decision (one layer's op or its sources).
/// Returns the input unchanged when no decision has an alternative.
Architecture mutate(const Architecture& arch, const SpaceDescriptor& space, Rng& rng);

std::string encode(const Architecture& arch, const SpaceDescriptor& space);
Architecture decode(const std::string& key, const SpaceDescriptor& space);

}  // namespace lapt
