#include "lapt/space.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <set>

namespace lapt {
namespace {

BigInt binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    BigInt r = 1;
    for (int i = 0; i < k; ++i) {
        r *= (n - i);
        r /= (i + 1);
    }
    return r;
}

// Count of valid source selections from n candidates under the slot's arity.
BigInt source_selection_count(const LayerSlot& slot, int n) {
    BigInt total = 0;
    for (int k = slot.arity_min; k <= slot.arity_max; ++k) {
        if (slot.distinct_sources) {
            total += binomial(n, k);
        } else {
            total += binomial(n + k - 1, k);
        }
    }
    return total;
}

constexpr std::uint64_t kMaxSelections = 1'000'000;

// All valid selections over the given candidate indices, k ascending then
// lexicographic. Index vectors are non-decreasing (strictly increasing when
// distinct_sources).
std::vector<std::vector<int>> source_selections(const LayerSlot& slot,
                                                const std::vector<int>& candidates) {
    const int n = static_cast<int>(candidates.size());
    BigInt count = source_selection_count(slot, n);
    if (count > kMaxSelections) {
        throw SpaceError("layer source choice too large to enumerate (" + count.str() + ")");
    }
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    auto rec = [&](auto&& self, int start, int remaining) -> void {
        if (remaining == 0) {
            out.push_back(cur);
            return;
        }
        for (int i = start; i < n; ++i) {
            cur.push_back(candidates[i]);
            self(self, slot.distinct_sources ? i + 1 : i, remaining - 1);
            cur.pop_back();
        }
    };
    for (int k = slot.arity_min; k <= slot.arity_max; ++k) {
        rec(rec, 0, k);
    }
    return out;
}

std::vector<int> all_indices(std::size_t n) {
    std::vector<int> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<int>(i);
    return v;
}

// Intersect an allowed-name list with a candidate list, keeping candidate order.
std::vector<int> allowed_indices(const std::vector<std::string>& candidates,
                                 const std::vector<std::string>& allowed) {
    std::vector<int> out;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (std::find(allowed.begin(), allowed.end(), candidates[i]) != allowed.end()) {
            out.push_back(static_cast<int>(i));
        }
    }
    return out;
}

std::vector<std::string> names_at(const std::vector<std::string>& candidates,
                                  const std::vector<int>& idx) {
    std::vector<std::string> out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(candidates[i]);
    return out;
}

const std::vector<std::string> kDartsBaseOps = {
    "none",         "skip_connect", "max_pool_3x3", "avg_pool_3x3",
    "sep_conv_3x3", "sep_conv_5x5", "dil_conv_3x3", "dil_conv_5x5"};

}  // namespace

int LayerSlot::op_index(const std::string& op) const {
    auto it = std::find(candidate_ops.begin(), candidate_ops.end(), op);
    return it == candidate_ops.end() ? -1 : static_cast<int>(it - candidate_ops.begin());
}

int LayerSlot::source_index(const std::string& src) const {
    auto it = std::find(candidate_sources.begin(), candidate_sources.end(), src);
    return it == candidate_sources.end() ? -1 : static_cast<int>(it - candidate_sources.begin());
}

nlohmann::json SpaceDescriptor::to_json() const {
    nlohmann::json j;
    j["space_id"] = space_id;
    j["layers"] = nlohmann::json::array();
    for (const auto& slot : layers) {
        j["layers"].push_back({{"candidate_ops", slot.candidate_ops},
                               {"candidate_sources", slot.candidate_sources},
                               {"source_arity", {slot.arity_min, slot.arity_max}},
                               {"distinct_sources", slot.distinct_sources}});
    }
    return j;
}

SpaceDescriptor SpaceDescriptor::from_json(const nlohmann::json& j) {
    SpaceDescriptor d;
    try {
        d.space_id = j.at("space_id").get<std::string>();
        for (const auto& lj : j.at("layers")) {
            LayerSlot slot;
            slot.candidate_ops = lj.at("candidate_ops").get<std::vector<std::string>>();
            slot.candidate_sources = lj.at("candidate_sources").get<std::vector<std::string>>();
            slot.arity_min = lj.at("source_arity").at(0).get<int>();
            slot.arity_max = lj.at("source_arity").at(1).get<int>();
            slot.distinct_sources = lj.at("distinct_sources").get<bool>();
            d.layers.push_back(std::move(slot));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("space descriptor: ") + e.what());
    }
    if (d.layers.empty()) throw ParseError("space descriptor: no layers");
    for (std::size_t i = 0; i < d.layers.size(); ++i) {
        const auto& slot = d.layers[i];
        if (slot.candidate_ops.empty()) throw ParseError("layer " + std::to_string(i) + ": no candidate_ops");
        if (slot.arity_min < 0 || slot.arity_min > slot.arity_max ||
            slot.arity_max > static_cast<int>(slot.candidate_sources.size())) {
            throw ParseError("layer " + std::to_string(i) + ": bad source_arity");
        }
    }
    return d;
}

SpaceDescriptor SpaceDescriptor::make(const std::string& space_id) {
    SpaceDescriptor d;
    d.space_id = space_id;

    auto fixed_cell = [&](const std::vector<std::string>& ops) {
        // 4-node cell, one layer per edge, sources fixed by the wiring.
        static const std::vector<std::string> edge_sources = {"n0", "n0", "n1",
                                                              "n0", "n1", "n2"};
        for (const auto& src : edge_sources) {
            LayerSlot slot;
            slot.candidate_ops = ops;
            slot.candidate_sources = {src};
            slot.arity_min = slot.arity_max = 1;
            slot.distinct_sources = true;
            d.layers.push_back(std::move(slot));
        }
    };

    if (space_id == "nas201") {
        fixed_cell({"none", "skip_connect", "nor_conv_1x1", "nor_conv_3x3", "avg_pool_3x3"});
    } else if (space_id == "trans101") {
        fixed_cell({"none", "skip_connect", "conv_1x1", "conv_3x3"});
    } else if (space_id == "darts") {
        // One layer per stage; a stage's two edges are fused into one op
        // name "a&b" with a taking the lower-indexed source. The two edges
        // must read from different sources, so arity is (2,2) distinct.
        std::vector<std::string> op_pairs;
        for (const auto& a : kDartsBaseOps)
            for (const auto& b : kDartsBaseOps) op_pairs.push_back(a + "&" + b);
        std::vector<std::string> sources = {"in0", "in1"};
        for (int stage = 1; stage <= 4; ++stage) {
            LayerSlot slot;
            slot.candidate_ops = op_pairs;
            slot.candidate_sources = sources;
            slot.arity_min = slot.arity_max = 2;
            slot.distinct_sources = true;
            d.layers.push_back(std::move(slot));
            sources.push_back("s" + std::to_string(stage));
        }
    } else if (space_id.rfind("synth-", 0) == 0) {
        // synth-<L>x<K>: L layers, K ops, fixed single source per layer.
        auto body = space_id.substr(6);
        auto xpos = body.find('x');
        if (xpos == std::string::npos) throw ParseError("bad synthetic space id: " + space_id);
        int L = std::stoi(body.substr(0, xpos));
        int K = std::stoi(body.substr(xpos + 1));
        if (L < 1 || K < 1) throw ParseError("bad synthetic space id: " + space_id);
        for (int i = 0; i < L; ++i) {
            LayerSlot slot;
            for (int k = 0; k < K; ++k) slot.candidate_ops.push_back("op" + std::to_string(k));
            slot.candidate_sources = {"n" + std::to_string(i)};
            slot.arity_min = slot.arity_max = 1;
            slot.distinct_sources = true;
            d.layers.push_back(std::move(slot));
        }
    } else {
        throw ParseError("unknown space id: " + space_id);
    }
    return d;
}

std::vector<Violation> validate(const Architecture& arch, const SpaceDescriptor& space) {
    std::vector<Violation> out;
    const std::size_t L = space.num_layers();
    if (arch.choices.size() != L) {
        out.push_back({-1, "architecture has " + std::to_string(arch.choices.size()) +
                               " layers, space has " + std::to_string(L)});
    }
    const std::size_t n = std::min(arch.choices.size(), L);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& slot = space.layers[i];
        const auto& choice = arch.choices[i];
        const int li = static_cast<int>(i);
        if (slot.op_index(choice.op) < 0) {
            out.push_back({li, "operator '" + choice.op + "' not a candidate"});
        }
        for (const auto& s : choice.sources) {
            if (slot.source_index(s) < 0) {
                out.push_back({li, "source '" + s + "' not a candidate"});
            }
        }
        const int k = static_cast<int>(choice.sources.size());
        if (k < slot.arity_min || k > slot.arity_max) {
            out.push_back({li, "selected " + std::to_string(k) + " sources, arity is [" +
                                   std::to_string(slot.arity_min) + "," +
                                   std::to_string(slot.arity_max) + "]"});
        }
        if (slot.distinct_sources) {
            std::set<std::string> uniq(choice.sources.begin(), choice.sources.end());
            if (uniq.size() != choice.sources.size()) {
                out.push_back({li, "sources not pairwise distinct"});
            }
        }
    }
    return out;
}

BigInt cardinality(const SpaceDescriptor& space, const SubspaceConstraints* constraints) {
    BigInt total = 1;
    for (std::size_t i = 0; i < space.num_layers(); ++i) {
        const auto& slot = space.layers[i];
        std::size_t n_ops = slot.candidate_ops.size();
        std::size_t n_src = slot.candidate_sources.size();
        if (constraints) {
            n_ops = allowed_indices(slot.candidate_ops, constraints->per_layer.at(i).allowed_ops).size();
            n_src = allowed_indices(slot.candidate_sources, constraints->per_layer.at(i).allowed_sources).size();
        }
        if (n_ops == 0) throw ConstraintEmpty(static_cast<int>(i), "operators");
        BigInt src_count = source_selection_count(slot, static_cast<int>(n_src));
        if (src_count == 0) throw ConstraintEmpty(static_cast<int>(i), "sources");
        total *= BigInt(n_ops) * src_count;
    }
    return total;
}

SpaceDescriptor refine(const SpaceDescriptor& space, const SubspaceConstraints& constraints) {
    if (constraints.per_layer.size() != space.num_layers()) {
        throw SpaceError("constraints cover " + std::to_string(constraints.per_layer.size()) +
                         " layers, space has " + std::to_string(space.num_layers()));
    }
    SpaceDescriptor out;
    out.space_id = space.space_id;
    for (std::size_t i = 0; i < space.num_layers(); ++i) {
        const auto& slot = space.layers[i];
        const auto& c = constraints.per_layer[i];
        LayerSlot refined;
        refined.candidate_ops = names_at(slot.candidate_ops, allowed_indices(slot.candidate_ops, c.allowed_ops));
        refined.candidate_sources =
            names_at(slot.candidate_sources, allowed_indices(slot.candidate_sources, c.allowed_sources));
        if (refined.candidate_ops.empty()) throw ConstraintEmpty(static_cast<int>(i), "operators");
        refined.arity_min = slot.arity_min;
        refined.arity_max = std::min(slot.arity_max, static_cast<int>(refined.candidate_sources.size()));
        refined.distinct_sources = slot.distinct_sources;
        if (slot.distinct_sources && refined.arity_min > static_cast<int>(refined.candidate_sources.size())) {
            throw ConstraintEmpty(static_cast<int>(i), "sources cannot satisfy arity");
        }
        out.layers.push_back(std::move(refined));
    }
    return out;
}

Architecture sample_uniform(const SpaceDescriptor& space, Rng& rng) {
    Architecture arch;
    for (const auto& slot : space.layers) {
        Architecture::LayerChoice choice;
        std::uniform_int_distribution<std::size_t> op_pick(0, slot.candidate_ops.size() - 1);
        choice.op = slot.candidate_ops[op_pick(rng)];
        auto selections = source_selections(slot, all_indices(slot.candidate_sources.size()));
        if (selections.empty()) throw SpaceError("layer has no valid source selection");
        std::uniform_int_distribution<std::size_t> src_pick(0, selections.size() - 1);
        choice.sources = names_at(slot.candidate_sources, selections[src_pick(rng)]);
        arch.choices.push_back(std::move(choice));
    }
    return arch;
}

std::vector<Architecture> enumerate(const SpaceDescriptor& space, std::uint64_t cap) {
    BigInt size = cardinality(space);
    if (size > cap) throw TooLarge(size, cap);

    const std::size_t L = space.num_layers();
    std::vector<std::vector<std::vector<int>>> selections(L);
    for (std::size_t i = 0; i < L; ++i) {
        selections[i] = source_selections(space.layers[i], all_indices(space.layers[i].candidate_sources.size()));
    }

    std::vector<Architecture> out;
    out.reserve(static_cast<std::size_t>(size));
    std::vector<std::size_t> op_idx(L, 0), src_idx(L, 0);
    while (true) {
        Architecture arch;
        for (std::size_t i = 0; i < L; ++i) {
            arch.choices.push_back(
                {space.layers[i].candidate_ops[op_idx[i]],
                 names_at(space.layers[i].candidate_sources, selections[i][src_idx[i]])});
        }
        out.push_back(std::move(arch));
        // odometer: last layer varies fastest, sources within op
        std::size_t i = L;
        while (i > 0) {
            --i;
            if (++src_idx[i] < selections[i].size()) break;
            src_idx[i] = 0;
            if (++op_idx[i] < space.layers[i].candidate_ops.size()) break;
            op_idx[i] = 0;
            if (i == 0) return out;
        }
    }
}

Architecture mutate(const Architecture& arch, const SpaceDescriptor& space, Rng& rng) {
    struct Decision {
        std::size_t layer;
        bool is_op;
    };
    std::vector<Decision> open;
    std::vector<std::vector<std::vector<int>>> selections(space.num_layers());
    for (std::size_t i = 0; i < space.num_layers(); ++i) {
        if (space.layers[i].candidate_ops.size() >= 2) open.push_back({i, true});
        selections[i] = source_selections(space.layers[i], all_indices(space.layers[i].candidate_sources.size()));
        if (selections[i].size() >= 2) open.push_back({i, false});
    }
    if (open.empty()) return arch;

    std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
    const Decision d = open[pick(rng)];
    Architecture out = arch;
    const auto& slot = space.layers[d.layer];
    if (d.is_op) {
        const auto cur = static_cast<std::size_t>(slot.op_index(out.choices[d.layer].op));
        std::uniform_int_distribution<std::size_t> op_pick(0, slot.candidate_ops.size() - 2);
        std::size_t j = op_pick(rng);
        if (j >= cur) ++j;  // skip the current operator
        out.choices[d.layer].op = slot.candidate_ops[j];
    } else {
        const auto& sels = selections[d.layer];
        const auto cur = out.choices[d.layer].sources;
        std::uniform_int_distribution<std::size_t> src_pick(0, sels.size() - 1);
        std::vector<std::string> next;
        do {
            next = names_at(slot.candidate_sources, sels[src_pick(rng)]);
        } while (next == cur);
        out.choices[d.layer].sources = std::move(next);
    }
    return out;
}

std::string encode(const Architecture& arch, const SpaceDescriptor& space) {
    auto violations = validate(arch, space);
    if (!violations.empty()) {
        throw SpaceError("cannot encode invalid architecture: " + violations.front().rule);
    }
    std::string key = "|";
    for (std::size_t i = 0; i < arch.choices.size(); ++i) {
        const auto& slot = space.layers[i];
        const auto& choice = arch.choices[i];
        key += choice.op;
        if (!slot.sources_forced() && !choice.sources.empty()) {
            std::vector<std::string> sorted = choice.sources;
            std::sort(sorted.begin(), sorted.end(), [&](const auto& a, const auto& b) {
                return slot.source_index(a) < slot.source_index(b);
            });
            key += "~";
            for (std::size_t s = 0; s < sorted.size(); ++s) {
                if (s) key += "+";
                key += sorted[s];
            }
        }
        key += "|";
    }
    return key;
}

Architecture decode(const std::string& key, const SpaceDescriptor& space) {
    if (key.size() < 2 || key.front() != '|' || key.back() != '|') {
        throw ParseError("key must be wrapped in '|': " + key);
    }
    std::vector<std::string> tokens;
    std::size_t pos = 1;
    while (pos < key.size()) {
        std::size_t next = key.find('|', pos);
        if (next == std::string::npos) throw ParseError("unterminated token in key: " + key);
        tokens.push_back(key.substr(pos, next - pos));
        pos = next + 1;
    }
    if (tokens.size() != space.num_layers()) {
        throw ParseError("key has " + std::to_string(tokens.size()) + " tokens, space has " +
                         std::to_string(space.num_layers()) + " layers");
    }
    Architecture arch;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& tok = tokens[i];
        if (tok.empty()) throw ParseError("empty layer token in key: " + key);
        Architecture::LayerChoice choice;
        auto tilde = tok.find('~');
        choice.op = tok.substr(0, tilde);
        if (tilde != std::string::npos) {
            std::size_t s = tilde + 1;
            while (s <= tok.size()) {
                std::size_t plus = tok.find('+', s);
                std::string src = tok.substr(s, plus == std::string::npos ? std::string::npos : plus - s);
                if (src.empty()) throw ParseError("empty source id in key token: " + tok);
                choice.sources.push_back(src);
                if (plus == std::string::npos) break;
                s = plus + 1;
            }
        } else if (space.layers[i].sources_forced()) {
            choice.sources = space.layers[i].candidate_sources;
        }
        arch.choices.push_back(std::move(choice));
    }
    auto violations = validate(arch, space);
    if (!violations.empty()) {
        std::string msg = "decoded architecture invalid:";
        for (const auto& v : violations) msg += " [layer " + std::to_string(v.layer) + ": " + v.rule + "]";
        throw SpaceError(msg);
    }
    return arch;
}

}  // namespace lapt
