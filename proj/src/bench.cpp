#include "lapt/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

namespace lapt {
namespace {

// Counter-based generator: every variate is a pure function of its key words.
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = 0x2545f4914f6cdd1dULL;
    for (auto w : words) h = mix64(h ^ (w * 0xff51afd7ed558ccdULL));
    return h;
}

double uniform01(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

constexpr std::uint64_t kTagUnary = 1, kTagPair = 2, kTagNoise = 3;

double standard_normal(std::uint64_t h1, std::uint64_t h2) {
    double u1 = uniform01(h1);
    double u2 = uniform01(h2);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

constexpr std::uint64_t kSynthCap = 1'000'000;

std::string direction_str(Direction d) {
    return d == Direction::Maximize ? "maximize" : "minimize";
}

Direction direction_from(const std::string& s) {
    if (s == "maximize") return Direction::Maximize;
    if (s == "minimize") return Direction::Minimize;
    throw TableSchemaError("direction must be maximize or minimize, got '" + s + "'");
}

}  // namespace

BenchmarkTable::BenchmarkTable(SpaceDescriptor space, std::vector<TaskSpec> tasks,
                               std::map<std::string, std::map<std::string, double>> records)
    : space_(std::move(space)), tasks_(std::move(tasks)), records_(std::move(records)) {
    if (tasks_.empty()) throw TableSchemaError("table declares no tasks");
    for (const auto& [key, values] : records_) {
        try {
            decode(key, space_);
        } catch (const std::exception& e) {
            throw UndecodableKey(key, e.what());
        }
        for (const auto& t : tasks_) {
            auto it = values.find(t.name);
            if (it == values.end()) throw TableSchemaError("record " + key + " missing task '" + t.name + "'");
            if (!std::isfinite(it->second)) throw TableSchemaError("record " + key + " has non-finite value");
        }
    }
    complete_ = !records_.empty() && cardinality(space_) == BigInt(records_.size());
}

const TaskSpec& BenchmarkTable::task(const std::string& name) const {
    for (const auto& t : tasks_) {
        if (t.name == name) return t;
    }
    throw TableSchemaError("unknown task '" + name + "'");
}

double BenchmarkTable::evaluate(const std::string& key, const std::string& task_name) const {
    auto it = records_.find(key);
    if (it == records_.end()) throw UnknownArchitecture(key);
    return it->second.at(task(task_name).name);
}

double BenchmarkTable::normalized(const std::string& key, const std::string& task_name) const {
    return normalize(evaluate(key, task_name), task(task_name).direction);
}

int BenchmarkTable::model_rank(const std::string& key, const std::string& task_name) const {
    if (!complete_) throw PartialTable();
    const double mine = normalized(key, task_name);
    const Direction dir = task(task_name).direction;
    int better = 0;
    for (const auto& [k, values] : records_) {
        if (normalize(values.at(task_name), dir) > mine) ++better;
    }
    return 1 + better;
}

nlohmann::json BenchmarkTable::to_json() const {
    nlohmann::json j;
    j["space_id"] = space_.space_id;
    j["tasks"] = nlohmann::json::array();
    for (const auto& t : tasks_) {
        j["tasks"].push_back({{"name", t.name}, {"metric", t.metric}, {"direction", direction_str(t.direction)}});
    }
    j["records"] = nlohmann::json::object();
    for (const auto& [key, values] : records_) j["records"][key] = values;
    return j;
}

BenchmarkTable BenchmarkTable::from_json(const nlohmann::json& j) {
    SpaceDescriptor space;
    std::vector<TaskSpec> tasks;
    std::map<std::string, std::map<std::string, double>> records;
    try {
        if (j.contains("space")) {
            space = SpaceDescriptor::from_json(j.at("space"));
        } else {
            space = SpaceDescriptor::make(j.at("space_id").get<std::string>());
        }
        for (const auto& tj : j.at("tasks")) {
            tasks.push_back({tj.at("name").get<std::string>(), tj.at("metric").get<std::string>(),
                             direction_from(tj.at("direction").get<std::string>())});
        }
        for (const auto& [key, values] : j.at("records").items()) {
            records[key] = values.get<std::map<std::string, double>>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw TableSchemaError(e.what());
    }
    return BenchmarkTable(std::move(space), std::move(tasks), std::move(records));
}

BenchmarkTable BenchmarkTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BenchError("cannot open benchmark file: " + path);
    // The DOM parser silently keeps the last of two equal keys; walk parse
    // events to reject duplicates instead.
    std::vector<std::set<std::string>> seen;
    std::string duplicate;
    auto cb = [&](int /*depth*/, nlohmann::json::parse_event_t event, nlohmann::json& parsed) {
        switch (event) {
            case nlohmann::json::parse_event_t::object_start:
                seen.emplace_back();
                break;
            case nlohmann::json::parse_event_t::object_end:
                seen.pop_back();
                break;
            case nlohmann::json::parse_event_t::key:
                if (!seen.back().insert(parsed.get<std::string>()).second && duplicate.empty()) {
                    duplicate = parsed.get<std::string>();
                }
                break;
            default:
                break;
        }
        return true;
    };
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, cb);
    } catch (const nlohmann::json::exception& e) {
        throw TableSchemaError(e.what());
    }
    if (!duplicate.empty()) throw DuplicateKey(duplicate);
    return from_json(j);
}

void BenchmarkTable::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw BenchError("cannot write benchmark file: " + path);
    out << to_json().dump(2) << "\n";
}

double synth_score(const SpaceDescriptor& space, const SynthParams& params, std::size_t task_index,
                   const Architecture& arch) {
    const std::uint64_t t = static_cast<std::uint64_t>(task_index);
    std::vector<std::uint64_t> ops(arch.choices.size());
    for (std::size_t i = 0; i < arch.choices.size(); ++i) {
        ops[i] = static_cast<std::uint64_t>(space.layers[i].op_index(arch.choices[i].op));
    }
    double score = 0.0;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        score += uniform01(hash_words({params.seed, kTagUnary, t, i, ops[i]}));
    }
    if (params.interaction_strength > 0.0) {
        for (std::size_t i = 0; i < ops.size(); ++i) {
            for (std::size_t j = i + 1; j < ops.size(); ++j) {
                score += params.interaction_strength *
                         uniform01(hash_words({params.seed, kTagPair, t, i, j, ops[i], ops[j]}));
            }
        }
    }
    if (params.noise_sigma > 0.0) {
        std::uint64_t arch_h = hash_words({params.seed, kTagNoise, t});
        for (auto o : ops) arch_h = mix64(arch_h ^ o);
        score += params.noise_sigma * standard_normal(mix64(arch_h ^ 1), mix64(arch_h ^ 2));
    }
    return score;
}

BenchmarkTable synth_generate(const SpaceDescriptor& space, const SynthParams& params,
                              const std::vector<TaskSpec>& tasks) {
    auto archs = enumerate(space, kSynthCap);  // throws TooLarge beyond the cap
    std::map<std::string, std::map<std::string, double>> records;
    for (const auto& arch : archs) {
        auto& row = records[encode(arch, space)];
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            row[tasks[t].name] = synth_score(space, params, t, arch);
        }
    }
    return BenchmarkTable(space, tasks, std::move(records));
}

Archive top_k(const BenchmarkTable& table, const std::string& task_name, std::size_t k) {
    if (k > table.size()) {
        throw BenchError("top_k: k=" + std::to_string(k) + " exceeds table size " +
                         std::to_string(table.size()));
    }
    const Direction dir = table.task(task_name).direction;
    std::vector<ScoredArch> all;
    all.reserve(table.size());
    for (const auto& [key, values] : table.records()) {
        all.push_back({decode(key, table.space()), key, normalize(values.at(task_name), dir)});
    }
    std::sort(all.begin(), all.end(), [](const ScoredArch& a, const ScoredArch& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.key < b.key;
    });
    all.resize(k);
    return Archive{std::move(all), task_name};
}

BenchmarkTable ingest_csv(const std::string& csv_path, const SpaceDescriptor& space) {
    std::ifstream in(csv_path);
    if (!in) throw BenchError("cannot open csv file: " + csv_path);
    std::string line;
    if (!std::getline(in, line)) throw TableSchemaError("empty csv file");
    if (line.back() == '\r') line.pop_back();
    if (line != "arch_key,task,value") {
        throw TableSchemaError("csv header must be 'arch_key,task,value', got '" + line + "'");
    }
    std::map<std::string, std::map<std::string, double>> records;
    std::vector<std::string> task_order;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string key, task_name, value_str;
        if (!std::getline(ss, key, ',') || !std::getline(ss, task_name, ',') ||
            !std::getline(ss, value_str)) {
            throw TableSchemaError("csv line " + std::to_string(lineno) + ": expected 3 fields");
        }
        double value;
        try {
            value = std::stod(value_str);
        } catch (const std::exception&) {
            throw TableSchemaError("csv line " + std::to_string(lineno) + ": bad value '" + value_str + "'");
        }
        auto& row = records[key];
        if (row.count(task_name)) throw DuplicateKey(key + " / " + task_name);
        row[task_name] = value;
        if (std::find(task_order.begin(), task_order.end(), task_name) == task_order.end()) {
            task_order.push_back(task_name);
        }
    }
    std::vector<TaskSpec> tasks;
    for (const auto& t : task_order) tasks.push_back({t, t, Direction::Maximize});
    return BenchmarkTable(space, std::move(tasks), std::move(records));
}

}  // namespace lapt
