#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "lapt/reasoner.hpp"

namespace lapt {
namespace {

void replace_all(std::string& text, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
}

std::string heading(PartKind kind) {
    switch (kind) {
        case PartKind::TaskDescription: return "### Task Description";
        case PartKind::Strategy: return "### Strategy";
        case PartKind::ExpectedOutput: return "### Expected Output";
        case PartKind::Note: return "### Note";
    }
    return "###";
}

std::string architecture_lines(const Archive& archive) {
    std::ostringstream out;
    for (const auto& e : archive.entries) {
        out << "Architecture: " << e.key << "  (score: " << e.score << ")\n";
    }
    return out.str();
}

std::string candidate_listing(const SpaceDescriptor& space) {
    std::ostringstream out;
    for (std::size_t i = 0; i < space.num_layers(); ++i) {
        const auto& slot = space.layers[i];
        out << "layer " << i << " operators: [";
        for (std::size_t k = 0; k < slot.candidate_ops.size(); ++k) {
            if (k) out << ", ";
            out << slot.candidate_ops[k];
        }
        out << "]";
        if (!slot.sources_forced()) {
            out << ", sources: [";
            for (std::size_t k = 0; k < slot.candidate_sources.size(); ++k) {
                if (k) out << ", ";
                out << slot.candidate_sources[k];
            }
            out << "] (pick " << slot.arity_min << ")";
        }
        out << "\n";
    }
    return out.str();
}

std::string output_contract(const SpaceDescriptor& space, const std::string& expected_output) {
    std::string text = expected_output;
    text += "\n\nReply with exactly one fenced JSON block of the form:\n";
    text +=
        "```json\n{\"per_layer\": [{\"allowed_ops\": [...] , \"allowed_sources\": \"ALL\"}, ...], "
        "\"rationale\": [\"...\"]}\n```\n";
    text += "One per_layer entry per layer (" + std::to_string(space.num_layers()) +
            " entries). Use only these candidate names:\n\n" + candidate_listing(space);
    return text;
}

PromptBundle assemble(std::vector<PromptBundle::Part> parts) {
    PromptBundle bundle;
    std::ostringstream rendered;
    for (auto& part : parts) {
        if (part.text.empty()) continue;
        rendered << heading(part.kind) << "\n" << part.text << "\n\n";
        bundle.parts.push_back(std::move(part));
    }
    bundle.rendered = rendered.str();
    return bundle;
}

}  // namespace

PromptTemplate PromptTemplate::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TemplateMissing("file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw TemplateMissing("valid JSON (" + std::string(e.what()) + ")");
    }
    PromptTemplate t;
    t.instantiation_code = j.value("instantiation_code", "");
    t.learn_task = j.value("learn_task", "");
    t.adapt_task = j.value("adapt_task", "");
    t.explore_task = j.value("explore_task", "");
    t.strategy = j.value("strategy", "");
    t.expected_output = j.value("expected_output", "");
    t.note = j.value("note", "");
    if (t.instantiation_code.empty()) throw TemplateMissing("instantiation_code");
    if (t.learn_task.empty()) throw TemplateMissing("learn_task");
    if (t.strategy.empty()) throw TemplateMissing("strategy");
    if (t.expected_output.empty()) throw TemplateMissing("expected_output");
    return t;
}

PromptBundle build_learning_prompt(const Archive& archive, const SpaceDescriptor& space,
                                   const PromptTemplate& tmpl) {
    if (archive.entries.empty()) throw ReasonerError("cannot build learning prompt from empty archive");
    std::string task = tmpl.learn_task;
    replace_all(task, "{{code}}", tmpl.instantiation_code);
    replace_all(task, "{{architectures}}", architecture_lines(archive));
    replace_all(task, "{{task_name}}", archive.task);
    return assemble({{PartKind::TaskDescription, task},
                     {PartKind::Strategy, tmpl.strategy},
                     {PartKind::ExpectedOutput, output_contract(space, tmpl.expected_output)},
                     {PartKind::Note, tmpl.note}});
}

PromptBundle build_adaptation_prompt(const DesignPrinciple& principle, const Archive& top_archs,
                                     const SpaceDescriptor& space, const PromptTemplate& tmpl) {
    if (tmpl.adapt_task.empty()) throw TemplateMissing("adapt_task");
    std::string task = tmpl.adapt_task;
    replace_all(task, "{{code}}", tmpl.instantiation_code);
    replace_all(task, "{{principle}}", serialize(principle).dump(2));
    replace_all(task, "{{architectures}}", architecture_lines(top_archs));
    replace_all(task, "{{task_name}}", top_archs.task);
    return assemble({{PartKind::TaskDescription, task},
                     {PartKind::Strategy, tmpl.strategy},
                     {PartKind::ExpectedOutput, output_contract(space, tmpl.expected_output)},
                     {PartKind::Note, tmpl.note}});
}

PromptBundle build_exploration_prompt(const DesignPrinciple& principle, const SpaceDescriptor& space,
                                      const PromptTemplate& tmpl) {
    if (tmpl.explore_task.empty()) throw TemplateMissing("explore_task");
    std::string task = tmpl.explore_task;
    replace_all(task, "{{code}}", tmpl.instantiation_code);
    replace_all(task, "{{principle}}", serialize(principle).dump(2));
    return assemble({{PartKind::TaskDescription, task},
                     {PartKind::Strategy, tmpl.strategy},
                     {PartKind::ExpectedOutput, output_contract(space, tmpl.expected_output)},
                     {PartKind::Note, tmpl.note}});
}

std::optional<std::string> extract_fenced_json(const std::string& reply) {
    std::size_t open = reply.find("```");
    if (open == std::string::npos) return std::nullopt;
    std::size_t body = open + 3;
    if (reply.compare(body, 4, "json") == 0) body += 4;
    while (body < reply.size() && (reply[body] == '\n' || reply[body] == '\r' || reply[body] == ' ')) ++body;
    std::size_t close = reply.find("```", body);
    if (close == std::string::npos) return std::nullopt;
    return reply.substr(body, close - body);
}

}  // namespace lapt
