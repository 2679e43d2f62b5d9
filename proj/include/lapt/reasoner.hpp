#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lapt/bench.hpp"
#include "lapt/principle.hpp"
#include "lapt/space.hpp"

namespace lapt {

/// Principle-reasoning backend: every returned principle is valid for the
/// given space (names resolve, no empty layer).
class Reasoner {
public:
    virtual ~Reasoner() = default;
    virtual std::string backend_id() const = 0;
    virtual DesignPrinciple learn(const Archive& archive, const SpaceDescriptor& space) = 0;
    virtual DesignPrinciple adapt(const DesignPrinciple& principle, const Archive& top_archs,
                                  const SpaceDescriptor& space) = 0;
    virtual DesignPrinciple explore(const DesignPrinciple& principle, const SpaceDescriptor& space) = 0;
};

struct StatParams {
    int keep_m = 2;            // per-layer operators to keep
    int keep_s = 2;            // per-layer sources to keep (choice-bearing layers only)
    double retention = 0.5;    // fraction of the previous allowed set kept by adapt
    bool pad_to_keep_m = false;
};

/// Deterministic frequency-based backend: keeps the most frequent operators
/// and sources seen in the archive, ties broken by candidate-list order.
class StatReasoner : public Reasoner {
public:
    explicit StatReasoner(StatParams params = {}) : params_(params) {}
    std::string backend_id() const override { return "stat"; }
    DesignPrinciple learn(const Archive& archive, const SpaceDescriptor& space) override;
    DesignPrinciple adapt(const DesignPrinciple& principle, const Archive& top_archs,
                          const SpaceDescriptor& space) override;
    DesignPrinciple explore(const DesignPrinciple& principle, const SpaceDescriptor& space) override;

private:
    StatParams params_;
};

// --- LLM backend -----------------------------------------------------------

class ReasonerError : public std::runtime_error {
public:
    explicit ReasonerError(const std::string& msg) : std::runtime_error(msg) {}
};

class TransportError : public ReasonerError {
public:
    explicit TransportError(const std::string& msg) : ReasonerError("transport: " + msg) {}
};

class MalformedAfterRetries : public ReasonerError {
public:
    explicit MalformedAfterRetries(const std::string& last_reply_excerpt)
        : ReasonerError("no usable principle after retries; last reply: " + last_reply_excerpt) {}
};

class TemplateMissing : public ReasonerError {
public:
    explicit TemplateMissing(const std::string& what)
        : ReasonerError("prompt template missing " + what) {}
};

enum class PartKind { TaskDescription, Strategy, ExpectedOutput, Note };

struct PromptBundle {
    struct Part {
        PartKind kind;
        std::string text;
    };
    std::vector<Part> parts;
    std::string rendered;
};

/// Per-space prompt template: the four-part structure plus the architecture
/// instantiation snippet embedded into the task description.
struct PromptTemplate {
    std::string instantiation_code;
    std::string learn_task, adapt_task, explore_task;
    std::string strategy;
    std::string expected_output;
    std::string note;

    static PromptTemplate load(const std::string& path);
};

PromptBundle build_learning_prompt(const Archive& archive, const SpaceDescriptor& space,
                                   const PromptTemplate& tmpl);
PromptBundle build_adaptation_prompt(const DesignPrinciple& principle, const Archive& top_archs,
                                     const SpaceDescriptor& space, const PromptTemplate& tmpl);
PromptBundle build_exploration_prompt(const DesignPrinciple& principle, const SpaceDescriptor& space,
                                      const PromptTemplate& tmpl);

struct ChatMessage {
    std::string role;  // "system" | "user" | "assistant"
    std::string content;
};

/// Wire-level chat transport; swapped out for a scripted stub in tests.
class ChatTransport {
public:
    virtual ~ChatTransport() = default;
    virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

struct LlmConfig {
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::string model = "gpt-4";
    double temperature = 0.0;
    int max_retries = 2;
    int timeout_seconds = 60;
    std::string api_key_env = "LAPT_API_KEY";
};

/// HTTP POST transport speaking the chat-completions protocol with bearer
/// auth; the secret is read from the environment at call time.
std::unique_ptr<ChatTransport> make_http_transport(const LlmConfig& config);

class LlmReasoner : public Reasoner {
public:
    LlmReasoner(LlmConfig config, PromptTemplate tmpl, std::unique_ptr<ChatTransport> transport,
                std::string transcript_dir = "");

    std::string backend_id() const override { return "llm"; }
    DesignPrinciple learn(const Archive& archive, const SpaceDescriptor& space) override;
    DesignPrinciple adapt(const DesignPrinciple& principle, const Archive& top_archs,
                          const SpaceDescriptor& space) override;
    DesignPrinciple explore(const DesignPrinciple& principle, const SpaceDescriptor& space) override;

    int last_retry_count() const { return last_retry_count_; }

private:
    DesignPrinciple converse(const PromptBundle& prompt, const SpaceDescriptor& space,
                             const std::string& source_task, int generation);

    LlmConfig config_;
    PromptTemplate template_;
    std::unique_ptr<ChatTransport> transport_;
    std::string transcript_dir_;
    int transcript_counter_ = 0;
    int last_retry_count_ = 0;
};

/// First ```/```json fenced block of a reply, or nullopt.
std::optional<std::string> extract_fenced_json(const std::string& reply);

}  // namespace lapt
