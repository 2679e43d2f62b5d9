#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "lapt/reasoner.hpp"

namespace lapt {
namespace {

std::string now_iso8601() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    return buf;
}

std::string excerpt(const std::string& text, std::size_t limit = 200) {
    if (text.size() <= limit) return text;
    return text.substr(0, limit) + "...";
}

class HttpChatTransport : public ChatTransport {
public:
    explicit HttpChatTransport(LlmConfig config) : config_(std::move(config)) {}

    std::string complete(const std::vector<ChatMessage>& messages) override {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (!key || !*key) {
            throw TransportError("environment variable " + config_.api_key_env + " is not set");
        }

        std::string scheme_host, path = "/";
        auto scheme_end = config_.endpoint.find("://");
        if (scheme_end == std::string::npos) throw TransportError("bad endpoint URL: " + config_.endpoint);
        auto path_start = config_.endpoint.find('/', scheme_end + 3);
        if (path_start == std::string::npos) {
            scheme_host = config_.endpoint;
        } else {
            scheme_host = config_.endpoint.substr(0, path_start);
            path = config_.endpoint.substr(path_start);
        }

        nlohmann::json body;
        body["model"] = config_.model;
        body["temperature"] = config_.temperature;
        body["messages"] = nlohmann::json::array();
        for (const auto& m : messages) {
            body["messages"].push_back({{"role", m.role}, {"content", m.content}});
        }

        httplib::Client client(scheme_host);
        client.set_connection_timeout(config_.timeout_seconds);
        client.set_read_timeout(config_.timeout_seconds);
        httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};
        auto res = client.Post(path, headers, body.dump(), "application/json");
        if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
        if (res->status < 200 || res->status >= 300) {
            throw TransportError("HTTP " + std::to_string(res->status) + ": " + excerpt(res->body));
        }
        try {
            auto reply = nlohmann::json::parse(res->body);
            return reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw TransportError("unexpected reply shape: " + std::string(e.what()));
        }
    }

private:
    LlmConfig config_;
};

}  // namespace

std::unique_ptr<ChatTransport> make_http_transport(const LlmConfig& config) {
    return std::make_unique<HttpChatTransport>(config);
}

LlmReasoner::LlmReasoner(LlmConfig config, PromptTemplate tmpl,
                         std::unique_ptr<ChatTransport> transport, std::string transcript_dir)
    : config_(std::move(config)),
      template_(std::move(tmpl)),
      transport_(std::move(transport)),
      transcript_dir_(std::move(transcript_dir)) {}

DesignPrinciple LlmReasoner::converse(const PromptBundle& prompt, const SpaceDescriptor& space,
                                      const std::string& source_task, int generation) {
    std::vector<ChatMessage> messages = {
        {"system", "You analyze neural architectures and answer with one fenced JSON block."},
        {"user", prompt.rendered}};

    nlohmann::json transcript;
    transcript["prompt"] = prompt.rendered;
    transcript["exchanges"] = nlohmann::json::array();

    auto log_transcript = [&](const std::string& outcome, int retries) {
        if (transcript_dir_.empty()) return;
        transcript["outcome"] = outcome;
        transcript["retries"] = retries;
        std::filesystem::create_directories(transcript_dir_);
        std::ofstream out(transcript_dir_ + "/transcript-" + std::to_string(transcript_counter_++) + ".json");
        out << transcript.dump(2) << "\n";
    };

    std::string last_reply;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        std::string reply;
        try {
            reply = transport_->complete(messages);
        } catch (const TransportError&) {
            log_transcript("transport error", attempt);
            throw;
        }
        last_reply = reply;

        std::string error;
        auto block = extract_fenced_json(reply);
        if (!block) {
            error = "reply contains no fenced JSON block";
        } else {
            try {
                auto doc = nlohmann::json::parse(*block);
                doc["space_id"] = space.space_id;
                auto p = deserialize(doc, space);
                p.provenance.source_task = source_task;
                p.provenance.backend = "llm:" + config_.model;
                p.provenance.generation = generation;
                p.provenance.created_at = now_iso8601();
                transcript["exchanges"].push_back({{"reply", reply}, {"parse", "ok"}});
                last_retry_count_ = attempt;
                log_transcript("ok", attempt);
                return p;
            } catch (const nlohmann::json::exception& e) {
                error = std::string("fenced block is not valid JSON: ") + e.what();
            } catch (const PrincipleError& e) {
                error = std::string("principle rejected: ") + e.what();
            }
        }
        transcript["exchanges"].push_back({{"reply", reply}, {"parse", error}});
        messages.push_back({"assistant", reply});
        messages.push_back({"user", "Your previous reply could not be used: " + error +
                                        ". Reply again with exactly one fenced JSON block matching the "
                                        "requested schema."});
    }
    log_transcript("malformed after retries", config_.max_retries);
    throw MalformedAfterRetries(excerpt(last_reply));
}

DesignPrinciple LlmReasoner::learn(const Archive& archive, const SpaceDescriptor& space) {
    return converse(build_learning_prompt(archive, space, template_), space, archive.task, 0);
}

DesignPrinciple LlmReasoner::adapt(const DesignPrinciple& principle, const Archive& top_archs,
                                   const SpaceDescriptor& space) {
    return converse(build_adaptation_prompt(principle, top_archs, space, template_), space,
                    top_archs.task, principle.provenance.generation + 1);
}

DesignPrinciple LlmReasoner::explore(const DesignPrinciple& principle, const SpaceDescriptor& space) {
    return converse(build_exploration_prompt(principle, space, template_), space,
                    principle.provenance.source_task, principle.provenance.generation + 1);
}

}  // namespace lapt
