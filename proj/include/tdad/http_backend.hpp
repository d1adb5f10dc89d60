#pragma once

#include <functional>
#include <memory>
#include <string>

#include "tdad/backend.hpp"

namespace tdad {

// Endpoint configuration. Credentials come from the environment so they
// never land in config files: TDAD_API_KEY (required), TDAD_API_URL
// (overridable by config).
struct HttpEndpoint {
    std::string base_url;  // e.g. "https://api.example.com/v1"
    std::string api_key;
    std::string model;
};

inline constexpr const char* kApiKeyEnv = "TDAD_API_KEY";
inline constexpr const char* kApiUrlEnv = "TDAD_API_URL";

// Resolves endpoint fields from the environment, with config fallbacks for
// url/model. Throws ConfigError before any network activity when the key or
// url is missing.
HttpEndpoint resolve_endpoint(const std::string& config_url, const std::string& model);

// Minimal chat-completion transport: one request object in, the first
// choice's message plus usage out. Provider-specific adapters live behind
// this seam; nothing above it names a provider.
class ChatApi {
public:
    virtual ~ChatApi() = default;

    struct Completion {
        json message;  // role/content/tool_calls
        TokenUsage usage;
    };
    virtual Completion complete(const json& request) = 0;
};

// OpenAI-compatible /chat/completions over HTTP(S).
class HttpChatApi : public ChatApi {
public:
    explicit HttpChatApi(HttpEndpoint endpoint);

    Completion complete(const json& request) override;

    // Observes every outgoing request body (isolation audits, tests).
    void set_request_observer(std::function<void(const json&)> observer) {
        observer_ = std::move(observer);
    }

private:
    HttpEndpoint endpoint_;
    std::string host_base_;  // scheme://host[:port]
    std::string path_prefix_;
    std::function<void(const json&)> observer_;
};

// The Built Agent over a chat-completion endpoint: translates turn state
// into tool-calling requests, enforces the respond protocol, and surfaces
// provider failures as BackendError (tests become errored, not failed). No
// retry policy and no temperature override are applied.
class HttpBackend : public AgentBackend {
public:
    HttpBackend(std::shared_ptr<ChatApi> api, std::string model);

    std::string capability() const override { return model_; }
    bool remote() const override { return true; }
    std::unique_ptr<BackendSession> start_session(const SessionConfig& config) override;

private:
    std::shared_ptr<ChatApi> api_;
    std::string model_;
};

}  // namespace tdad
