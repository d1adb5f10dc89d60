#include "tdad/http_backend.hpp"

#include <cstdlib>
#include <deque>

#include <httplib.h>

#include "tdad/errors.hpp"

namespace tdad {

HttpEndpoint resolve_endpoint(const std::string& config_url, const std::string& model) {
    HttpEndpoint endpoint;
    const char* key = std::getenv(kApiKeyEnv);
    if (!key || !*key)
        throw ConfigError(std::string("missing credential: set ") + kApiKeyEnv);
    endpoint.api_key = key;

    const char* url = std::getenv(kApiUrlEnv);
    endpoint.base_url = (url && *url) ? url : config_url;
    if (endpoint.base_url.empty())
        throw ConfigError(std::string("no endpoint URL: set ") + kApiUrlEnv +
                          " or configure one");
    endpoint.model = model;
    return endpoint;
}

HttpChatApi::HttpChatApi(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
    const std::string& url = endpoint_.base_url;
    size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("endpoint URL must carry a scheme: " + url);
    size_t path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        host_base_ = url;
    } else {
        host_base_ = url.substr(0, path_start);
        path_prefix_ = url.substr(path_start);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }
}

ChatApi::Completion HttpChatApi::complete(const json& request) {
    if (observer_) observer_(request);

    httplib::Client client(host_base_);
    client.set_read_timeout(120, 0);
    client.set_connection_timeout(15, 0);
    httplib::Headers headers{{"Authorization", "Bearer " + endpoint_.api_key}};

    auto res = client.Post(path_prefix_ + "/chat/completions", headers, request.dump(),
                           "application/json");
    if (!res)
        throw BackendError("transport failure contacting " + host_base_ + ": " +
                           httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300) {
        std::string detail = "provider returned status " + std::to_string(res->status);
        auto retry_after = res->get_header_value("Retry-After");
        if (!retry_after.empty()) detail += " (Retry-After: " + retry_after + ")";
        if (!res->body.empty()) detail += ": " + res->body.substr(0, 500);
        throw BackendError(detail);
    }

    json body;
    try {
        body = json::parse(res->body);
    } catch (const json::exception& e) {
        throw BackendError(std::string("unparseable provider response: ") + e.what());
    }
    if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty())
        throw BackendError("provider response has no choices: " + res->body.substr(0, 500));

    Completion out;
    out.message = body["choices"][0].value("message", json::object());
    if (body.contains("usage") && body["usage"].is_object()) {
        out.usage.input_tokens = body["usage"].value("prompt_tokens", 0);
        out.usage.output_tokens = body["usage"].value("completion_tokens", 0);
    }
    return out;
}

// -- session ----------------------------------------------------------------------

namespace {

struct PendingCall {
    std::string id;
    AgentStep step;
};

class HttpSession : public BackendSession {
public:
    HttpSession(std::shared_ptr<ChatApi> api, std::string model, const SessionConfig& config)
        : api_(std::move(api)), model_(std::move(model)) {
        messages_ = json::array();
        messages_.push_back(json{{"role", "system"}, {"content", config.system_prompt}});
        tools_ = json::array();
        for (const auto& t : config.tools)
            tools_.push_back(json{{"type", "function"},
                                  {"function", json{{"name", t.name},
                                                    {"description", t.description},
                                                    {"parameters", t.parameters}}}});
    }

    void begin_turn(const std::string& user_message) override {
        messages_.push_back(json{{"role", "user"}, {"content", user_message}});
        queue_.clear();
        turn_done_ = false;
        last_call_id_.clear();
    }

    std::optional<AgentStep> next_step() override {
        if (!queue_.empty()) return pop_queued();
        if (turn_done_) return std::nullopt;

        json request{{"model", model_}, {"messages", messages_}};
        if (!tools_.empty()) {
            request["tools"] = tools_;
            request["tool_choice"] = "auto";
        }
        ChatApi::Completion completion = api_->complete(request);
        messages_.push_back(completion.message);

        const json& message = completion.message;
        if (message.contains("tool_calls") && message["tool_calls"].is_array() &&
            !message["tool_calls"].empty()) {
            for (const auto& call : message["tool_calls"]) {
                PendingCall pending;
                pending.id = call.value("id", "");
                std::string name = call.contains("function")
                                       ? call["function"].value("name", "")
                                       : call.value("name", "");
                std::string raw_args = call.contains("function")
                                           ? call["function"].value("arguments", "{}")
                                           : call.value("arguments", "{}");
                json args;
                try {
                    args = raw_args.empty() ? json::object() : json::parse(raw_args);
                } catch (const json::exception&) {
                    args = json{{"_raw", raw_args}};
                }
                pending.step = AgentStep::call(name, std::move(args));
                queue_.push_back(std::move(pending));
            }
            queue_.front().step.usage = completion.usage;
            return pop_queued();
        }

        // Plain assistant text: the turn ends without the tool protocol.
        turn_done_ = true;
        AgentStep step = AgentStep::plain(message.value("content", ""));
        step.usage = completion.usage;
        return step;
    }

    void deliver_tool_result(const json& payload) override {
        messages_.push_back(json{
            {"role", "tool"}, {"tool_call_id", last_call_id_}, {"content", payload.dump()}});
    }

private:
    AgentStep pop_queued() {
        PendingCall pending = std::move(queue_.front());
        queue_.pop_front();
        last_call_id_ = pending.id;
        if (pending.step.tool == kRespondTool) {
            // The turn ends at respond. The provider-side history still needs
            // a tool result for the call id, so close it out here.
            messages_.push_back(json{{"role", "tool"},
                                     {"tool_call_id", pending.id},
                                     {"content", json{{"ok", true}}.dump()}});
            turn_done_ = true;
        }
        return pending.step;
    }

    std::shared_ptr<ChatApi> api_;
    std::string model_;
    json messages_;
    json tools_;
    std::deque<PendingCall> queue_;
    std::string last_call_id_;
    bool turn_done_ = false;
};

}  // namespace

HttpBackend::HttpBackend(std::shared_ptr<ChatApi> api, std::string model)
    : api_(std::move(api)), model_(std::move(model)) {}

std::unique_ptr<BackendSession> HttpBackend::start_session(const SessionConfig& config) {
    return std::make_unique<HttpSession>(api_, model_, config);
}

}  // namespace tdad
