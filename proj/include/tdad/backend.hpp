#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tdad/artifact.hpp"
#include "tdad/spec.hpp"
#include "tdad/trace.hpp"

namespace tdad {

// Tool definition as presented to the model: spec description unless the
// artifact overrides it.
struct ToolDefinition {
    std::string name;
    std::string description;
    json parameters = json::object();  // JSON-schema-shaped

    bool operator==(const ToolDefinition&) const = default;
};

// What a session is given at start. Deliberately narrow: the backend never
// sees assertions, hidden tests, or mutation intents.
struct SessionConfig {
    std::string system_prompt;
    std::vector<ToolDefinition> tools;  // includes the respond tool

    json to_json() const;
};

// One model action: a tool call (possibly the respond tool) or plain text
// emitted outside the tool protocol (a contract breach the runtime records).
struct AgentStep {
    enum class Kind { tool_call, plain_text };
    Kind kind = Kind::tool_call;
    std::string tool;
    json args = json::object();
    std::string text;
    TokenUsage usage;

    static AgentStep call(std::string tool, json args) {
        AgentStep s;
        s.tool = std::move(tool);
        s.args = std::move(args);
        return s;
    }
    static AgentStep plain(std::string text) {
        AgentStep s;
        s.kind = Kind::plain_text;
        s.text = std::move(text);
        return s;
    }
};

// One conversation's session. The runtime drives it turn by turn; the
// backend sees only the dialogue it produced plus fixture payloads for its
// own calls.
class BackendSession {
public:
    virtual ~BackendSession() = default;
    virtual void begin_turn(const std::string& user_message) = 0;
    // The next action, or nullopt when the backend yields the turn.
    virtual std::optional<AgentStep> next_step() = 0;
    // Fixture payload for the tool call returned by the last next_step().
    virtual void deliver_tool_result(const json& payload) = 0;
};

class AgentBackend {
public:
    virtual ~AgentBackend() = default;
    virtual std::string capability() const = 0;  // model id or "scripted"
    virtual bool remote() const { return false; }
    virtual std::unique_ptr<BackendSession> start_session(const SessionConfig& config) = 0;
};

// Builds the tool definitions a session sees: declared tools with artifact
// overrides applied, plus the respond tool synthesized from the response
// contract.
std::vector<ToolDefinition> session_tools(const Spec& spec, const PromptArtifact& artifact);

inline constexpr const char* kRespondTool = "respond";

// -- scripted backend ---------------------------------------------------------

// One row of a deterministic behavior table. A row applies when the user
// message matches and every artifact condition holds; first matching row
// wins. Artifact conditions let a fixed table model behavior that changes
// as the prompt is edited, which is what compilation simulations need.
struct ScriptRule {
    std::optional<std::string> when_message;           // exact match
    std::optional<std::string> when_message_contains;  // substring match
    std::optional<std::string> when_prompt_contains;
    std::optional<std::string> when_prompt_lacks;
    std::optional<std::pair<std::string, std::string>> when_override_contains;  // tool, text
    std::vector<AgentStep> actions;
};

struct BehaviorScript {
    std::vector<ScriptRule> rules;

    static BehaviorScript from_yaml(const std::string& text);
    static BehaviorScript from_json(const json& value);
};

// Deterministic stand-in for the model under test: replays the behavior
// table exactly, so repeated runs produce byte-identical traces. Artifact
// conditions are evaluated against the session's config (the prompt and
// override-applied tool descriptions of the artifact under evaluation).
class ScriptedBackend : public AgentBackend {
public:
    explicit ScriptedBackend(BehaviorScript script) : script_(std::move(script)) {}

    std::string capability() const override { return "scripted"; }
    std::unique_ptr<BackendSession> start_session(const SessionConfig& config) override;

private:
    BehaviorScript script_;
};

// Observer wrapper proving what a backend was shown: records every session
// config, user message, and delivered payload for isolation audits.
class CapturingBackend : public AgentBackend {
public:
    explicit CapturingBackend(AgentBackend& inner) : inner_(inner) {}

    std::string capability() const override { return inner_.capability(); }
    bool remote() const override { return inner_.remote(); }
    std::unique_ptr<BackendSession> start_session(const SessionConfig& config) override;

    // Everything every session observed, serialized.
    json observed() const;

private:
    AgentBackend& inner_;
    mutable std::mutex mu_;
    json records_ = json::array();

    friend class CapturingSession;
};

}  // namespace tdad
