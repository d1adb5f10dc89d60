#include "tdad/backend.hpp"

#include "tdad/detail/obj_reader.hpp"
#include "tdad/errors.hpp"
#include "tdad/util.hpp"

namespace tdad {

using detail::ObjReader;

json SessionConfig::to_json() const {
    json tools_json = json::array();
    for (const auto& t : tools)
        tools_json.push_back(
            json{{"name", t.name}, {"description", t.description}, {"parameters", t.parameters}});
    return json{{"system_prompt", system_prompt}, {"tools", tools_json}};
}

static json param_schema_json(const ToolContract& tool) {
    json properties = json::object();
    json required = json::array();
    for (const auto& p : tool.params) {
        std::string json_type = "string";
        if (p.type == "integer" || p.type == "number" || p.type == "boolean") json_type = p.type;
        properties[p.name] = json{{"type", json_type}, {"description", p.type}};
        if (p.required) required.push_back(p.name);
    }
    return json{{"type", "object"}, {"properties", properties}, {"required", required}};
}

std::vector<ToolDefinition> session_tools(const Spec& spec, const PromptArtifact& artifact) {
    std::vector<ToolDefinition> out;
    for (const auto& t : spec.tools) {
        ToolDefinition def;
        def.name = t.name;
        auto it = artifact.tool_description_overrides.find(t.name);
        def.description = it != artifact.tool_description_overrides.end() ? it->second
                                                                          : t.description;
        def.parameters = param_schema_json(t);
        out.push_back(std::move(def));
    }

    ToolDefinition respond;
    respond.name = kRespondTool;
    respond.description =
        "Deliver the final structured response for this turn. Call exactly once per turn, as "
        "the last action.";
    json properties{
        {"decision", json{{"type", "string"}, {"enum", spec.response_contract.decisions}}},
        {"node_id", json{{"type", "string"}}},
        {"evidence", json{{"type", "array"}, {"items", json{{"type", "string"}}}}},
        {"user_message", json{{"type", "string"}}},
    };
    json required = json::array({"decision", "node_id", "user_message"});
    for (const auto& f : spec.response_contract.extra_fields) {
        std::string json_type = "string";
        if (f.type == "integer" || f.type == "number" || f.type == "boolean" ||
            f.type == "array" || f.type == "object")
            json_type = f.type;
        properties[f.name] = json{{"type", json_type}};
        if (f.required) required.push_back(f.name);
    }
    respond.parameters = json{{"type", "object"}, {"properties", properties}, {"required", required}};
    out.push_back(std::move(respond));
    return out;
}

// -- behavior script -------------------------------------------------------------

BehaviorScript BehaviorScript::from_json(const json& value) {
    ObjReader r(value, "script");
    BehaviorScript script;
    const json& rules = r.require("rules");
    if (!rules.is_array()) throw SchemaError("script: field 'rules' must be a list");
    int i = 0;
    for (const auto& rule_json : rules) {
        std::string ctx = "script.rules[" + std::to_string(i++) + "]";
        ObjReader rr(rule_json, ctx);
        ScriptRule rule;
        if (const json* m = rr.optional("when_message")) rule.when_message = m->get<std::string>();
        if (const json* m = rr.optional("when_message_contains"))
            rule.when_message_contains = m->get<std::string>();
        if (const json* m = rr.optional("when_prompt_contains"))
            rule.when_prompt_contains = m->get<std::string>();
        if (const json* m = rr.optional("when_prompt_lacks"))
            rule.when_prompt_lacks = m->get<std::string>();
        if (const json* m = rr.optional("when_override_contains")) {
            ObjReader mr(*m, ctx + ".when_override_contains");
            rule.when_override_contains = {mr.require_string("tool"), mr.require_string("text")};
            mr.finish();
        }
        if (!rule.when_message && !rule.when_message_contains)
            throw SchemaError(ctx + ": needs when_message or when_message_contains");
        const json& actions = rr.require("actions");
        if (!actions.is_array()) throw SchemaError(ctx + ": field 'actions' must be a list");
        int j = 0;
        for (const auto& a : actions) {
            ObjReader ar(a, ctx + ".actions[" + std::to_string(j++) + "]");
            AgentStep step;
            if (const json* text = ar.optional("text")) {
                step = AgentStep::plain(text->get<std::string>());
            } else {
                step.tool = ar.require_string("tool");
                if (const json* args = ar.optional("args")) step.args = *args;
            }
            ar.finish();
            rule.actions.push_back(std::move(step));
        }
        rr.finish();
        script.rules.push_back(std::move(rule));
    }
    r.finish();
    return script;
}

BehaviorScript BehaviorScript::from_yaml(const std::string& text) {
    json tree = yaml_to_json(text);
    if (!tree.is_object()) throw SyntaxError("script document is not a YAML mapping");
    return from_json(tree);
}

// -- scripted session --------------------------------------------------------------

namespace {

class ScriptedSession : public BackendSession {
public:
    ScriptedSession(const BehaviorScript& script, SessionConfig config)
        : script_(script), config_(std::move(config)) {}

    void begin_turn(const std::string& user_message) override {
        const ScriptRule* rule = match(user_message);
        if (!rule)
            throw ScriptGapError("no script rule matches user message: \"" + user_message + "\"");
        pending_ = rule->actions;
        next_ = 0;
    }

    std::optional<AgentStep> next_step() override {
        if (next_ >= pending_.size()) return std::nullopt;
        return pending_[next_++];
    }

    void deliver_tool_result(const json&) override {}  // script does not read payloads

private:
    bool rule_applies(const ScriptRule& rule, const std::string& message) const {
        if (rule.when_message && *rule.when_message != message) return false;
        if (rule.when_message_contains &&
            message.find(*rule.when_message_contains) == std::string::npos)
            return false;
        const std::string& prompt = config_.system_prompt;
        if (rule.when_prompt_contains && prompt.find(*rule.when_prompt_contains) == std::string::npos)
            return false;
        if (rule.when_prompt_lacks && prompt.find(*rule.when_prompt_lacks) != std::string::npos)
            return false;
        if (rule.when_override_contains) {
            // Tool descriptions in the session config already carry any
            // artifact overrides.
            const auto& [tool, text] = *rule.when_override_contains;
            for (const auto& def : config_.tools)
                if (def.name == tool) return def.description.find(text) != std::string::npos;
            return false;
        }
        return true;
    }

    const ScriptRule* match(const std::string& message) const {
        for (const auto& rule : script_.rules)
            if (rule_applies(rule, message)) return &rule;
        return nullptr;
    }

    const BehaviorScript& script_;
    SessionConfig config_;
    std::vector<AgentStep> pending_;
    size_t next_ = 0;
};

}  // namespace

std::unique_ptr<BackendSession> ScriptedBackend::start_session(const SessionConfig& config) {
    return std::make_unique<ScriptedSession>(script_, config);
}

// -- capturing wrapper ----------------------------------------------------------------

class CapturingSession : public BackendSession {
public:
    CapturingSession(std::unique_ptr<BackendSession> inner, CapturingBackend* owner, json record)
        : inner_(std::move(inner)), owner_(owner), record_(std::move(record)) {
        record_["events"] = json::array();
    }

    ~CapturingSession() override {
        std::lock_guard<std::mutex> lock(owner_->mu_);
        owner_->records_.push_back(record_);
    }

    void begin_turn(const std::string& user_message) override {
        record_["events"].push_back(json{{"user_message", user_message}});
        inner_->begin_turn(user_message);
    }

    std::optional<AgentStep> next_step() override { return inner_->next_step(); }

    void deliver_tool_result(const json& payload) override {
        record_["events"].push_back(json{{"tool_result", payload}});
        inner_->deliver_tool_result(payload);
    }

private:
    std::unique_ptr<BackendSession> inner_;
    CapturingBackend* owner_;
    json record_;
};

std::unique_ptr<BackendSession> CapturingBackend::start_session(const SessionConfig& config) {
    return std::make_unique<CapturingSession>(inner_.start_session(config), this,
                                              json{{"config", config.to_json()}});
}

json CapturingBackend::observed() const {
    std::lock_guard<std::mutex> lock(mu_);
    return records_;
}

}  // namespace tdad
