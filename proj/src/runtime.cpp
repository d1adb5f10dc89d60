#include "tdad/runtime.hpp"

#include "tdad/errors.hpp"

namespace tdad {

// Record schema breaches in the respond payload: unknown fields, missing
// required fields, out-of-contract decision, unknown node id.
static void check_respond_payload(const json& payload, const Spec& spec,
                                  std::vector<std::string>& breaches) {
    if (!payload.is_object()) {
        breaches.push_back("respond payload is not an object");
        return;
    }
    std::set<std::string> allowed = spec.respond_field_names();
    for (auto it = payload.begin(); it != payload.end(); ++it)
        if (!allowed.count(it.key()))
            breaches.push_back("respond carries undeclared field '" + it.key() + "'");

    for (const char* field : {"decision", "node_id", "user_message"})
        if (!payload.contains(field))
            breaches.push_back(std::string("respond missing required field '") + field + "'");
    for (const auto& f : spec.response_contract.extra_fields)
        if (f.required && !payload.contains(f.name))
            breaches.push_back("respond missing required field '" + f.name + "'");

    if (payload.contains("decision")) {
        const json& d = payload.at("decision");
        bool ok = d.is_string();
        if (ok) {
            ok = false;
            for (const auto& v : spec.response_contract.decisions)
                if (d.get<std::string>() == v) ok = true;
        }
        if (!ok)
            breaches.push_back("respond decision " + d.dump() + " is not in the response contract");
    }
    if (payload.contains("node_id")) {
        const json& n = payload.at("node_id");
        if (!n.is_string() || !spec.node_ids().count(n.get<std::string>()))
            breaches.push_back("respond node_id " + n.dump() + " is not a spec node");
    }
    if (payload.contains("user_message") && !payload.at("user_message").is_string())
        breaches.push_back("respond user_message is not a string");
}

Trace run_conversation(const PromptArtifact& artifact,
                       const std::vector<std::string>& conversation,
                       const FixtureSet& fixtures, AgentBackend& backend, const Spec& spec,
                       const RunOptions& options) {
    SessionConfig config;
    config.system_prompt = artifact.system_prompt;
    config.tools = session_tools(spec, artifact);
    auto session = backend.start_session(config);
    auto declared = spec.tool_names();

    Trace trace;
    for (const auto& user_message : conversation) {
        TurnRecord turn;
        turn.user_message = user_message;
        session->begin_turn(user_message);

        int ordinal = 0;
        bool respond_seen = false;
        while (true) {
            if (ordinal >= options.tool_call_cap) {
                turn.breaches.push_back("tool call budget exceeded (cap " +
                                        std::to_string(options.tool_call_cap) + ")");
                break;
            }
            std::optional<AgentStep> step = session->next_step();
            if (!step) break;
            turn.usage += step->usage;

            if (step->kind == AgentStep::Kind::plain_text) {
                turn.breaches.push_back("assistant emitted plain text instead of a tool call");
                ++ordinal;
                continue;
            }
            if (step->tool == kRespondTool) {
                if (respond_seen)
                    turn.breaches.push_back("respond called more than once in a turn");
                respond_seen = true;
                check_respond_payload(step->args, spec, turn.breaches);
                turn.responds.push_back(step->args);
                ++ordinal;
                continue;
            }

            if (respond_seen)
                turn.breaches.push_back("tool call to '" + step->tool + "' after respond");

            ToolCallRecord record;
            record.ordinal = ordinal++;
            record.tool = step->tool;
            record.args = step->args;
            record.payload = resolve_call(fixtures, step->tool, step->args, declared);
            session->deliver_tool_result(record.payload);
            turn.calls.push_back(std::move(record));
        }

        if (!respond_seen) turn.breaches.push_back("turn ended without a respond call");
        trace.turns.push_back(std::move(turn));
    }
    return trace;
}

}  // namespace tdad
