#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace tdad {

using json = nlohmann::json;

struct TokenUsage {
    long long input_tokens = 0;
    long long output_tokens = 0;
    double cost_usd = 0.0;  // tracked when the provider reports it; never estimated

    TokenUsage& operator+=(const TokenUsage& other) {
        input_tokens += other.input_tokens;
        output_tokens += other.output_tokens;
        cost_usd += other.cost_usd;
        return *this;
    }
    bool operator==(const TokenUsage&) const = default;
};

struct ToolCallRecord {
    int ordinal = 0;  // position within the turn, across calls and responds
    std::string tool;
    json args = json::object();
    json payload = json::object();  // the fixture output fed back

    bool operator==(const ToolCallRecord&) const = default;
};

// One scripted turn as observed: the user message, every mediated tool call,
// every respond payload (breaches keep all of them), and contract breaches.
struct TurnRecord {
    std::string user_message;
    std::vector<ToolCallRecord> calls;
    std::vector<json> responds;       // in emission order
    std::vector<std::string> breaches;
    TokenUsage usage;

    bool operator==(const TurnRecord&) const = default;

    bool has_respond() const { return !responds.empty(); }
    // The contract-bound payload: the last respond of the turn.
    const json* final_respond() const { return responds.empty() ? nullptr : &responds.back(); }
};

struct Trace {
    std::vector<TurnRecord> turns;

    bool operator==(const Trace&) const = default;

    bool has_breach() const {
        for (const auto& t : turns)
            if (!t.breaches.empty()) return true;
        return false;
    }
    std::vector<std::string> all_breaches() const;
    TokenUsage total_usage() const;

    json to_json() const;
    static Trace from_json(const json& value);
    // One turn record per line, for audit and replay.
    std::string to_jsonl() const;
    static Trace from_jsonl(const std::string& text);
};

}  // namespace tdad
