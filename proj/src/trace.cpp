#include "tdad/trace.hpp"

#include <sstream>

#include "tdad/detail/obj_reader.hpp"
#include "tdad/errors.hpp"

namespace tdad {

using detail::ObjReader;

std::vector<std::string> Trace::all_breaches() const {
    std::vector<std::string> out;
    for (size_t i = 0; i < turns.size(); ++i)
        for (const auto& b : turns[i].breaches)
            out.push_back("turn " + std::to_string(i) + ": " + b);
    return out;
}

TokenUsage Trace::total_usage() const {
    TokenUsage total;
    for (const auto& t : turns) total += t.usage;
    return total;
}

static json turn_to_json(const TurnRecord& t, size_t index) {
    json calls = json::array();
    for (const auto& c : t.calls)
        calls.push_back(json{
            {"ordinal", c.ordinal}, {"tool", c.tool}, {"args", c.args}, {"payload", c.payload}});
    return json{
        {"turn", index},
        {"user_message", t.user_message},
        {"calls", calls},
        {"responds", t.responds},
        {"breaches", t.breaches},
        {"usage",
         json{{"input_tokens", t.usage.input_tokens},
              {"output_tokens", t.usage.output_tokens},
              {"cost_usd", t.usage.cost_usd}}},
    };
}

static TurnRecord turn_from_json(const json& value) {
    ObjReader r(value, "trace.turn");
    TurnRecord t;
    r.optional("turn");
    t.user_message = r.require_string("user_message");
    const json& calls = r.require("calls");
    for (const auto& c : calls) {
        ObjReader cr(c, "trace.turn.call");
        ToolCallRecord rec;
        rec.ordinal = static_cast<int>(cr.require_int("ordinal"));
        rec.tool = cr.require_string("tool");
        rec.args = cr.require("args");
        rec.payload = cr.require("payload");
        cr.finish();
        t.calls.push_back(std::move(rec));
    }
    const json& responds = r.require("responds");
    for (const auto& resp : responds) t.responds.push_back(resp);
    t.breaches = r.require_string_list("breaches");
    if (const json* usage = r.optional("usage")) {
        ObjReader ur(*usage, "trace.turn.usage");
        t.usage.input_tokens = ur.require_int("input_tokens");
        t.usage.output_tokens = ur.require_int("output_tokens");
        const json& cost = ur.require("cost_usd");
        t.usage.cost_usd = cost.get<double>();
        ur.finish();
    }
    r.finish();
    return t;
}

json Trace::to_json() const {
    json turns_json = json::array();
    for (size_t i = 0; i < turns.size(); ++i) turns_json.push_back(turn_to_json(turns[i], i));
    return json{{"turns", turns_json}};
}

Trace Trace::from_json(const json& value) {
    ObjReader r(value, "trace");
    Trace trace;
    for (const auto& t : r.require("turns")) trace.turns.push_back(turn_from_json(t));
    r.finish();
    return trace;
}

std::string Trace::to_jsonl() const {
    std::string out;
    for (size_t i = 0; i < turns.size(); ++i) {
        out += turn_to_json(turns[i], i).dump();
        out += "\n";
    }
    return out;
}

Trace Trace::from_jsonl(const std::string& text) {
    Trace trace;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        trace.turns.push_back(turn_from_json(json::parse(line)));
    }
    return trace;
}

}  // namespace tdad
