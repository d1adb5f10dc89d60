#include "tdad/assertions.hpp"

#include <cmath>

#include "tdad/errors.hpp"
#include "tdad/util.hpp"

namespace tdad {

const char* to_string(TestStatus s) {
    switch (s) {
        case TestStatus::pass: return "pass";
        case TestStatus::fail: return "fail";
        case TestStatus::error: return "error";
    }
    return "?";
}

namespace {

// Indices of the turns a predicate ranges over.
std::vector<size_t> scoped_turns(const Predicate& p, const Trace& trace) {
    if (p.turn_scope) {
        int turn = *p.turn_scope;
        if (turn < 0 || static_cast<size_t>(turn) >= trace.turns.size())
            throw PredicateBindingError("predicate " + p.label() + " scopes turn " +
                                        std::to_string(turn) + " but the trace has " +
                                        std::to_string(trace.turns.size()) + " turns");
        return {static_cast<size_t>(turn)};
    }
    std::vector<size_t> all(trace.turns.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
}

// The turn whose final respond carries the contract-bound answer: the scoped
// turn, or the conversation's last turn.
size_t target_turn(const Predicate& p, const Trace& trace) {
    if (trace.turns.empty())
        throw PredicateBindingError("predicate " + p.label() + " evaluated against an empty trace");
    if (p.turn_scope) return scoped_turns(p, trace)[0];
    return trace.turns.size() - 1;
}

Verdict eval_tool_called(const Predicate& p, const Trace& trace) {
    std::string tool = p.args.at("tool").get<std::string>();
    for (size_t i : scoped_turns(p, trace))
        for (const auto& c : trace.turns[i].calls)
            if (c.tool == tool) return Verdict::ok();
    return Verdict::fail(p.label() + ": tool '" + tool + "' was never called in scope");
}

Verdict eval_tool_not_called(const Predicate& p, const Trace& trace) {
    std::string tool = p.args.at("tool").get<std::string>();
    for (size_t i : scoped_turns(p, trace))
        for (const auto& c : trace.turns[i].calls)
            if (c.tool == tool)
                return Verdict::fail(p.label() + ": tool '" + tool + "' was called in turn " +
                                     std::to_string(i) + " (ordinal " + std::to_string(c.ordinal) +
                                     ")");
    return Verdict::ok();
}

// Every occurrence of `second` must be preceded by at least one `first`.
// Per-turn by default: sequencing constraints are intra-task. The cross_turn
// flag flattens the scoped turns for cross-turn policies.
Verdict eval_call_order(const Predicate& p, const Trace& trace) {
    std::string first = p.args.at("first").get<std::string>();
    std::string second = p.args.at("second").get<std::string>();
    bool cross_turn = p.args.value("cross_turn", false);

    auto check_window = [&](const std::vector<std::pair<size_t, const ToolCallRecord*>>& calls)
        -> Verdict {
        // "Preceded" is strict: an occurrence never satisfies its own
        // precondition, so the second-check runs before first is marked.
        bool first_seen = false;
        for (const auto& [turn, call] : calls) {
            if (call->tool == second && !first_seen)
                return Verdict::fail(p.label() + ": '" + second + "' at turn " +
                                     std::to_string(turn) + " ordinal " +
                                     std::to_string(call->ordinal) + " without a preceding '" +
                                     first + "'");
            if (call->tool == first) first_seen = true;
        }
        return Verdict::ok();
    };

    std::vector<size_t> turns = scoped_turns(p, trace);
    if (cross_turn) {
        std::vector<std::pair<size_t, const ToolCallRecord*>> flat;
        for (size_t i : turns)
            for (const auto& c : trace.turns[i].calls) flat.emplace_back(i, &c);
        return check_window(flat);
    }
    for (size_t i : turns) {
        std::vector<std::pair<size_t, const ToolCallRecord*>> window;
        for (const auto& c : trace.turns[i].calls) window.emplace_back(i, &c);
        Verdict v = check_window(window);
        if (!v.pass) return v;
    }
    return Verdict::ok();
}

// Text predicates range over respond user_message only; intermediate
// reasoning text is not contract-bound.
Verdict eval_text_contains(const Predicate& p, const Trace& trace) {
    std::string text = p.args.at("text").get<std::string>();
    for (size_t i : scoped_turns(p, trace)) {
        const json* respond = trace.turns[i].final_respond();
        if (!respond || !respond->is_object() || !respond->contains("user_message")) continue;
        const json& msg = respond->at("user_message");
        if (msg.is_string() && msg.get<std::string>().find(text) != std::string::npos)
            return Verdict::ok();
    }
    return Verdict::fail(p.label() + ": no respond user_message in scope contains \"" + text +
                         "\"");
}

Verdict eval_text_absent(const Predicate& p, const Trace& trace) {
    std::string text = p.args.at("text").get<std::string>();
    for (size_t i : scoped_turns(p, trace)) {
        const json* respond = trace.turns[i].final_respond();
        if (!respond || !respond->is_object() || !respond->contains("user_message")) continue;
        const json& msg = respond->at("user_message");
        if (msg.is_string() && msg.get<std::string>().find(text) != std::string::npos)
            return Verdict::fail(p.label() + ": respond user_message in turn " +
                                 std::to_string(i) + " contains \"" + text + "\"");
    }
    return Verdict::ok();
}

Verdict eval_respond_field_equals(const Predicate& p, const Trace& trace) {
    std::string field = p.args.at("field").get<std::string>();
    const json& expected = p.args.at("value");
    size_t turn = target_turn(p, trace);
    const json* respond = trace.turns[turn].final_respond();
    if (!respond)
        return Verdict::fail(p.label() + ": turn " + std::to_string(turn) +
                             " has no respond payload");
    if (!respond->is_object() || !respond->contains(field))
        return Verdict::fail(p.label() + ": respond in turn " + std::to_string(turn) +
                             " has no field '" + field + "'");
    const json& actual = respond->at(field);
    if (actual == expected) return Verdict::ok();
    return Verdict::fail(p.label() + ": expected " + expected.dump() + ", observed " +
                         actual.dump() + " in turn " + std::to_string(turn));
}

Verdict eval_respond_field_in_set(const Predicate& p, const Trace& trace) {
    std::string field = p.args.at("field").get<std::string>();
    const json& values = p.args.at("values");
    size_t turn = target_turn(p, trace);
    const json* respond = trace.turns[turn].final_respond();
    if (!respond)
        return Verdict::fail(p.label() + ": turn " + std::to_string(turn) +
                             " has no respond payload");
    if (!respond->is_object() || !respond->contains(field))
        return Verdict::fail(p.label() + ": respond in turn " + std::to_string(turn) +
                             " has no field '" + field + "'");
    const json& actual = respond->at(field);
    for (const auto& v : values)
        if (actual == v) return Verdict::ok();
    return Verdict::fail(p.label() + ": observed " + actual.dump() + " not in " + values.dump() +
                         " in turn " + std::to_string(turn));
}

// The respond field must echo the number held by the turn's data-source tool
// payload, within absolute tolerance. The source payload is searched among
// the target turn's calls, most recent first, restricted to args.tool when
// given. No resolvable source is a test bug, not an agent failure.
Verdict eval_numeric_grounded(const Predicate& p, const Trace& trace) {
    std::string field = p.args.at("field").get<std::string>();
    std::string source_path = p.args.at("source_path").get<std::string>();
    double tolerance = p.args.value("tolerance", 1e-6);
    std::string source_tool = p.args.value("tool", "");

    size_t turn = target_turn(p, trace);
    const json* source = nullptr;
    const auto& calls = trace.turns[turn].calls;
    for (auto it = calls.rbegin(); it != calls.rend(); ++it) {
        if (!source_tool.empty() && it->tool != source_tool) continue;
        const json* v = json_at_path(it->payload, source_path);
        if (v && v->is_number()) {
            source = v;
            break;
        }
    }
    if (!source)
        throw PredicateBindingError(p.label() + ": source path '" + source_path +
                                    "' does not resolve to a number in any " +
                                    (source_tool.empty() ? "tool" : "'" + source_tool + "'") +
                                    " payload of turn " + std::to_string(turn));

    const json* respond = trace.turns[turn].final_respond();
    if (!respond)
        return Verdict::fail(p.label() + ": turn " + std::to_string(turn) +
                             " has no respond payload");
    if (!respond->is_object() || !respond->contains(field))
        return Verdict::fail(p.label() + ": respond has no field '" + field + "'");
    const json& actual = respond->at(field);
    if (!actual.is_number())
        return Verdict::fail(p.label() + ": respond field '" + field + "' is not numeric: " +
                             actual.dump());

    double a = actual.get<double>();
    double s = source->get<double>();
    if (std::fabs(a - s) <= tolerance) return Verdict::ok();
    return Verdict::fail(p.label() + ": respond value " + actual.dump() +
                         " differs from fixture value " + source->dump() +
                         " beyond tolerance " + std::to_string(tolerance));
}

Verdict eval_canary_free(const Predicate& p, const Trace& trace, const FixtureSet& fixtures) {
    for (size_t i : scoped_turns(p, trace)) {
        for (const auto& respond : trace.turns[i].responds) {
            if (!respond.is_object() || !respond.contains("user_message")) continue;
            const json& msg = respond.at("user_message");
            if (!msg.is_string()) continue;
            auto hits = scan_canaries(msg.get<std::string>(), fixtures.canaries);
            if (!hits.empty())
                return Verdict::fail(p.label() + ": canary '" + hits[0].canary_id + "' (" +
                                     hits[0].literal + ") leaked in respond user_message of turn " +
                                     std::to_string(i));
        }
    }
    return Verdict::ok();
}

}  // namespace

Verdict eval_predicate(const Predicate& p, const Trace& trace, const FixtureSet& fixtures) {
    switch (p.type) {
        case PredicateType::tool_called: return eval_tool_called(p, trace);
        case PredicateType::tool_not_called: return eval_tool_not_called(p, trace);
        case PredicateType::call_order: return eval_call_order(p, trace);
        case PredicateType::text_contains: return eval_text_contains(p, trace);
        case PredicateType::text_absent: return eval_text_absent(p, trace);
        case PredicateType::respond_field_equals: return eval_respond_field_equals(p, trace);
        case PredicateType::respond_field_in_set: return eval_respond_field_in_set(p, trace);
        case PredicateType::numeric_grounded: return eval_numeric_grounded(p, trace);
        case PredicateType::canary_free: return eval_canary_free(p, trace, fixtures);
    }
    throw PredicateBindingError("unhandled predicate type");
}

json TestResult::to_json(bool include_trace) const {
    json out{
        {"test_id", test_id},
        {"status", to_string(status)},
        {"reasons", reasons},
        {"failed_predicates", failed_predicates},
        {"node_id", node_id},
    };
    if (include_trace) out["trace"] = trace.to_json();
    return out;
}

TestResult eval_test(const TestCase& test, const Trace& trace, const FixtureSet& fixtures) {
    TestResult result;
    result.test_id = test.test_id;
    result.node_id = test.node_id;
    result.trace = trace;
    result.status = TestStatus::pass;

    for (const auto& p : test.assertions) {
        Verdict v = eval_predicate(p, trace, fixtures);
        if (!v.pass) {
            result.status = TestStatus::fail;
            result.reasons.push_back(v.reason);
            result.failed_predicates.push_back(p.label());
            result.failed_subjects.push_back(p.subject());
        }
    }
    for (const auto& breach : trace.all_breaches()) {
        result.status = TestStatus::fail;
        result.reasons.push_back("contract breach: " + breach);
    }
    return result;
}

}  // namespace tdad
