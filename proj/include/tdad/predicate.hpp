#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace tdad {

using json = nlohmann::json;

enum class PredicateType {
    tool_called,
    tool_not_called,
    call_order,
    text_contains,
    text_absent,
    respond_field_equals,
    respond_field_in_set,
    numeric_grounded,
    canary_free,
};

const char* to_string(PredicateType t);
PredicateType predicate_type_from_string(const std::string& s);

// A declarative assertion over a conversation trace. `args` is the
// type-specific parameter map:
//   tool_called / tool_not_called : tool
//   call_order                    : first, second, [cross_turn]
//   text_contains / text_absent   : text
//   respond_field_equals          : field, value
//   respond_field_in_set          : field, values
//   numeric_grounded              : field, source_path, [tolerance], [tool]
//   canary_free                   : (none)
struct Predicate {
    PredicateType type = PredicateType::tool_called;
    json args = json::object();
    std::optional<int> turn_scope;  // absent: whole conversation

    static Predicate tool_called(std::string tool);
    static Predicate tool_not_called(std::string tool);
    static Predicate call_order(std::string first, std::string second, bool cross_turn = false);
    static Predicate text_contains(std::string text);
    static Predicate text_absent(std::string text);
    static Predicate respond_field_equals(std::string field, json value);
    static Predicate respond_field_in_set(std::string field, json values);
    static Predicate numeric_grounded(std::string field, std::string source_path,
                                      double tolerance = 1e-6);
    static Predicate canary_free();

    bool operator==(const Predicate& other) const = default;

    // Short display form for failure reasons and cluster labels.
    std::string label() const;
    // The primary tool/field the predicate is about (cluster key component).
    std::string subject() const;

    json to_json() const;
    // Strict parse; throws SchemaError on missing/unknown keys.
    static Predicate from_json(const json& value, const std::string& context);
};

}  // namespace tdad
