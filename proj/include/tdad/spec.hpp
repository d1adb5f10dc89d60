#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tdad/predicate.hpp"

namespace tdad {

// -- domain types ---------------------------------------------------------------

struct ToolParam {
    std::string name;
    std::string type;  // semantic type (string, integer, number, boolean, ...)
    bool required = true;

    bool operator==(const ToolParam&) const = default;
};

struct ToolContract {
    std::string name;
    std::string description;
    std::vector<ToolParam> params;
    std::vector<std::string> failure_modes;
    std::vector<std::string> sequencing;  // tools that must precede this one

    bool operator==(const ToolContract&) const = default;
};

struct TestGuidance {
    std::string description;
    std::vector<std::string> ambiguous_examples;
    std::vector<std::string> unambiguous_examples;

    bool operator==(const TestGuidance&) const = default;
};

struct Policy {
    std::string id;
    std::string text;
    std::optional<TestGuidance> test_guidance;

    bool operator==(const Policy&) const = default;
};

struct DecisionNode {
    std::string node_id;
    std::string condition;
    std::vector<std::string> required_actions;
    std::vector<std::string> forbidden_actions;
    std::string decision_label;  // required on leaves
    std::vector<DecisionNode> children;

    bool is_leaf() const { return children.empty(); }
    bool operator==(const DecisionNode&) const = default;
};

struct RespondField {
    std::string name;
    std::string type;
    bool required = false;

    bool operator==(const RespondField&) const = default;
};

struct RespondSchema {
    std::vector<std::string> decisions;  // legal values of the `decision` field
    std::vector<RespondField> extra_fields;

    bool operator==(const RespondSchema&) const = default;
};

// Targeted scenario that verifies a mutation actually changed behavior.
struct ProbeSpec {
    std::vector<std::string> conversation;
    Predicate trigger;  // must FAIL on the unmutated artifact
    std::string fixture_set_id;

    bool operator==(const ProbeSpec&) const = default;
};

struct MutationIntent {
    std::string intent_id;
    std::string description;
    ProbeSpec probe;

    bool operator==(const MutationIntent&) const = default;
};

struct Spec {
    std::string id;
    int version = 1;
    std::vector<ToolContract> tools;
    std::vector<Policy> policies;  // list order is priority, highest first
    DecisionNode decision_tree;
    RespondSchema response_contract;
    std::vector<MutationIntent> mutation_intents;

    bool operator==(const Spec&) const = default;

    const ToolContract* find_tool(const std::string& name) const;
    const DecisionNode* find_node(const std::string& node_id) const;
    std::vector<const DecisionNode*> all_nodes() const;
    std::vector<const DecisionNode*> leaves() const;
    std::set<std::string> tool_names() const;
    std::set<std::string> node_ids() const;
    // decision, node_id, evidence, user_message plus declared extras.
    std::set<std::string> respond_field_names() const;
    int node_count() const;
};

// -- operations -------------------------------------------------------------------

// Parse a YAML spec document. Total over the declared schema: unknown keys
// are rejected with SchemaError, cross-reference violations raise
// IntegrityError with all findings sorted canonically.
Spec parse_spec(const std::string& document);

std::string serialize_spec(const Spec& spec);

json spec_to_json(const Spec& spec);
Spec spec_from_json(const json& value);

struct ValidationReport {
    int node_count = 0;
    std::vector<std::string> warnings;

    bool clean() const { return warnings.empty(); }
};

// Informational depth check; warns when the tree is below the benchmark
// envelope (fewer than 10 nodes). Never fatal.
ValidationReport validate_depth(const Spec& spec);

struct SpecDelta {
    std::vector<std::string> added_tools, removed_tools, modified_tools;
    std::vector<std::string> added_policies, removed_policies, modified_policies;
    std::vector<std::string> added_nodes, removed_nodes, modified_nodes;
    // Nodes present and unchanged in both versions; the input to invariant
    // test selection during evolution.
    std::vector<std::string> invariant_candidates;

    bool empty() const {
        return added_tools.empty() && removed_tools.empty() && modified_tools.empty() &&
               added_policies.empty() && removed_policies.empty() && modified_policies.empty() &&
               added_nodes.empty() && removed_nodes.empty() && modified_nodes.empty();
    }

    json to_json() const;
};

// Structural diff between two versions of the same spec.
// Throws VersionError when ids differ or the version does not increase.
SpecDelta diff_specs(const Spec& v1, const Spec& v2);

// Validate a predicate's argument completeness and its references against a
// spec. Returns all problems (empty when valid).
std::vector<std::string> validate_predicate(const Predicate& p, const Spec& spec);

}  // namespace tdad
