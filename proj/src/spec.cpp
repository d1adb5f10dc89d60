#include "tdad/spec.hpp"

#include <algorithm>
#include <functional>

#include "tdad/detail/obj_reader.hpp"
#include "tdad/errors.hpp"
#include "tdad/util.hpp"

namespace tdad {

using detail::ObjReader;

// -- Predicate ---------------------------------------------------------------------

const char* to_string(PredicateType t) {
    switch (t) {
        case PredicateType::tool_called: return "tool_called";
        case PredicateType::tool_not_called: return "tool_not_called";
        case PredicateType::call_order: return "call_order";
        case PredicateType::text_contains: return "text_contains";
        case PredicateType::text_absent: return "text_absent";
        case PredicateType::respond_field_equals: return "respond_field_equals";
        case PredicateType::respond_field_in_set: return "respond_field_in_set";
        case PredicateType::numeric_grounded: return "numeric_grounded";
        case PredicateType::canary_free: return "canary_free";
    }
    return "?";
}

PredicateType predicate_type_from_string(const std::string& s) {
    static const std::pair<const char*, PredicateType> table[] = {
        {"tool_called", PredicateType::tool_called},
        {"tool_not_called", PredicateType::tool_not_called},
        {"call_order", PredicateType::call_order},
        {"text_contains", PredicateType::text_contains},
        {"text_absent", PredicateType::text_absent},
        {"respond_field_equals", PredicateType::respond_field_equals},
        {"respond_field_in_set", PredicateType::respond_field_in_set},
        {"numeric_grounded", PredicateType::numeric_grounded},
        {"canary_free", PredicateType::canary_free},
    };
    for (const auto& [name, type] : table)
        if (s == name) return type;
    throw SchemaError("unknown predicate type '" + s + "'");
}

Predicate Predicate::tool_called(std::string tool) {
    return {PredicateType::tool_called, json{{"tool", std::move(tool)}}, std::nullopt};
}
Predicate Predicate::tool_not_called(std::string tool) {
    return {PredicateType::tool_not_called, json{{"tool", std::move(tool)}}, std::nullopt};
}
Predicate Predicate::call_order(std::string first, std::string second, bool cross_turn) {
    json args{{"first", std::move(first)}, {"second", std::move(second)}};
    if (cross_turn) args["cross_turn"] = true;
    return {PredicateType::call_order, std::move(args), std::nullopt};
}
Predicate Predicate::text_contains(std::string text) {
    return {PredicateType::text_contains, json{{"text", std::move(text)}}, std::nullopt};
}
Predicate Predicate::text_absent(std::string text) {
    return {PredicateType::text_absent, json{{"text", std::move(text)}}, std::nullopt};
}
Predicate Predicate::respond_field_equals(std::string field, json value) {
    return {PredicateType::respond_field_equals,
            json{{"field", std::move(field)}, {"value", std::move(value)}}, std::nullopt};
}
Predicate Predicate::respond_field_in_set(std::string field, json values) {
    return {PredicateType::respond_field_in_set,
            json{{"field", std::move(field)}, {"values", std::move(values)}}, std::nullopt};
}
Predicate Predicate::numeric_grounded(std::string field, std::string source_path, double tolerance) {
    return {PredicateType::numeric_grounded,
            json{{"field", std::move(field)},
                 {"source_path", std::move(source_path)},
                 {"tolerance", tolerance}},
            std::nullopt};
}
Predicate Predicate::canary_free() {
    return {PredicateType::canary_free, json::object(), std::nullopt};
}

std::string Predicate::label() const {
    std::string out = to_string(type);
    switch (type) {
        case PredicateType::tool_called:
        case PredicateType::tool_not_called:
            out += "(" + args.value("tool", "") + ")";
            break;
        case PredicateType::call_order:
            out += "(" + args.value("first", "") + ", " + args.value("second", "") + ")";
            break;
        case PredicateType::text_contains:
        case PredicateType::text_absent:
            out += "(\"" + args.value("text", "") + "\")";
            break;
        case PredicateType::respond_field_equals:
        case PredicateType::respond_field_in_set:
        case PredicateType::numeric_grounded:
            out += "(" + args.value("field", "") + ")";
            break;
        case PredicateType::canary_free:
            out += "()";
            break;
    }
    return out;
}

std::string Predicate::subject() const {
    switch (type) {
        case PredicateType::tool_called:
        case PredicateType::tool_not_called:
            return args.value("tool", "");
        case PredicateType::call_order:
            return args.value("first", "");
        case PredicateType::text_contains:
        case PredicateType::text_absent:
            return args.value("text", "");
        case PredicateType::respond_field_equals:
        case PredicateType::respond_field_in_set:
        case PredicateType::numeric_grounded:
            return args.value("field", "");
        case PredicateType::canary_free:
            return "canary";
    }
    return "";
}

json Predicate::to_json() const {
    json out{{"predicate", to_string(type)}};
    for (auto it = args.begin(); it != args.end(); ++it) out[it.key()] = it.value();
    if (turn_scope) out["turn"] = *turn_scope;
    return out;
}

Predicate Predicate::from_json(const json& value, const std::string& context) {
    ObjReader r(value, context);
    Predicate p;
    p.type = predicate_type_from_string(r.require_string("predicate"));
    if (const json* turn = r.optional("turn")) {
        if (!turn->is_number_integer())
            throw SchemaError(context + ": field 'turn' must be an integer");
        p.turn_scope = turn->get<int>();
    }
    auto take_string = [&](const char* key) { p.args[key] = r.require_string(key); };
    switch (p.type) {
        case PredicateType::tool_called:
        case PredicateType::tool_not_called:
            take_string("tool");
            break;
        case PredicateType::call_order:
            take_string("first");
            take_string("second");
            if (r.optional_bool("cross_turn", false)) p.args["cross_turn"] = true;
            break;
        case PredicateType::text_contains:
        case PredicateType::text_absent:
            take_string("text");
            break;
        case PredicateType::respond_field_equals:
            take_string("field");
            p.args["value"] = r.require("value");
            break;
        case PredicateType::respond_field_in_set: {
            take_string("field");
            const json& vals = r.require("values");
            if (!vals.is_array())
                throw SchemaError(context + ": field 'values' must be a list");
            p.args["values"] = vals;
            break;
        }
        case PredicateType::numeric_grounded: {
            take_string("field");
            take_string("source_path");
            if (const json* tol = r.optional("tolerance")) {
                if (!tol->is_number())
                    throw SchemaError(context + ": field 'tolerance' must be a number");
                p.args["tolerance"] = tol->get<double>();
            } else {
                p.args["tolerance"] = 1e-6;
            }
            if (const json* tool = r.optional("tool")) {
                if (!tool->is_string())
                    throw SchemaError(context + ": field 'tool' must be a string");
                p.args["tool"] = tool->get<std::string>();
            }
            break;
        }
        case PredicateType::canary_free:
            break;
    }
    r.finish();
    return p;
}

// -- Spec accessors -------------------------------------------------------------------

const ToolContract* Spec::find_tool(const std::string& name) const {
    for (const auto& t : tools)
        if (t.name == name) return &t;
    return nullptr;
}

static void walk_nodes(const DecisionNode& node,
                       const std::function<void(const DecisionNode&)>& fn) {
    fn(node);
    for (const auto& child : node.children) walk_nodes(child, fn);
}

const DecisionNode* Spec::find_node(const std::string& node_id) const {
    const DecisionNode* found = nullptr;
    walk_nodes(decision_tree, [&](const DecisionNode& n) {
        if (n.node_id == node_id) found = &n;
    });
    return found;
}

std::vector<const DecisionNode*> Spec::all_nodes() const {
    std::vector<const DecisionNode*> out;
    walk_nodes(decision_tree, [&](const DecisionNode& n) { out.push_back(&n); });
    return out;
}

std::vector<const DecisionNode*> Spec::leaves() const {
    std::vector<const DecisionNode*> out;
    walk_nodes(decision_tree, [&](const DecisionNode& n) {
        if (n.is_leaf()) out.push_back(&n);
    });
    return out;
}

std::set<std::string> Spec::tool_names() const {
    std::set<std::string> out;
    for (const auto& t : tools) out.insert(t.name);
    return out;
}

std::set<std::string> Spec::node_ids() const {
    std::set<std::string> out;
    walk_nodes(decision_tree, [&](const DecisionNode& n) { out.insert(n.node_id); });
    return out;
}

std::set<std::string> Spec::respond_field_names() const {
    std::set<std::string> out{"decision", "node_id", "evidence", "user_message"};
    for (const auto& f : response_contract.extra_fields) out.insert(f.name);
    return out;
}

int Spec::node_count() const { return static_cast<int>(all_nodes().size()); }

// -- parsing -----------------------------------------------------------------------------

static ToolContract parse_tool(const json& value, const std::string& ctx) {
    ObjReader r(value, ctx);
    ToolContract t;
    t.name = r.require_string("name");
    t.description = r.require_string("description");
    if (const json* params = r.optional("params")) {
        if (!params->is_object())
            throw SchemaError(ctx + ": field 'params' must be a mapping");
        for (auto it = params->begin(); it != params->end(); ++it) {
            ToolParam p;
            p.name = it.key();
            if (it.value().is_string()) {
                p.type = it.value().get<std::string>();
            } else {
                ObjReader pr(it.value(), ctx + ".params." + p.name);
                p.type = pr.require_string("type");
                p.required = pr.optional_bool("required", true);
                pr.finish();
            }
            t.params.push_back(std::move(p));
        }
    }
    t.failure_modes = r.optional_string_list("failure_modes");
    t.sequencing = r.optional_string_list("sequencing");
    r.finish();
    return t;
}

static TestGuidance parse_guidance(const json& value, const std::string& ctx) {
    ObjReader r(value, ctx);
    TestGuidance g;
    g.description = r.require_string("description");
    g.ambiguous_examples = r.optional_string_list("ambiguous_examples");
    g.unambiguous_examples = r.optional_string_list("unambiguous_examples");
    r.finish();
    return g;
}

static Policy parse_policy(const json& value, const std::string& ctx) {
    ObjReader r(value, ctx);
    Policy p;
    p.id = r.require_string("id");
    p.text = r.require_string("text");
    if (const json* g = r.optional("test_guidance"))
        p.test_guidance = parse_guidance(*g, ctx + ".test_guidance");
    r.finish();
    return p;
}

static DecisionNode parse_node(const json& value, const std::string& ctx) {
    ObjReader r(value, ctx);
    DecisionNode n;
    n.node_id = r.require_string("node_id");
    n.condition = r.require_string("condition");
    n.required_actions = r.optional_string_list("required_actions");
    n.forbidden_actions = r.optional_string_list("forbidden_actions");
    n.decision_label = r.optional_string("decision");
    if (const json* children = r.optional("children")) {
        if (!children->is_array())
            throw SchemaError(ctx + ": field 'children' must be a list");
        int i = 0;
        for (const auto& child : *children)
            n.children.push_back(parse_node(child, ctx + ".children[" + std::to_string(i++) + "]"));
    }
    r.finish();
    return n;
}

static RespondSchema parse_response_contract(const json& value, const std::string& ctx) {
    ObjReader r(value, ctx);
    RespondSchema s;
    s.decisions = r.require_string_list("decisions");
    if (const json* extra = r.optional("extra_fields")) {
        if (!extra->is_array())
            throw SchemaError(ctx + ": field 'extra_fields' must be a list");
        int i = 0;
        for (const auto& f : *extra) {
            ObjReader fr(f, ctx + ".extra_fields[" + std::to_string(i++) + "]");
            RespondField rf;
            rf.name = fr.require_string("name");
            rf.type = fr.optional_string("type", "string");
            rf.required = fr.optional_bool("required", false);
            fr.finish();
            s.extra_fields.push_back(std::move(rf));
        }
    }
    r.finish();
    return s;
}

static MutationIntent parse_intent(const json& value, const std::string& ctx) {
    ObjReader r(value, ctx);
    MutationIntent m;
    m.intent_id = r.require_string("intent_id");
    m.description = r.require_string("description");
    const json& probe = r.require("activation_probe");
    ObjReader pr(probe, ctx + ".activation_probe");
    m.probe.conversation = pr.require_string_list("conversation");
    m.probe.trigger = Predicate::from_json(pr.require("trigger"), ctx + ".activation_probe.trigger");
    m.probe.fixture_set_id = pr.require_string("fixture_set_id");
    pr.finish();
    r.finish();
    return m;
}

std::vector<std::string> validate_predicate(const Predicate& p, const Spec& spec) {
    std::vector<std::string> problems;
    auto tools = spec.tool_names();
    auto fields = spec.respond_field_names();
    auto check_tool = [&](const std::string& name) {
        if (name != "respond" && !tools.count(name))
            problems.push_back("predicate " + p.label() + " references undeclared tool '" + name + "'");
    };
    auto check_field = [&](const std::string& name) {
        if (!fields.count(name))
            problems.push_back("predicate " + p.label() + " references undeclared respond field '" +
                               name + "'");
    };
    switch (p.type) {
        case PredicateType::tool_called:
        case PredicateType::tool_not_called:
            check_tool(p.args.value("tool", ""));
            break;
        case PredicateType::call_order:
            check_tool(p.args.value("first", ""));
            check_tool(p.args.value("second", ""));
            break;
        case PredicateType::respond_field_equals:
        case PredicateType::respond_field_in_set:
            check_field(p.args.value("field", ""));
            break;
        case PredicateType::numeric_grounded:
            check_field(p.args.value("field", ""));
            if (p.args.contains("tool")) check_tool(p.args.value("tool", ""));
            break;
        case PredicateType::text_contains:
        case PredicateType::text_absent:
        case PredicateType::canary_free:
            break;
    }
    return problems;
}

// Cross-reference scan. Collects every violation, sorted canonically, so the
// error set is reproducible regardless of container iteration order.
static void check_integrity(const Spec& spec) {
    std::vector<std::string> problems;

    std::set<std::string> tool_seen;
    for (const auto& t : spec.tools) {
        if (!tool_seen.insert(t.name).second)
            problems.push_back("duplicate tool name '" + t.name + "'");
        std::set<std::string> param_seen;
        for (const auto& p : t.params)
            if (!param_seen.insert(p.name).second)
                problems.push_back("tool '" + t.name + "' has duplicate param '" + p.name + "'");
        for (const auto& pre : t.sequencing)
            if (!spec.find_tool(pre))
                problems.push_back("tool '" + t.name + "' sequencing references undeclared tool '" +
                                   pre + "'");
    }

    std::set<std::string> policy_seen;
    for (const auto& p : spec.policies) {
        if (p.id.empty()) problems.push_back("policy with empty id");
        if (!policy_seen.insert(p.id).second)
            problems.push_back("duplicate policy id '" + p.id + "'");
        if (p.test_guidance) {
            std::set<std::string> amb(p.test_guidance->ambiguous_examples.begin(),
                                      p.test_guidance->ambiguous_examples.end());
            for (const auto& u : p.test_guidance->unambiguous_examples)
                if (amb.count(u))
                    problems.push_back("policy '" + p.id +
                                       "' lists example in both ambiguous and unambiguous sets: \"" +
                                       u + "\"");
        }
    }

    std::set<std::string> node_seen;
    std::set<std::string> decisions(spec.response_contract.decisions.begin(),
                                    spec.response_contract.decisions.end());
    auto tools = spec.tool_names();
    walk_nodes(spec.decision_tree, [&](const DecisionNode& n) {
        if (!node_seen.insert(n.node_id).second)
            problems.push_back("duplicate node id '" + n.node_id + "'");
        std::set<std::string> required(n.required_actions.begin(), n.required_actions.end());
        for (const auto& a : n.required_actions)
            if (!tools.count(a))
                problems.push_back("node '" + n.node_id + "' requires undeclared tool '" + a + "'");
        for (const auto& a : n.forbidden_actions) {
            if (!tools.count(a))
                problems.push_back("node '" + n.node_id + "' forbids undeclared tool '" + a + "'");
            if (required.count(a))
                problems.push_back("node '" + n.node_id + "' lists tool '" + a +
                                   "' as both required and forbidden");
        }
        if (n.is_leaf()) {
            if (n.decision_label.empty())
                problems.push_back("leaf node '" + n.node_id + "' has no decision label");
            else if (!decisions.count(n.decision_label))
                problems.push_back("leaf node '" + n.node_id + "' uses decision '" +
                                   n.decision_label + "' not declared in response_contract");
        }
    });

    std::set<std::string> intent_seen;
    for (const auto& m : spec.mutation_intents) {
        if (!intent_seen.insert(m.intent_id).second)
            problems.push_back("duplicate mutation intent id '" + m.intent_id + "'");
        for (auto& problem : validate_predicate(m.probe.trigger, spec))
            problems.push_back("intent '" + m.intent_id + "': " + problem);
    }

    if (!problems.empty()) {
        std::sort(problems.begin(), problems.end());
        problems.erase(std::unique(problems.begin(), problems.end()), problems.end());
        throw IntegrityError(join(problems, "; "));
    }
}

Spec spec_from_json(const json& value) {
    ObjReader r(value, "spec");
    Spec spec;
    spec.id = r.require_string("id");
    spec.version = static_cast<int>(r.require_int("version"));
    if (spec.version < 1) throw SchemaError("spec: field 'version' must be >= 1");

    const json& tools = r.require("tools");
    if (!tools.is_array()) throw SchemaError("spec: field 'tools' must be a list");
    int i = 0;
    for (const auto& t : tools)
        spec.tools.push_back(parse_tool(t, "spec.tools[" + std::to_string(i++) + "]"));

    const json& policies = r.require("policies");
    if (!policies.is_array()) throw SchemaError("spec: field 'policies' must be a list");
    i = 0;
    for (const auto& p : policies)
        spec.policies.push_back(parse_policy(p, "spec.policies[" + std::to_string(i++) + "]"));

    spec.decision_tree = parse_node(r.require("decision_tree"), "spec.decision_tree");
    spec.response_contract =
        parse_response_contract(r.require("response_contract"), "spec.response_contract");

    if (const json* intents = r.optional("mutation_intents")) {
        if (!intents->is_array())
            throw SchemaError("spec: field 'mutation_intents' must be a list");
        i = 0;
        for (const auto& m : *intents)
            spec.mutation_intents.push_back(
                parse_intent(m, "spec.mutation_intents[" + std::to_string(i++) + "]"));
    }
    r.finish();

    check_integrity(spec);
    return spec;
}

Spec parse_spec(const std::string& document) {
    json tree = yaml_to_json(document);
    if (!tree.is_object())
        throw SyntaxError("spec document is not a YAML mapping");
    return spec_from_json(tree);
}

// -- serialization ---------------------------------------------------------------------

static json tool_to_json(const ToolContract& t) {
    json params = json::object();
    for (const auto& p : t.params)
        params[p.name] = json{{"type", p.type}, {"required", p.required}};
    json out{{"name", t.name}, {"description", t.description}, {"params", params}};
    if (!t.failure_modes.empty()) out["failure_modes"] = t.failure_modes;
    if (!t.sequencing.empty()) out["sequencing"] = t.sequencing;
    return out;
}

static json node_to_json(const DecisionNode& n) {
    json out{{"node_id", n.node_id}, {"condition", n.condition}};
    if (!n.required_actions.empty()) out["required_actions"] = n.required_actions;
    if (!n.forbidden_actions.empty()) out["forbidden_actions"] = n.forbidden_actions;
    if (!n.decision_label.empty()) out["decision"] = n.decision_label;
    if (!n.children.empty()) {
        json children = json::array();
        for (const auto& c : n.children) children.push_back(node_to_json(c));
        out["children"] = children;
    }
    return out;
}

json spec_to_json(const Spec& spec) {
    json tools = json::array();
    for (const auto& t : spec.tools) tools.push_back(tool_to_json(t));

    json policies = json::array();
    for (const auto& p : spec.policies) {
        json pj{{"id", p.id}, {"text", p.text}};
        if (p.test_guidance) {
            pj["test_guidance"] = json{
                {"description", p.test_guidance->description},
                {"ambiguous_examples", p.test_guidance->ambiguous_examples},
                {"unambiguous_examples", p.test_guidance->unambiguous_examples},
            };
        }
        policies.push_back(std::move(pj));
    }

    json contract{{"decisions", spec.response_contract.decisions}};
    if (!spec.response_contract.extra_fields.empty()) {
        json extra = json::array();
        for (const auto& f : spec.response_contract.extra_fields)
            extra.push_back(json{{"name", f.name}, {"type", f.type}, {"required", f.required}});
        contract["extra_fields"] = extra;
    }

    json intents = json::array();
    for (const auto& m : spec.mutation_intents) {
        intents.push_back(json{
            {"intent_id", m.intent_id},
            {"description", m.description},
            {"activation_probe",
             json{{"conversation", m.probe.conversation},
                  {"trigger", m.probe.trigger.to_json()},
                  {"fixture_set_id", m.probe.fixture_set_id}}},
        });
    }

    json out{
        {"id", spec.id},
        {"version", spec.version},
        {"tools", tools},
        {"policies", policies},
        {"decision_tree", node_to_json(spec.decision_tree)},
        {"response_contract", contract},
    };
    if (!intents.empty()) out["mutation_intents"] = intents;
    return out;
}

std::string serialize_spec(const Spec& spec) { return json_to_yaml(spec_to_json(spec)); }

// -- depth / diff -------------------------------------------------------------------------

ValidationReport validate_depth(const Spec& spec) {
    ValidationReport report;
    report.node_count = spec.node_count();
    if (report.node_count < 10)
        report.warnings.push_back("below benchmark depth: " + std::to_string(report.node_count) +
                                  " decision nodes (benchmark envelope is 10 or more)");
    return report;
}

SpecDelta diff_specs(const Spec& v1, const Spec& v2) {
    if (v1.id != v2.id)
        throw VersionError("spec ids differ: '" + v1.id + "' vs '" + v2.id + "'");
    if (v2.version <= v1.version)
        throw VersionError("version must increase: v" + std::to_string(v1.version) + " -> v" +
                           std::to_string(v2.version));

    SpecDelta delta;

    auto diff_by_name = [](auto&& names1, auto&& names2, auto&& same, std::vector<std::string>& added,
                           std::vector<std::string>& removed, std::vector<std::string>& modified) {
        for (const auto& n : names2)
            if (!names1.count(n)) added.push_back(n);
        for (const auto& n : names1) {
            if (!names2.count(n))
                removed.push_back(n);
            else if (!same(n))
                modified.push_back(n);
        }
        std::sort(added.begin(), added.end());
        std::sort(removed.begin(), removed.end());
        std::sort(modified.begin(), modified.end());
    };

    diff_by_name(
        v1.tool_names(), v2.tool_names(),
        [&](const std::string& n) { return *v1.find_tool(n) == *v2.find_tool(n); },
        delta.added_tools, delta.removed_tools, delta.modified_tools);

    std::set<std::string> pol1, pol2;
    for (const auto& p : v1.policies) pol1.insert(p.id);
    for (const auto& p : v2.policies) pol2.insert(p.id);
    auto find_policy = [](const Spec& s, const std::string& id) -> const Policy* {
        for (const auto& p : s.policies)
            if (p.id == id) return &p;
        return nullptr;
    };
    diff_by_name(
        pol1, pol2,
        [&](const std::string& n) { return *find_policy(v1, n) == *find_policy(v2, n); },
        delta.added_policies, delta.removed_policies, delta.modified_policies);

    // A node's signature is its own contract; children are compared as
    // separate nodes, so adding a branch does not mark ancestors modified.
    auto node_signature = [](const Spec& s, const std::string& id) -> json {
        const DecisionNode* n = s.find_node(id);
        return json{{"condition", n->condition},
                    {"required", n->required_actions},
                    {"forbidden", n->forbidden_actions},
                    {"decision", n->decision_label}};
    };
    diff_by_name(
        v1.node_ids(), v2.node_ids(),
        [&](const std::string& n) { return node_signature(v1, n) == node_signature(v2, n); },
        delta.added_nodes, delta.removed_nodes, delta.modified_nodes);

    std::set<std::string> changed(delta.modified_nodes.begin(), delta.modified_nodes.end());
    for (const auto& id : v1.node_ids())
        if (v2.node_ids().count(id) && !changed.count(id))
            delta.invariant_candidates.push_back(id);
    std::sort(delta.invariant_candidates.begin(), delta.invariant_candidates.end());
    return delta;
}

json SpecDelta::to_json() const {
    return json{
        {"added_tools", added_tools},       {"removed_tools", removed_tools},
        {"modified_tools", modified_tools}, {"added_policies", added_policies},
        {"removed_policies", removed_policies}, {"modified_policies", modified_policies},
        {"added_nodes", added_nodes},       {"removed_nodes", removed_nodes},
        {"modified_nodes", modified_nodes}, {"invariant_candidates", invariant_candidates},
    };
}

}  // namespace tdad
