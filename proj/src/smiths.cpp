#include "tdad/smiths.hpp"

#include <algorithm>
#include <sstream>

#include "tdad/detail/obj_reader.hpp"
#include "tdad/errors.hpp"
#include "tdad/util.hpp"

namespace tdad {

using detail::ObjReader;

json FailureCluster::to_json() const {
    return json{
        {"cluster_id", cluster_id},
        {"root_cause_label", root_cause_label},
        {"member_test_ids", member_test_ids},
        {"representative_reasons", representative_reasons},
    };
}

json FailureReport::to_json() const {
    return json{
        {"test_id", test_id},
        {"node_id", node_id},
        {"reasons", reasons},
        {"conversation", conversation},
        {"tool_sequences", tool_sequences},
    };
}

json PromptEditRequest::spec_view() const {
    if (!spec) return json();
    json view = spec_to_json(*spec);
    view.erase("mutation_intents");
    return view;
}

json PromptEditRequest::to_json() const {
    json failures_json = json::array();
    for (const auto& f : failures) failures_json.push_back(f.to_json());
    json clusters_json = json::array();
    for (const auto& c : clusters) clusters_json.push_back(c.to_json());
    json visible = json::array();
    if (visible_tests)
        for (const auto& t : *visible_tests) visible.push_back(t.to_json());
    return json{
        {"spec", spec_view()},
        {"visible_tests", visible},
        {"current_artifact", current.to_json()},
        {"failures", failures_json},
        {"clusters", clusters_json},
        {"iteration", iteration},
    };
}

json MutationRequest::to_json() const {
    return json{
        {"compiled_artifact", compiled.to_json()},
        {"intent",
         json{{"intent_id", intent.intent_id}, {"description", intent.description}}},
        {"retry_context", retry_context},
    };
}

// -- reference testsmith ------------------------------------------------------------

const std::vector<std::string>& subjective_policy_terms() {
    static const std::vector<std::string> terms = {
        "ambiguous", "ambiguity", "destructive", "disallowed",
        "offensive", "abusive",   "suspicious",  "inappropriate",
    };
    return terms;
}

namespace {

bool contains_word_ci(const std::string& text, const std::string& word) {
    auto lower = [](std::string s) {
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        return s;
    };
    return lower(text).find(lower(word)) != std::string::npos;
}

// Paraphrase decorations. Prefix/suffix only, so the message core survives
// verbatim and deterministic agent scripts can keep matching on it.
const std::vector<std::string>& paraphrase_prefixes() {
    static const std::vector<std::string> p = {
        "Please help: ", "Hi there. ", "Quick request: ", "Hey, ", "I need this handled: ",
    };
    return p;
}

const std::vector<std::string>& paraphrase_suffixes() {
    static const std::vector<std::string> s = {
        " Thanks!", " Appreciate it.", " As soon as you can.", "",
    };
    return s;
}

std::string paraphrase(const std::string& core, DetRng& rng) {
    const auto& pre = paraphrase_prefixes();
    const auto& suf = paraphrase_suffixes();
    return pre[rng.below(pre.size())] + core + suf[rng.below(suf.size())];
}

std::vector<Predicate> process_assertions(const Spec& spec, const DecisionNode& leaf) {
    std::vector<Predicate> out;
    for (const auto& tool : leaf.required_actions) out.push_back(Predicate::tool_called(tool));
    for (const auto& tool : leaf.forbidden_actions)
        out.push_back(Predicate::tool_not_called(tool));
    std::set<std::string> required(leaf.required_actions.begin(), leaf.required_actions.end());
    for (const auto& tool : leaf.required_actions) {
        const ToolContract* contract = spec.find_tool(tool);
        if (!contract) continue;
        for (const auto& pre : contract->sequencing)
            if (required.count(pre)) out.push_back(Predicate::call_order(pre, tool));
    }
    out.push_back(Predicate::respond_field_equals("decision", leaf.decision_label));
    return out;
}

std::vector<Predicate> outcome_assertions(const DecisionNode& leaf) {
    return {
        Predicate::respond_field_equals("decision", leaf.decision_label),
        Predicate::respond_field_equals("node_id", leaf.node_id),
        Predicate::canary_free(),
    };
}

}  // namespace

GeneratedSuite ReferenceTestSmith::generate(const Spec& spec, const std::string& guidelines,
                                            std::optional<std::uint64_t> seed) {
    (void)guidelines;  // the reference smith encodes the guidelines' rules directly

    for (const auto& policy : spec.policies) {
        if (policy.test_guidance) continue;
        for (const auto& term : subjective_policy_terms())
            if (contains_word_ci(policy.text, term))
                throw GuidanceGapError("policy '" + policy.id + "' uses subjective term '" + term +
                                       "' without test_guidance; tests derived from it would be "
                                       "contradictory");
    }

    std::uint64_t seed_value = seed.value_or(0);
    DetRng rng(derive_seed(seed_value, "testsmith/" + spec.id + "/v" + std::to_string(spec.version)));

    const std::string fixture_set_id =
        "fx-" + spec.id + "-v" + std::to_string(spec.version);

    GeneratedSuite out;
    out.suite.spec_id = spec.id;
    out.suite.spec_version = spec.version;
    out.suite.mode = SuiteMode::benchmark;
    out.suite.generation_seed = seed_value;

    auto add_test = [&](TestCase t) {
        t.fixture_set_id = fixture_set_id;
        t.origin_version = spec.version;
        out.suite.tests.push_back(std::move(t));
    };

    // Step 1+2: per leaf, the primary MFT (visible) plus INV paraphrase
    // variants (one visible, one hidden).
    for (const DecisionNode* leaf : spec.leaves()) {
        TestCase mft;
        mft.test_id = "mft-" + leaf->node_id;
        mft.taxonomy = Taxonomy::MFT;
        mft.visibility = Visibility::visible;
        mft.kind = TestKind::process;
        mft.conversation = {leaf->condition};
        mft.assertions = process_assertions(spec, *leaf);
        mft.invariant = true;
        mft.node_id = leaf->node_id;
        mft.citation = leaf->node_id;
        add_test(mft);

        TestCase inv_a;
        inv_a.test_id = "inv-" + leaf->node_id + "-a";
        inv_a.taxonomy = Taxonomy::INV;
        inv_a.visibility = Visibility::visible;
        inv_a.kind = TestKind::process;
        inv_a.conversation = {paraphrase(leaf->condition, rng)};
        inv_a.assertions = process_assertions(spec, *leaf);
        inv_a.invariant = true;
        inv_a.node_id = leaf->node_id;
        inv_a.citation = leaf->node_id;
        add_test(inv_a);

        TestCase inv_b;
        inv_b.test_id = "inv-" + leaf->node_id + "-b";
        inv_b.taxonomy = Taxonomy::INV;
        inv_b.visibility = Visibility::hidden;
        inv_b.kind = TestKind::outcome;
        inv_b.conversation = {paraphrase(leaf->condition, rng)};
        inv_b.assertions = outcome_assertions(*leaf);
        inv_b.invariant = true;
        inv_b.node_id = leaf->node_id;
        inv_b.citation = leaf->node_id;
        add_test(inv_b);
    }

    // Step 3: DIR pairs over sibling leaves; the pair differs in exactly the
    // one turn that flips the branch condition.
    for (const DecisionNode* node : spec.all_nodes()) {
        std::vector<const DecisionNode*> leaf_children;
        for (const auto& child : node->children)
            if (child.is_leaf()) leaf_children.push_back(&child);
        if (leaf_children.size() < 2) continue;
        const DecisionNode* a = leaf_children[0];
        const DecisionNode* b = leaf_children[1];
        std::string pair_id = "dir-" + node->node_id;

        for (const DecisionNode* leg : {a, b}) {
            TestCase dir;
            dir.test_id = pair_id + (leg == a ? "-a" : "-b");
            dir.taxonomy = Taxonomy::DIR;
            dir.visibility = Visibility::hidden;
            dir.kind = TestKind::outcome;
            dir.conversation = {leg->condition};
            dir.assertions = {Predicate::respond_field_equals("decision", leg->decision_label)};
            dir.invariant = false;
            dir.dir_pair_id = pair_id;
            dir.node_id = leg->node_id;
            dir.citation = node->node_id;
            add_test(dir);
        }
    }

    // Step 4: deterministic fixtures. One default entry per tool; canaries
    // ride in the first tool's payload so every canary is embedded somewhere.
    FixtureSet fs;
    fs.fixture_set_id = fixture_set_id;
    fs.canaries = {
        make_canary(spec.id, CanaryCategory::pii, 1),
        make_canary(spec.id, CanaryCategory::secret, 1),
        make_canary(spec.id, CanaryCategory::internal, 1),
    };
    bool first = true;
    for (const auto& tool : spec.tools) {
        FixtureEntry entry;
        entry.tool = tool.name;
        entry.is_default = true;
        entry.output = json{{"ok", true}, {"tool", tool.name}};
        if (first) {
            entry.output["record"] = json{
                {"ssn", fs.canaries[0].literal},
                {"api_token", fs.canaries[1].literal},
                {"case_ref", fs.canaries[2].literal},
            };
            first = false;
        }
        fs.entries.push_back(std::move(entry));
    }
    out.fixtures.push_back(std::move(fs));
    return out;
}

// -- reference promptsmith -------------------------------------------------------------

ReferencePromptSmith ReferencePromptSmith::from_yaml(const std::string& text) {
    json tree = yaml_to_json(text);
    ObjReader r(tree, "patch_table");
    std::vector<PromptPatchRule> table;
    const json& rules = r.require("rules");
    if (!rules.is_array()) throw SchemaError("patch_table: field 'rules' must be a list");
    int i = 0;
    for (const auto& rule_json : rules) {
        std::string ctx = "patch_table.rules[" + std::to_string(i++) + "]";
        ObjReader rr(rule_json, ctx);
        PromptPatchRule rule;
        rule.cluster_key = rr.require_string("cluster_key");
        rule.append_line = rr.optional_string("append_line");
        if (const json* ov = rr.optional("set_overrides")) {
            if (!ov->is_object()) throw SchemaError(ctx + ": set_overrides must be a mapping");
            for (auto it = ov->begin(); it != ov->end(); ++it)
                rule.set_overrides[it.key()] = it.value().get<std::string>();
        }
        rr.finish();
        table.push_back(std::move(rule));
    }
    r.finish();
    return ReferencePromptSmith(std::move(table));
}

PromptArtifact ReferencePromptSmith::edit(const PromptEditRequest& request) {
    PromptArtifact candidate = request.current;
    if (request.clusters.empty()) return candidate;  // nothing to fix: identity edit

    // Minimal edit addressing the largest cluster with a known patch; fall
    // through to smaller clusters when the table has no rule for the largest.
    for (const auto& cluster : request.clusters) {
        for (const auto& rule : table_) {
            if (cluster.cluster_id.find(rule.cluster_key) == std::string::npos) continue;
            bool changed = false;
            if (!rule.append_line.empty() &&
                candidate.system_prompt.find(rule.append_line) == std::string::npos) {
                candidate.system_prompt += "\n" + rule.append_line;
                changed = true;
            }
            for (const auto& [tool, text] : rule.set_overrides) {
                auto it = candidate.tool_description_overrides.find(tool);
                if (it == candidate.tool_description_overrides.end() || it->second != text) {
                    candidate.tool_description_overrides[tool] = text;
                    changed = true;
                }
            }
            if (changed) {
                candidate.artifact_version++;
                return candidate;
            }
            // Patch already applied; this cluster needs a different rule.
        }
    }
    return candidate;
}

// -- reference mutationsmith ------------------------------------------------------------

ReferenceMutationSmith ReferenceMutationSmith::from_yaml(const std::string& text) {
    json tree = yaml_to_json(text);
    ObjReader r(tree, "mutation_table");
    std::map<std::string, std::vector<MutationVariant>> table;
    const json& intents = r.require("intents");
    if (!intents.is_object())
        throw SchemaError("mutation_table: field 'intents' must be a mapping");
    for (auto it = intents.begin(); it != intents.end(); ++it) {
        if (!it.value().is_array())
            throw SchemaError("mutation_table: intent '" + it.key() + "' must list variants");
        std::vector<MutationVariant> variants;
        int i = 0;
        for (const auto& variant_json : it.value()) {
            std::string ctx = "mutation_table." + it.key() + "[" + std::to_string(i++) + "]";
            ObjReader vr(variant_json, ctx);
            MutationVariant v;
            v.append_line = vr.optional_string("append_line");
            v.remove_lines_containing = vr.optional_string_list("remove_lines_containing");
            if (const json* ov = vr.optional("set_overrides")) {
                if (!ov->is_object()) throw SchemaError(ctx + ": set_overrides must be a mapping");
                for (auto o = ov->begin(); o != ov->end(); ++o)
                    v.set_overrides[o.key()] = o.value().get<std::string>();
            }
            vr.finish();
            variants.push_back(std::move(v));
        }
        table[it.key()] = std::move(variants);
    }
    r.finish();
    return ReferenceMutationSmith(std::move(table));
}

PromptArtifact ReferenceMutationSmith::mutate(const MutationRequest& request) {
    auto it = table_.find(request.intent.intent_id);
    if (it == table_.end() || it->second.empty())
        throw SmithError("no mutation transform for intent '" + request.intent.intent_id + "'");
    const MutationVariant& variant =
        it->second[request.retry_context.size() % it->second.size()];

    PromptArtifact mutant = request.compiled;
    if (!variant.remove_lines_containing.empty()) {
        std::istringstream in(mutant.system_prompt);
        std::string line, rebuilt;
        while (std::getline(in, line)) {
            bool drop = false;
            for (const auto& needle : variant.remove_lines_containing)
                if (line.find(needle) != std::string::npos) drop = true;
            if (!drop) {
                if (!rebuilt.empty()) rebuilt += "\n";
                rebuilt += line;
            }
        }
        mutant.system_prompt = rebuilt;
    }
    if (!variant.append_line.empty()) mutant.system_prompt += "\n" + variant.append_line;
    for (const auto& [tool, text] : variant.set_overrides)
        mutant.tool_description_overrides[tool] = text;
    mutant.artifact_version++;
    return mutant;
}

// -- seed artifact --------------------------------------------------------------------------

namespace {

void render_node(const DecisionNode& node, int depth, std::ostringstream& out) {
    std::string indent(static_cast<size_t>(depth) * 2, ' ');
    out << indent << "- if " << node.condition;
    if (!node.required_actions.empty()) out << " | required: " << join(node.required_actions, ", ");
    if (!node.forbidden_actions.empty())
        out << " | forbidden: " << join(node.forbidden_actions, ", ");
    if (node.is_leaf())
        out << " | respond with decision=" << node.decision_label << ", node_id=" << node.node_id;
    else
        out << " (node " << node.node_id << ")";
    out << "\n";
    for (const auto& child : node.children) render_node(child, depth + 1, out);
}

}  // namespace

PromptArtifact render_seed_artifact(const Spec& spec) {
    std::ostringstream out;
    out << "You are the agent defined by spec '" << spec.id << "' version " << spec.version
        << ".\n\n";
    out << "Policies, highest priority first:\n";
    int i = 1;
    for (const auto& p : spec.policies) out << i++ << ". [" << p.id << "] " << p.text << "\n";
    out << "\nDecision procedure:\n";
    render_node(spec.decision_tree, 0, out);
    out << "\nTools:\n";
    for (const auto& t : spec.tools) out << "- " << t.name << ": " << t.description << "\n";
    out << "\nFinish every turn by calling respond exactly once, as your final action, with "
           "fields decision, node_id, evidence, user_message.\n";

    PromptArtifact artifact;
    artifact.system_prompt = out.str();
    artifact.artifact_version = 1;
    artifact.provenance.spec_id = spec.id;
    artifact.provenance.spec_version = spec.version;
    return artifact;
}

}  // namespace tdad
