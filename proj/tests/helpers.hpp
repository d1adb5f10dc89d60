#pragma once

// Shared fixtures for the unit and acceptance suites: bundled-asset loaders,
// synthetic spec/script builders for compilation scenarios, and small
// backend doubles.

#include <filesystem>
#include <string>
#include <vector>

#include "tdad/backend.hpp"
#include "tdad/compiler.hpp"
#include "tdad/errors.hpp"
#include "tdad/fixture.hpp"
#include "tdad/smiths.hpp"
#include "tdad/spec.hpp"
#include "tdad/test_model.hpp"
#include "tdad/util.hpp"

#ifndef TDAD_REPO_DIR
#define TDAD_REPO_DIR "."
#endif

namespace tdad::testing {

inline std::filesystem::path repo_dir() { return TDAD_REPO_DIR; }

inline std::string repo_file(const std::string& relative) {
    return (repo_dir() / relative).string();
}

inline Spec load_mini_spec_v1() {
    return parse_spec(read_file(repo_file("specs/mini_supportops_v1.yaml")));
}

inline Spec load_mini_spec_v2() {
    return parse_spec(read_file(repo_file("specs/mini_supportops_v2.yaml")));
}

inline BehaviorScript load_mini_script() {
    return BehaviorScript::from_yaml(read_file(repo_file("agents/mini_supportops_script.yaml")));
}

inline ReferencePromptSmith load_mini_patches() {
    return ReferencePromptSmith::from_yaml(
        read_file(repo_file("smiths/mini_supportops_patches.yaml")));
}

inline ReferenceMutationSmith load_mini_mutations() {
    return ReferenceMutationSmith::from_yaml(
        read_file(repo_file("smiths/mini_supportops_mutations.yaml")));
}

inline FixtureSet load_demo_fixtures() {
    return FixtureSet::from_yaml(read_file(repo_file("specs/mini_supportops_fixtures.yaml")));
}

// -- synthetic simulation scenario ------------------------------------------------
//
// A flat spec with `leaves` leaf nodes under one root. Leaf k expects tool
// t<k> to be called and decision d<k>. The scripted agent behaves correctly
// for leaf k only when the prompt carries "FIX-<cluster(k)>"; the patch
// table appends one FIX marker per cluster. `clusters` maps each leaf to a
// cluster index.

struct SimScenario {
    Spec spec;
    BehaviorScript script;
    std::vector<PromptPatchRule> patch_table;
    Suite visible_suite;  // one visible MFT per leaf
    FixtureStore fixtures;
};

inline SimScenario make_sim_scenario(int leaves, const std::vector<int>& cluster_of_leaf) {
    SimScenario sim;
    sim.spec.id = "sim";
    sim.spec.version = 1;
    sim.spec.decision_tree.node_id = "root";
    sim.spec.decision_tree.condition = "triage";

    FixtureSet fs;
    fs.fixture_set_id = "fx-sim";

    for (int k = 0; k < leaves; ++k) {
        std::string suffix = std::to_string(k);
        ToolContract tool;
        tool.name = "t" + suffix;
        tool.description = "tool " + suffix;
        sim.spec.tools.push_back(tool);
        sim.spec.response_contract.decisions.push_back("d" + suffix);

        DecisionNode leaf;
        leaf.node_id = "leaf" + suffix;
        leaf.condition = "request kind " + suffix;
        leaf.required_actions = {"t" + suffix};
        leaf.decision_label = "d" + suffix;
        sim.spec.decision_tree.children.push_back(leaf);

        FixtureEntry entry;
        entry.tool = "t" + suffix;
        entry.is_default = true;
        entry.output = json{{"ok", true}};
        fs.entries.push_back(entry);

        int cluster = cluster_of_leaf.empty() ? 0 : cluster_of_leaf[k % cluster_of_leaf.size()];
        std::string marker = "FIX-" + std::to_string(cluster);

        ScriptRule good;
        good.when_message = "request kind " + suffix;
        good.when_prompt_contains = marker;
        good.actions = {AgentStep::call("t" + suffix, json::object()),
                        AgentStep::call(kRespondTool,
                                        json{{"decision", "d" + suffix},
                                             {"node_id", "leaf" + suffix},
                                             {"evidence", json::array()},
                                             {"user_message", "handled " + suffix}})};
        sim.script.rules.push_back(good);

        ScriptRule bad;
        bad.when_message = "request kind " + suffix;
        bad.actions = {AgentStep::call(kRespondTool,
                                       json{{"decision", "d" + suffix},
                                            {"node_id", "leaf" + suffix},
                                            {"evidence", json::array()},
                                            {"user_message", "ignored " + suffix}})};
        sim.script.rules.push_back(bad);

        TestCase test;
        test.test_id = "mft-leaf" + suffix;
        test.taxonomy = Taxonomy::MFT;
        test.visibility = Visibility::visible;
        test.kind = TestKind::process;
        test.conversation = {"request kind " + suffix};
        test.fixture_set_id = "fx-sim";
        test.assertions = {Predicate::tool_called("t" + suffix),
                           Predicate::respond_field_equals("decision", "d" + suffix)};
        test.node_id = "leaf" + suffix;
        test.citation = "leaf" + suffix;
        test.origin_version = 1;
        sim.visible_suite.tests.push_back(test);
    }

    sim.visible_suite.spec_id = "sim";
    sim.visible_suite.spec_version = 1;

    std::set<int> clusters(cluster_of_leaf.begin(), cluster_of_leaf.end());
    if (clusters.empty()) clusters.insert(0);
    for (int cluster : clusters) {
        PromptPatchRule rule;
        rule.cluster_key = ":t";  // matches any tool_called cluster
        rule.append_line = "FIX-" + std::to_string(cluster);
        sim.patch_table.push_back(rule);
    }
    sim.fixtures.add(std::move(fs));
    return sim;
}

// A clean split report for suites that are visible-only (the compiler's
// benchmark gate needs one).
inline SplitReport clean_split_report() {
    SplitReport report;
    report.visible_count = 1;
    report.hidden_count = 1;
    report.visible_fraction = 0.5;
    return report;
}

// -- backend doubles -----------------------------------------------------------------

// Fails the first `failures` sessions with BackendError, then delegates.
class FlakyBackend : public AgentBackend {
public:
    FlakyBackend(AgentBackend& inner, int failures) : inner_(inner), remaining_(failures) {}

    std::string capability() const override { return inner_.capability(); }
    std::unique_ptr<BackendSession> start_session(const SessionConfig& config) override {
        if (remaining_ > 0) {
            --remaining_;
            throw BackendError("synthetic transport failure");
        }
        return inner_.start_session(config);
    }

private:
    AgentBackend& inner_;
    int remaining_;
};

// PromptSmith that counts invocations and applies a fixed function.
class CountingSmith : public PromptSmith {
public:
    explicit CountingSmith(std::function<PromptArtifact(const PromptEditRequest&)> fn)
        : fn_(std::move(fn)) {}

    PromptArtifact edit(const PromptEditRequest& request) override {
        ++calls;
        return fn_(request);
    }

    int calls = 0;

private:
    std::function<PromptArtifact(const PromptEditRequest&)> fn_;
};

}  // namespace tdad::testing
