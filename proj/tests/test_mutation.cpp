#include <doctest.h>

#include "helpers.hpp"
#include "tdad/compiler.hpp"
#include "tdad/errors.hpp"
#include "tdad/mutation.hpp"
#include "tdad/runner.hpp"

using namespace tdad;
using namespace tdad::testing;

namespace {

// Compiled mini-supportops rig: artifact with the gate markers, bundled
// script, demo fixture store keyed under both the demo id and the id the
// spec probes reference.
struct MutationRig {
    Spec spec = load_mini_spec_v1();
    PromptArtifact compiled;
    FixtureStore fixtures;
    BehaviorScript script = load_mini_script();
    std::unique_ptr<ScriptedBackend> backend;
    Suite visible;

    MutationRig() {
        compiled = render_seed_artifact(spec);
        compiled.system_prompt += "\nAUTH-GATE: verify first.\nTICKET-GATE: escalate fraud.";

        ReferenceTestSmith testsmith;
        GeneratedSuite generated = testsmith.generate(spec, "", 7);
        for (auto& fs : generated.fixtures) fixtures.add(fs);  // fx-mini-supportops-v1
        for (const auto& t : generated.suite.tests)
            if (t.visibility == Visibility::visible) visible.tests.push_back(t);
        visible.spec_id = spec.id;
        visible.spec_version = 1;
        backend = std::make_unique<ScriptedBackend>(script);
    }

    RunContext context() { return RunContext{spec, fixtures, *backend, {}}; }
};

}  // namespace

TEST_SUITE("mutation_harness") {

TEST_CASE("bundled scenario: six of seven intents are killed, one survives") {
    MutationRig rig;
    ReferenceMutationSmith smith = load_mini_mutations();
    MutationConfig config;
    config.parallelism = 1;

    MutationReport report = run_mutation_suite(rig.compiled, rig.spec.mutation_intents,
                                               rig.visible.tests, smith, rig.context(), config);

    CHECK(report.killed == 6);
    CHECK(report.survived == 1);
    CHECK(report.non_activating == 0);
    REQUIRE(report.mutation_score.has_value());
    CHECK(*report.mutation_score == doctest::Approx(6.0 / 7.0));

    for (const auto& record : report.records) {
        if (record.intent_id == "ALWAYS_CREATE_TICKET") {
            CHECK(record.status == MutantStatus::survived);
            // The survivor names the probed behavior: the actionable gap.
            CHECK(!record.probe_subjects.empty());
        } else {
            CHECK(record.status == MutantStatus::killed);
            CHECK(!record.killing_test_ids.empty());
        }
    }
}

TEST_CASE("kill attribution is reproducible from the named tests") {
    MutationRig rig;
    ReferenceMutationSmith smith = load_mini_mutations();
    MutationConfig config;
    config.parallelism = 1;
    MutationReport report = run_mutation_suite(rig.compiled, rig.spec.mutation_intents,
                                               rig.visible.tests, smith, rig.context(), config);

    for (const auto& record : report.records) {
        if (record.status != MutantStatus::killed) continue;
        REQUIRE(record.activating_mutant.has_value());
        std::vector<TestCase> killers;
        for (const auto& t : rig.visible.tests)
            if (std::find(record.killing_test_ids.begin(), record.killing_test_ids.end(),
                          t.test_id) != record.killing_test_ids.end())
                killers.push_back(t);
        REQUIRE(!killers.empty());
        SuiteResult rerun = run_suite(killers, *record.activating_mutant, rig.context(), 1);
        CHECK(rerun.failed >= 1);
    }
}

TEST_CASE("an intent whose transforms never activate is excluded after k attempts") {
    MutationRig rig;
    ReferenceMutationSmith bundled = load_mini_mutations();
    // Rebuild the transform table with one intent made inert: its marker is
    // one the scripted agent ignores, so its probe can never flip. The other
    // six keep the bundled transform line.
    std::map<std::string, std::vector<MutationVariant>> merged;
    for (const auto& intent : rig.spec.mutation_intents) {
        if (intent.intent_id == "NEVER_CLARIFY") {
            merged[intent.intent_id] = {MutationVariant{"MUTANT:INERT does nothing", {}, {}}};
        } else {
            MutationRequest request;
            request.compiled = rig.compiled;
            request.intent = intent;
            PromptArtifact mutant = bundled.mutate(request);
            std::string line =
                mutant.system_prompt.substr(rig.compiled.system_prompt.size() + 1);
            merged[intent.intent_id] = {MutationVariant{line, {}, {}}};
        }
    }
    ReferenceMutationSmith smith{std::move(merged)};

    MutationConfig config;
    config.activation_attempts = 5;
    config.parallelism = 1;
    MutationReport report = run_mutation_suite(rig.compiled, rig.spec.mutation_intents,
                                               rig.visible.tests, smith, rig.context(), config);

    CHECK(report.non_activating == 1);
    CHECK(report.killed + report.survived == 6);
    REQUIRE(report.mutation_score.has_value());
    // Exclusion semantics: the score is over the six activating intents.
    CHECK(*report.mutation_score == doctest::Approx(5.0 / 6.0));

    for (const auto& record : report.records)
        if (record.intent_id == "NEVER_CLARIFY") {
            CHECK(record.status == MutantStatus::non_activating);
            CHECK(record.attempts_used == 5);
            CHECK(!record.activating_mutant.has_value());
        }
    bool noted = report.footer().find("excluded as non-activating") != std::string::npos;
    CHECK(noted);
}

TEST_CASE("zero intents yield an undefined score and an empty record list") {
    MutationRig rig;
    ReferenceMutationSmith smith = load_mini_mutations();
    MutationReport report =
        run_mutation_suite(rig.compiled, {}, rig.visible.tests, smith, rig.context(), {});
    CHECK(report.records.empty());
    CHECK(!report.mutation_score.has_value());
}

TEST_CASE("a failing baseline refuses to score mutations") {
    MutationRig rig;
    PromptArtifact unpatched = render_seed_artifact(rig.spec);  // fails visible tests
    ReferenceMutationSmith smith = load_mini_mutations();
    CHECK_THROWS_AS(run_mutation_suite(unpatched, rig.spec.mutation_intents, rig.visible.tests,
                                       smith, rig.context(), {}),
                    BaselineError);
}

TEST_CASE("a probe that passes on the original cannot measure anything") {
    MutationRig rig;
    std::vector<MutationIntent> intents = rig.spec.mutation_intents;
    MutationIntent broken;
    broken.intent_id = "BROKEN_PROBE";
    broken.description = "trigger already true on the compiled artifact";
    broken.probe.conversation = {"What is the status of order ORD-1001?"};
    broken.probe.trigger = Predicate::tool_called("get_order");  // passes on the original
    broken.probe.fixture_set_id = "fx-mini-supportops-v1";
    intents.push_back(broken);

    ReferenceMutationSmith smith = load_mini_mutations();
    try {
        run_mutation_suite(rig.compiled, intents, rig.visible.tests, smith, rig.context(), {});
        FAIL("expected BaselineError");
    } catch (const BaselineError& e) {
        CHECK(std::string(e.what()).find("BROKEN_PROBE") != std::string::npos);
    }
}

TEST_CASE("the mutation smith never sees test content") {
    MutationRig rig;
    ReferenceMutationSmith smith = load_mini_mutations();
    std::vector<json> captured;
    MutationHooks hooks;
    hooks.on_smith_request = [&](const json& request) { captured.push_back(request); };
    MutationConfig config;
    config.parallelism = 1;
    run_mutation_suite(rig.compiled, rig.spec.mutation_intents, rig.visible.tests, smith,
                       rig.context(), config, hooks);

    REQUIRE(!captured.empty());
    for (const auto& request : captured) {
        // The inventory is exactly: compiled artifact, intent, retry context.
        std::set<std::string> keys;
        for (auto it = request.begin(); it != request.end(); ++it) keys.insert(it.key());
        CHECK(keys == std::set<std::string>{"compiled_artifact", "intent", "retry_context"});

        std::string dump = request.dump();
        CHECK(dump.find("\"assertions\"") == std::string::npos);
        CHECK(dump.find("mft-") == std::string::npos);
        CHECK(dump.find("inv-") == std::string::npos);
        CHECK(dump.find("dir-") == std::string::npos);
        CHECK(dump.find("\"conversation\"") == std::string::npos);
    }
}

TEST_CASE("records partition the intents and respect the attempt cap") {
    MutationRig rig;
    ReferenceMutationSmith smith = load_mini_mutations();
    MutationConfig config;
    config.parallelism = 2;
    MutationReport report = run_mutation_suite(rig.compiled, rig.spec.mutation_intents,
                                               rig.visible.tests, smith, rig.context(), config);
    CHECK(report.records.size() == rig.spec.mutation_intents.size());
    CHECK(report.killed + report.survived + report.non_activating ==
          int(rig.spec.mutation_intents.size()));
    for (size_t i = 0; i < report.records.size(); ++i) {
        CHECK(report.records[i].intent_id == rig.spec.mutation_intents[i].intent_id);
        CHECK(report.records[i].attempts_used <= config.activation_attempts);
    }
}

TEST_CASE("scripted smith and backend make the report deterministic") {
    MutationRig rig1, rig2;
    ReferenceMutationSmith smith1 = load_mini_mutations(), smith2 = load_mini_mutations();
    MutationConfig config;
    config.parallelism = 4;
    MutationReport a = run_mutation_suite(rig1.compiled, rig1.spec.mutation_intents,
                                          rig1.visible.tests, smith1, rig1.context(), config);
    MutationReport b = run_mutation_suite(rig2.compiled, rig2.spec.mutation_intents,
                                          rig2.visible.tests, smith2, rig2.context(), config);
    CHECK(a.to_json() == b.to_json());
}

}  // TEST_SUITE
