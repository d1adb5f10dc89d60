#include "tdad/mutation.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "tdad/assertions.hpp"
#include "tdad/errors.hpp"
#include "tdad/runtime.hpp"
#include "tdad/util.hpp"

namespace tdad {

const char* to_string(MutantStatus s) {
    switch (s) {
        case MutantStatus::killed: return "killed";
        case MutantStatus::survived: return "survived";
        case MutantStatus::non_activating: return "non_activating";
    }
    return "?";
}

json MutantRecord::to_json() const {
    json out{
        {"intent_id", intent_id},
        {"attempts_used", attempts_used},
        {"status", to_string(status)},
        {"killing_test_ids", killing_test_ids},
        {"probe_subjects", probe_subjects},
        {"attempt_notes", attempt_notes},
    };
    out["activating_mutant_hash"] =
        activating_mutant ? json(artifact_hash(*activating_mutant)) : json(nullptr);
    return out;
}

json MutationReport::to_json() const {
    json records_json = json::array();
    for (const auto& r : records) records_json.push_back(r.to_json());
    return json{
        {"records", records_json},
        {"killed", killed},
        {"survived", survived},
        {"non_activating", non_activating},
        {"mutation_score", mutation_score ? json(*mutation_score) : json(nullptr)},
        {"footer", footer()},
    };
}

std::string MutationReport::footer() const {
    std::string out = "Mutation score counts activating mutants only";
    if (non_activating > 0)
        out += "; " + std::to_string(non_activating) +
               " intent(s) were excluded as non-activating, so the score may overstate suite "
               "strength if any of them reflect genuine blind spots";
    out += ".";
    return out;
}

bool activation_check(const PromptArtifact& mutant, const ProbeSpec& probe,
                      const RunContext& context) {
    const FixtureSet& fixtures = context.fixtures.get(probe.fixture_set_id);
    Trace trace = run_conversation(mutant, probe.conversation, fixtures, context.backend,
                                   context.spec, context.options);
    return eval_predicate(probe.trigger, trace, fixtures).pass;
}

namespace {

MutantRecord evaluate_intent(const PromptArtifact& compiled, const MutationIntent& intent,
                             const std::vector<TestCase>& visible_tests,
                             MutationSmith& mutationsmith, const RunContext& context,
                             const MutationConfig& config, const MutationHooks& hooks) {
    MutantRecord record;
    record.intent_id = intent.intent_id;
    record.probe_subjects = {intent.probe.trigger.subject()};

    for (int attempt = 1; attempt <= config.activation_attempts; ++attempt) {
        record.attempts_used = attempt;

        MutationRequest request;
        request.compiled = compiled;
        request.intent = intent;
        request.retry_context = record.attempt_notes;
        if (hooks.on_smith_request) hooks.on_smith_request(request.to_json());

        PromptArtifact candidate;
        try {
            candidate = mutationsmith.mutate(request);
        } catch (const SmithError& e) {
            record.attempt_notes.push_back("attempt " + std::to_string(attempt) +
                                           ": smith error: " + e.what());
            continue;
        }

        bool activated = false;
        try {
            activated = activation_check(candidate, intent.probe, context);
        } catch (const BackendError& e) {
            record.attempt_notes.push_back("attempt " + std::to_string(attempt) +
                                           ": probe backend error: " + e.what());
            continue;
        }
        if (!activated) {
            record.attempt_notes.push_back("attempt " + std::to_string(attempt) +
                                           ": candidate did not activate the probe");
            continue;
        }

        // Valid mutant: the visible suite decides killed vs survived. Probe
        // outcomes are not kills.
        record.activating_mutant = candidate;
        SuiteResult result = run_suite(visible_tests, candidate, context, config.parallelism);
        auto killers = failing_set(result);
        if (!killers.empty()) {
            record.status = MutantStatus::killed;
            record.killing_test_ids.assign(killers.begin(), killers.end());
        } else {
            record.status = MutantStatus::survived;
        }
        return record;
    }
    record.status = MutantStatus::non_activating;
    return record;
}

}  // namespace

MutationReport run_mutation_suite(const PromptArtifact& compiled,
                                  const std::vector<MutationIntent>& intents,
                                  const std::vector<TestCase>& visible_tests,
                                  MutationSmith& mutationsmith, const RunContext& context,
                                  const MutationConfig& config, const MutationHooks& hooks) {
    // Baseline: a mutation score over a failing artifact is meaningless, and
    // a probe that already passes on the original cannot distinguish the
    // mutant from it.
    SuiteResult baseline = run_suite(visible_tests, compiled, context, config.parallelism);
    if (!baseline.all_pass())
        throw BaselineError("compiled artifact does not pass the visible suite (" +
                            std::to_string(baseline.passed) + "/" +
                            std::to_string(baseline.total()) + "); refusing to score mutations");
    for (const auto& intent : intents) {
        if (activation_check(compiled, intent.probe, context))
            throw BaselineError("activation probe for intent '" + intent.intent_id +
                                "' already passes on the unmutated artifact; the probe cannot "
                                "distinguish mutant from original");
    }

    MutationReport report;
    report.records.resize(intents.size());

    // Intents are independent; attempts within an intent stay serial because
    // each retry feeds on the previous attempt's notes.
    std::atomic<size_t> cursor{0};
    auto worker = [&]() {
        while (true) {
            size_t i = cursor.fetch_add(1);
            if (i >= intents.size()) return;
            report.records[i] = evaluate_intent(compiled, intents[i], visible_tests,
                                                mutationsmith, context, config, hooks);
        }
    };
    int parallelism = config.parallelism;
    if (parallelism <= 0) {
        unsigned hw = std::thread::hardware_concurrency();
        parallelism = hw == 0 ? 1 : static_cast<int>(hw);
    }
    if (!intents.empty()) parallelism = std::min(parallelism, static_cast<int>(intents.size()));
    if (parallelism <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < parallelism; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (const auto& record : report.records) {
        switch (record.status) {
            case MutantStatus::killed: report.killed++; break;
            case MutantStatus::survived: report.survived++; break;
            case MutantStatus::non_activating: report.non_activating++; break;
        }
    }
    int valid = report.killed + report.survived;
    if (valid > 0) report.mutation_score = double(report.killed) / double(valid);
    return report;
}

}  // namespace tdad
