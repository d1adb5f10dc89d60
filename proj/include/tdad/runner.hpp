#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "tdad/assertions.hpp"
#include "tdad/backend.hpp"
#include "tdad/fixture.hpp"
#include "tdad/runtime.hpp"
#include "tdad/test_model.hpp"

namespace tdad {

struct SuiteResult {
    std::map<std::string, TestResult> results;  // keyed by test_id
    int passed = 0;
    int failed = 0;
    int errored = 0;
    double wall_ms = 0.0;
    std::string artifact_hash;

    int total() const { return passed + failed + errored; }
    bool all_pass() const { return failed == 0 && errored == 0 && passed == total(); }
    double pass_fraction() const {
        return total() == 0 ? 0.0 : double(passed) / double(total());
    }

    // Canonical serialization: sorted by test_id, wall-clock and per-test
    // durations excluded, so any scheduling order yields identical bytes.
    json canonical_json() const;
    json to_json() const;  // canonical form plus timing
};

struct RunContext {
    const Spec& spec;
    const FixtureStore& fixtures;
    AgentBackend& backend;
    RunOptions options = {};
};

// Execute each test exactly once (run_conversation then eval_test), in
// parallel up to `parallelism` workers. Backend transport failures become
// errored results, never failures: conflating them would corrupt pass-rate
// metrics and the compiler's failure clustering. parallelism <= 0 picks the
// hardware default (capped at 8 for remote backends).
SuiteResult run_suite(const std::vector<TestCase>& tests, const PromptArtifact& artifact,
                      const RunContext& context, int parallelism = 0);

// Test ids with verdict fail (not error), sorted canonically.
std::set<std::string> failing_set(const SuiteResult& result);

}  // namespace tdad
