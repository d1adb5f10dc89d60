#include <doctest.h>

#include "helpers.hpp"
#include "tdad/runner.hpp"
#include "tdad/smiths.hpp"

using namespace tdad;
using namespace tdad::testing;

namespace {

// `count` always-passing single-turn tests against the sim scenario.
struct RunnerRig {
    SimScenario sim = make_sim_scenario(3, {0, 0, 0});
    PromptArtifact artifact;
    std::unique_ptr<ScriptedBackend> backend;

    RunnerRig() {
        artifact = render_seed_artifact(sim.spec);
        artifact.system_prompt += "\nFIX-0";  // correct behavior active
        backend = std::make_unique<ScriptedBackend>(sim.script);
    }

    RunContext context() { return RunContext{sim.spec, sim.fixtures, *backend, {}}; }

    std::vector<TestCase> tests(int count, int failing = 0, int erroring = 0) {
        std::vector<TestCase> out;
        for (int i = 0; i < count; ++i) {
            TestCase t = sim.visible_suite.tests[i % sim.visible_suite.tests.size()];
            t.test_id = "t" + std::to_string(i);
            if (failing > 0) {
                t.assertions = {Predicate::tool_called("t" + std::to_string((i + 1) % 3))};
                --failing;
            } else if (erroring > 0) {
                t.conversation = {"message nobody scripted"};  // ScriptGapError
                --erroring;
            }
            out.push_back(std::move(t));
        }
        return out;
    }
};

}  // namespace

TEST_SUITE("test_runner") {

TEST_CASE("a 47-test visible suite that all passes reports 47/47") {
    RunnerRig rig;
    SuiteResult result = run_suite(rig.tests(47), rig.artifact, rig.context());
    CHECK(result.passed == 47);
    CHECK(result.failed == 0);
    CHECK(result.errored == 0);
    CHECK(result.all_pass());
}

TEST_CASE("an empty subset is a legal no-op") {
    RunnerRig rig;
    SuiteResult result = run_suite({}, rig.artifact, rig.context());
    CHECK(result.total() == 0);
    CHECK(result.results.empty());
}

TEST_CASE("parallelism does not change the canonical result") {
    RunnerRig rig;
    auto tests = rig.tests(24, 5, 2);
    SuiteResult serial = run_suite(tests, rig.artifact, rig.context(), 1);
    SuiteResult parallel = run_suite(tests, rig.artifact, rig.context(), 8);
    CHECK(serial.canonical_json().dump() == parallel.canonical_json().dump());
    CHECK(serial.failed == 5);
    CHECK(serial.errored == 2);
}

TEST_CASE("failing_set excludes errors and sorts canonically") {
    RunnerRig rig;

    SUBCASE("52 of 53 passing leaves a singleton") {
        SuiteResult result = run_suite(rig.tests(53, 1), rig.artifact, rig.context());
        CHECK(result.passed == 52);
        CHECK(failing_set(result).size() == 1);
        CHECK(result.pass_fraction() == doctest::Approx(52.0 / 53.0));
    }
    SUBCASE("all passing leaves the empty set") {
        SuiteResult result = run_suite(rig.tests(10), rig.artifact, rig.context());
        CHECK(failing_set(result).empty());
    }
    SUBCASE("errors are not failures") {
        SuiteResult result = run_suite(rig.tests(10, 2, 1), rig.artifact, rig.context());
        CHECK(result.failed == 2);
        CHECK(result.errored == 1);
        auto failing = failing_set(result);
        CHECK(failing.size() == 2);
        for (const auto& id : failing) {
            CHECK(result.results.at(id).status == TestStatus::fail);
        }
    }
}

TEST_CASE("exactly-once accounting holds for any mix") {
    RunnerRig rig;
    DetRng rng(5);
    for (int round = 0; round < 10; ++round) {
        int total = 1 + int(rng.below(30));
        int failing = int(rng.below(total + 1));
        int erroring = int(rng.below(total - failing + 1));
        SuiteResult result =
            run_suite(rig.tests(total, failing, erroring), rig.artifact, rig.context(), 4);
        CHECK(result.passed + result.failed + result.errored == total);
        CHECK(int(result.results.size()) == total);
    }
}

TEST_CASE("backend transport failures become errored results") {
    RunnerRig rig;
    FlakyBackend flaky(*rig.backend, 2);
    RunContext context{rig.sim.spec, rig.sim.fixtures, flaky, {}};
    SuiteResult result = run_suite(rig.tests(5), rig.artifact, context, 1);
    CHECK(result.errored == 2);
    CHECK(result.passed == 3);
    for (const auto& [id, r] : result.results)
        if (r.status == TestStatus::error)
            CHECK(r.reasons[0].find("BackendError") != std::string::npos);
}

}  // TEST_SUITE
