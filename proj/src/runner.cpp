#include "tdad/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include "tdad/errors.hpp"

namespace tdad {

json SuiteResult::canonical_json() const {
    json tests = json::array();
    for (const auto& [id, result] : results) tests.push_back(result.to_json());
    return json{
        {"artifact_hash", artifact_hash},
        {"passed", passed},
        {"failed", failed},
        {"errored", errored},
        {"results", tests},
    };
}

json SuiteResult::to_json() const {
    json out = canonical_json();
    out["wall_ms"] = wall_ms;
    return out;
}

SuiteResult run_suite(const std::vector<TestCase>& tests, const PromptArtifact& artifact,
                      const RunContext& context, int parallelism) {
    auto started = std::chrono::steady_clock::now();

    if (parallelism <= 0) {
        unsigned hw = std::thread::hardware_concurrency();
        parallelism = hw == 0 ? 1 : static_cast<int>(hw);
        if (context.backend.remote()) parallelism = std::min(parallelism, 8);
    }
    if (!tests.empty()) parallelism = std::min(parallelism, static_cast<int>(tests.size()));

    std::vector<TestResult> slots(tests.size());
    std::atomic<size_t> cursor{0};

    auto worker = [&]() {
        while (true) {
            size_t i = cursor.fetch_add(1);
            if (i >= tests.size()) return;
            const TestCase& test = tests[i];
            auto test_started = std::chrono::steady_clock::now();
            TestResult result;
            try {
                const FixtureSet& fixtures = context.fixtures.get(test.fixture_set_id);
                Trace trace = run_conversation(artifact, test.conversation, fixtures,
                                               context.backend, context.spec, context.options);
                result = eval_test(test, trace, fixtures);
            } catch (const TdadError& e) {
                result.test_id = test.test_id;
                result.node_id = test.node_id;
                result.status = TestStatus::error;
                result.reasons = {e.kind() + std::string(": ") + e.what()};
            }
            result.duration_ms = std::chrono::duration<double, std::milli>(
                                     std::chrono::steady_clock::now() - test_started)
                                     .count();
            slots[i] = std::move(result);
        }
    };

    if (parallelism == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(parallelism);
        for (int i = 0; i < parallelism; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    SuiteResult out;
    out.artifact_hash = artifact_hash(artifact);
    for (auto& result : slots) {
        switch (result.status) {
            case TestStatus::pass: out.passed++; break;
            case TestStatus::fail: out.failed++; break;
            case TestStatus::error: out.errored++; break;
        }
        out.results.emplace(result.test_id, std::move(result));
    }
    out.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();
    return out;
}

std::set<std::string> failing_set(const SuiteResult& result) {
    std::set<std::string> out;
    for (const auto& [id, r] : result.results)
        if (r.status == TestStatus::fail) out.insert(id);
    return out;
}

}  // namespace tdad
