#pragma once

#include <string>
#include <vector>

#include "tdad/fixture.hpp"
#include "tdad/predicate.hpp"
#include "tdad/test_model.hpp"
#include "tdad/trace.hpp"

namespace tdad {

struct Verdict {
    bool pass = false;
    std::string reason;  // empty on pass; names predicate, turn, observed value on fail

    static Verdict ok() { return {true, {}}; }
    static Verdict fail(std::string reason) { return {false, std::move(reason)}; }
};

// Evaluate one predicate against a trace. Pure and deterministic; reasons are
// byte-stable across runs. Throws PredicateBindingError when the predicate
// cannot be bound to this trace at all (a test bug, distinct from an agent
// failure).
Verdict eval_predicate(const Predicate& p, const Trace& trace, const FixtureSet& fixtures);

enum class TestStatus { pass, fail, error };

const char* to_string(TestStatus s);

struct TestResult {
    std::string test_id;
    TestStatus status = TestStatus::pass;
    std::vector<std::string> reasons;            // failure/error reasons
    std::vector<std::string> failed_predicates;  // labels of failing predicates
    std::vector<std::string> failed_subjects;    // their primary tool/field
    std::string node_id;                         // decision node of the test
    double duration_ms = 0.0;
    Trace trace;

    json to_json(bool include_trace = false) const;
};

// Conjunction semantics: pass iff every predicate passes and the trace is
// breach-free.
TestResult eval_test(const TestCase& test, const Trace& trace, const FixtureSet& fixtures);

}  // namespace tdad
