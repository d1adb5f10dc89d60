#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tdad/predicate.hpp"
#include "tdad/spec.hpp"

namespace tdad {

enum class Taxonomy { MFT, INV, DIR };
enum class Visibility { visible, hidden };
enum class TestKind { process, outcome };
enum class SuiteMode { benchmark, production };

const char* to_string(Taxonomy t);
const char* to_string(Visibility v);
const char* to_string(TestKind k);
const char* to_string(SuiteMode m);

// A scripted multi-turn conversation with declarative assertions. Tests are
// data, never code: the harness can materialize, diff, and isolate them at
// the file level, and a data file cannot smuggle logic past the sandbox.
struct TestCase {
    std::string test_id;
    Taxonomy taxonomy = Taxonomy::MFT;
    Visibility visibility = Visibility::visible;
    TestKind kind = TestKind::process;
    std::vector<std::string> conversation;  // user message per turn
    std::string fixture_set_id;
    std::vector<Predicate> assertions;
    bool invariant = false;  // preserve-across-versions flag
    std::optional<std::string> dir_pair_id;
    std::string node_id;   // decision node the test targets
    std::string citation;  // spec clause mandating the expectation
    int origin_version = 1;

    bool operator==(const TestCase&) const = default;

    json to_json() const;
    static TestCase from_json(const json& value, const std::string& context);
};

struct Suite {
    std::string spec_id;
    int spec_version = 1;
    SuiteMode mode = SuiteMode::benchmark;
    std::vector<TestCase> tests;
    std::optional<std::uint64_t> generation_seed;

    bool operator==(const Suite&) const = default;

    std::vector<const TestCase*> visible_tests() const;
    std::vector<const TestCase*> hidden_tests() const;
    const TestCase* find_test(const std::string& id) const;

    json to_json() const;
    static Suite from_json(const json& value);
    std::string to_yaml() const;
    static Suite from_yaml(const std::string& text);
};

// Structural validation of a suite against its spec: unique ids, nonempty
// conversations/assertions, DIR pairing, predicate references. Returns all
// problems, sorted (empty when valid).
std::vector<std::string> validate_suite(const Suite& suite, const Spec& spec);

struct SplitReport {
    int visible_count = 0;
    int hidden_count = 0;
    double visible_fraction = 0.0;
    std::vector<std::string> violations;  // sorted, one line per finding

    bool compliant() const { return violations.empty(); }
    json to_json() const;
    static SplitReport from_json(const json& value);
};

// Checks the visible/hidden split: visible fraction within [0.40, 0.70] and,
// per decision leaf, at least one visible MFT plus at least one hidden test.
// Report-only; the compiler refuses to start on violations in benchmark mode.
SplitReport split_policy_check(const Suite& suite, const Spec& spec);

// Production-mode promotion of failing hidden tests. Returns a new suite;
// the input is untouched. Benchmark-mode suites are frozen within a trial.
Suite promote_hidden(const Suite& suite, const std::set<std::string>& test_ids);

// The subset of v1's invariant-flagged tests whose decision nodes are
// invariant candidates in the delta; this is what SURS evaluates against.
Suite select_invariant_suite(const Suite& v1_suite, const SpecDelta& delta);

}  // namespace tdad
