#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "tdad/errors.hpp"
#include "tdad/smiths.hpp"
#include "tdad/test_model.hpp"

using namespace tdad;
using namespace tdad::testing;

namespace {

// A suite with the requested visible/hidden counts spread over the mini
// spec's leaves, keeping every leaf covered on both sides of the split.
Suite synthetic_split_suite(const Spec& spec, int visible, int hidden) {
    Suite suite;
    suite.spec_id = spec.id;
    suite.spec_version = spec.version;
    auto leaves = spec.leaves();
    auto add = [&](int index, Visibility visibility) {
        const DecisionNode* leaf = leaves[index % leaves.size()];
        TestCase t;
        t.test_id = std::string(to_string(visibility)) + "-" + std::to_string(index);
        t.taxonomy = visibility == Visibility::visible ? Taxonomy::MFT : Taxonomy::INV;
        t.visibility = visibility;
        t.kind = TestKind::process;
        t.conversation = {leaf->condition};
        t.fixture_set_id = "fx";
        t.assertions = {Predicate::respond_field_equals("decision", leaf->decision_label)};
        t.node_id = leaf->node_id;
        t.citation = leaf->node_id;
        suite.tests.push_back(std::move(t));
    };
    for (int i = 0; i < visible; ++i) add(i, Visibility::visible);
    for (int i = 0; i < hidden; ++i) add(i, Visibility::hidden);
    return suite;
}

}  // namespace

TEST_SUITE("test_model") {

TEST_CASE("suite yaml round-trips") {
    ReferenceTestSmith smith;
    GeneratedSuite generated = smith.generate(load_mini_spec_v1(), "", 7);
    Suite again = Suite::from_yaml(generated.suite.to_yaml());
    CHECK(again == generated.suite);
}

TEST_CASE("published split shape 47 visible / 45 hidden is compliant") {
    Spec spec = load_mini_spec_v1();
    Suite suite = synthetic_split_suite(spec, 47, 45);
    SplitReport report = split_policy_check(suite, spec);
    CHECK(report.visible_count == 47);
    CHECK(report.hidden_count == 45);
    CHECK(report.visible_fraction == doctest::Approx(47.0 / 92.0));
    CHECK(report.compliant());
}

TEST_CASE("fully visible suite violates the hidden floor") {
    Spec spec = load_mini_spec_v1();
    Suite suite = synthetic_split_suite(spec, 20, 0);
    SplitReport report = split_policy_check(suite, spec);
    CHECK(!report.compliant());
    bool found = false;
    for (const auto& v : report.violations)
        if (v.find("hidden fraction 0.000 < 0.30") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("leaf with only hidden coverage is named in the report") {
    Spec spec = load_mini_spec_v1();
    Suite suite = synthetic_split_suite(spec, 18, 18);
    // Strip every visible test for one leaf.
    std::erase_if(suite.tests, [](const TestCase& t) {
        return t.node_id == "n_pii" && t.visibility == Visibility::visible;
    });
    SplitReport report = split_policy_check(suite, spec);
    bool found = false;
    for (const auto& v : report.violations)
        if (v.find("leaf 'n_pii' has no visible MFT") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("split check is invariant under test reordering") {
    Spec spec = load_mini_spec_v1();
    Suite suite = synthetic_split_suite(spec, 13, 11);
    SplitReport before = split_policy_check(suite, spec);
    std::reverse(suite.tests.begin(), suite.tests.end());
    SplitReport after = split_policy_check(suite, spec);
    CHECK(before.to_json() == after.to_json());
}

TEST_CASE("promote_hidden flips visibility without touching the input") {
    Spec spec = load_mini_spec_v1();
    Suite suite = synthetic_split_suite(spec, 10, 10);
    suite.mode = SuiteMode::production;
    int visible_before = int(suite.visible_tests().size());

    Suite promoted = promote_hidden(suite, {"hidden-0", "hidden-1"});
    CHECK(int(promoted.visible_tests().size()) == visible_before + 2);
    CHECK(int(promoted.hidden_tests().size()) == 8);
    CHECK(int(suite.visible_tests().size()) == visible_before);  // untouched
}

TEST_CASE("benchmark-mode suites are frozen: promotion refuses") {
    Spec spec = load_mini_spec_v1();
    Suite suite = synthetic_split_suite(spec, 10, 10);
    suite.mode = SuiteMode::benchmark;
    CHECK_THROWS_AS(promote_hidden(suite, {"hidden-0"}), ModeError);
}

TEST_CASE("promotion of unknown or non-hidden ids refuses") {
    Spec spec = load_mini_spec_v1();
    Suite suite = synthetic_split_suite(spec, 10, 10);
    suite.mode = SuiteMode::production;
    CHECK_THROWS_AS(promote_hidden(suite, {"no-such-test"}), UnknownTestError);
    CHECK_THROWS_AS(promote_hidden(suite, {"visible-0"}), UnknownTestError);
}

TEST_CASE("invariant selection filters by flag and by untouched node") {
    ReferenceTestSmith smith;
    Spec v1 = load_mini_spec_v1();
    GeneratedSuite generated = smith.generate(v1, "", 7);

    SUBCASE("all-but-one node invariant") {
        SpecDelta delta = diff_specs(v1, load_mini_spec_v2());
        Suite invariant = select_invariant_suite(generated.suite, delta);
        // Set-filter oracle, written directly against the definition.
        int expected = 0;
        std::set<std::string> candidates(delta.invariant_candidates.begin(),
                                         delta.invariant_candidates.end());
        for (const auto& t : generated.suite.tests)
            if (t.invariant && candidates.count(t.node_id)) expected++;
        CHECK(int(invariant.tests.size()) == expected);
        for (const auto& t : invariant.tests) {
            CHECK(t.invariant);
            CHECK(t.node_id != "n_smalltalk");  // the one modified node
        }
    }

    SUBCASE("identical specs keep the full invariant-flagged subset") {
        Spec v2 = v1;
        v2.version = 2;
        SpecDelta delta = diff_specs(v1, v2);
        Suite invariant = select_invariant_suite(generated.suite, delta);
        int flagged = 0;
        for (const auto& t : generated.suite.tests)
            if (t.invariant) flagged++;
        CHECK(int(invariant.tests.size()) == flagged);
    }

    SUBCASE("a rewrite of every node leaves the score undefined") {
        SpecDelta delta;  // no invariant candidates at all
        CHECK_THROWS_AS(select_invariant_suite(generated.suite, delta),
                        EmptyInvariantSetError);
    }
}

TEST_CASE("dir pairs must differ in exactly one scripted turn") {
    Spec spec = load_mini_spec_v1();
    Suite suite;
    suite.spec_id = spec.id;
    suite.spec_version = spec.version;

    auto leg = [&](const std::string& id, std::vector<std::string> conversation) {
        TestCase t;
        t.test_id = id;
        t.taxonomy = Taxonomy::DIR;
        t.visibility = Visibility::hidden;
        t.kind = TestKind::outcome;
        t.conversation = std::move(conversation);
        t.fixture_set_id = "fx";
        t.assertions = {Predicate::respond_field_equals("decision", "answered")};
        t.dir_pair_id = "pair-1";
        t.node_id = "n_smalltalk";
        t.citation = "n_root";
        return t;
    };

    SUBCASE("well-formed pair validates") {
        suite.tests = {leg("a", {"same", "differs here"}), leg("b", {"same", "differs there"})};
        CHECK(validate_suite(suite, spec).empty());
    }
    SUBCASE("identical conversations are flagged") {
        suite.tests = {leg("a", {"same", "same2"}), leg("b", {"same", "same2"})};
        auto problems = validate_suite(suite, spec);
        REQUIRE(!problems.empty());
        CHECK(problems[0].find("differ in 0 turns") != std::string::npos);
    }
    SUBCASE("a lone leg is flagged") {
        suite.tests = {leg("a", {"x"})};
        auto problems = validate_suite(suite, spec);
        REQUIRE(!problems.empty());
        CHECK(problems[0].find("1 legs") != std::string::npos);
    }
}

TEST_CASE("structural validation catches the named edge cases") {
    Spec spec = load_mini_spec_v1();
    Suite suite = synthetic_split_suite(spec, 2, 2);

    suite.tests[0].test_id = suite.tests[1].test_id;       // duplicate id
    suite.tests[1].conversation.clear();                   // empty conversation
    suite.tests[2].assertions.clear();                     // no assertions
    suite.tests[3].node_id = "ghost-node";                 // unknown node
    TestCase bad_predicate = suite.tests[0];
    bad_predicate.test_id = "bad-pred";
    bad_predicate.assertions = {Predicate::tool_called("ghost-tool")};
    suite.tests.push_back(bad_predicate);

    auto problems = validate_suite(suite, spec);
    auto has = [&](const std::string& needle) {
        return std::any_of(problems.begin(), problems.end(), [&](const std::string& p) {
            return p.find(needle) != std::string::npos;
        });
    };
    CHECK(has("duplicate test id"));
    CHECK(has("empty conversation"));
    CHECK(has("no assertions"));
    CHECK(has("unknown node 'ghost-node'"));
    CHECK(has("undeclared tool 'ghost-tool'"));
}

}  // TEST_SUITE
