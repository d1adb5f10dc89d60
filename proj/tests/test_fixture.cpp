#include <doctest.h>

#include "helpers.hpp"
#include "tdad/errors.hpp"
#include "tdad/fixture.hpp"

using namespace tdad;
using namespace tdad::testing;

TEST_SUITE("fixture_engine") {

TEST_CASE("bundled demo fixtures resolve per the file contents") {
    FixtureSet fs = load_demo_fixtures();
    Spec spec = load_mini_spec_v1();
    auto tools = spec.tool_names();

    SUBCASE("exact match returns the matched payload") {
        json args{{"account_id", "A1"}, {"last4", "1234"}, {"zip", "94110"}};
        const json& out = resolve_call(fs, "verify_identity", args, tools);
        CHECK(out.at("verified") == true);
    }
    SUBCASE("unmatched args fall back to the default") {
        json args{{"account_id", "A9"}, {"last4", "0000"}, {"zip", "00000"}};
        const json& out = resolve_call(fs, "verify_identity", args, tools);
        CHECK(out.at("verified") == false);
    }
    SUBCASE("undeclared tool refuses") {
        CHECK_THROWS_AS(resolve_call(fs, "not_a_tool", json::object(), tools),
                        UnknownToolError);
    }
    SUBCASE("validates cleanly against the spec") {
        CHECK(validate_fixture_set(fs, spec).empty());
    }
}

TEST_CASE("no match and no default is a mis-specified test") {
    FixtureSet fs;
    fs.fixture_set_id = "fx";
    fs.entries.push_back({"ping", json{{"key", "exact"}}, json{{"ok", true}}, false});
    std::set<std::string> tools{"ping"};
    CHECK_THROWS_AS(resolve_call(fs, "ping", json{{"key", "other"}}, tools), NoFixtureError);
}

TEST_CASE("the most specific matching entry wins") {
    FixtureSet fs;
    fs.fixture_set_id = "fx";
    fs.entries.push_back({"q", json{{"a", 1}}, json{{"which", "loose"}}, false});
    fs.entries.push_back({"q", json{{"a", 1}, {"b", 2}}, json{{"which", "tight"}}, false});
    std::set<std::string> tools{"q"};
    const json& out = resolve_call(fs, "q", json{{"a", 1}, {"b", 2}, {"c", 3}}, tools);
    CHECK(out.at("which") == "tight");
}

TEST_CASE("resolution is deterministic across 1000 repeats") {
    FixtureSet fs = load_demo_fixtures();
    std::set<std::string> tools = load_mini_spec_v1().tool_names();
    json args{{"order_id", "ORD-1001"}};
    std::string first = resolve_call(fs, "get_order", args, tools).dump();
    for (int i = 0; i < 1000; ++i)
        CHECK(resolve_call(fs, "get_order", args, tools).dump() == first);
}

TEST_CASE("canary scanning is exact substring match") {
    std::vector<CanaryValue> canaries = {{"pii-1", "999-79-6928", CanaryCategory::pii}};

    auto hits = scan_canaries("the SSN on file is 999-79-6928, as requested", canaries);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].canary_id == "pii-1");

    CHECK(scan_canaries("", canaries).empty());
    // A canary split by whitespace is not a detection; the detector is
    // exact-match by contract.
    CHECK(scan_canaries("999-79 6928", canaries).empty());
}

TEST_CASE("scan over concatenation covers both halves") {
    FixtureSet fs = load_demo_fixtures();
    std::string a = "left says sk-test-794043c3abed and stops";
    std::string b = "right says INT-REF-f60b7a3be2 and stops";
    auto union_size = scan_canaries(a, fs.canaries).size() + scan_canaries(b, fs.canaries).size();
    CHECK(scan_canaries(a + b, fs.canaries).size() == union_size);
}

TEST_CASE("canary derivation is stable and well-formed") {
    std::string first = derive_canary_literal("mini-supportops", CanaryCategory::pii, 1);
    std::string again = derive_canary_literal("mini-supportops", CanaryCategory::pii, 1);
    CHECK(first == again);
    CHECK(first == "999-79-6928");  // pinned: the bundled assets embed it
    CHECK(derive_canary_literal("other-spec", CanaryCategory::pii, 1) != first);
    CHECK(derive_canary_literal("mini-supportops", CanaryCategory::pii, 2) != first);

    for (auto category :
         {CanaryCategory::pii, CanaryCategory::secret, CanaryCategory::internal})
        CHECK(make_canary("any", category, 1).literal.size() >= 8);
}

TEST_CASE("fixture validation flags each defect") {
    Spec spec = load_mini_spec_v1();
    FixtureSet fs = load_demo_fixtures();

    SUBCASE("second default for one tool") {
        fs.entries.push_back({"get_order", json::object(), json{{"oops", 1}}, true});
        auto problems = validate_fixture_set(fs, spec);
        REQUIRE(!problems.empty());
        CHECK(problems[0].find("more than one default") != std::string::npos);
    }
    SUBCASE("duplicate match pattern") {
        fs.entries.push_back(
            {"verify_identity", json{{"account_id", "A1"}, {"last4", "1234"}, {"zip", "94110"}},
             json{{"verified", true}}, false});
        auto problems = validate_fixture_set(fs, spec);
        bool found = false;
        for (const auto& p : problems)
            if (p.find("duplicate match pattern") != std::string::npos) found = true;
        CHECK(found);
    }
    SUBCASE("short canary literal") {
        fs.canaries.push_back({"tiny", "short", CanaryCategory::secret});
        auto problems = validate_fixture_set(fs, spec);
        bool found = false;
        for (const auto& p : problems)
            if (p.find("shorter than 8 bytes") != std::string::npos) found = true;
        CHECK(found);
    }
    SUBCASE("canary not embedded in any payload") {
        fs.canaries.push_back({"orphan", "ZZ-ORPHAN-0xDEAD", CanaryCategory::internal});
        auto problems = validate_fixture_set(fs, spec);
        bool found = false;
        for (const auto& p : problems)
            if (p.find("does not appear in any entry payload") != std::string::npos) found = true;
        CHECK(found);
    }
    SUBCASE("canary occurring in spec text is ambiguous") {
        // The node condition text is part of the user-facing spec.
        fs.canaries.push_back({"in-spec", "Hello there, how are you today?",
                               CanaryCategory::internal});
        fs.entries[0].output["echo"] = "Hello there, how are you today?";
        auto problems = validate_fixture_set(fs, spec);
        bool found = false;
        for (const auto& p : problems)
            if (p.find("occurs in spec text") != std::string::npos) found = true;
        CHECK(found);
    }
}

TEST_CASE("fixture yaml round-trips") {
    FixtureSet fs = load_demo_fixtures();
    FixtureSet again = FixtureSet::from_yaml(fs.to_yaml());
    CHECK(again == fs);
}

TEST_CASE("store lookups are by id and missing sets are errors") {
    FixtureStore store;
    store.add(load_demo_fixtures());
    CHECK(store.contains("fx-mini-supportops-demo"));
    CHECK_THROWS_AS(store.get("fx-unknown"), NoFixtureError);
}

}  // TEST_SUITE
