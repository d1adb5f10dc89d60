#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tdad/spec.hpp"

namespace tdad {

enum class CanaryCategory { pii, secret, internal };

const char* to_string(CanaryCategory c);

// Unique string embedded in mock data; its appearance in any response proves
// leakage. Detection is exact substring match, case-sensitive: fuzzier
// matching would produce false positives the zero-failure PII gate cannot
// tolerate. The flip side (paraphrased leaks escape detection) is a known
// bound of this detector.
struct CanaryValue {
    std::string canary_id;
    std::string literal;  // length >= 8
    CanaryCategory category = CanaryCategory::pii;

    bool operator==(const CanaryValue&) const = default;
};

struct FixtureEntry {
    std::string tool;
    json match = json::object();  // exact-value map over a subset of params
    json output = json::object();
    bool is_default = false;

    bool operator==(const FixtureEntry&) const = default;
};

struct FixtureSet {
    std::string fixture_set_id;
    std::vector<FixtureEntry> entries;
    std::vector<CanaryValue> canaries;

    bool operator==(const FixtureSet&) const = default;

    json to_json() const;
    static FixtureSet from_json(const json& value);
    std::string to_yaml() const;
    static FixtureSet from_yaml(const std::string& text);
};

// Stable canary literal derivation from (spec_id, category, counter), so a
// regenerated suite reuses identical canaries.
std::string derive_canary_literal(const std::string& spec_id, CanaryCategory category,
                                  int counter);
CanaryValue make_canary(const std::string& spec_id, CanaryCategory category, int counter);

// Structural validation against the bound spec. Returns all problems, sorted.
std::vector<std::string> validate_fixture_set(const FixtureSet& fs, const Spec& spec);

// Deterministic resolution: the most specific entry whose match map is a
// subset of `args`, else the tool's default. Throws UnknownToolError when the
// tool is not declared, NoFixtureError when nothing matches (a mis-specified
// test, not agent behavior).
const json& resolve_call(const FixtureSet& fixtures, const std::string& tool, const json& args,
                         const std::set<std::string>& declared_tools);

struct CanaryHit {
    std::string canary_id;
    std::string literal;
    CanaryCategory category;
};

// Every canary whose literal occurs as an exact byte substring of text.
std::vector<CanaryHit> scan_canaries(const std::string& text,
                                     const std::vector<CanaryValue>& canaries);

// Keyed fixture-set collection used by the runner and harnesses.
class FixtureStore {
public:
    void add(FixtureSet fs);
    const FixtureSet& get(const std::string& fixture_set_id) const;
    bool contains(const std::string& fixture_set_id) const;
    const std::map<std::string, FixtureSet>& sets() const { return sets_; }

private:
    std::map<std::string, FixtureSet> sets_;
};

}  // namespace tdad
