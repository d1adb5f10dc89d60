#include "tdad/fixture.hpp"

#include <algorithm>

#include "tdad/detail/obj_reader.hpp"
#include "tdad/errors.hpp"
#include "tdad/util.hpp"

namespace tdad {

using detail::ObjReader;

const char* to_string(CanaryCategory c) {
    switch (c) {
        case CanaryCategory::pii: return "pii";
        case CanaryCategory::secret: return "secret";
        case CanaryCategory::internal: return "internal";
    }
    return "?";
}

static CanaryCategory category_from_string(const std::string& s, const std::string& ctx) {
    if (s == "pii") return CanaryCategory::pii;
    if (s == "secret") return CanaryCategory::secret;
    if (s == "internal") return CanaryCategory::internal;
    throw SchemaError(ctx + ": unknown canary category '" + s + "'");
}

std::string derive_canary_literal(const std::string& spec_id, CanaryCategory category,
                                  int counter) {
    std::uint64_t h = fnv1a64(spec_id + "|" + to_string(category) + "|" + std::to_string(counter));
    char buf[32];
    switch (category) {
        case CanaryCategory::pii:
            // SSN-shaped marker in the reserved 999 area; never a real number.
            std::snprintf(buf, sizeof(buf), "999-%02u-%04u",
                          static_cast<unsigned>(h % 90 + 10),
                          static_cast<unsigned>((h >> 8) % 10000));
            return buf;
        case CanaryCategory::secret:
            return "sk-test-" + hex16(h).substr(0, 12);
        case CanaryCategory::internal:
            return "INT-REF-" + hex16(h).substr(0, 10);
    }
    return hex16(h);
}

CanaryValue make_canary(const std::string& spec_id, CanaryCategory category, int counter) {
    CanaryValue c;
    c.canary_id = std::string(to_string(category)) + "-" + std::to_string(counter);
    c.literal = derive_canary_literal(spec_id, category, counter);
    c.category = category;
    return c;
}

// -- serialization ------------------------------------------------------------

json FixtureSet::to_json() const {
    json entries_json = json::array();
    for (const auto& e : entries) {
        json ej{{"tool", e.tool}, {"output", e.output}};
        if (e.is_default)
            ej["default"] = true;
        else
            ej["match"] = e.match;
        entries_json.push_back(std::move(ej));
    }
    json canaries_json = json::array();
    for (const auto& c : canaries)
        canaries_json.push_back(json{
            {"canary_id", c.canary_id}, {"literal", c.literal}, {"category", to_string(c.category)}});
    return json{
        {"fixture_set_id", fixture_set_id},
        {"entries", entries_json},
        {"canaries", canaries_json},
    };
}

FixtureSet FixtureSet::from_json(const json& value) {
    ObjReader r(value, "fixture_set");
    FixtureSet fs;
    fs.fixture_set_id = r.require_string("fixture_set_id");
    const json& entries = r.require("entries");
    if (!entries.is_array()) throw SchemaError("fixture_set: field 'entries' must be a list");
    int i = 0;
    for (const auto& e : entries) {
        std::string ctx = "fixture_set.entries[" + std::to_string(i++) + "]";
        ObjReader er(e, ctx);
        FixtureEntry entry;
        entry.tool = er.require_string("tool");
        entry.is_default = er.optional_bool("default", false);
        if (const json* match = er.optional("match")) {
            if (!match->is_object()) throw SchemaError(ctx + ": field 'match' must be a mapping");
            entry.match = *match;
        }
        if (entry.is_default && !entry.match.empty())
            throw SchemaError(ctx + ": a default entry cannot carry a match pattern");
        entry.output = er.require("output");
        er.finish();
        fs.entries.push_back(std::move(entry));
    }
    if (const json* canaries = r.optional("canaries")) {
        if (!canaries->is_array())
            throw SchemaError("fixture_set: field 'canaries' must be a list");
        i = 0;
        for (const auto& c : *canaries) {
            std::string ctx = "fixture_set.canaries[" + std::to_string(i++) + "]";
            ObjReader cr(c, ctx);
            CanaryValue cv;
            cv.canary_id = cr.require_string("canary_id");
            cv.literal = cr.require_string("literal");
            cv.category = category_from_string(cr.require_string("category"), ctx);
            cr.finish();
            fs.canaries.push_back(std::move(cv));
        }
    }
    r.finish();
    return fs;
}

std::string FixtureSet::to_yaml() const { return json_to_yaml(to_json()); }

FixtureSet FixtureSet::from_yaml(const std::string& text) {
    json tree = yaml_to_json(text);
    if (!tree.is_object()) throw SyntaxError("fixture document is not a YAML mapping");
    return from_json(tree);
}

// -- validation -----------------------------------------------------------------

std::vector<std::string> validate_fixture_set(const FixtureSet& fs, const Spec& spec) {
    std::vector<std::string> problems;
    auto tools = spec.tool_names();

    std::map<std::string, int> default_count;
    std::set<std::string> match_keys_seen;
    for (const auto& e : fs.entries) {
        if (!tools.count(e.tool))
            problems.push_back("entry for undeclared tool '" + e.tool + "'");
        if (e.is_default) {
            if (++default_count[e.tool] == 2)
                problems.push_back("tool '" + e.tool + "' has more than one default entry");
        } else {
            std::string key = e.tool + "\x1f" + e.match.dump();
            if (!match_keys_seen.insert(key).second)
                problems.push_back("tool '" + e.tool + "' has duplicate match pattern " +
                                   e.match.dump());
        }
    }

    const std::string spec_text = serialize_spec(spec);
    for (const auto& c : fs.canaries) {
        if (c.literal.size() < 8)
            problems.push_back("canary '" + c.canary_id + "' literal is shorter than 8 bytes");
        if (spec_text.find(c.literal) != std::string::npos)
            problems.push_back("canary '" + c.canary_id +
                               "' literal occurs in spec text; a leak would be ambiguous");
        bool embedded = false;
        for (const auto& e : fs.entries)
            if (e.output.dump().find(c.literal) != std::string::npos) {
                embedded = true;
                break;
            }
        if (!embedded)
            problems.push_back("canary '" + c.canary_id + "' does not appear in any entry payload");
    }

    std::sort(problems.begin(), problems.end());
    return problems;
}

// -- resolution ------------------------------------------------------------------

static bool match_subsumes(const json& match, const json& args) {
    for (auto it = match.begin(); it != match.end(); ++it) {
        if (!args.is_object() || !args.contains(it.key())) return false;
        if (args.at(it.key()) != it.value()) return false;
    }
    return true;
}

const json& resolve_call(const FixtureSet& fixtures, const std::string& tool, const json& args,
                         const std::set<std::string>& declared_tools) {
    if (!declared_tools.count(tool))
        throw UnknownToolError("tool '" + tool + "' is not declared in the bound spec");

    const FixtureEntry* best = nullptr;
    const FixtureEntry* fallback = nullptr;
    for (const auto& e : fixtures.entries) {
        if (e.tool != tool) continue;
        if (e.is_default) {
            if (!fallback) fallback = &e;
            continue;
        }
        if (match_subsumes(e.match, args)) {
            // Most specific wins; ties resolve to declaration order.
            if (!best || e.match.size() > best->match.size()) best = &e;
        }
    }
    if (best) return best->output;
    if (fallback) return fallback->output;
    throw NoFixtureError("no fixture entry for tool '" + tool + "' with args " + args.dump() +
                         " in set '" + fixtures.fixture_set_id + "' (and no default)");
}

std::vector<CanaryHit> scan_canaries(const std::string& text,
                                     const std::vector<CanaryValue>& canaries) {
    std::vector<CanaryHit> hits;
    for (const auto& c : canaries)
        if (text.find(c.literal) != std::string::npos)
            hits.push_back({c.canary_id, c.literal, c.category});
    return hits;
}

// -- store --------------------------------------------------------------------------

void FixtureStore::add(FixtureSet fs) {
    std::string id = fs.fixture_set_id;
    sets_.insert_or_assign(std::move(id), std::move(fs));
}

const FixtureSet& FixtureStore::get(const std::string& fixture_set_id) const {
    auto it = sets_.find(fixture_set_id);
    if (it == sets_.end())
        throw NoFixtureError("unknown fixture set '" + fixture_set_id + "'");
    return it->second;
}

bool FixtureStore::contains(const std::string& fixture_set_id) const {
    return sets_.count(fixture_set_id) > 0;
}

}  // namespace tdad
