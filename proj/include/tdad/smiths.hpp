#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tdad/artifact.hpp"
#include "tdad/fixture.hpp"
#include "tdad/spec.hpp"
#include "tdad/test_model.hpp"

namespace tdad {

// -- role contracts ----------------------------------------------------------------
//
// Each role's request type is the complete inventory that role may observe.
// Anything a smith needs must travel through it, which makes the isolation
// matrix auditable: serialize the request, scan for what must not be there.

struct FailureCluster {
    std::string cluster_id;          // "<predicate_type>:<subject>:<node_id>"
    std::string root_cause_label;    // human-readable form of the key
    std::vector<std::string> member_test_ids;
    std::vector<std::string> representative_reasons;

    json to_json() const;
};

// Excerpt of one failing test as shown to PromptSmith: the verdict reasons,
// the scripted conversation, and the observed tool-call sequences.
struct FailureReport {
    std::string test_id;
    std::string node_id;
    std::vector<std::string> reasons;
    std::vector<std::string> conversation;
    std::vector<std::vector<std::string>> tool_sequences;  // per turn

    json to_json() const;
};

struct PromptEditRequest {
    const Spec* spec = nullptr;
    const std::vector<TestCase>* visible_tests = nullptr;  // read-only
    PromptArtifact current;
    std::vector<FailureReport> failures;
    std::vector<FailureCluster> clusters;  // sorted by size, largest first
    int iteration = 0;

    // The spec as PromptSmith may see it: mutation intents stripped. The
    // intent catalog belongs to the mutation role only; a prompt compiler
    // that can read it could harden against the exact probes.
    json spec_view() const;
    json to_json() const;
};

class PromptSmith {
public:
    virtual ~PromptSmith() = default;
    virtual PromptArtifact edit(const PromptEditRequest& request) = 0;
};

struct GeneratedSuite {
    Suite suite;
    std::vector<FixtureSet> fixtures;
};

class TestSmith {
public:
    virtual ~TestSmith() = default;
    virtual GeneratedSuite generate(const Spec& spec, const std::string& guidelines,
                                    std::optional<std::uint64_t> seed) = 0;
};

struct MutationRequest {
    PromptArtifact compiled;
    MutationIntent intent;
    std::vector<std::string> retry_context;  // summaries of prior failed attempts

    json to_json() const;
};

class MutationSmith {
public:
    virtual ~MutationSmith() = default;
    virtual PromptArtifact mutate(const MutationRequest& request) = 0;
};

// -- reference implementations -------------------------------------------------------
//
// Deterministic stand-ins for the LLM-backed roles. They are the desk-scale
// verification backbone: pure functions of (inputs, seed), so full pipeline
// runs are byte-reproducible. They are deliberately weaker than an LLM smith;
// they derive everything mechanically.

// Derives tests from the decision tree: per leaf one visible MFT, one visible
// INV paraphrase, one hidden INV paraphrase; per branch point with at least
// two leaf children, a hidden DIR pair over the first two. Fixtures get one
// default entry per tool with canaries embedded in the first tool's payload.
class ReferenceTestSmith : public TestSmith {
public:
    GeneratedSuite generate(const Spec& spec, const std::string& guidelines,
                            std::optional<std::uint64_t> seed) override;
};

// Terms a policy may not use without test_guidance; generation refuses
// otherwise, because unguided subjective terms yield contradictory tests.
const std::vector<std::string>& subjective_policy_terms();

// Patch-table smith: applies the first rule whose key matches the largest
// failure cluster. The table is the oracle for compilation simulations.
struct PromptPatchRule {
    std::string cluster_key;  // substring matched against cluster_id
    std::string append_line;  // appended to the system prompt once
    std::map<std::string, std::string> set_overrides;
};

class ReferencePromptSmith : public PromptSmith {
public:
    explicit ReferencePromptSmith(std::vector<PromptPatchRule> table)
        : table_(std::move(table)) {}

    static ReferencePromptSmith from_yaml(const std::string& text);

    PromptArtifact edit(const PromptEditRequest& request) override;

private:
    std::vector<PromptPatchRule> table_;
};

// Transform-table smith: per intent, an ordered list of candidate mutations;
// attempt k applies variant k mod size, so retries cycle the table.
struct MutationVariant {
    std::string append_line;
    std::vector<std::string> remove_lines_containing;
    std::map<std::string, std::string> set_overrides;
};

class ReferenceMutationSmith : public MutationSmith {
public:
    explicit ReferenceMutationSmith(std::map<std::string, std::vector<MutationVariant>> table)
        : table_(std::move(table)) {}

    static ReferenceMutationSmith from_yaml(const std::string& text);

    PromptArtifact mutate(const MutationRequest& request) override;

private:
    std::map<std::string, std::vector<MutationVariant>> table_;
};

// -- seed artifact ---------------------------------------------------------------------

// Minimal prompt rendered mechanically from the spec: policies in priority
// order, the decision tree as nested conditionals, the tool list, and the
// respond contract. Deterministic.
PromptArtifact render_seed_artifact(const Spec& spec);

// -- capture ------------------------------------------------------------------------------

// Wiretaps for isolation audits. Each hook receives the full serialized
// request its role observed.
struct SmithCapture {
    std::function<void(const json&)> on_prompt_edit;
    std::function<void(const json&)> on_mutation;
    std::function<void(const json&)> on_generate;
};

}  // namespace tdad
