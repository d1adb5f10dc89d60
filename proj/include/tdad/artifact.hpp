#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tdad/spec.hpp"

namespace tdad {

// The compiled agent: a system prompt plus per-tool description overrides.
// Both halves are optimization targets; tool descriptions often carry more
// behavioral weight than the prompt body.
struct PromptArtifact {
    std::string system_prompt;
    std::map<std::string, std::string> tool_description_overrides;
    int artifact_version = 1;

    struct Provenance {
        std::string spec_id;
        int spec_version = 1;
        std::string run_id;
        int iterations = 0;
        std::string parent_hash;

        bool operator==(const Provenance&) const = default;
    } provenance;

    bool operator==(const PromptArtifact&) const = default;

    json to_json() const;
    static PromptArtifact from_json(const json& value);
};

// Content hash over prompt + overrides (provenance excluded, so a re-run
// that produces the same text addresses the same artifact file).
std::string artifact_hash(const PromptArtifact& artifact);

// Invariant checks against the bound spec: nonempty prompt, overrides only
// for declared tools. Returns all problems, sorted.
std::vector<std::string> validate_artifact(const PromptArtifact& artifact, const Spec& spec);

}  // namespace tdad
