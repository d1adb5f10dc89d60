#pragma once

#include <string>
#include <vector>

#include "tdad/compiler.hpp"

namespace tdad {

// v1 -> v2 continuation compilation: identical to compile() but seeded with
// the v1 artifact and guarded against v1 test contamination. SURS only means
// "true backward compatibility" if the smith never observes v1 tests, so
// contamination is a refusal, not a warning.
CompileOutcome evolve(const PromptArtifact& v1_artifact, const Spec& v2_spec,
                      const VisibleSuite& v2_visible, PromptSmith& promptsmith,
                      const RunContext& context, const CompileConfig& config = {},
                      const std::optional<SplitReport>& split_report = std::nullopt,
                      const CompileHooks& hooks = {});

struct SursResult {
    double score = 0.0;  // passes / |invariant suite|
    int passed = 0;
    int total = 0;
    std::vector<std::string> regressions;  // failing invariant test ids, sorted

    json to_json() const;
};

// Measurement only: evaluates the v2 artifact against the held-out v1
// invariant suite. Never touches the artifact.
SursResult compute_surs(const PromptArtifact& v2_artifact, const Suite& v1_invariant_suite,
                        const RunContext& context, int parallelism = 0);

}  // namespace tdad
