#include "tdad/evolution.hpp"

#include "tdad/errors.hpp"
#include "tdad/util.hpp"

namespace tdad {

CompileOutcome evolve(const PromptArtifact& v1_artifact, const Spec& v2_spec,
                      const VisibleSuite& v2_visible, PromptSmith& promptsmith,
                      const RunContext& context, const CompileConfig& config,
                      const std::optional<SplitReport>& split_report,
                      const CompileHooks& hooks) {
    if (v1_artifact.provenance.spec_id != v2_spec.id)
        throw LineageError("artifact lineage '" + v1_artifact.provenance.spec_id +
                           "' does not match spec '" + v2_spec.id + "'");
    if (v1_artifact.provenance.spec_version >= v2_spec.version)
        throw LineageError("artifact is from spec v" +
                           std::to_string(v1_artifact.provenance.spec_version) +
                           " but the target spec is v" + std::to_string(v2_spec.version) +
                           "; evolution requires a version increase");

    // Hold-out enforcement, before any smith call: only tests generated from
    // the v2 spec may drive the continuation.
    std::vector<std::string> contaminated;
    for (const auto& t : v2_visible.tests())
        if (t.origin_version != v2_spec.version) contaminated.push_back(t.test_id);
    if (!contaminated.empty())
        throw IsolationViolation(
            "v2 compile sandbox contains tests from another spec version: " +
            join(contaminated, ", "));

    PromptArtifact seed = v1_artifact;
    seed.provenance.spec_version = v2_spec.version;
    seed.provenance.parent_hash = artifact_hash(v1_artifact);

    CompileOutcome outcome =
        compile(v2_spec, v2_visible, seed, promptsmith, context, config, split_report, hooks);
    outcome.continuation = true;
    return outcome;
}

json SursResult::to_json() const {
    return json{
        {"surs", score},
        {"passed", passed},
        {"total", total},
        {"regressions", regressions},
    };
}

SursResult compute_surs(const PromptArtifact& v2_artifact, const Suite& v1_invariant_suite,
                        const RunContext& context, int parallelism) {
    if (v1_invariant_suite.tests.empty())
        throw EmptyInvariantSetError("invariant suite is empty; the regression score is undefined");

    SuiteResult result = run_suite(v1_invariant_suite.tests, v2_artifact, context, parallelism);
    SursResult out;
    out.total = result.total();
    out.passed = result.passed;
    out.score = double(out.passed) / double(out.total);
    auto failing = failing_set(result);
    out.regressions.assign(failing.begin(), failing.end());
    for (const auto& [id, r] : result.results)
        if (r.status == TestStatus::error) out.regressions.push_back(id + " (errored)");
    return out;
}

}  // namespace tdad
