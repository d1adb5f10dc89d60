#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tdad/compiler.hpp"
#include "tdad/evolution.hpp"
#include "tdad/metrics.hpp"
#include "tdad/mutation.hpp"
#include "tdad/smiths.hpp"
#include "tdad/workspace.hpp"

namespace tdad {

struct SmithSet {
    TestSmith* testsmith = nullptr;
    PromptSmith* promptsmith = nullptr;
    MutationSmith* mutationsmith = nullptr;
};

struct PipelineConfig {
    int trials = 3;
    std::uint64_t master_seed = 0;
    CompileConfig compile;
    MutationConfig mutation;
    std::string guidelines;
    // Suppresses wall-clock fields in trial records so scripted runs are
    // byte-reproducible.
    bool deterministic = true;
};

struct TrialOutputs {
    TrialRecord record;
    std::optional<TrialRecord> v2_record;  // present when a v2 spec ran
    CompileOutcome compile_outcome;
    std::optional<MutationReport> mutation_report;
    fs::path artifact_path;
    std::string slug;
};

// One benchmark-mode trial: fresh test generation, materialization, split
// check, sandboxed compile, hidden evaluation, mutation scoring. When
// v2_spec is given the trial continues: fresh v2 tests, evolve from the v1
// artifact, v2 hidden evaluation, SURS over the v1 invariant suite.
TrialOutputs run_trial(const Spec& spec, const std::optional<Spec>& v2_spec, int trial_index,
                       const SmithSet& smiths, AgentBackend& backend, const Workspace& ws,
                       const PipelineConfig& config);

// The full benchmark-mode driver: `trials` independent trials, a JSONL
// ledger under reports/, and an aggregate report. Returns the trial records
// in trial order.
std::vector<TrialRecord> run_all(const Spec& spec, const std::optional<Spec>& v2_spec,
                                 const SmithSet& smiths, AgentBackend& backend,
                                 const Workspace& ws, const PipelineConfig& config);

}  // namespace tdad
