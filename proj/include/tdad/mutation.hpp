#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tdad/artifact.hpp"
#include "tdad/runner.hpp"
#include "tdad/smiths.hpp"
#include "tdad/test_model.hpp"

namespace tdad {

enum class MutantStatus { killed, survived, non_activating };

const char* to_string(MutantStatus s);

struct MutantRecord {
    std::string intent_id;
    int attempts_used = 0;
    MutantStatus status = MutantStatus::non_activating;
    std::optional<PromptArtifact> activating_mutant;
    std::vector<std::string> killing_test_ids;  // sorted; nonempty iff killed
    // Decision nodes the probe trigger touched; the actionable gap report
    // for survived mutants.
    std::vector<std::string> probe_subjects;
    std::vector<std::string> attempt_notes;  // per attempt, for retry context

    json to_json() const;
};

struct MutationConfig {
    int activation_attempts = 5;  // k
    int parallelism = 0;
    RunOptions run_options = {};
};

struct MutationReport {
    std::vector<MutantRecord> records;
    int killed = 0;
    int survived = 0;
    int non_activating = 0;
    // killed / (killed + survived); undefined (not 0) when every intent was
    // non-activating or there were no intents.
    std::optional<double> mutation_score;

    json to_json() const;
    std::string footer() const;  // exclusion caveat, shown in every report
};

struct MutationHooks {
    std::function<void(const json&)> on_smith_request;
};

// True iff the probe's trigger predicate passes on the candidate's probe
// trace. Activation probes only confirm the mutation took effect; they are
// never counted as kills.
bool activation_check(const PromptArtifact& mutant, const ProbeSpec& probe,
                      const RunContext& context);

// Post-compilation suite-strength measurement. For each intent: up to k
// smith attempts from (compiled artifact, intent) only, never any tests; a
// candidate that passes its activation probe is a valid mutant and is run
// against the full visible suite; killed iff at least one visible test
// fails. Throws BaselineError when the compiled artifact does not pass the
// visible suite or a probe already passes on the unmutated artifact.
MutationReport run_mutation_suite(const PromptArtifact& compiled,
                                  const std::vector<MutationIntent>& intents,
                                  const std::vector<TestCase>& visible_tests,
                                  MutationSmith& mutationsmith, const RunContext& context,
                                  const MutationConfig& config = {},
                                  const MutationHooks& hooks = {});

}  // namespace tdad
