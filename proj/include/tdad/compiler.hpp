#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tdad/artifact.hpp"
#include "tdad/runner.hpp"
#include "tdad/smiths.hpp"
#include "tdad/test_model.hpp"

namespace tdad {

struct CompileConfig {
    int outer_budget = 6;       // maximum outer iterations (B)
    int focused_threshold = 10; // enter the focused loop below this many failures
    int inner_budget = 8;       // focused-loop attempts
    int parallelism = 0;
    SuiteMode mode = SuiteMode::benchmark;
    RunOptions run_options = {};
};

enum class CompileStatus { success, budget_exhausted, conflict_detected };

const char* to_string(CompileStatus s);

struct IterationLogEntry {
    int iteration = 0;
    std::vector<std::string> failing;  // sorted test ids at iteration start
    std::vector<FailureCluster> clusters;
    bool used_focused_loop = false;
    int inner_attempts = 0;
    std::string edit_digest;     // hash of the applied edit's delta, "" if none
    std::string candidate_hash;  // artifact content hash after the edit
    std::string smith_error;     // nonempty when the smith failed this iteration

    json to_json() const;
};

struct CompileOutcome {
    CompileStatus status = CompileStatus::budget_exhausted;
    PromptArtifact artifact;  // last candidate
    std::optional<double> final_vpr;
    int iterations_used = 0;
    std::vector<IterationLogEntry> log;
    bool continuation = false;  // seeded from a previous version's artifact
    std::vector<std::string> conflicts;  // populated for conflict_detected

    json to_json() const;
    std::string log_jsonl() const;
};

// Compile-time wrapper proving the suite holds no hidden tests. The hidden
// tree never enters this type; constructing one from contaminated input is
// an IsolationViolation naming the offending ids.
class VisibleSuite {
public:
    static VisibleSuite from_suite(const Suite& suite);
    // Loads only the visible materialization (never reads a hidden tree).
    const Suite& suite() const { return suite_; }
    const std::vector<TestCase>& tests() const { return suite_.tests; }

private:
    explicit VisibleSuite(Suite s) : suite_(std::move(s)) {}
    Suite suite_;
};

struct CompileHooks {
    // Observes every serialized PromptSmith request (isolation audits).
    std::function<void(const json&)> on_smith_request;
    // Called after each outer iteration's full-suite run.
    std::function<void(const IterationLogEntry&)> on_iteration;
};

// Statically provable cross-test contradictions: two visible tests with the
// same scripted conversation whose predicates cannot both hold (tool_called
// vs tool_not_called, text_contains vs text_absent, conflicting
// respond_field_equals). Reported before any iteration runs.
std::vector<std::string> detect_conflicts(const std::vector<TestCase>& tests);

// Group failures by (predicate type, primary subject, decision node),
// ordered by descending size then cluster id.
std::vector<FailureCluster> cluster_failures(const std::vector<const TestResult*>& failures);

// The compilation loop:
//   run visible suite; success when all pass; otherwise cluster failures and
//   either enter the focused loop (fewer than theta failures) or request a
//   full prompt edit; stop after outer_budget iterations.
// Errored (infrastructure) tests are retried once per iteration before the
// smith sees them. In benchmark mode a clean split report is required up
// front and refusal happens before any smith call.
CompileOutcome compile(const Spec& spec, const VisibleSuite& visible,
                       const PromptArtifact& seed_artifact, PromptSmith& promptsmith,
                       const RunContext& context, const CompileConfig& config = {},
                       const std::optional<SplitReport>& split_report = std::nullopt,
                       const CompileHooks& hooks = {});

struct FocusedLoopResult {
    PromptArtifact artifact;
    int attempts_used = 0;
    bool promoted = false;  // candidate cleared the failing subset
};

// Inner loop over only the failing tests. Returns the promoted candidate on
// an all-pass (the outer loop then re-runs the full suite; promotion is
// provisional) or the best candidate after inner_budget attempts or after
// the subset stops shrinking for 3 consecutive attempts. Best = fewest
// subset failures, ties to the earliest candidate. The initial failure
// reports/clusters come from the outer iteration's run, so the loop performs
// at most inner_budget subset runs.
FocusedLoopResult focused_loop(const PromptArtifact& artifact,
                               const std::vector<TestCase>& failing_tests,
                               PromptSmith& promptsmith, const RunContext& context,
                               int inner_budget, const Spec& spec,
                               const std::vector<TestCase>& visible_tests, int iteration,
                               int parallelism, const CompileHooks& hooks,
                               std::vector<FailureReport> initial_reports,
                               std::vector<FailureCluster> initial_clusters);

}  // namespace tdad
