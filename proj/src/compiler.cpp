#include "tdad/compiler.hpp"

#include <algorithm>
#include <map>

#include "tdad/errors.hpp"
#include "tdad/util.hpp"

namespace tdad {

const char* to_string(CompileStatus s) {
    switch (s) {
        case CompileStatus::success: return "success";
        case CompileStatus::budget_exhausted: return "budget_exhausted";
        case CompileStatus::conflict_detected: return "conflict_detected";
    }
    return "?";
}

json IterationLogEntry::to_json() const {
    json clusters_json = json::array();
    for (const auto& c : clusters)
        clusters_json.push_back(json{{"cluster_id", c.cluster_id},
                                     {"size", c.member_test_ids.size()},
                                     {"label", c.root_cause_label}});
    return json{
        {"iteration", iteration},
        {"failing", failing},
        {"clusters", clusters_json},
        {"focused", used_focused_loop},
        {"inner_attempts", inner_attempts},
        {"edit_digest", edit_digest},
        {"candidate_hash", candidate_hash},
        {"smith_error", smith_error},
    };
}

json CompileOutcome::to_json() const {
    json log_json = json::array();
    for (const auto& entry : log) log_json.push_back(entry.to_json());
    json out{
        {"status", to_string(status)},
        {"artifact", artifact.to_json()},
        {"artifact_hash", artifact_hash(artifact)},
        {"iterations_used", iterations_used},
        {"continuation", continuation},
        {"log", log_json},
        {"conflicts", conflicts},
    };
    out["final_vpr"] = final_vpr ? json(*final_vpr) : json(nullptr);
    return out;
}

std::string CompileOutcome::log_jsonl() const {
    std::string out;
    for (const auto& entry : log) {
        out += entry.to_json().dump();
        out += "\n";
    }
    return out;
}

VisibleSuite VisibleSuite::from_suite(const Suite& suite) {
    std::vector<std::string> hidden;
    for (const auto& t : suite.tests)
        if (t.visibility != Visibility::visible) hidden.push_back(t.test_id);
    if (!hidden.empty())
        throw IsolationViolation("hidden tests in a visible-only context: " + join(hidden, ", "));
    return VisibleSuite(suite);
}

// -- conflict detection -----------------------------------------------------------

namespace {

std::string effective_scope(const Predicate& p) {
    if (p.turn_scope) return "turn:" + std::to_string(*p.turn_scope);
    return "conversation";
}

bool predicates_contradict(const Predicate& a, const Predicate& b) {
    if (effective_scope(a) != effective_scope(b)) return false;
    auto is_pair = [&](PredicateType x, PredicateType y) {
        return (a.type == x && b.type == y) || (a.type == y && b.type == x);
    };
    if (is_pair(PredicateType::tool_called, PredicateType::tool_not_called))
        return a.args.value("tool", "") == b.args.value("tool", "x");
    if (is_pair(PredicateType::text_contains, PredicateType::text_absent))
        return a.args.value("text", "") == b.args.value("text", "x");
    if (a.type == PredicateType::respond_field_equals &&
        b.type == PredicateType::respond_field_equals)
        return a.args.value("field", "") == b.args.value("field", "x") &&
               a.args.at("value") != b.args.at("value");
    return false;
}

}  // namespace

std::vector<std::string> detect_conflicts(const std::vector<TestCase>& tests) {
    std::map<std::string, std::vector<const TestCase*>> by_conversation;
    for (const auto& t : tests) {
        std::string key = t.fixture_set_id + "\x1f" + join(t.conversation, "\x1e");
        by_conversation[key].push_back(&t);
    }

    std::vector<std::string> conflicts;
    for (const auto& [key, group] : by_conversation) {
        for (size_t i = 0; i < group.size(); ++i) {
            for (size_t j = i + 1; j < group.size(); ++j) {
                for (const auto& pa : group[i]->assertions) {
                    for (const auto& pb : group[j]->assertions) {
                        if (predicates_contradict(pa, pb))
                            conflicts.push_back("tests '" + group[i]->test_id + "' and '" +
                                                group[j]->test_id +
                                                "' assert contradictory predicates " + pa.label() +
                                                " vs " + pb.label() +
                                                " on an identical conversation");
                    }
                }
            }
        }
    }
    std::sort(conflicts.begin(), conflicts.end());
    return conflicts;
}

// -- clustering ------------------------------------------------------------------------

std::vector<FailureCluster> cluster_failures(const std::vector<const TestResult*>& failures) {
    std::map<std::string, FailureCluster> by_key;
    for (const TestResult* result : failures) {
        // Key on the first failing predicate; breach-only failures get their
        // own cluster family.
        std::string type = "contract_breach";
        std::string subject = "respond";
        if (!result->failed_predicates.empty()) {
            const std::string& label = result->failed_predicates.front();
            type = label.substr(0, label.find('('));
            if (!result->failed_subjects.empty()) subject = result->failed_subjects.front();
        }
        std::string key = type + ":" + subject + ":" + result->node_id;
        FailureCluster& cluster = by_key[key];
        if (cluster.cluster_id.empty()) {
            cluster.cluster_id = key;
            cluster.root_cause_label =
                type + " on " + subject + " at node " + result->node_id;
        }
        cluster.member_test_ids.push_back(result->test_id);
        if (cluster.representative_reasons.size() < 3 && !result->reasons.empty())
            cluster.representative_reasons.push_back(result->reasons.front());
    }

    std::vector<FailureCluster> out;
    for (auto& [key, cluster] : by_key) {
        std::sort(cluster.member_test_ids.begin(), cluster.member_test_ids.end());
        out.push_back(std::move(cluster));
    }
    std::sort(out.begin(), out.end(), [](const FailureCluster& a, const FailureCluster& b) {
        if (a.member_test_ids.size() != b.member_test_ids.size())
            return a.member_test_ids.size() > b.member_test_ids.size();
        return a.cluster_id < b.cluster_id;
    });
    return out;
}

// -- compile loop ------------------------------------------------------------------------

namespace {

std::vector<FailureReport> build_failure_reports(const SuiteResult& result,
                                                 const std::vector<TestCase>& tests) {
    std::vector<FailureReport> reports;
    for (const auto& test : tests) {
        auto it = result.results.find(test.test_id);
        if (it == result.results.end() || it->second.status != TestStatus::fail) continue;
        FailureReport report;
        report.test_id = test.test_id;
        report.node_id = test.node_id;
        report.reasons = it->second.reasons;
        report.conversation = test.conversation;
        for (const auto& turn : it->second.trace.turns) {
            std::vector<std::string> sequence;
            for (const auto& call : turn.calls) sequence.push_back(call.tool);
            if (turn.has_respond()) sequence.push_back("respond");
            report.tool_sequences.push_back(std::move(sequence));
        }
        reports.push_back(std::move(report));
    }
    return reports;
}

std::vector<const TestResult*> failing_results(const SuiteResult& result) {
    std::vector<const TestResult*> out;
    for (const auto& [id, r] : result.results)
        if (r.status == TestStatus::fail) out.push_back(&r);
    return out;
}

// Run with a single retry of errored tests. Transient transport failures
// should not burn smith edits.
SuiteResult run_with_error_retry(const std::vector<TestCase>& tests,
                                 const PromptArtifact& artifact, const RunContext& context,
                                 int parallelism) {
    SuiteResult result = run_suite(tests, artifact, context, parallelism);
    if (result.errored == 0) return result;

    std::vector<TestCase> retry;
    for (const auto& t : tests) {
        auto it = result.results.find(t.test_id);
        if (it != result.results.end() && it->second.status == TestStatus::error)
            retry.push_back(t);
    }
    SuiteResult second = run_suite(retry, artifact, context, parallelism);
    for (auto& [id, r] : second.results) {
        auto& slot = result.results.at(id);
        if (slot.status != TestStatus::error) continue;
        result.errored--;
        switch (r.status) {
            case TestStatus::pass: result.passed++; break;
            case TestStatus::fail: result.failed++; break;
            case TestStatus::error: result.errored++; break;
        }
        slot = std::move(r);
    }
    return result;
}

PromptArtifact request_edit(PromptSmith& smith, const Spec& spec,
                            const std::vector<TestCase>& visible_tests,
                            const PromptArtifact& current,
                            const std::vector<FailureReport>& failures,
                            const std::vector<FailureCluster>& clusters, int iteration,
                            const CompileHooks& hooks) {
    PromptEditRequest request;
    request.spec = &spec;
    request.visible_tests = &visible_tests;
    request.current = current;
    request.failures = failures;
    request.clusters = clusters;
    request.iteration = iteration;
    if (hooks.on_smith_request) hooks.on_smith_request(request.to_json());
    PromptArtifact candidate = smith.edit(request);
    candidate.provenance.spec_id = current.provenance.spec_id;
    candidate.provenance.spec_version = current.provenance.spec_version;
    candidate.provenance.parent_hash = artifact_hash(current);
    return candidate;
}

}  // namespace

FocusedLoopResult focused_loop(const PromptArtifact& artifact,
                               const std::vector<TestCase>& failing_tests,
                               PromptSmith& promptsmith, const RunContext& context,
                               int inner_budget, const Spec& spec,
                               const std::vector<TestCase>& visible_tests, int iteration,
                               int parallelism, const CompileHooks& hooks,
                               std::vector<FailureReport> reports,
                               std::vector<FailureCluster> clusters) {
    FocusedLoopResult out;
    out.artifact = artifact;  // best-so-far; attempt 0 fails the whole subset

    PromptArtifact current = artifact;
    SuiteResult subset_result;
    size_t best_failures = failing_tests.size();
    size_t previous_failures = failing_tests.size();
    int non_shrinking_streak = 0;

    for (int attempt = 1; attempt <= inner_budget; ++attempt) {
        out.attempts_used = attempt;
        PromptArtifact candidate;
        try {
            candidate = request_edit(promptsmith, spec, visible_tests, current, reports, clusters,
                                     iteration, hooks);
        } catch (const SmithError&) {
            // A failed edit consumes the attempt and cannot shrink the subset.
            if (++non_shrinking_streak >= 3) break;
            continue;
        }

        subset_result = run_with_error_retry(failing_tests, candidate, context, parallelism);
        size_t failures = failing_set(subset_result).size() +
                          static_cast<size_t>(subset_result.errored);

        if (failures == 0) {
            out.artifact = candidate;
            out.promoted = true;
            return out;
        }
        if (failures < best_failures) {
            best_failures = failures;
            out.artifact = candidate;
        }
        non_shrinking_streak = failures < previous_failures ? 0 : non_shrinking_streak + 1;
        previous_failures = failures;
        current = candidate;
        reports = build_failure_reports(subset_result, failing_tests);
        clusters = cluster_failures(failing_results(subset_result));

        if (non_shrinking_streak >= 3) break;  // stuck: abort early
    }
    return out;
}

CompileOutcome compile(const Spec& spec, const VisibleSuite& visible,
                       const PromptArtifact& seed_artifact, PromptSmith& promptsmith,
                       const RunContext& context, const CompileConfig& config,
                       const std::optional<SplitReport>& split_report,
                       const CompileHooks& hooks) {
    if (config.mode == SuiteMode::benchmark) {
        if (!split_report)
            throw IsolationViolation(
                "benchmark-mode compile requires a split report from test generation");
        if (!split_report->compliant())
            throw IsolationViolation("benchmark-mode compile refused: split policy violations: " +
                                     join(split_report->violations, "; "));
    }

    CompileOutcome outcome;
    outcome.artifact = seed_artifact;
    outcome.continuation = !seed_artifact.provenance.parent_hash.empty();

    outcome.conflicts = detect_conflicts(visible.tests());
    if (!outcome.conflicts.empty()) {
        outcome.status = CompileStatus::conflict_detected;
        return outcome;
    }

    PromptArtifact current = seed_artifact;
    const std::vector<TestCase>& tests = visible.tests();

    for (int iteration = 0; iteration < config.outer_budget; ++iteration) {
        SuiteResult result = run_with_error_retry(tests, current, context, config.parallelism);
        double vpr = result.total() == 0 ? 1.0 : result.pass_fraction();

        if (result.all_pass() || result.total() == 0) {
            outcome.status = CompileStatus::success;
            outcome.artifact = current;
            outcome.final_vpr = vpr;
            outcome.iterations_used = iteration;
            return outcome;
        }

        IterationLogEntry entry;
        entry.iteration = iteration;
        auto failing = failing_set(result);
        entry.failing.assign(failing.begin(), failing.end());
        entry.clusters = cluster_failures(failing_results(result));

        std::string before_hash = artifact_hash(current);
        if (static_cast<int>(failing.size()) < config.focused_threshold &&
            !failing.empty()) {
            entry.used_focused_loop = true;
            std::vector<TestCase> subset;
            for (const auto& t : tests)
                if (failing.count(t.test_id)) subset.push_back(t);
            FocusedLoopResult focused = focused_loop(
                current, subset, promptsmith, context, config.inner_budget, spec, tests,
                iteration, config.parallelism, hooks, build_failure_reports(result, subset),
                entry.clusters);
            entry.inner_attempts = focused.attempts_used;
            current = focused.artifact;
        } else {
            std::vector<FailureReport> reports = build_failure_reports(result, tests);
            try {
                current = request_edit(promptsmith, spec, tests, current, reports, entry.clusters,
                                       iteration, hooks);
            } catch (const SmithError& e) {
                entry.smith_error = e.what();
            }
        }
        std::string after_hash = artifact_hash(current);
        entry.candidate_hash = after_hash;
        entry.edit_digest =
            before_hash == after_hash ? "" : hex16(fnv1a64(before_hash + ">" + after_hash));
        outcome.final_vpr = vpr;
        outcome.log.push_back(entry);
        if (hooks.on_iteration) hooks.on_iteration(entry);
    }

    // The candidate produced by the last iteration has not been measured on
    // the full suite yet; one measurement run decides between success and
    // budget exhaustion so that status success always means VPR 1.0.
    SuiteResult final_result = run_with_error_retry(tests, current, context, config.parallelism);
    outcome.status =
        final_result.all_pass() ? CompileStatus::success : CompileStatus::budget_exhausted;
    outcome.artifact = current;
    outcome.final_vpr = final_result.total() == 0 ? 1.0 : final_result.pass_fraction();
    outcome.iterations_used = config.outer_budget;
    return outcome;
}

}  // namespace tdad
