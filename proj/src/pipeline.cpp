#include "tdad/pipeline.hpp"

#include <chrono>

#include "tdad/errors.hpp"
#include "tdad/runtime.hpp"
#include "tdad/util.hpp"

namespace tdad {

namespace {

std::string now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

struct StageOutputs {
    CompileOutcome outcome;
    Suite suite;
    std::optional<double> hpr;
    std::optional<MutationReport> mutation_report;
    fs::path artifact_path;
    std::string slug;
    TokenUsage usage;
};

// Generate, materialize, split-check, compile (sandboxed), evaluate hidden,
// mutate. Shared by the v1 stage and, with a seed artifact, the v2 stage.
StageOutputs run_stage(const Spec& spec, int trial_index, const SmithSet& smiths,
                       AgentBackend& backend, const Workspace& ws, const PipelineConfig& config,
                       std::uint64_t stage_seed, const std::optional<PromptArtifact>& from_artifact) {
    StageOutputs stage;
    stage.slug = suite_slug(spec.id, spec.version) + "-t" + std::to_string(trial_index);

    // Fresh test generation for this trial.
    GeneratedSuite generated =
        smiths.testsmith->generate(spec, config.guidelines, derive_seed(stage_seed, "testsmith"));
    stage.suite = generated.suite;
    materialize_suite(ws, stage.slug, generated.suite, generated.fixtures);

    SplitReport split = split_policy_check(generated.suite, spec);
    write_file((ws.reports_dir() / (stage.slug + "-split.json")).string(),
               split.to_json().dump(2) + "\n");

    FixtureStore fixtures = load_fixture_store(ws.fixtures_dir(stage.slug));
    RunContext context{spec, fixtures, backend, config.compile.run_options};

    // The compiler sees only the visible tree, re-read from disk under the
    // sandbox; the hidden tree is unreadable for the duration.
    Suite visible_only;
    {
        CompilationSandbox sandbox(ws.visible_dir(stage.slug), ws.hidden_dir(stage.slug),
                                   ws.fixtures_dir(stage.slug));
        visible_only = load_suite_tree(ws.visible_dir(stage.slug), Visibility::visible);
        VisibleSuite visible = VisibleSuite::from_suite(visible_only);

        PromptArtifact seed_artifact = from_artifact ? *from_artifact : render_seed_artifact(spec);
        if (from_artifact) {
            stage.outcome = evolve(*from_artifact, spec, visible, *smiths.promptsmith, context,
                                   config.compile, split);
        } else {
            stage.outcome = compile(spec, visible, seed_artifact, *smiths.promptsmith, context,
                                    config.compile, split);
        }
    }

    stage.artifact_path = store_artifact(ws, stage.slug, stage.outcome.artifact);
    write_file((ws.reports_dir() / (stage.slug + "-compile.jsonl")).string(),
               stage.outcome.log_jsonl());

    if (stage.outcome.status == CompileStatus::success) {
        Suite hidden = load_suite_tree(ws.hidden_dir(stage.slug), Visibility::hidden);
        if (!hidden.tests.empty()) {
            SuiteResult hidden_result = run_suite(hidden.tests, stage.outcome.artifact, context,
                                                  config.compile.parallelism);
            stage.hpr = pass_rate(hidden_result.passed, hidden_result.total()).value();
            write_file((ws.reports_dir() / (stage.slug + "-hidden.json")).string(),
                       hidden_result.canonical_json().dump(2) + "\n");
        }

        if (!spec.mutation_intents.empty()) {
            MutationConfig mutation_config = config.mutation;
            mutation_config.parallelism = config.compile.parallelism;
            MutationReport report =
                run_mutation_suite(stage.outcome.artifact, spec.mutation_intents,
                                   visible_only.tests, *smiths.mutationsmith, context,
                                   mutation_config);
            write_file((ws.reports_dir() / (stage.slug + "-mutation.json")).string(),
                       report.to_json().dump(2) + "\n");
            stage.mutation_report = std::move(report);
        }
    }
    return stage;
}

}  // namespace

TrialOutputs run_trial(const Spec& spec, const std::optional<Spec>& v2_spec, int trial_index,
                       const SmithSet& smiths, AgentBackend& backend, const Workspace& ws,
                       const PipelineConfig& config) {
    std::uint64_t trial_seed =
        derive_seed(config.master_seed, "trial-" + std::to_string(trial_index));

    StageOutputs v1 = run_stage(spec, trial_index, smiths, backend, ws, config,
                                derive_seed(trial_seed, "v1"), std::nullopt);

    TrialRecord record;
    record.spec_id = spec.id;
    record.spec_version = spec.version;
    record.trial_index = trial_index;
    record.compile_status = to_string(v1.outcome.status);
    record.vpr = v1.outcome.final_vpr;
    record.hpr = v1.hpr;
    if (v1.mutation_report) record.ms = v1.mutation_report->mutation_score;
    record.iterations = v1.outcome.iterations_used;
    record.master_seed = config.master_seed;
    record.trial_seed = trial_seed;
    record.timestamp = config.deterministic ? "" : now_iso8601();

    TrialOutputs out;
    out.slug = v1.slug;
    out.artifact_path = v1.artifact_path;
    out.compile_outcome = v1.outcome;
    out.mutation_report = v1.mutation_report;

    // v1 -> v2 continuation within the same trial.
    if (v2_spec && v1.outcome.status == CompileStatus::success) {
        StageOutputs v2 = run_stage(*v2_spec, trial_index, smiths, backend, ws, config,
                                    derive_seed(trial_seed, "v2"), v1.outcome.artifact);

        TrialRecord v2_record = record;
        v2_record.spec_version = v2_spec->version;
        v2_record.compile_status = to_string(v2.outcome.status);
        v2_record.vpr = v2.outcome.final_vpr;
        v2_record.hpr = v2.hpr;
        v2_record.ms = v2.mutation_report ? v2.mutation_report->mutation_score : std::nullopt;
        v2_record.iterations = v2.outcome.iterations_used;

        if (v2.outcome.status == CompileStatus::success) {
            SpecDelta delta = diff_specs(spec, *v2_spec);
            try {
                Suite invariant = select_invariant_suite(v1.suite, delta);
                FixtureStore v1_fixtures = load_fixture_store(ws.fixtures_dir(v1.slug));
                RunContext context{spec, v1_fixtures, backend, config.compile.run_options};
                SursResult surs = compute_surs(v2.outcome.artifact, invariant, context,
                                               config.compile.parallelism);
                v2_record.surs = surs.score;
                write_file((ws.reports_dir() / (v2.slug + "-surs.json")).string(),
                           surs.to_json().dump(2) + "\n");
            } catch (const EmptyInvariantSetError&) {
                v2_record.surs = std::nullopt;
            }
        }
        out.v2_record = v2_record;
    }

    out.record = record;
    return out;
}

std::vector<TrialRecord> run_all(const Spec& spec, const std::optional<Spec>& v2_spec,
                                 const SmithSet& smiths, AgentBackend& backend,
                                 const Workspace& ws, const PipelineConfig& config) {
    std::vector<TrialRecord> records;
    for (int trial = 0; trial < config.trials; ++trial) {
        TrialOutputs outputs = run_trial(spec, v2_spec, trial, smiths, backend, ws, config);
        records.push_back(outputs.record);
        if (outputs.v2_record) records.push_back(*outputs.v2_record);
    }

    fs::create_directories(ws.reports_dir());
    write_file((ws.reports_dir() / "ledger.jsonl").string(), render_ledger(records));
    AggregateReport aggregate = aggregate_trials(records);
    write_file((ws.reports_dir() / "aggregate.json").string(),
               aggregate.to_json().dump(2) + "\n");
    write_file((ws.reports_dir() / "aggregate.txt").string(), aggregate.render_table());
    return records;
}

}  // namespace tdad
