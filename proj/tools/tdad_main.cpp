// tdad: operator surface for the spec -> tests -> compile -> evaluate pipeline.
//
// Exit codes: 0 success; 1 pipeline error (the originating error name is
// printed); 2+ usage errors; compile/evolve: 3 budget exhausted, 4 conflict
// detected; mutate: 3 score below 1.0, 4 score undefined; rpr: 3 gate failed.

#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "tdad/compiler.hpp"
#include "tdad/errors.hpp"
#include "tdad/evolution.hpp"
#include "tdad/http_backend.hpp"
#include "tdad/llm_smiths.hpp"
#include "tdad/metrics.hpp"
#include "tdad/mutation.hpp"
#include "tdad/pipeline.hpp"
#include "tdad/runtime.hpp"
#include "tdad/util.hpp"
#include "tdad/workspace.hpp"

namespace {

using namespace tdad;

struct CliOptions {
    std::string config_path;
    std::string workspace = "workspace";
    std::string backend_kind = "scripted";  // scripted | http
    std::string script_path;
    std::string smiths_kind = "reference";  // reference | llm
    std::string patch_table_path;
    std::string mutation_table_path;
    std::string guidelines_path;
    std::string api_url;
    std::string model = "default-model";
    std::string mode = "benchmark";
    int budget = 6;
    int theta = 10;
    int inner_budget = 8;
    int activation_attempts = 5;
    int parallelism = 0;
    int tool_call_cap = 16;
    int trials = 3;
    std::uint64_t master_seed = 0;
};

// Precedence: defaults, then config file, then explicit flags. `overridden`
// reports whether a flag was given on the command line.
void apply_config_file(CliOptions& options,
                       const std::function<bool(const std::string&)>& overridden) {
    if (options.config_path.empty()) return;
    json config = yaml_to_json(read_file(options.config_path));
    if (!config.is_object()) throw ConfigError("config file is not a YAML mapping");
    auto str = [&](const char* key, std::string& out) {
        if (!overridden(key) && config.contains(key)) out = config.at(key).get<std::string>();
    };
    auto num = [&](const char* key, auto& out) {
        if (!overridden(key) && config.contains(key))
            out = config.at(key).get<std::decay_t<decltype(out)>>();
    };
    str("backend", options.backend_kind);
    str("script", options.script_path);
    str("smiths", options.smiths_kind);
    str("patch_table", options.patch_table_path);
    str("mutation_table", options.mutation_table_path);
    str("guidelines", options.guidelines_path);
    str("api_url", options.api_url);
    str("model", options.model);
    str("mode", options.mode);
    num("budget", options.budget);
    num("theta", options.theta);
    num("inner_budget", options.inner_budget);
    num("activation_attempts", options.activation_attempts);
    num("parallelism", options.parallelism);
    num("tool_call_cap", options.tool_call_cap);
    num("trials", options.trials);
    num("master_seed", options.master_seed);
}

CompileConfig compile_config(const CliOptions& options) {
    CompileConfig config;
    config.outer_budget = options.budget;
    config.focused_threshold = options.theta;
    config.inner_budget = options.inner_budget;
    config.parallelism = options.parallelism;
    config.mode = options.mode == "production" ? SuiteMode::production : SuiteMode::benchmark;
    config.run_options.tool_call_cap = options.tool_call_cap;
    return config;
}

std::unique_ptr<AgentBackend> make_backend(const CliOptions& options) {
    if (options.backend_kind == "scripted") {
        if (options.script_path.empty())
            throw ConfigError("scripted backend needs --script <behavior table yaml>");
        return std::make_unique<ScriptedBackend>(
            BehaviorScript::from_yaml(read_file(options.script_path)));
    }
    if (options.backend_kind == "http") {
        HttpEndpoint endpoint = resolve_endpoint(options.api_url, options.model);
        auto api = std::make_shared<HttpChatApi>(endpoint);
        return std::make_unique<HttpBackend>(api, options.model);
    }
    throw ConfigError("unknown backend '" + options.backend_kind + "' (scripted|http)");
}

struct SmithBundle {
    std::unique_ptr<TestSmith> testsmith;
    std::unique_ptr<PromptSmith> promptsmith;
    std::unique_ptr<MutationSmith> mutationsmith;

    SmithSet set() {
        return SmithSet{testsmith.get(), promptsmith.get(), mutationsmith.get()};
    }
};

SmithBundle make_smiths(const CliOptions& options) {
    SmithBundle bundle;
    if (options.smiths_kind == "reference") {
        bundle.testsmith = std::make_unique<ReferenceTestSmith>();
        if (!options.patch_table_path.empty())
            bundle.promptsmith = std::make_unique<ReferencePromptSmith>(
                ReferencePromptSmith::from_yaml(read_file(options.patch_table_path)));
        else
            bundle.promptsmith =
                std::make_unique<ReferencePromptSmith>(std::vector<PromptPatchRule>{});
        if (!options.mutation_table_path.empty())
            bundle.mutationsmith = std::make_unique<ReferenceMutationSmith>(
                ReferenceMutationSmith::from_yaml(read_file(options.mutation_table_path)));
        else
            bundle.mutationsmith = std::make_unique<ReferenceMutationSmith>(
                std::map<std::string, std::vector<MutationVariant>>{});
        return bundle;
    }
    if (options.smiths_kind == "llm") {
        HttpEndpoint endpoint = resolve_endpoint(options.api_url, options.model);
        auto api = std::make_shared<HttpChatApi>(endpoint);
        LlmSmithConfig smith_config;
        smith_config.model = options.model;
        bundle.testsmith = std::make_unique<LlmTestSmith>(api, smith_config);
        bundle.promptsmith = std::make_unique<LlmPromptSmith>(api, smith_config);
        bundle.mutationsmith = std::make_unique<LlmMutationSmith>(api, smith_config);
        return bundle;
    }
    throw ConfigError("unknown smiths '" + options.smiths_kind + "' (reference|llm)");
}

std::string load_guidelines(const CliOptions& options) {
    if (options.guidelines_path.empty()) return "";
    return read_file(options.guidelines_path);
}

Spec load_spec(const std::string& path) { return parse_spec(read_file(path)); }

Suite load_full_suite(const Workspace& ws, const std::string& slug) {
    Suite visible = load_suite_tree(ws.visible_dir(slug), Visibility::visible);
    Suite hidden = load_suite_tree(ws.hidden_dir(slug), Visibility::hidden);
    Suite merged = visible;
    merged.tests.insert(merged.tests.end(), hidden.tests.begin(), hidden.tests.end());
    return merged;
}

int cmd_validate(const std::string& spec_path) {
    Spec spec = load_spec(spec_path);
    ValidationReport report = validate_depth(spec);
    std::cout << "spec '" << spec.id << "' v" << spec.version << ": valid, "
              << report.node_count << " decision nodes, " << spec.tools.size() << " tools, "
              << spec.policies.size() << " policies, " << spec.mutation_intents.size()
              << " mutation intents\n";
    for (const auto& warning : report.warnings) std::cout << "warning: " << warning << "\n";
    return 0;
}

int cmd_gen_tests(const CliOptions& options, const std::string& spec_path,
                  std::optional<std::uint64_t> seed) {
    Spec spec = load_spec(spec_path);
    SmithBundle smiths = make_smiths(options);
    GeneratedSuite generated =
        smiths.testsmith->generate(spec, load_guidelines(options), seed);

    Workspace ws{options.workspace};
    std::string slug = suite_slug(spec.id, spec.version);
    materialize_suite(ws, slug, generated.suite, generated.fixtures);
    SplitReport split = split_policy_check(generated.suite, spec);
    write_file((ws.reports_dir() / (slug + "-split.json")).string(),
               split.to_json().dump(2) + "\n");

    std::cout << "generated " << generated.suite.tests.size() << " tests for " << slug << " ("
              << split.visible_count << " visible / " << split.hidden_count
              << " hidden, visible fraction " << format3(split.visible_fraction) << ")\n";
    for (const auto& v : split.violations) std::cout << "split violation: " << v << "\n";
    std::cout << "trees: " << ws.visible_dir(slug).string() << " , "
              << ws.hidden_dir(slug).string() << "\n";
    return split.compliant() ? 0 : 3;
}

int report_compile_outcome(const CompileOutcome& outcome, const fs::path& artifact_path,
                           const fs::path& log_path) {
    std::cout << "status: " << to_string(outcome.status) << "\n";
    if (outcome.final_vpr) std::cout << "final VPR: " << format3(*outcome.final_vpr) << "\n";
    std::cout << "iterations: " << outcome.iterations_used << "\n";
    std::cout << "artifact: " << artifact_path.string() << "\n";
    std::cout << "iteration log: " << log_path.string() << "\n";
    for (const auto& conflict : outcome.conflicts) std::cout << "conflict: " << conflict << "\n";
    switch (outcome.status) {
        case CompileStatus::success: return 0;
        case CompileStatus::budget_exhausted: return 3;
        case CompileStatus::conflict_detected: return 4;
    }
    return 1;
}

int cmd_compile(const CliOptions& options, const std::string& spec_path,
                const std::string& seed_artifact_path) {
    Spec spec = load_spec(spec_path);
    Workspace ws{options.workspace};
    std::string slug = suite_slug(spec.id, spec.version);

    std::optional<SplitReport> split;
    fs::path split_path = ws.reports_dir() / (slug + "-split.json");
    if (fs::exists(split_path))
        split = SplitReport::from_json(json::parse(read_file(split_path.string())));

    auto backend = make_backend(options);
    SmithBundle smiths = make_smiths(options);
    FixtureStore fixtures = load_fixture_store(ws.fixtures_dir(slug));
    CompileConfig config = compile_config(options);
    RunContext context{spec, fixtures, *backend, config.run_options};

    CompileOutcome outcome;
    {
        CompilationSandbox sandbox(ws.visible_dir(slug), ws.hidden_dir(slug),
                                   ws.fixtures_dir(slug));
        Suite visible_tree = load_suite_tree(ws.visible_dir(slug), Visibility::visible);
        VisibleSuite visible = VisibleSuite::from_suite(visible_tree);
        PromptArtifact seed = seed_artifact_path.empty()
                                  ? render_seed_artifact(spec)
                                  : load_artifact(seed_artifact_path);
        outcome = compile(spec, visible, seed, *smiths.promptsmith, context, config, split);
    }

    fs::path artifact_path = store_artifact(ws, slug, outcome.artifact);
    fs::path log_path = ws.reports_dir() / (slug + "-compile.jsonl");
    write_file(log_path.string(), outcome.log_jsonl());
    return report_compile_outcome(outcome, artifact_path, log_path);
}

int cmd_eval_hidden(const CliOptions& options, const std::string& artifact_path,
                    const std::string& spec_path) {
    Spec spec = load_spec(spec_path);
    Workspace ws{options.workspace};
    std::string slug = suite_slug(spec.id, spec.version);

    PromptArtifact artifact = load_artifact(artifact_path);
    Suite hidden = load_suite_tree(ws.hidden_dir(slug), Visibility::hidden);
    auto backend = make_backend(options);
    FixtureStore fixtures = load_fixture_store(ws.fixtures_dir(slug));
    RunContext context{spec, fixtures, *backend, RunOptions{options.tool_call_cap}};

    SuiteResult result = run_suite(hidden.tests, artifact, context, options.parallelism);
    double hpr = pass_rate(result.passed, result.total()).value();
    fs::path out_path = ws.reports_dir() / (slug + "-hidden.json");
    write_file(out_path.string(), result.canonical_json().dump(2) + "\n");
    std::cout << "hidden tests: " << result.passed << "/" << result.total()
              << " passed, HPR " << format3(hpr) << "\n";
    std::cout << "report: " << out_path.string() << "\n";
    return 0;
}

int cmd_mutate(const CliOptions& options, const std::string& artifact_path,
               const std::string& spec_path) {
    Spec spec = load_spec(spec_path);
    Workspace ws{options.workspace};
    std::string slug = suite_slug(spec.id, spec.version);

    PromptArtifact artifact = load_artifact(artifact_path);
    Suite visible = load_suite_tree(ws.visible_dir(slug), Visibility::visible);
    auto backend = make_backend(options);
    SmithBundle smiths = make_smiths(options);
    FixtureStore fixtures = load_fixture_store(ws.fixtures_dir(slug));
    RunContext context{spec, fixtures, *backend, RunOptions{options.tool_call_cap}};

    MutationConfig config;
    config.activation_attempts = options.activation_attempts;
    config.parallelism = options.parallelism;
    MutationReport report = run_mutation_suite(artifact, spec.mutation_intents, visible.tests,
                                               *smiths.mutationsmith, context, config);

    fs::path out_path = ws.reports_dir() / (slug + "-mutation.json");
    write_file(out_path.string(), report.to_json().dump(2) + "\n");
    for (const auto& record : report.records) {
        std::cout << record.intent_id << ": " << to_string(record.status) << " (attempts "
                  << record.attempts_used << ")";
        if (!record.killing_test_ids.empty())
            std::cout << " killed by " << join(record.killing_test_ids, ", ");
        std::cout << "\n";
    }
    if (report.mutation_score)
        std::cout << "mutation score: " << format3(*report.mutation_score) << " ("
                  << report.killed << " killed / " << report.killed + report.survived
                  << " valid)\n";
    else
        std::cout << "mutation score: undefined (no activating mutants)\n";
    std::cout << report.footer() << "\n";
    std::cout << "report: " << out_path.string() << "\n";

    if (!report.mutation_score) return 4;
    return *report.mutation_score >= 1.0 ? 0 : 3;
}

int cmd_evolve(const CliOptions& options, const std::string& v1_artifact_path,
               const std::string& v2_spec_path) {
    Spec v2_spec = load_spec(v2_spec_path);
    Workspace ws{options.workspace};
    std::string slug = suite_slug(v2_spec.id, v2_spec.version);

    std::optional<SplitReport> split;
    fs::path split_path = ws.reports_dir() / (slug + "-split.json");
    if (fs::exists(split_path))
        split = SplitReport::from_json(json::parse(read_file(split_path.string())));

    PromptArtifact v1_artifact = load_artifact(v1_artifact_path);
    auto backend = make_backend(options);
    SmithBundle smiths = make_smiths(options);
    FixtureStore fixtures = load_fixture_store(ws.fixtures_dir(slug));
    CompileConfig config = compile_config(options);
    RunContext context{v2_spec, fixtures, *backend, config.run_options};

    CompileOutcome outcome;
    {
        CompilationSandbox sandbox(ws.visible_dir(slug), ws.hidden_dir(slug),
                                   ws.fixtures_dir(slug));
        Suite visible_tree = load_suite_tree(ws.visible_dir(slug), Visibility::visible);
        VisibleSuite visible = VisibleSuite::from_suite(visible_tree);
        outcome = evolve(v1_artifact, v2_spec, visible, *smiths.promptsmith, context, config,
                         split);
    }

    fs::path artifact_path = store_artifact(ws, slug, outcome.artifact);
    fs::path log_path = ws.reports_dir() / (slug + "-compile.jsonl");
    write_file(log_path.string(), outcome.log_jsonl());
    return report_compile_outcome(outcome, artifact_path, log_path);
}

int cmd_surs(const CliOptions& options, const std::string& v2_artifact_path,
             const std::string& v1_spec_path, const std::string& v2_spec_path) {
    Spec v1_spec = load_spec(v1_spec_path);
    Spec v2_spec = load_spec(v2_spec_path);
    Workspace ws{options.workspace};
    std::string v1_slug = suite_slug(v1_spec.id, v1_spec.version);

    SpecDelta delta = diff_specs(v1_spec, v2_spec);
    Suite v1_suite = load_full_suite(ws, v1_slug);
    Suite invariant = select_invariant_suite(v1_suite, delta);

    PromptArtifact v2_artifact = load_artifact(v2_artifact_path);
    auto backend = make_backend(options);
    FixtureStore fixtures = load_fixture_store(ws.fixtures_dir(v1_slug));
    RunContext context{v1_spec, fixtures, *backend, RunOptions{options.tool_call_cap}};

    SursResult surs = compute_surs(v2_artifact, invariant, context, options.parallelism);
    fs::path out_path =
        ws.reports_dir() / (suite_slug(v2_spec.id, v2_spec.version) + "-surs.json");
    write_file(out_path.string(), surs.to_json().dump(2) + "\n");
    std::cout << "SURS: " << format3(surs.score) << " (" << surs.passed << "/" << surs.total
              << " invariant tests preserved)\n";
    for (const auto& regression : surs.regressions)
        std::cout << "regression: " << regression << "\n";
    std::cout << "report: " << out_path.string() << "\n";
    return 0;
}

int cmd_rpr(const CliOptions& options, const std::string& artifact_path,
            const std::string& spec_path, int n, double tau, const std::string& tree) {
    Spec spec = load_spec(spec_path);
    Workspace ws{options.workspace};
    std::string slug = suite_slug(spec.id, spec.version);

    PromptArtifact artifact = load_artifact(artifact_path);
    Suite suite = tree == "hidden" ? load_suite_tree(ws.hidden_dir(slug), Visibility::hidden)
                                   : load_suite_tree(ws.visible_dir(slug), Visibility::visible);
    auto backend = make_backend(options);
    FixtureStore fixtures = load_fixture_store(ws.fixtures_dir(slug));
    RunContext context{spec, fixtures, *backend, RunOptions{options.tool_call_cap}};

    bool all_pass = true;
    json per_test = json::array();
    for (const auto& test : suite.tests) {
        std::vector<bool> runs;
        for (int i = 0; i < n; ++i) {
            SuiteResult result = run_suite({test}, artifact, context, 1);
            runs.push_back(result.all_pass());
        }
        RprOutcome outcome = rpr_gate(runs, tau);
        all_pass = all_pass && outcome.gate_pass;
        json row = outcome.to_json();
        row["test_id"] = test.test_id;
        per_test.push_back(row);
        std::cout << test.test_id << ": RPR " << format3(outcome.rpr) << " over " << n
                  << " runs, gate " << (outcome.gate_pass ? "pass" : "fail") << "\n";
    }
    fs::path out_path = ws.reports_dir() / (slug + "-rpr.json");
    write_file(out_path.string(), per_test.dump(2) + "\n");
    std::cout << "report: " << out_path.string() << "\n";
    return all_pass ? 0 : 3;
}

int cmd_report(const std::string& ledger_path) {
    std::vector<TrialRecord> records = parse_ledger(read_file(ledger_path));
    AggregateReport aggregate = aggregate_trials(records);
    std::cout << aggregate.render_table();
    return 0;
}

int cmd_run_all(const CliOptions& options, const std::string& spec_path,
                const std::string& v2_spec_path) {
    Spec spec = load_spec(spec_path);
    std::optional<Spec> v2_spec;
    if (!v2_spec_path.empty()) v2_spec = load_spec(v2_spec_path);

    Workspace ws{options.workspace};
    auto backend = make_backend(options);
    SmithBundle smiths = make_smiths(options);

    PipelineConfig config;
    config.trials = options.trials;
    config.master_seed = options.master_seed;
    config.compile = compile_config(options);
    config.mutation.activation_attempts = options.activation_attempts;
    config.guidelines = load_guidelines(options);
    config.deterministic = options.backend_kind == "scripted" &&
                           options.smiths_kind == "reference";

    std::cout << "run-all: spec " << spec.id << ", trials " << config.trials
              << ", master seed " << config.master_seed << ", backend "
              << options.backend_kind << ", smiths " << options.smiths_kind << "\n";

    std::vector<TrialRecord> records =
        run_all(spec, v2_spec, smiths.set(), *backend, ws, config);

    std::cout << aggregate_trials(records).render_table();
    std::cout << "ledger: " << (ws.reports_dir() / "ledger.jsonl").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"test-driven agent prompt compilation pipeline"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may appear after the subcommand

    CliOptions options;
    std::map<std::string, CLI::Option*> flag_for;
    app.add_option("--config", options.config_path, "YAML config file (flags override it)");
    flag_for["workspace"] =
        app.add_option("--workspace", options.workspace, "workspace directory");
    flag_for["backend"] =
        app.add_option("--backend", options.backend_kind, "agent backend: scripted|http");
    flag_for["script"] = app.add_option("--script", options.script_path,
                                        "behavior table for the scripted backend");
    flag_for["smiths"] =
        app.add_option("--smiths", options.smiths_kind, "smith implementations: reference|llm");
    flag_for["patch_table"] = app.add_option("--patch-table", options.patch_table_path,
                                             "reference promptsmith patch table");
    flag_for["mutation_table"] = app.add_option("--mutation-table", options.mutation_table_path,
                                                "reference mutationsmith transform table");
    flag_for["guidelines"] =
        app.add_option("--guidelines", options.guidelines_path, "testsmith guidelines document");
    flag_for["api_url"] =
        app.add_option("--api-url", options.api_url, "chat-completion endpoint base URL");
    flag_for["model"] =
        app.add_option("--model", options.model, "model id for http backend / llm smiths");
    flag_for["mode"] = app.add_option("--mode", options.mode, "benchmark|production");
    flag_for["budget"] = app.add_option("--budget", options.budget, "outer compile iterations (B)");
    flag_for["theta"] = app.add_option("--theta", options.theta, "focused-loop threshold");
    flag_for["inner_budget"] =
        app.add_option("--inner-budget", options.inner_budget, "focused-loop attempts");
    flag_for["activation_attempts"] = app.add_option(
        "--activation-attempts", options.activation_attempts, "mutation activation attempts (k)");
    flag_for["parallelism"] =
        app.add_option("--parallelism", options.parallelism, "worker threads (0 = auto)");
    flag_for["tool_call_cap"] =
        app.add_option("--tool-call-cap", options.tool_call_cap, "per-turn tool call cap");

    std::string spec_path, v2_spec_path, artifact_path, seed_artifact_path, ledger_path;
    std::string v1_spec_path, rpr_tree = "visible";
    std::optional<std::uint64_t> gen_seed;
    int rpr_n = 10;
    double rpr_tau = 0.9;

    CLI::App* validate = app.add_subcommand("validate", "parse and validate a spec");
    validate->add_option("spec", spec_path)->required();

    CLI::App* gen = app.add_subcommand("gen-tests", "generate a test suite from a spec");
    gen->add_option("spec", spec_path)->required();
    std::uint64_t gen_seed_value = 0;
    CLI::Option* gen_seed_opt = gen->add_option("--seed", gen_seed_value, "generation seed");

    CLI::App* compile_cmd = app.add_subcommand("compile", "compile against the visible suite");
    compile_cmd->add_option("spec", spec_path)->required();
    compile_cmd->add_option("--seed-artifact", seed_artifact_path,
                            "starting artifact (default: rendered from the spec)");

    CLI::App* eval_hidden = app.add_subcommand("eval-hidden", "hidden pass rate for an artifact");
    eval_hidden->add_option("artifact", artifact_path)->required();
    eval_hidden->add_option("--spec", spec_path)->required();

    CLI::App* mutate = app.add_subcommand("mutate", "mutation-score the visible suite");
    mutate->add_option("artifact", artifact_path)->required();
    mutate->add_option("--spec", spec_path)->required();

    CLI::App* evolve_cmd = app.add_subcommand("evolve", "continue a v1 artifact onto a v2 spec");
    evolve_cmd->add_option("v1_artifact", artifact_path)->required();
    evolve_cmd->add_option("v2_spec", v2_spec_path)->required();

    CLI::App* surs_cmd = app.add_subcommand("surs", "regression score over v1 invariant tests");
    surs_cmd->add_option("v2_artifact", artifact_path)->required();
    surs_cmd->add_option("--v1-spec", v1_spec_path)->required();
    surs_cmd->add_option("--v2-spec", v2_spec_path)->required();

    CLI::App* rpr_cmd = app.add_subcommand("rpr", "reliability pass rate over N reruns");
    rpr_cmd->add_option("artifact", artifact_path)->required();
    rpr_cmd->add_option("--spec", spec_path)->required();
    rpr_cmd->add_option("--n", rpr_n, "reruns per test");
    rpr_cmd->add_option("--tau", rpr_tau, "gate threshold");
    rpr_cmd->add_option("--tree", rpr_tree, "visible|hidden");

    CLI::App* report_cmd = app.add_subcommand("report", "aggregate a trial ledger");
    report_cmd->add_option("ledger", ledger_path)->required();

    CLI::App* run_all_cmd =
        app.add_subcommand("run-all", "full benchmark pipeline, fresh tests per trial");
    run_all_cmd->add_option("spec", spec_path)->required();
    run_all_cmd->add_option("--v2-spec", v2_spec_path, "also evolve onto this spec per trial");
    flag_for["trials"] = run_all_cmd->add_option("--trials", options.trials, "independent trials");
    flag_for["master_seed"] =
        run_all_cmd->add_option("--master-seed", options.master_seed, "master seed");

    CLI11_PARSE(app, argc, argv);

    try {
        apply_config_file(options, [&](const std::string& key) {
            auto it = flag_for.find(key);
            return it != flag_for.end() && it->second->count() > 0;
        });
        if (gen_seed_opt->count() > 0) gen_seed = gen_seed_value;

        if (*validate) return cmd_validate(spec_path);
        if (*gen) return cmd_gen_tests(options, spec_path, gen_seed);
        if (*compile_cmd) return cmd_compile(options, spec_path, seed_artifact_path);
        if (*eval_hidden) return cmd_eval_hidden(options, artifact_path, spec_path);
        if (*mutate) return cmd_mutate(options, artifact_path, spec_path);
        if (*evolve_cmd) return cmd_evolve(options, artifact_path, v2_spec_path);
        if (*surs_cmd) return cmd_surs(options, artifact_path, v1_spec_path, v2_spec_path);
        if (*rpr_cmd) return cmd_rpr(options, artifact_path, spec_path, rpr_n, rpr_tau, rpr_tree);
        if (*report_cmd) return cmd_report(ledger_path);
        if (*run_all_cmd) return cmd_run_all(options, spec_path, v2_spec_path);
    } catch (const TdadError& e) {
        std::cerr << e.kind() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
