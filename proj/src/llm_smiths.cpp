#include "tdad/llm_smiths.hpp"

#include "tdad/errors.hpp"
#include "tdad/util.hpp"

namespace tdad {

std::string fill_template(const std::string& text,
                          const std::map<std::string, std::string>& values) {
    std::string out = text;
    for (const auto& [name, value] : values) {
        std::string needle = "{{" + name + "}}";
        size_t pos = 0;
        while ((pos = out.find(needle, pos)) != std::string::npos) {
            out.replace(pos, needle.size(), value);
            pos += value.size();
        }
    }
    return out;
}

std::string default_testsmith_template() {
    return
        "You are TestSmith. Convert the specification below into a behavioral test suite.\n"
        "Rules:\n"
        "- Every test expectation must be derivable from the spec. Cite the node or policy id\n"
        "  that mandates each expectation in the test's `citation` field; if you cannot cite a\n"
        "  clause, do not write the test.\n"
        "- One visible MFT per decision leaf. Add INV paraphrase variants and DIR pairs per\n"
        "  branch condition. Keep the visible fraction between 0.40 and 0.70 and give every\n"
        "  leaf at least one hidden test.\n"
        "- Create deterministic fixtures with canary values for sensitive data.\n"
        "\nGuidelines document:\n{{GUIDELINES}}\n"
        "\nSpecification (YAML):\n{{SPEC_YAML}}\n"
        "\nReply with a single JSON object, no prose:\n"
        "{\"suite\": <suite object>, \"fixtures\": [<fixture set objects>]}\n";
}

std::string default_promptsmith_template() {
    return
        "You are PromptSmith. Improve the agent prompt so the failing tests pass without\n"
        "breaking the passing ones. Identify the minimal edit addressing the largest failure\n"
        "cluster. You may rewrite per-tool description overrides; they are often the best\n"
        "lever for when-to-call guidance.\n"
        "\nSpecification (YAML):\n{{SPEC_YAML}}\n"
        "\nCurrent artifact (JSON):\n{{ARTIFACT_JSON}}\n"
        "\nFailure clusters (largest first):\n{{CLUSTERS_JSON}}\n"
        "\nFailing tests and their trace excerpts:\n{{FAILURES_JSON}}\n"
        "\nReply with a single JSON object, no prose:\n"
        "{\"system_prompt\": \"...\", \"tool_description_overrides\": {\"tool\": \"text\"}}\n";
}

std::string default_mutationsmith_template() {
    return
        "You are MutationSmith. Produce a plausibly faulty variant of the compiled prompt\n"
        "that realizes the mutation intent below while preserving surface plausibility: the\n"
        "kind of prompt a careless developer could ship. Do not mention the mutation.\n"
        "\nCompiled artifact (JSON):\n{{ARTIFACT_JSON}}\n"
        "\nMutation intent:\n{{INTENT_JSON}}\n"
        "\nPrior attempts that failed to change behavior:\n{{RETRY_CONTEXT}}\n"
        "\nReply with a single JSON object, no prose:\n"
        "{\"system_prompt\": \"...\", \"tool_description_overrides\": {\"tool\": \"text\"}}\n";
}

json extract_json_object(const std::string& content) {
    size_t start = content.find('{');
    size_t end = content.rfind('}');
    if (start == std::string::npos || end == std::string::npos || end < start)
        throw SmithError("smith output contains no JSON object");
    return json::parse(content.substr(start, end - start + 1));
}

namespace {

// One stateless invocation with schema-repair retries. `validate` parses the
// JSON into the role's result or throws with a correction message.
template <typename T>
T invoke_with_repair(ChatApi& api, const LlmSmithConfig& config, const std::string& prompt,
                     const std::function<T(const json&)>& validate, int* repairs_logged) {
    json messages = json::array();
    messages.push_back(json{{"role", "user"}, {"content", prompt}});

    std::string last_error;
    for (int attempt = 0; attempt <= config.repair_retries; ++attempt) {
        json request{{"model", config.model}, {"messages", messages}};
        ChatApi::Completion completion;
        try {
            completion = api.complete(request);
        } catch (const BackendError& e) {
            throw SmithError(std::string("smith backend failure: ") + e.what());
        }
        std::string content = completion.message.value("content", "");
        try {
            return validate(extract_json_object(content));
        } catch (const TdadError& e) {
            last_error = e.what();
        } catch (const json::exception& e) {
            last_error = e.what();
        }
        if (repairs_logged) (*repairs_logged)++;
        messages.push_back(completion.message);
        messages.push_back(json{
            {"role", "user"},
            {"content", "Your output failed validation: " + last_error +
                            ". Reply again with corrected JSON only, no prose."}});
    }
    throw SmithError("smith output still invalid after " +
                     std::to_string(config.repair_retries) + " repair retries: " + last_error);
}

}  // namespace

LlmTestSmith::LlmTestSmith(std::shared_ptr<ChatApi> api, LlmSmithConfig config)
    : api_(std::move(api)), config_(std::move(config)) {
    if (config_.template_text.empty()) config_.template_text = default_testsmith_template();
}

GeneratedSuite LlmTestSmith::generate(const Spec& spec, const std::string& guidelines,
                                      std::optional<std::uint64_t> seed) {
    std::string prompt = fill_template(config_.template_text,
                                       {{"GUIDELINES", guidelines},
                                        {"SPEC_YAML", serialize_spec(spec)},
                                        {"SEED", std::to_string(seed.value_or(0))}});

    auto validate = [&](const json& out) -> GeneratedSuite {
        if (!out.contains("suite")) throw SchemaError("missing 'suite'");
        GeneratedSuite result;
        result.suite = Suite::from_json(out.at("suite"));
        if (out.contains("fixtures"))
            for (const auto& fx : out.at("fixtures"))
                result.fixtures.push_back(FixtureSet::from_json(fx));

        auto problems = validate_suite(result.suite, spec);
        // Derivability rule: a test that cites no spec clause is rejected.
        auto known_clause = [&](const std::string& citation) {
            if (spec.node_ids().count(citation)) return true;
            for (const auto& p : spec.policies)
                if (p.id == citation) return true;
            return false;
        };
        for (const auto& t : result.suite.tests) {
            if (t.citation.empty())
                problems.push_back("test '" + t.test_id + "' cites no spec clause");
            else if (!known_clause(t.citation))
                problems.push_back("test '" + t.test_id + "' cites unknown clause '" +
                                   t.citation + "'");
        }
        for (const auto& fx : result.fixtures)
            for (auto& p : validate_fixture_set(fx, spec))
                problems.push_back("fixture set '" + fx.fixture_set_id + "': " + p);
        if (!problems.empty()) throw SchemaError(join(problems, "; "));
        return result;
    };
    return invoke_with_repair<GeneratedSuite>(*api_, config_, prompt, validate, &repairs_used_);
}

namespace {

PromptArtifact parse_artifact_output(const json& out, const Spec& spec,
                                     const PromptArtifact& base) {
    if (!out.contains("system_prompt") || !out.at("system_prompt").is_string())
        throw SchemaError("missing string field 'system_prompt'");
    PromptArtifact artifact = base;
    artifact.system_prompt = out.at("system_prompt").get<std::string>();
    artifact.tool_description_overrides.clear();
    if (out.contains("tool_description_overrides")) {
        const json& overrides = out.at("tool_description_overrides");
        if (!overrides.is_object())
            throw SchemaError("'tool_description_overrides' must be a mapping");
        for (auto it = overrides.begin(); it != overrides.end(); ++it) {
            if (!it.value().is_string())
                throw SchemaError("override for '" + it.key() + "' must be a string");
            artifact.tool_description_overrides[it.key()] = it.value().get<std::string>();
        }
    }
    auto problems = validate_artifact(artifact, spec);
    if (!problems.empty()) throw SchemaError(join(problems, "; "));
    artifact.artifact_version = base.artifact_version + 1;
    return artifact;
}

}  // namespace

LlmPromptSmith::LlmPromptSmith(std::shared_ptr<ChatApi> api, LlmSmithConfig config)
    : api_(std::move(api)), config_(std::move(config)) {
    if (config_.template_text.empty()) config_.template_text = default_promptsmith_template();
}

PromptArtifact LlmPromptSmith::edit(const PromptEditRequest& request) {
    json clusters = json::array();
    for (const auto& c : request.clusters) clusters.push_back(c.to_json());
    json failures = json::array();
    for (const auto& f : request.failures) failures.push_back(f.to_json());

    // The serialized spec here is the sanitized view: no mutation intents.
    std::string prompt =
        fill_template(config_.template_text,
                      {{"SPEC_YAML", request.spec ? json_to_yaml(request.spec_view()) : ""},
                       {"ARTIFACT_JSON", request.current.to_json().dump(2)},
                       {"CLUSTERS_JSON", clusters.dump(2)},
                       {"FAILURES_JSON", failures.dump(2)}});

    auto validate = [&](const json& out) {
        return parse_artifact_output(out, *request.spec, request.current);
    };
    return invoke_with_repair<PromptArtifact>(*api_, config_, prompt, validate, nullptr);
}

LlmMutationSmith::LlmMutationSmith(std::shared_ptr<ChatApi> api, LlmSmithConfig config)
    : api_(std::move(api)), config_(std::move(config)) {
    if (config_.template_text.empty()) config_.template_text = default_mutationsmith_template();
}

PromptArtifact LlmMutationSmith::mutate(const MutationRequest& request) {
    json intent{{"intent_id", request.intent.intent_id},
                {"description", request.intent.description}};
    std::string prompt = fill_template(
        config_.template_text, {{"ARTIFACT_JSON", request.compiled.to_json().dump(2)},
                                {"INTENT_JSON", intent.dump(2)},
                                {"RETRY_CONTEXT", json(request.retry_context).dump(2)}});

    // No spec here: the mutation sandbox holds only the artifact and intent.
    auto validate = [&](const json& out) {
        if (!out.contains("system_prompt") || !out.at("system_prompt").is_string())
            throw SchemaError("missing string field 'system_prompt'");
        PromptArtifact mutant = request.compiled;
        mutant.system_prompt = out.at("system_prompt").get<std::string>();
        mutant.tool_description_overrides.clear();
        if (out.contains("tool_description_overrides")) {
            const json& overrides = out.at("tool_description_overrides");
            if (!overrides.is_object())
                throw SchemaError("'tool_description_overrides' must be a mapping");
            for (auto it = overrides.begin(); it != overrides.end(); ++it)
                mutant.tool_description_overrides[it.key()] = it.value().get<std::string>();
        }
        mutant.artifact_version = request.compiled.artifact_version + 1;
        return mutant;
    };
    return invoke_with_repair<PromptArtifact>(*api_, config_, prompt, validate, nullptr);
}

}  // namespace tdad
