#pragma once

#include <memory>
#include <string>

#include "tdad/http_backend.hpp"
#include "tdad/smiths.hpp"

namespace tdad {

// Template text with {{NAME}} placeholders.
std::string fill_template(const std::string& text,
                          const std::map<std::string, std::string>& values);

// Built-in role prompt templates, used when no template file is configured.
std::string default_testsmith_template();
std::string default_promptsmith_template();
std::string default_mutationsmith_template();

struct LlmSmithConfig {
    std::string model;
    std::string template_text;  // role prompt with placeholders
    int repair_retries = 2;     // schema-repair attempts on malformed output
};

// Shared adapter plumbing: every call is a fresh stateless invocation (a new
// message list, no session carryover between roles or trials). Output is
// parsed and validated into the role's return type, with up to
// repair_retries corrective round trips before SmithError.
class LlmTestSmith : public TestSmith {
public:
    LlmTestSmith(std::shared_ptr<ChatApi> api, LlmSmithConfig config);
    GeneratedSuite generate(const Spec& spec, const std::string& guidelines,
                            std::optional<std::uint64_t> seed) override;

    int repairs_used() const { return repairs_used_; }

private:
    std::shared_ptr<ChatApi> api_;
    LlmSmithConfig config_;
    int repairs_used_ = 0;
};

class LlmPromptSmith : public PromptSmith {
public:
    LlmPromptSmith(std::shared_ptr<ChatApi> api, LlmSmithConfig config);
    PromptArtifact edit(const PromptEditRequest& request) override;

private:
    std::shared_ptr<ChatApi> api_;
    LlmSmithConfig config_;
};

class LlmMutationSmith : public MutationSmith {
public:
    LlmMutationSmith(std::shared_ptr<ChatApi> api, LlmSmithConfig config);
    PromptArtifact mutate(const MutationRequest& request) override;

private:
    std::shared_ptr<ChatApi> api_;
    LlmSmithConfig config_;
};

// Extracts the first JSON object from model output, tolerating code fences.
json extract_json_object(const std::string& content);

}  // namespace tdad
