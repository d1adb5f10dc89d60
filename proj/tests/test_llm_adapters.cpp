#include <doctest.h>

#include <cstdlib>

#include <httplib.h>

#include "helpers.hpp"
#include "tdad/errors.hpp"
#include "tdad/http_backend.hpp"
#include "tdad/llm_smiths.hpp"
#include "tdad/runtime.hpp"

using namespace tdad;
using namespace tdad::testing;

namespace {

// Scripted ChatApi double: pops canned completions and records every request.
class FakeChatApi : public ChatApi {
public:
    explicit FakeChatApi(std::vector<json> messages) : scripted_(std::move(messages)) {}

    Completion complete(const json& request) override {
        requests.push_back(request);
        if (cursor_ >= scripted_.size()) throw BackendError("fake api exhausted");
        Completion out;
        out.message = scripted_[cursor_++];
        return out;
    }

    static json text_message(const std::string& content) {
        return json{{"role", "assistant"}, {"content", content}};
    }

    std::vector<json> requests;

private:
    std::vector<json> scripted_;
    size_t cursor_ = 0;
};

json minimal_suite_json(const Spec& spec) {
    ReferenceTestSmith smith;
    GeneratedSuite generated = smith.generate(spec, "", 3);
    json out{{"suite", generated.suite.to_json()}, {"fixtures", json::array()}};
    for (const auto& fx : generated.fixtures) out["fixtures"].push_back(fx.to_json());
    return out;
}

}  // namespace

TEST_SUITE("llm_adapters") {

TEST_CASE("testsmith adapter repairs one malformed output and logs it") {
    Spec spec = load_mini_spec_v1();
    json valid = minimal_suite_json(spec);
    auto api = std::make_shared<FakeChatApi>(std::vector<json>{
        FakeChatApi::text_message("{\"suite\": {\"oops\": true}}"),  // schema failure
        FakeChatApi::text_message(valid.dump()),
    });
    LlmTestSmith smith(api, {.model = "m"});

    GeneratedSuite generated = smith.generate(spec, "guidelines text", 0);
    CHECK(generated.suite.tests.size() > 0);
    CHECK(smith.repairs_used() == 1);
    REQUIRE(api->requests.size() == 2);
    // The repair turn carries the validation error back to the model.
    std::string repair = api->requests[1].dump();
    CHECK(repair.find("failed validation") != std::string::npos);
}

TEST_CASE("outputs that cite no spec clause are rejected") {
    Spec spec = load_mini_spec_v1();
    json uncited = minimal_suite_json(spec);
    uncited["suite"]["tests"][0]["citation"] = "";
    auto api = std::make_shared<FakeChatApi>(std::vector<json>{
        FakeChatApi::text_message(uncited.dump()),
        FakeChatApi::text_message(uncited.dump()),
        FakeChatApi::text_message(uncited.dump()),
    });
    LlmTestSmith smith(api, {.model = "m"});
    try {
        smith.generate(spec, "", 0);
        FAIL("expected SmithError");
    } catch (const SmithError& e) {
        CHECK(std::string(e.what()).find("cites no spec clause") != std::string::npos);
    }
}

TEST_CASE("each smith call is a fresh stateless invocation") {
    Spec spec = load_mini_spec_v1();
    json valid = minimal_suite_json(spec);
    auto api = std::make_shared<FakeChatApi>(std::vector<json>{
        FakeChatApi::text_message(valid.dump()),
        FakeChatApi::text_message(valid.dump()),
    });
    LlmTestSmith smith(api, {.model = "m"});
    smith.generate(spec, "", 0);
    smith.generate(spec, "", 0);
    REQUIRE(api->requests.size() == 2);
    // No carryover: both requests hold exactly one user message.
    for (const auto& request : api->requests) {
        CHECK(request.at("messages").size() == 1);
        CHECK(request.at("messages")[0].at("role") == "user");
    }
}

TEST_CASE("promptsmith adapter validates overrides against the spec") {
    Spec spec = load_mini_spec_v1();
    json bad{{"system_prompt", "p"},
             {"tool_description_overrides", json{{"ghost_tool", "text"}}}};
    json good{{"system_prompt", "better prompt"},
              {"tool_description_overrides", json{{"verify_identity", "call first"}}}};
    auto api = std::make_shared<FakeChatApi>(std::vector<json>{
        FakeChatApi::text_message(bad.dump()),
        FakeChatApi::text_message(good.dump()),
    });
    LlmPromptSmith smith(api, {.model = "m"});

    PromptEditRequest request;
    request.spec = &spec;
    request.current = render_seed_artifact(spec);
    PromptArtifact artifact = smith.edit(request);
    CHECK(artifact.system_prompt == "better prompt");
    CHECK(artifact.tool_description_overrides.at("verify_identity") == "call first");
    CHECK(artifact.artifact_version == request.current.artifact_version + 1);
    CHECK(api->requests.size() == 2);  // one repair round
}

TEST_CASE("mutationsmith adapter sees only the artifact and intent") {
    json mutant{{"system_prompt", "mutated"}, {"tool_description_overrides", json::object()}};
    auto api = std::make_shared<FakeChatApi>(
        std::vector<json>{FakeChatApi::text_message(mutant.dump())});
    LlmMutationSmith smith(api, {.model = "m"});

    MutationRequest request;
    request.compiled.system_prompt = "compiled";
    request.intent.intent_id = "SKIP_AUTH_GATE";
    request.intent.description = "skip it";
    PromptArtifact artifact = smith.mutate(request);
    CHECK(artifact.system_prompt == "mutated");

    std::string sent = api->requests[0].dump();
    CHECK(sent.find("SKIP_AUTH_GATE") != std::string::npos);
    CHECK(sent.find("assertions") == std::string::npos);
    CHECK(sent.find("visible") == std::string::npos);
}

TEST_CASE("json extraction tolerates code fences") {
    CHECK(extract_json_object("```json\n{\"a\": 1}\n```").at("a") == 1);
    CHECK(extract_json_object("noise {\"a\": {\"b\": 2}} trailing").at("a").at("b") == 2);
    CHECK_THROWS_AS(extract_json_object("no json here"), SmithError);
}

TEST_CASE("http backend carries artifact overrides into the tool definitions") {
    Spec spec = load_mini_spec_v1();
    PromptArtifact artifact = render_seed_artifact(spec);
    artifact.tool_description_overrides["verify_identity"] =
        "REQUIRED before any account-changing action.";

    json respond_call{
        {"role", "assistant"},
        {"tool_calls", json::array({json{{"id", "c1"},
                                         {"type", "function"},
                                         {"function",
                                          json{{"name", "respond"},
                                               {"arguments",
                                                json{{"decision", "answered"},
                                                     {"node_id", "n_smalltalk"},
                                                     {"evidence", json::array()},
                                                     {"user_message", "hi"}}
                                                    .dump()}}}}})}};
    auto api = std::make_shared<FakeChatApi>(std::vector<json>{respond_call});
    HttpBackend backend(api, "some-model");

    FixtureSet fs = load_demo_fixtures();
    Trace trace = run_conversation(artifact, {"Hello there"}, fs, backend, spec);
    REQUIRE(trace.turns.size() == 1);
    CHECK(trace.turns[0].has_respond());

    // Request-capture double: the outgoing request must carry the override
    // text in the verify_identity tool definition.
    REQUIRE(api->requests.size() == 1);
    bool override_seen = false;
    for (const auto& tool : api->requests[0].at("tools"))
        if (tool.at("function").at("name") == "verify_identity")
            override_seen = tool.at("function").at("description").get<std::string>().find(
                                "REQUIRED before") != std::string::npos;
    CHECK(override_seen);
}

TEST_CASE("http backend resolves tool calls through fixtures and loops") {
    Spec spec = load_mini_spec_v1();
    json get_order_call{
        {"role", "assistant"},
        {"tool_calls",
         json::array({json{{"id", "c1"},
                           {"type", "function"},
                           {"function", json{{"name", "get_order"},
                                             {"arguments", "{\"order_id\": \"ORD-1001\"}"}}}}})}};
    json respond_call{
        {"role", "assistant"},
        {"tool_calls", json::array({json{{"id", "c2"},
                                         {"type", "function"},
                                         {"function",
                                          json{{"name", "respond"},
                                               {"arguments",
                                                json{{"decision", "status_provided"},
                                                     {"node_id", "n_status"},
                                                     {"evidence", json::array()},
                                                     {"user_message", "shipped"}}
                                                    .dump()}}}}})}};
    auto api = std::make_shared<FakeChatApi>(std::vector<json>{get_order_call, respond_call});
    HttpBackend backend(api, "m");

    Trace trace = run_conversation(render_seed_artifact(spec), {"status please"},
                                   load_demo_fixtures(), backend, spec);
    REQUIRE(trace.turns[0].calls.size() == 1);
    CHECK(trace.turns[0].calls[0].tool == "get_order");
    CHECK(trace.turns[0].calls[0].payload.at("status") == "shipped");
    CHECK(trace.turns[0].breaches.empty());

    // The second request must feed the fixture payload back as a tool message.
    REQUIRE(api->requests.size() == 2);
    const json& followup = api->requests[1].at("messages");
    bool tool_result_seen = false;
    for (const auto& message : followup)
        if (message.value("role", "") == "tool" &&
            message.value("content", "").find("shipped") != std::string::npos)
            tool_result_seen = true;
    CHECK(tool_result_seen);
}

TEST_CASE("plain-text model output becomes a contract breach") {
    Spec spec = load_mini_spec_v1();
    auto api = std::make_shared<FakeChatApi>(
        std::vector<json>{FakeChatApi::text_message("I would rather chat.")});
    HttpBackend backend(api, "m");
    Trace trace = run_conversation(render_seed_artifact(spec), {"anything"},
                                   load_demo_fixtures(), backend, spec);
    REQUIRE(trace.turns.size() == 1);
    CHECK(!trace.turns[0].breaches.empty());
}

TEST_CASE("missing credentials refuse before any network activity") {
    unsetenv(kApiKeyEnv);
    CHECK_THROWS_AS(resolve_endpoint("http://localhost:1/v1", "m"), ConfigError);

    setenv(kApiKeyEnv, "test-key", 1);
    unsetenv(kApiUrlEnv);
    HttpEndpoint endpoint = resolve_endpoint("http://localhost:1/v1", "m");
    CHECK(endpoint.base_url == "http://localhost:1/v1");
    CHECK_THROWS_AS(resolve_endpoint("", "m"), ConfigError);  // no url anywhere
    unsetenv(kApiKeyEnv);
}

TEST_CASE("provider rate limiting surfaces as BackendError with retry metadata") {
    httplib::Server server;
    server.Post("/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
        res.status = 429;
        res.set_header("Retry-After", "7");
        res.set_content("{\"error\": \"slow down\"}", "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread serving([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpEndpoint endpoint;
    endpoint.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    endpoint.api_key = "k";
    endpoint.model = "m";
    HttpChatApi api(endpoint);
    try {
        api.complete(json{{"model", "m"}, {"messages", json::array()}});
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        std::string message = e.what();
        CHECK(message.find("429") != std::string::npos);
        CHECK(message.find("Retry-After: 7") != std::string::npos);
    }
    server.stop();
    serving.join();
}

}  // TEST_SUITE
