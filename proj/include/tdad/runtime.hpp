#pragma once

#include <string>
#include <vector>

#include "tdad/backend.hpp"
#include "tdad/fixture.hpp"
#include "tdad/spec.hpp"
#include "tdad/trace.hpp"

namespace tdad {

struct RunOptions {
    // Per-turn tool-call cap. A misbehaving model that never responds would
    // otherwise hang the runner; hitting the cap is recorded as a breach.
    int tool_call_cap = 16;
};

// Execute a scripted conversation against an artifact. Tool calls are
// mediated through fixtures; respond payloads are schema-checked against the
// response contract. Contract breaches are recorded in the trace, never
// fatal: killing the run would hide later-turn evidence, and tests must be
// able to assert on breaches. Throws BackendError only for transport-level
// failures (the test is errored, not failed).
Trace run_conversation(const PromptArtifact& artifact,
                       const std::vector<std::string>& conversation,
                       const FixtureSet& fixtures, AgentBackend& backend, const Spec& spec,
                       const RunOptions& options = {});

}  // namespace tdad
