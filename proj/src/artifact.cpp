#include "tdad/artifact.hpp"

#include <algorithm>

#include "tdad/detail/obj_reader.hpp"
#include "tdad/errors.hpp"
#include "tdad/util.hpp"

namespace tdad {

using detail::ObjReader;

json PromptArtifact::to_json() const {
    return json{
        {"system_prompt", system_prompt},
        {"tool_description_overrides", tool_description_overrides},
        {"artifact_version", artifact_version},
        {"provenance",
         json{{"spec_id", provenance.spec_id},
              {"spec_version", provenance.spec_version},
              {"run_id", provenance.run_id},
              {"iterations", provenance.iterations},
              {"parent_hash", provenance.parent_hash}}},
    };
}

PromptArtifact PromptArtifact::from_json(const json& value) {
    ObjReader r(value, "artifact");
    PromptArtifact a;
    a.system_prompt = r.require_string("system_prompt");
    if (const json* ov = r.optional("tool_description_overrides")) {
        if (!ov->is_object())
            throw SchemaError("artifact: tool_description_overrides must be a mapping");
        for (auto it = ov->begin(); it != ov->end(); ++it) {
            if (!it.value().is_string())
                throw SchemaError("artifact: override for '" + it.key() + "' must be a string");
            a.tool_description_overrides[it.key()] = it.value().get<std::string>();
        }
    }
    if (const json* v = r.optional("artifact_version")) {
        if (!v->is_number_integer())
            throw SchemaError("artifact: artifact_version must be an integer");
        a.artifact_version = v->get<int>();
    }
    if (const json* prov = r.optional("provenance")) {
        ObjReader pr(*prov, "artifact.provenance");
        a.provenance.spec_id = pr.optional_string("spec_id");
        if (const json* sv = pr.optional("spec_version")) {
            if (!sv->is_number_integer())
                throw SchemaError("artifact.provenance: spec_version must be an integer");
            a.provenance.spec_version = sv->get<int>();
        }
        a.provenance.run_id = pr.optional_string("run_id");
        if (const json* it = pr.optional("iterations")) {
            if (!it->is_number_integer())
                throw SchemaError("artifact.provenance: iterations must be an integer");
            a.provenance.iterations = it->get<int>();
        }
        a.provenance.parent_hash = pr.optional_string("parent_hash");
        pr.finish();
    }
    r.finish();
    return a;
}

std::string artifact_hash(const PromptArtifact& artifact) {
    std::string material = artifact.system_prompt;
    for (const auto& [tool, text] : artifact.tool_description_overrides)
        material += "\x1f" + tool + "\x1e" + text;
    return hex16(fnv1a64(material));
}

std::vector<std::string> validate_artifact(const PromptArtifact& artifact, const Spec& spec) {
    std::vector<std::string> problems;
    if (artifact.system_prompt.empty()) problems.push_back("system_prompt is empty");
    auto tools = spec.tool_names();
    for (const auto& [tool, _] : artifact.tool_description_overrides)
        if (!tools.count(tool))
            problems.push_back("override references undeclared tool '" + tool + "'");
    std::sort(problems.begin(), problems.end());
    return problems;
}

}  // namespace tdad
