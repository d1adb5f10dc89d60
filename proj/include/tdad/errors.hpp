#pragma once

#include <stdexcept>
#include <string>

namespace tdad {

// Base for all pipeline errors. `kind()` is the stable error name surfaced
// by the CLI and carried through reports.
class TdadError : public std::runtime_error {
public:
    TdadError(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define TDAD_ERROR_TYPE(Name)                                           \
    class Name : public TdadError {                                     \
    public:                                                             \
        explicit Name(const std::string& m) : TdadError(#Name, m) {}    \
    }

// spec_model
TDAD_ERROR_TYPE(SyntaxError);
TDAD_ERROR_TYPE(SchemaError);
TDAD_ERROR_TYPE(IntegrityError);
TDAD_ERROR_TYPE(VersionError);

// test_model
TDAD_ERROR_TYPE(ModeError);
TDAD_ERROR_TYPE(UnknownTestError);
TDAD_ERROR_TYPE(EmptyInvariantSetError);

// fixture_engine
TDAD_ERROR_TYPE(NoFixtureError);
TDAD_ERROR_TYPE(UnknownToolError);

// agent_runtime
TDAD_ERROR_TYPE(BackendError);
TDAD_ERROR_TYPE(ConfigError);
TDAD_ERROR_TYPE(ScriptGapError);

// assertion_engine
TDAD_ERROR_TYPE(PredicateBindingError);

// compiler / smiths
TDAD_ERROR_TYPE(IsolationViolation);
TDAD_ERROR_TYPE(SmithError);
TDAD_ERROR_TYPE(GuidanceGapError);

// mutation_harness
TDAD_ERROR_TYPE(BaselineError);

// evolution
TDAD_ERROR_TYPE(LineageError);

// metrics_report
TDAD_ERROR_TYPE(UndefinedMetricError);

#undef TDAD_ERROR_TYPE

}  // namespace tdad
